use super::*;
use crate::curvature::mean_curvature_normal;
use crate::scene::{capsule_drape, perturbed, plane_grid, wrinkled_plane, CapsuleParams, ClothPatch, WrinkleAxis};

fn rigid(p: Vec3) -> Vec3 {
    // rotation by 0.7 rad about (1, 2, 2)/3, then a translation
    let axis = Vec3::new(1.0, 2.0, 2.0) / 3.0;
    let (s, c) = (0.7f64.sin(), 0.7f64.cos());
    let r = p * c + axis.cross(p) * s + axis * (axis.dot(p) * (1.0 - c));
    r + Vec3::new(3.0, -1.5, 0.25)
}

fn grid() -> TriMesh {
    perturbed(&plane_grid(7, 6, 1.0).unwrap(), 0.15, 11)
}

#[test]
fn all_terms_vanish_at_identity() {
    let gt = grid();
    let body_mesh = plane_grid(9, 9, 1.0).unwrap().map_positions(|p| p - Vec3::new(1.0, 1.0, 5.0));
    let body = Body::new(body_mesh, 0.2).unwrap();
    let scene = Scene::new(&gt, &gt, Some(&body));
    let w = LossWeights::default();
    for recipe in Recipe::ALL {
        let r = compose(&scene, &w, recipe).unwrap();
        assert_eq!(r.total, 0.0, "{recipe:?}");
        assert!(r.terms.iter().all(|e| e.value == 0.0));
    }
    assert_eq!(l_vert(&gt, &gt).unwrap().value, 0.0);
    assert_eq!(l_norm(&gt, &gt).unwrap().value, 0.0);
    assert_eq!(l_bend(&gt, &gt).unwrap().value, 0.0);
    assert_eq!(l_mc(&gt, &gt, None).unwrap().value, 0.0);
    for k in RQ_SCALES {
        assert_eq!(l_rq(&gt, &gt, k).unwrap().value, 0.0);
    }
}

#[test]
fn vert_hand_values() {
    let tri = |o: [Vec3; 3]| TriMesh::new(o.to_vec(), alloc::vec![[0, 1, 2]]).unwrap();
    let gt = tri([Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]);
    let pred = tri([Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 2.0, 0.0), Vec3::new(0.0, 1.0, 2.0)]);
    assert_eq!(l_vert(&pred, &gt).unwrap().value, 3.0);

    let g = grid();
    let t = Vec3::new(0.3, -1.2, 0.7);
    let v = l_vert(&g.map_positions(|p| p + t), &g).unwrap().value;
    assert!((v - t.norm_squared()).abs() <= 1e-12 * t.norm_squared());

    let short = plane_grid(3, 3, 1.0).unwrap();
    assert!(matches!(l_vert(&short, &g), Err(Error::VertexCountMismatch { .. })));
}

fn pen_scene(depth: f64, gt_shift: f64) -> (TriMesh, TriMesh, TriMesh) {
    let body = plane_grid(5, 5, 1.0).unwrap();
    // offset plane sits at z = 0.2 (average edge length is above 1)
    let off = 0.2 * average_edge_length(&body).unwrap();
    let mut pred = plane_grid(5, 5, 1.0).unwrap().map_positions(|p| p + Vec3::new(0.0, 0.0, off + 0.3));
    let mut pos = pred.positions().to_vec();
    pos[12].z = off - depth;
    pred = pred.with_positions(pos.clone()).unwrap();
    let mut gt_pos = pos;
    gt_pos[12].x += gt_shift;
    let gt = pred.with_positions(gt_pos).unwrap();
    (pred, gt, body)
}

#[test]
fn pen_single_violation() {
    let w = LossWeights::default();
    let (pred, gt, body) = pen_scene(0.0, 0.0);
    let above = pred.map_positions(|p| p + Vec3::new(0.0, 0.0, 0.5));
    assert_eq!(l_pen(&above, &above, &body, &w).unwrap().value, 0.0);
    assert_eq!(l_pen(&pred, &gt, &body, &w).unwrap().value, 0.0);

    let delta = 0.37;
    let (pred, gt, body) = pen_scene(delta, 0.01);
    let r = l_pen(&pred, &gt, &body, &w).unwrap();
    assert!((r.value - delta / 25.0).abs() < 1e-12, "{}", r.value);
    assert_eq!(r.counters.active_penetrations, 1);

    let (pred, gt, body) = pen_scene(delta, 0.06);
    let r = l_pen(&pred, &gt, &body, &w).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(r.counters.gated_off, 1);
}

#[test]
fn pen_monotone_in_depth() {
    let w = LossWeights::default();
    let mut last = -1.0;
    for step in 0..10 {
        let (pred, gt, body) = pen_scene(0.05 * step as f64 - 0.1, 0.0);
        let v = l_pen(&pred, &gt, &body, &w).unwrap().value;
        assert!(v >= last);
        last = v;
    }
    assert!(last > 0.0);
}

#[test]
fn norm_flip_and_right_angle() {
    let g = grid();
    assert_eq!(l_norm(&g.flipped(), &g).unwrap().value, 4.0);
    let a = TriMesh::new(
        alloc::vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
        alloc::vec![[0, 1, 2]],
    )
    .unwrap();
    let b = a.with_positions(alloc::vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)]).unwrap();
    assert!((l_norm(&b, &a).unwrap().value - 1.0).abs() < 1e-15);
    // rotation invariance
    let p = perturbed(&g, 0.1, 3);
    let v0 = l_norm(&p, &g).unwrap().value;
    let v1 = l_norm(&p.map_positions(rigid), &g.map_positions(rigid)).unwrap().value;
    assert!((v0 - v1).abs() <= 1e-9 * v0.max(1e-12));
}

#[test]
fn norm_skips_zero_area_faces() {
    let g = plane_grid(3, 3, 1.0).unwrap();
    let mut pos = g.positions().to_vec();
    // collapse vertex 0 onto vertex 1
    pos[0] = pos[1];
    let p = g.with_positions(pos).unwrap();
    let r = l_norm(&p, &g).unwrap();
    assert_eq!(r.counters.skipped_faces, 1);
    assert!(r.value.is_finite());
    assert!(matches!(l_norm(&p, &plane_grid(4, 3, 1.0).unwrap()), Err(Error::FaceCountMismatch { .. })));
}

#[test]
fn bend_rigid_and_scaling() {
    let g = grid();
    let moved = g.map_positions(rigid);
    assert!(l_bend(&moved, &g).unwrap().value <= 1e-9);
    let pairs = g.topology().two_edge_pairs();
    let mean = pairs.iter().map(|&(i, k)| (g.position(i) - g.position(k)).norm()).sum::<f64>() / pairs.len() as f64;
    let v = l_bend(&g.map_positions(|p| p * 2.0), &g).unwrap().value;
    assert!((v - mean).abs() < 1e-12 * mean);

    let single = TriMesh::new(
        alloc::vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
        alloc::vec![[0, 1, 2]],
    )
    .unwrap();
    assert!(matches!(l_bend(&single, &single), Err(Error::EmptyTwoRing)));
}

#[test]
fn rq_rigid_invariant_and_amplitude_ladder() {
    let g = perturbed(&plane_grid(10, 10, 1.0).unwrap(), 0.1, 5);
    let p = perturbed(&g, 0.1, 6);
    for k in RQ_SCALES {
        let v0 = l_rq(&p, &g, k).unwrap().value;
        let v1 = l_rq(&p.map_positions(rigid), &g.map_positions(rigid), k).unwrap().value;
        assert!((v0 - v1).abs() <= 1e-9 * v0.max(1.0), "{k}: {v0} {v1}");
    }
    let flat = plane_grid(12, 12, 1.0).unwrap();
    for k in RQ_SCALES {
        let mut last = 0.0;
        for amp in [0.1, 0.2, 0.4] {
            let w = wrinkled_plane(12, 12, 1.0, amp, 4.0, WrinkleAxis::X).unwrap();
            let v = l_rq(&flat, &w, k).unwrap().value;
            assert!(v > last, "K={k} amp={amp}: {v} <= {last}");
            last = v;
        }
    }
}

fn sphere_cap(n: usize, edge: f64, radius: f64) -> (TriMesh, TriMesh) {
    let flat = plane_grid(n, n, edge).unwrap();
    let c = 0.5 * edge * (n - 1) as f64;
    let cap = flat.map_positions(|p| {
        let (x, y) = (p.x - c, p.y - c);
        Vec3::new(p.x, p.y, (radius * radius - x * x - y * y).sqrt())
    });
    (flat, cap)
}

#[test]
fn mc_plane_vs_sphere_cap() {
    let (flat, cap) = sphere_cap(15, 0.1, 2.0);
    let field = mean_curvature_normal(&cap);
    let topo = cap.topology();
    let interior: alloc::vec::Vec<usize> = (0..cap.vertex_count()).filter(|&v| !topo.is_boundary(v)).collect();
    let vectors = field.vectors().unwrap();
    let expected = interior.iter().map(|&v| vectors[v].norm_squared()).sum::<f64>() / interior.len() as f64;
    let v = l_mc(&flat, &cap, None).unwrap();
    assert!((v.value - expected).abs() < 1e-9 * expected, "{} vs {expected}", v.value);
    // smooth-sphere value 4/R² up to discretization
    assert!((expected - 1.0).abs() < 0.05, "{expected}");

    let dropped = l_mc(&flat, &cap, Some(0.0)).unwrap();
    assert_eq!(dropped.value, 0.0);
    assert_eq!(dropped.counters.mc_dropped, interior.len());
}

#[test]
fn compose_matches_weighted_terms() {
    let (body, cloth) = capsule_drape(
        CapsuleParams { radius: 1.0, length: 4.0, resolution: 8 },
        ClothPatch { nx: 8, ny: 6, edge: 0.3 },
        0.05,
    )
    .unwrap();
    let body = Body::new(body, 0.2).unwrap();
    let pred = perturbed(&cloth, 0.2, 9);
    let scene = Scene::new(&pred, &cloth, Some(&body));
    let w = LossWeights::default();

    let p = compose(&scene, &w, Recipe::P).unwrap();
    let vert = l_vert(&pred, &cloth).unwrap().value;
    let pen = l_pen(&pred, &cloth, body.mesh(), &w).unwrap().value;
    let norm = l_norm(&pred, &cloth).unwrap().value;
    let bend = l_bend(&pred, &cloth).unwrap().value;
    let expected = vert + 1.0 * pen + 0.3 * norm + 0.5 * bend;
    assert!((p.total - expected).abs() <= 1e-12 * expected);
    assert_eq!(p.value(Term::Vert), Some(vert));
    assert_eq!(p.value(Term::Pen), Some(pen));

    let rq = compose(&scene, &w, Recipe::RqTot).unwrap();
    let rqs: alloc::vec::Vec<f64> = RQ_SCALES.iter().map(|&k| l_rq(&pred, &cloth, k).unwrap().value).collect();
    let expected = 0.1 * p.total + 500.0 * rqs[0] + 50.0 * rqs[1] + 10.0 * rqs[2];
    assert!((rq.total - expected).abs() <= 1e-12 * expected);
    assert_eq!(rq.terms.iter().filter(|e| matches!(e.term, Term::Rq(_))).count(), 3);

    let mc = compose(&scene, &w, Recipe::McTot).unwrap();
    let expected = 0.1 * p.total + 10.0 * l_mc(&pred, &cloth, None).unwrap().value;
    assert!((mc.total - expected).abs() <= 1e-12 * expected);
}

#[test]
fn compose_total_under_random_weights() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let gt = grid();
    let pred = perturbed(&gt, 0.2, 8);
    let scene = Scene::new(&pred, &gt, None);
    for _ in 0..20 {
        let w = LossWeights {
            lambda_norm: rng.gen_range(0.0..10.0),
            lambda_bend: rng.gen_range(0.0..10.0),
            lambda_p: rng.gen_range(0.0..10.0),
            lambda_mc: rng.gen_range(0.0..10.0),
            lambda_rq: [rng.gen_range(0.0..1000.0), rng.gen_range(0.0..100.0), rng.gen_range(0.0..10.0)],
            ..LossWeights::default()
        };
        let r = compose(&scene, &w, Recipe::McRqTot).unwrap();
        let direct: f64 = r.terms.iter().map(|e| e.weight * e.value).sum();
        assert!((r.total - direct).abs() <= 1e-12 * direct);
    }
}

#[test]
fn missing_body_skips_pen() {
    let gt = grid();
    let r = compose(&Scene::new(&gt, &gt, None), &LossWeights::default(), Recipe::P).unwrap();
    assert!(r.value(Term::Pen).is_none());
}
