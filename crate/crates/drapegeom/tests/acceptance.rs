//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use drapegeom::config::Config;
use drapegeom_core::curvature::{self, RQ_SCALES};
use drapegeom_core::grad::{self, FdConfig, Objective};
use drapegeom_core::losses::{self, Body, LossWeights, Recipe, Scene, Term};
use drapegeom_core::mesh::{average_edge_length, mixed_area};
use drapegeom_core::metrics::{self, PrecisionKind};
use drapegeom_core::refine::{self, Optimizer, RefineConfig, ResolveConfig};
use drapegeom_core::scene::{self, CapsuleParams, ClothPatch, WrinkleAxis};
use drapegeom_core::spatial::{self, KnnTable, PointIndex};
use drapegeom_core::{TriMesh, Vec3};
use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("analytic curvature", analytic_curvature),
        ("rayleigh sandwich", rayleigh_sandwich),
        ("loss identities", loss_identities),
        ("gradient checks", gradient_checks),
        ("interpenetration resolution", interpenetration_resolution),
        ("fine-tuning trend", fine_tuning_trend),
        ("default constants", default_constants),
        ("metric identities", metric_identities),
        ("spatial oracle equivalence", spatial_oracle),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn within(start: Instant, limit: Duration) -> Result<f64, String> {
    let t = start.elapsed();
    ensure!(t < limit, "took {:.2} s, limit {:.0} s", t.as_secs_f64(), limit.as_secs_f64());
    Ok(t.as_secs_f64())
}

fn analytic_curvature() -> Outcome {
    let start = Instant::now();
    let sphere = scene::icosphere(4, 1.0).map_err(|e| e.to_string())?;
    ensure!(sphere.vertex_count() == 2562, "icosphere has {} vertices", sphere.vertex_count());
    let gc = curvature::gaussian_curvature(&sphere);
    let k = gc.scalars().unwrap();
    let mean_gc = k.iter().sum::<f64>() / k.len() as f64;
    ensure!((0.95..=1.05).contains(&mean_gc), "sphere mean Gaussian curvature {mean_gc}");
    let area = mixed_area(&sphere);
    let total: f64 = k.iter().zip(&area).map(|(k, a)| k * a).sum();
    ensure!(total >= 4.0 * PI * 0.99 && total <= 4.0 * PI * 1.01, "Gauss-Bonnet total {total}");

    let mc = curvature::mean_curvature_normal(&sphere);
    let vectors = mc.vectors().unwrap();
    let mean_mc = vectors.iter().map(|v| v.norm()).sum::<f64>() / vectors.len() as f64;
    ensure!((1.90..=2.10).contains(&mean_mc), "sphere mean |mean-curvature normal| {mean_mc}");
    let cos_limit = 2f64.to_radians().cos();
    let aligned = vectors
        .iter()
        .zip(sphere.positions())
        .filter(|(k, p)| {
            let (k, inward) = (k.to_array(), p.to_array().map(|c| -c));
            let dot: f64 = (0..3).map(|i| k[i] * inward[i]).sum();
            let norms = (0..3).map(|i| k[i] * k[i]).sum::<f64>().sqrt() * (0..3).map(|i| inward[i] * inward[i]).sum::<f64>().sqrt();
            norms > 0.0 && dot / norms >= cos_limit
        })
        .count();
    let aligned_frac = aligned as f64 / vectors.len() as f64;
    ensure!(aligned_frac >= 0.99, "only {:.2}% within 2 degrees of inward radial", 100.0 * aligned_frac);

    let tube = scene::cylinder(64, 21, 2.0, 4.0).map_err(|e| e.to_string())?;
    let interior: Vec<usize> = (0..tube.vertex_count()).filter(|&v| !tube.topology().is_boundary(v)).collect();
    let tmc = curvature::mean_curvature_normal(&tube);
    let tgc = curvature::gaussian_curvature(&tube);
    let n = interior.len() as f64;
    let tube_mc = interior.iter().map(|&v| tmc.vectors().unwrap()[v].norm()).sum::<f64>() / n;
    let tube_gc = interior.iter().map(|&v| tgc.scalars().unwrap()[v].abs()).sum::<f64>() / n;
    ensure!((tube_mc - 0.5).abs() <= 0.07 * 0.5, "cylinder mean |mean-curvature normal| {tube_mc}");
    ensure!(tube_gc < 0.02, "cylinder mean |Gaussian curvature| {tube_gc}");
    let secs = within(start, Duration::from_secs(2))?;
    Ok(format!(
        "sphere K {mean_gc:.4}, total/4pi {:.5}, |H| {mean_mc:.4}, aligned {:.2}%; cylinder |H| {tube_mc:.4}, |K| {tube_gc:.2e}; {secs:.2} s",
        total / (4.0 * PI),
        100.0 * aligned_frac
    ))
}

/// K nearest by exhaustive scan, ties to the lower index.
fn brute_knn(points: &[Vec3], q: Vec3, k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, p)| ((*p - q).norm_squared(), i)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter().map(|(d, i)| (i, d.sqrt())).collect()
}

/// Sorted eigenvalues of the neighborhood covariance, computed with nalgebra.
fn oracle_eigenvalues(points: &[Vec3], neighbors: &[usize]) -> [f64; 3] {
    let v: Vec<Vector3<f64>> = neighbors.iter().map(|&j| Vector3::from(points[j].to_array())).collect();
    let mean = v.iter().fold(Vector3::zeros(), |a, b| a + b) / v.len() as f64;
    let cov = v.iter().fold(Matrix3::zeros(), |a, p| a + (p - mean) * (p - mean).transpose()) / v.len() as f64;
    let mut e: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[1], e[2]]
}

fn rayleigh_sandwich() -> Outcome {
    let mut meshes: Vec<(String, TriMesh)> = vec![
        ("plane".into(), scene::plane_grid(12, 12, 1.0).unwrap()),
        ("icosphere".into(), scene::icosphere(3, 1.0).unwrap()),
        ("cylinder".into(), scene::cylinder(32, 12, 2.0, 4.0).unwrap()),
        ("wrinkled plane".into(), scene::wrinkled_plane(16, 16, 1.0, 0.3, 4.0, WrinkleAxis::X).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..50 {
        let n = rng.gen_range(6..=12);
        let grid = scene::plane_grid(n, n, 1.0).unwrap();
        meshes.push((format!("perturbed grid {i}"), scene::perturbed(&grid, rng.gen_range(0.05..0.4), rng.gen())));
    }
    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for (name, mesh) in &meshes {
        let pts = mesh.positions();
        for k in RQ_SCALES {
            let rq = curvature::rayleigh_curvature(mesh, k).map_err(|e| format!("{name}: {e}"))?;
            for v in 0..mesh.vertex_count() {
                if !rq.is_valid(v) {
                    continue;
                }
                let nbrs: Vec<usize> = brute_knn(pts, pts[v], k).into_iter().map(|(i, _)| i).collect();
                let [lo, _, hi] = oracle_eigenvalues(pts, &nbrs);
                let [rmin, rmax] = rq.pairs().unwrap()[v];
                let violation = (lo - 1e-9 - rmin).max(rmin - rmax).max(rmax - hi - 1e-9);
                worst = worst.max(violation);
                ensure!(violation <= 0.0, "{name}, K={k}, vertex {v}: {lo} <= {rmin} <= {rmax} <= {hi} fails");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} vertex neighborhoods over {} meshes, largest slack use {worst:.2e}", meshes.len()))
}

fn drape(gap: f64) -> (TriMesh, TriMesh) {
    scene::capsule_drape(
        CapsuleParams { radius: 5.0, length: 10.0, resolution: 8 },
        ClothPatch { nx: 7, ny: 7, edge: 1.0 },
        gap,
    )
    .unwrap()
}

fn random_rigid(rng: &mut ChaCha8Rng) -> impl Fn(Vec3) -> Vec3 {
    let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let rot = Rotation3::new(axis.normalize() * rng.gen_range(0.1..3.0));
    let shift = Vector3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    move |p: Vec3| {
        let q = rot * Vector3::from(p.to_array()) + shift;
        Vec3::new(q.x, q.y, q.z)
    }
}

fn loss_identities() -> Outcome {
    let weights = LossWeights::default();
    let (body_mesh, cloth) = drape(0.5);
    let body = Body::new(body_mesh, weights.body_offset_fraction).unwrap();
    let report = losses::compose(&Scene::new(&cloth, &cloth, Some(&body)), &weights, Recipe::McRqTot).map_err(|e| e.to_string())?;
    let names: Vec<String> = report.terms.iter().map(|e| e.term.name()).collect();
    ensure!(names == ["vert", "pen", "norm", "bend", "mc", "rq8", "rq16", "rq32"], "terms {names:?}");
    for e in &report.terms {
        ensure!(e.value == 0.0, "{} = {} at pred = gt", e.term, e.value);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_vert = 0f64;
    for _ in 0..20 {
        let t = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let moved = cloth.map_positions(|p| p + t);
        let v = losses::l_vert(&moved, &cloth).unwrap().value;
        let expected = t.x * t.x + t.y * t.y + t.z * t.z;
        let rel = (v - expected).abs() / expected;
        worst_vert = worst_vert.max(rel);
        ensure!(rel <= 1e-12, "translation {t:?}: L_vert {v} vs |t|^2 {expected}");
    }

    let mut worst_bend = 0f64;
    for i in 0..20 {
        let gt = scene::perturbed(&cloth, 0.2, 100 + i);
        let pred = scene::perturbed(&cloth, 0.2, 200 + i);
        let base = losses::l_bend(&pred, &gt).unwrap().value;
        let rigid = random_rigid(&mut rng);
        let moved = losses::l_bend(&pred.map_positions(&rigid), &gt).unwrap().value;
        let rel = (moved - base).abs() / base.abs().max(1e-300);
        worst_bend = worst_bend.max(rel);
        ensure!(rel <= 1e-9, "L_bend {base} becomes {moved} under a rigid motion");
    }

    let flip = losses::l_norm(&cloth.flipped(), &cloth).unwrap().value;
    ensure!(flip == 4.0, "L_norm under a global flip is {flip}");
    Ok(format!("all 8 terms exactly 0; L_vert rel. err {worst_vert:.1e}; L_bend rigid rel. change {worst_bend:.1e}; flip {flip}"))
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let weights = LossWeights::default();
    let cfg = FdConfig { h: 1e-6, trials: 30, seed: 4, ..FdConfig::default() };
    let objectives: Vec<Objective> = [Term::Vert, Term::Pen, Term::Norm, Term::Bend, Term::Mc]
        .into_iter()
        .chain(RQ_SCALES.map(Term::Rq))
        .map(Objective::Term)
        .chain(Recipe::ALL.map(Objective::Recipe))
        .collect();
    let mut parts = Vec::new();
    let mut worst = 0f64;
    for o in &objectives {
        let r = grad::finite_difference_check(*o, &weights, &cfg).map_err(|e| format!("{o:?}: {e}"))?;
        ensure!(r.value_mismatches == 0, "{o:?}: value and gradient paths disagree");
        ensure!(r.max_error <= 1e-5, "{o:?}: max error {:.3e} at {:?}", r.max_error, r.worst);
        worst = worst.max(r.max_error);
        let name = match o {
            Objective::Term(t) => t.name(),
            Objective::Recipe(r) => format!("recipe {}", r.name()),
        };
        parts.push(format!("{name} {:.1e}", r.max_error));
    }
    let secs = within(start, Duration::from_secs(60))?;
    Ok(format!("{} objectives x 30 scenes, worst {worst:.2e} ({}); {secs:.1} s", objectives.len(), parts.join(", ")))
}

/// A `5 × 5` cloth block copied from the cylindrical part of a capsule and
/// pushed `depth` below the offset body surface.
fn sunken_patch(depth: f64) -> (TriMesh, TriMesh) {
    let body = scene::capsule(CapsuleParams { radius: 5.0, length: 10.0, resolution: 8 }).unwrap();
    let b = Body::new(body.clone(), LossWeights::default().body_offset_fraction).unwrap();
    let ring = 32;
    // rings 10 to 14 lie on the cylinder
    let idx = |r: usize, i: usize| 1 + (10 + r) * ring + 6 + i;
    let pos = (0..25).map(|j| {
        let v = idx(j / 5, j % 5);
        b.offset_points()[v] - b.normals()[v] * depth
    });
    let mut tris = Vec::new();
    for r in 0..4 {
        for i in 0..4 {
            let a = r * 5 + i;
            tris.push([a, a + 1, a + 6]);
            tris.push([a, a + 6, a + 5]);
        }
    }
    (body, TriMesh::new(pos.collect(), tris).unwrap())
}

fn interpenetration_resolution() -> Outcome {
    let weights = LossWeights::default();
    let (body_mesh, patch) = sunken_patch(0.5);
    let body = Body::new(body_mesh.clone(), weights.body_offset_fraction).unwrap();
    let before = metrics::penetration_count(&patch, &body);
    ensure!(before.count == 25, "constructed patch has {} penetrating vertices", before.count);
    ensure!((before.max_depth() - 0.5).abs() < 1e-9, "constructed depth {}", before.max_depth());
    let cfg = ResolveConfig::default();
    ensure!(cfg.refine.steps == 300, "resolve budget is {} steps", cfg.refine.steps);
    let result = refine::resolve_penetration(&patch, &body_mesh, &cfg).map_err(|e| e.to_string())?;
    let after = metrics::penetration_count(&result.final_mesh, &body);
    ensure!(after.count == 0, "{} vertices still penetrate after {} steps", after.count, result.steps_taken);
    let counts: Vec<usize> = result.trace.iter().filter_map(|e| e.penetrations).collect();
    ensure!(counts.windows(2).all(|w| w[1] <= w[0]), "penetration count rises along the trace");
    let cleared_at = counts.iter().position(|c| *c == 0).unwrap_or(counts.len());

    let mut ladder = Vec::new();
    for k in 1..=10 {
        let (bm, p) = sunken_patch(0.05 * k as f64);
        ladder.push(losses::l_pen(&p, &p, &bm, &weights).unwrap().value);
    }
    ensure!(ladder[0] > 0.0 && ladder.windows(2).all(|w| w[1] > w[0]), "L_pen along the depth ladder: {ladder:?}");
    Ok(format!(
        "25 -> 0 penetrating vertices, count 0 from step {cleared_at}; L_pen rises {:.4} -> {:.4} over depths 0.05..0.5",
        ladder[0], ladder[9]
    ))
}

fn fine_tuning_trend() -> Outcome {
    let start = Instant::now();
    let n = 32;
    let init = scene::plane_grid(n, n, 1.0).unwrap();
    let target = scene::wrinkled_plane(n, n, 1.0, 0.3, 4.0, WrinkleAxis::X).unwrap();
    let edge = average_edge_length(&init).unwrap();
    let run = |recipe: Recipe| {
        let cfg = RefineConfig { recipe, steps: 1000, optimizer: Optimizer::ADAPTIVE, step_size: None, ..RefineConfig::default() };
        let r = refine::refine(&init, &target, None, &cfg).and_then(|r| r.into_result()).map_err(|e| format!("{recipe:?}: {e}"))?;
        let rq: f64 = RQ_SCALES.iter().map(|&k| losses::l_rq(&r.final_mesh, &target, k).unwrap().value).sum();
        let mc = losses::l_mc(&r.final_mesh, &target, None).unwrap().value;
        let dist = metrics::e_dist(&r.final_mesh, &target).unwrap();
        Ok::<_, String>((rq, mc, dist))
    };
    let (p_rq, p_mc, p_dist) = run(Recipe::P)?;
    let (rq_rq, _, rq_dist) = run(Recipe::RqTot)?;
    let (_, mc_mc, mc_dist) = run(Recipe::McTot)?;
    let secs = within(start, Duration::from_secs(300))?;
    let detail = format!(
        "average edge {edge:.4} cm; sum L_RQ: P {p_rq:.4e}, RQ_TOT {rq_rq:.4e} (ratio {:.3}, need <= 0.5); L_MC: P {p_mc:.4e}, MC_TOT {mc_mc:.4e} \
         (need strictly lower); e_dist P {p_dist:.2e}, RQ_TOT {rq_dist:.2e}, MC_TOT {mc_dist:.2e}; {secs:.1} s",
        rq_rq / p_rq
    );
    ensure!(rq_rq <= 0.5 * p_rq && mc_mc < p_mc, "{detail}");
    Ok(detail)
}

fn default_constants() -> Outcome {
    let c = Config::from_toml("", Path::new("defaults.toml")).map_err(|e| e.to_string())?;
    let golden = serde_json::json!({
        "weights": {
            "lambda_norm": 0.3, "lambda_pen": 1.0, "lambda_bend": 0.5, "lambda_p": 0.1, "lambda_mc": 10.0,
            "lambda_rq8": 500.0, "lambda_rq16": 50.0, "lambda_rq32": 10.0,
            "d_tol_cm": 0.05, "body_offset_fraction": 0.2, "mc_drop_threshold_per_cm2": null
        },
        "spatial": { "pooling_k": 15, "downsample_factor": 10, "average_pooling_k": 16 }
    });
    let resolved = c.to_json();
    for section in ["weights", "spatial"] {
        ensure!(resolved[section] == golden[section], "{section}: {} != {}", resolved[section], golden[section]);
    }
    ensure!(c.weights() == LossWeights::default(), "config weights differ from the library defaults");
    ensure!(spatial::DEFAULT_POOLING_K == 15 && spatial::DEFAULT_DOWNSAMPLE_FACTOR == 10, "spatial constants");
    let body_mesh = scene::capsule(CapsuleParams { radius: 3.0, length: 4.0, resolution: 6 }).unwrap();
    let l = average_edge_length(&body_mesh).unwrap();
    let body = Body::new(body_mesh, c.weights.body_offset_fraction).unwrap();
    ensure!((body.offset() - 0.2 * l).abs() <= 1e-15 * l, "body offset {} vs 0.2 x {l}", body.offset());
    let rc = c.refine_config();
    ensure!(rc.optimizer == Optimizer::ADAPTIVE && rc.step_size.is_none(), "default optimizer {:?}", rc.optimizer);
    ensure!(refine::DEFAULT_RELATIVE_STEP == 0.001, "default relative step {}", refine::DEFAULT_RELATIVE_STEP);
    Ok("weights, gate, body offset, pooling and downsampling defaults match the golden values".into())
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = scene::wrinkled_plane(9, 9, 1.0, 0.3, 4.0, WrinkleAxis::Y).unwrap();
    let mut dir = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    dir = dir / dir.norm();
    let d = metrics::e_dist(&g.map_positions(|p| p + dir), &g).unwrap();
    ensure!((d - 1.0).abs() < 5e-5, "e_dist of a 1 cm translation is {d}");
    let flip = metrics::e_norm(&g.flipped(), &g).unwrap();
    ensure!((flip - 180.0).abs() < 5e-4, "e_norm of a global flip is {flip}");

    let thresholds = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, f64::INFINITY];
    let mut curves = 0;
    for i in 0..20 {
        let pred = scene::perturbed(&g, rng.gen_range(0.05..0.5), 300 + i);
        for kind in [PrecisionKind::Distance, PrecisionKind::Angle] {
            let t: Vec<f64> = match kind {
                PrecisionKind::Distance => thresholds.to_vec(),
                PrecisionKind::Angle => thresholds.iter().map(|t| t * 60.0).collect(),
            };
            let errors: Vec<f64> = match kind {
                PrecisionKind::Distance => pred.positions().iter().zip(g.positions()).map(|(a, b)| (*a - *b).norm()).collect(),
                PrecisionKind::Angle => metrics::face_angles(&pred, &g).unwrap().into_iter().flatten().collect(),
            };
            let curve = metrics::precision_curve(&pred, &g, &t, kind).unwrap();
            for (k, (thr, frac)) in curve.points.iter().enumerate() {
                let brute = errors.iter().filter(|e| *e < thr).count() as f64 / errors.len() as f64;
                ensure!(*thr == t[k] && *frac == brute, "{kind:?} threshold {thr}: {frac} vs brute force {brute}");
            }
            curves += 1;
        }
    }
    let step = metrics::precision_curve(&g.map_positions(|p| p + dir), &g, &[0.5, 1.5], PrecisionKind::Distance).unwrap();
    ensure!(step.points.iter().map(|p| p.1).collect::<Vec<_>>() == [0.0, 1.0], "translation step curve {:?}", step.points);

    let mut tightest = f64::INFINITY;
    for i in 0..100 {
        let n = rng.gen_range(3..10);
        let gt = scene::perturbed(&scene::plane_grid(n, n, 1.0).unwrap(), 0.3, 500 + i);
        let pred = scene::perturbed(&gt, rng.gen_range(0.01..1.0), 700 + i);
        let e = metrics::e_dist(&pred, &gt).unwrap();
        let v = losses::l_vert(&pred, &gt).unwrap().value;
        ensure!(e * e <= v, "scene {i}: e_dist^2 {} > L_vert {v}", e * e);
        tightest = tightest.min(v - e * e);
    }
    Ok(format!("translation {d:.6} cm, flip {flip:.4} deg, {curves} curves match brute force, e_dist^2 <= L_vert on 100 scenes (min gap {tightest:.2e})"))
}

fn spatial_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut queries = 0usize;
    for case in 0..100 {
        let n = rng.gen_range(1..=500);
        // integer lattices force distance ties
        let lattice = case % 2 == 0;
        let point = |rng: &mut ChaCha8Rng| {
            if lattice {
                Vec3::new(rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64, rng.gen_range(0..3) as f64)
            } else {
                Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0))
            }
        };
        let pts: Vec<Vec3> = (0..n).map(|_| point(&mut rng)).collect();
        let index = PointIndex::new(pts.clone()).map_err(|e| e.to_string())?;
        let k = rng.gen_range(1..=n.min(40));
        let table = KnnTable::build(&pts, k).map_err(|e| e.to_string())?;
        for v in 0..n {
            let expect: Vec<usize> = brute_knn(&pts, pts[v], k).into_iter().map(|(i, _)| i).collect();
            ensure!(table.of(v) == expect.as_slice(), "case {case}: table row {v} {:?} vs {expect:?}", table.of(v));
        }
        let garment: Vec<Vec3> = (0..rng.gen_range(1..=500)).map(|_| point(&mut rng)).collect();
        for q in &garment {
            let got: Vec<(usize, f64)> = index.knn(*q, k).unwrap().iter().map(|n| (n.index, n.distance)).collect();
            let expect = brute_knn(&pts, *q, k);
            ensure!(got == expect, "case {case}: query {q:?}: {got:?} vs {expect:?}");
            queries += 1;
        }
        let corr = spatial::correspondences(&garment, &index);
        for (g, q) in garment.iter().enumerate() {
            let (i, d) = brute_knn(&pts, *q, 1)[0];
            ensure!(corr.pairs[g] == (g, i) && corr.distances[g] == d, "case {case}: correspondence of {g}");
        }
    }
    Ok(format!("100 instances, {queries} KNN queries and all correspondences identical to brute force"))
}
