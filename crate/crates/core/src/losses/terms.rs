//! Loss-term kernels. Each kernel computes the value and, on request, the
//! gradient with respect to the predicted positions and a record of every
//! discrete branch it took. The value never depends on what else was asked
//! for, so value-only and value+gradient calls agree bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use super::{Body, Counters};
use crate::curvature::{rayleigh_extremes, rayleigh_skip_threshold, CurvatureField, MeanCurvatureParts};
use crate::math::{self, cot_with_grad, CompensatedSum, Vec3};
use crate::mesh::TriMesh;
use crate::spatial::{CorrespondenceSet, KnnTable};

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Want {
    pub gradient: bool,
    pub signature: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct KernelOutput {
    pub value: f64,
    pub counters: Counters,
    pub gradient: Option<Vec<Vec3>>,
    pub signature: Vec<i64>,
}

impl KernelOutput {
    fn new(n: usize, want: Want) -> Self {
        KernelOutput {
            value: 0.0,
            counters: Counters::default(),
            gradient: if want.gradient { Some(vec![Vec3::ZERO; n]) } else { None },
            signature: Vec::new(),
        }
    }
}

pub(crate) fn vert(pred: &TriMesh, gt: &TriMesh, want: Want) -> KernelOutput {
    let n = pred.vertex_count();
    let mut out = KernelOutput::new(n, want);
    let mut acc = CompensatedSum::new();
    for (p, g) in pred.positions().iter().zip(gt.positions()) {
        acc.add((*p - *g).norm_squared());
    }
    out.value = acc.value() / n as f64;
    if let Some(grad) = out.gradient.as_mut() {
        for (i, (p, g)) in pred.positions().iter().zip(gt.positions()).enumerate() {
            grad[i] = (*p - *g) * (2.0 / n as f64);
        }
    }
    out
}

/// Signed violation `−nᵀ(x − b')` of garment vertex `j` against its matched
/// offset body point; positive means inside.
pub(crate) fn violation(body: &Body, correspondences: &CorrespondenceSet, j: usize, x: Vec3) -> f64 {
    let b = correspondences.body_index(j);
    -body.normals()[b].dot(x - body.offset_points()[b])
}

pub(crate) fn pen(
    pred: &TriMesh,
    body: &Body,
    correspondences: &CorrespondenceSet,
    gates: &[bool],
    want: Want,
) -> KernelOutput {
    let n = pred.vertex_count();
    let mut out = KernelOutput::new(n, want);
    let mut acc = CompensatedSum::new();
    for j in 0..n {
        let v = violation(body, correspondences, j, pred.position(j));
        let active = gates[j] && v > 0.0;
        if want.signature {
            out.signature.push(active as i64);
        }
        if !gates[j] {
            out.counters.gated_off += 1;
        }
        if active {
            acc.add(v);
            out.counters.active_penetrations += 1;
            if let Some(grad) = out.gradient.as_mut() {
                grad[j] = -body.normals()[correspondences.body_index(j)] / n as f64;
            }
        }
    }
    out.value = acc.value() / n as f64;
    out
}

/// Adds the gradient of `u · (e1 × e2)` with `e1 = p1 − p0`, `e2 = p2 − p0`.
fn backprop_cross(grad: &mut [Vec3], tri: [usize; 3], p: [Vec3; 3], u: Vec3) {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let g1 = e2.cross(u);
    let g2 = u.cross(e1);
    grad[tri[1]] += g1;
    grad[tri[2]] += g2;
    grad[tri[0]] -= g1 + g2;
}

pub(crate) fn norm(pred: &TriMesh, gt: &TriMesh, want: Want) -> KernelOutput {
    let mut out = KernelOutput::new(pred.vertex_count(), want);
    let pred_eps = pred.zero_area_threshold();
    let gt_eps = gt.zero_area_threshold();
    // (face, predicted cross, its norm, gt normal)
    let mut used = Vec::with_capacity(pred.face_count());
    for f in 0..pred.face_count() {
        let cp = pred.face_cross(f);
        let cg = gt.face_cross(f);
        let (sp, sg) = (cp.norm(), cg.norm());
        let valid = sp > pred_eps && sp > 0.0 && sg > gt_eps && sg > 0.0;
        if want.signature {
            out.signature.push(valid as i64);
        }
        if valid {
            used.push((f, cp, sp, cg / sg));
        } else {
            out.counters.skipped_faces += 1;
        }
    }
    if used.is_empty() {
        return out;
    }
    let count = used.len() as f64;
    let mut acc = CompensatedSum::new();
    for &(f, cp, _, _) in &used {
        let cg = gt.face_cross(f);
        // fl(sqrt(fl(s²))) = s keeps identical and antipodal normals exact
        let cos = cp.dot(cg) / math::sqrt(cp.norm_squared() * cg.norm_squared());
        let r = 1.0 - cos.clamp(-1.0, 1.0);
        acc.add(r * r);
    }
    out.value = acc.value() / count;
    if let Some(grad) = out.gradient.as_mut() {
        for &(f, cp, sp, ng) in &used {
            let np = cp / sp;
            let w = ng * (-2.0 * (1.0 - ng.dot(np)) / count);
            let u = (w - np * np.dot(w)) / sp;
            backprop_cross(grad, pred.triangles()[f], pred.corners(f), u);
        }
    }
    out
}

pub(crate) fn bend(pred: &TriMesh, gt: &TriMesh, want: Want) -> KernelOutput {
    let pairs = pred.topology().two_edge_pairs();
    let mut out = KernelOutput::new(pred.vertex_count(), want);
    if pairs.is_empty() {
        return out;
    }
    let count = pairs.len() as f64;
    let mut acc = CompensatedSum::new();
    for &(i, k) in pairs {
        let dp = (pred.position(i) - pred.position(k)).norm();
        let dg = (gt.position(i) - gt.position(k)).norm();
        let diff = dp - dg;
        acc.add(math::abs(diff));
        let sign = if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            -1.0
        } else {
            0.0
        };
        if want.signature {
            out.signature.push(sign as i64);
        }
        if let Some(grad) = out.gradient.as_mut() {
            if dp > 0.0 && sign != 0.0 {
                let u = (pred.position(i) - pred.position(k)) * (sign / (count * dp));
                grad[i] += u;
                grad[k] -= u;
            } else if dp == 0.0 {
                out.counters.degenerate += 1;
            }
        }
    }
    out.value = acc.value() / count;
    out
}

/// Adds `c · ∂q/∂x` for `q = gᵀΣg / gᵀg`, `g = x_slot − mean`, `Σ` the
/// covariance of `neighbors` about their mean.
fn backprop_rayleigh(grad: &mut [Vec3], positions: &[Vec3], neighbors: &[usize], slot: usize, c: f64) {
    let (cov, mean) = crate::curvature::covariance_of(positions, neighbors);
    let k = neighbors.len() as f64;
    let g = positions[neighbors[slot]] - mean;
    let gg = g.norm_squared();
    let q = cov.quadratic_form(g) / gg;
    let a = (cov.mul_vec(g) - g * q) * (2.0 / gg);
    grad[neighbors[slot]] += a * c;
    let shared = a * (c / k);
    for &j in neighbors {
        let d = positions[j] - mean;
        grad[j] += g * (c * 2.0 * g.dot(d) / (k * gg)) - shared;
    }
}

pub(crate) fn rq(pred: &TriMesh, table: &KnnTable, gt_field: &CurvatureField, want: Want) -> KernelOutput {
    let n = pred.vertex_count();
    let mut out = KernelOutput::new(n, want);
    let skip = rayleigh_skip_threshold(pred);
    let gt_pairs = gt_field.pairs().expect("ground-truth field holds Rayleigh pairs");
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let r = rayleigh_extremes(pred.positions(), table.of(i), skip);
        if want.signature {
            out.signature.push(r.argmin.map_or(-1, |s| s as i64));
            out.signature.push(r.argmax.map_or(-1, |s| s as i64));
            out.signature.push(r.used as i64);
        }
        if r.argmin.is_none() || !gt_field.is_valid(i) {
            out.counters.degenerate += 1;
            continue;
        }
        terms.push((i, r, gt_pairs[i]));
    }
    if terms.is_empty() {
        return out;
    }
    let count = terms.len() as f64;
    let mut acc = CompensatedSum::new();
    for (_, r, g) in &terms {
        let a = r.min - g[0];
        let b = r.max - g[1];
        acc.add(a * a + b * b);
    }
    out.value = acc.value() / count;
    if let Some(grad) = out.gradient.as_mut() {
        for (i, r, g) in &terms {
            let nbrs = table.of(*i);
            let c_min = 2.0 * (r.min - g[0]) / count;
            let c_max = 2.0 * (r.max - g[1]) / count;
            if c_min != 0.0 {
                backprop_rayleigh(grad, pred.positions(), nbrs, r.argmin.unwrap(), c_min);
            }
            if c_max != 0.0 {
                backprop_rayleigh(grad, pred.positions(), nbrs, r.argmax.unwrap(), c_max);
            }
        }
    }
    out
}

/// Adds `Σ_c abar[c] · ∂A_c/∂p` for the mixed areas of one triangle.
fn backprop_mixed_areas(grad: &mut [Vec3], tri: [usize; 3], p: [Vec3; 3], abar: [f64; 3]) {
    let cross = (p[1] - p[0]).cross(p[2] - p[0]);
    let twice_area = cross.norm();
    if twice_area == 0.0 {
        return;
    }
    let mut dots = [0.0; 3];
    for c in 0..3 {
        dots[c] = (p[(c + 1) % 3] - p[c]).dot(p[(c + 2) % 3] - p[c]);
    }
    if let Some(obtuse) = (0..3).find(|&c| dots[c] < 0.0) {
        let mut w = 0.0;
        for c in 0..3 {
            w += abar[c] * if c == obtuse { 0.5 } else { 0.25 };
        }
        // d(area) = (ĉ / 2) · d(cross)
        backprop_cross(grad, tri, p, cross * (0.5 * w / twice_area));
        return;
    }
    for c in 0..3 {
        if abar[c] == 0.0 {
            continue;
        }
        let j = (c + 1) % 3;
        let k = (c + 2) % 3;
        let to_j = p[j] - p[c];
        let to_k = p[k] - p[c];
        let scale = abar[c] / 8.0;
        let (cot_k, dk_u, dk_v) = cot_with_grad(p[(k + 1) % 3] - p[k], p[(k + 2) % 3] - p[k]);
        let (cot_j, dj_u, dj_v) = cot_with_grad(p[(j + 1) % 3] - p[j], p[(j + 2) % 3] - p[j]);
        // |to_j|² cot_k + |to_k|² cot_j
        grad[tri[j]] += to_j * (2.0 * cot_k * scale);
        grad[tri[c]] -= to_j * (2.0 * cot_k * scale);
        grad[tri[k]] += to_k * (2.0 * cot_j * scale);
        grad[tri[c]] -= to_k * (2.0 * cot_j * scale);
        add_cot_grad(grad, tri, k, dk_u, dk_v, to_j.norm_squared() * scale);
        add_cot_grad(grad, tri, j, dj_u, dj_v, to_k.norm_squared() * scale);
    }
}

/// Distributes `w · ∂cot/∂(u, v)` for the corner `corner`, where
/// `u = p[corner+1] − p[corner]` and `v = p[corner+2] − p[corner]`.
fn add_cot_grad(grad: &mut [Vec3], tri: [usize; 3], corner: usize, du: Vec3, dv: Vec3, w: f64) {
    grad[tri[(corner + 1) % 3]] += du * w;
    grad[tri[(corner + 2) % 3]] += dv * w;
    grad[tri[corner]] -= (du + dv) * w;
}

fn mixed_area_branch(p: [Vec3; 3]) -> i64 {
    let cross = (p[1] - p[0]).cross(p[2] - p[0]);
    if cross.norm() == 0.0 {
        return 4;
    }
    (0..3)
        .find(|&c| (p[(c + 1) % 3] - p[c]).dot(p[(c + 2) % 3] - p[c]) < 0.0)
        .map_or(3, |c| c as i64)
}

pub(crate) fn mc(pred: &TriMesh, gt: &TriMesh, threshold: Option<f64>, want: Want) -> KernelOutput {
    let n = pred.vertex_count();
    let mut out = KernelOutput::new(n, want);
    let pp = MeanCurvatureParts::compute(pred);
    let gp = MeanCurvatureParts::compute(gt);
    out.counters.clamp_events = pp.clamp_events;
    let topo = pred.topology();
    // (vertex, predicted κ, gt κ, kept)
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let valid = !topo.is_boundary(i) && pp.area[i] > 0.0 && gp.area[i] > 0.0;
        if !valid {
            if want.signature {
                out.signature.push(-1);
            }
            continue;
        }
        let kp = pp.laplacian[i] / (2.0 * pp.area[i]);
        let kg = gp.laplacian[i] / (2.0 * gp.area[i]);
        let term = (kp - kg).norm_squared();
        let kept = match threshold {
            Some(t) => !(term > t),
            None => true,
        };
        if !kept {
            out.counters.mc_dropped += 1;
        }
        if want.signature {
            out.signature.push(kept as i64);
        }
        terms.push((i, kp, kg, kept));
    }
    if want.signature {
        for f in 0..pred.face_count() {
            out.signature.push(mixed_area_branch(pred.corners(f)));
            for c in 0..3 {
                out.signature.push(pp.clamped[f][c] as i64);
            }
        }
    }
    if terms.is_empty() {
        return out;
    }
    let count = terms.len() as f64;
    let mut acc = CompensatedSum::new();
    for (_, kp, kg, kept) in &terms {
        if *kept {
            acc.add((*kp - *kg).norm_squared());
        }
    }
    out.value = acc.value() / count;

    if let Some(grad) = out.gradient.as_mut() {
        let mut s_bar = vec![Vec3::ZERO; n];
        let mut a_bar = vec![0.0; n];
        for &(i, kp, kg, kept) in &terms {
            if !kept {
                continue;
            }
            let r = (kp - kg) * (2.0 / count);
            let area = pp.area[i];
            s_bar[i] = r / (2.0 * area);
            a_bar[i] = -r.dot(pp.laplacian[i]) / (2.0 * area * area);
        }
        for (f, tri) in pred.triangles().iter().enumerate() {
            let p = pred.corners(f);
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let c = pp.cot[f][k];
                let d = p[(k + 2) % 3] - p[(k + 1) % 3];
                // S_a += c·d, S_b −= c·d
                let sd = s_bar[a] - s_bar[b];
                grad[b] += sd * c;
                grad[a] -= sd * c;
                let c_bar = sd.dot(d);
                if c_bar != 0.0 && !pp.clamped[f][k] {
                    let (_, du, dv) = cot_with_grad(p[(k + 1) % 3] - p[k], p[(k + 2) % 3] - p[k]);
                    add_cot_grad(grad, *tri, k, du, dv, c_bar);
                }
            }
            let abar = [a_bar[tri[0]], a_bar[tri[1]], a_bar[tri[2]]];
            if abar != [0.0; 3] {
                backprop_mixed_areas(grad, *tri, p, abar);
            }
        }
    }
    out
}
