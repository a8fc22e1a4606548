//! Per-vertex curvature fields: angle-deficit Gaussian curvature, the
//! cotangent mean-curvature normal, the uniform Laplacian, covariance
//! eigenvalues, and Rayleigh-quotient extremes over K-nearest neighborhoods.
//!
//! Vertices where an operator is undefined are flagged rather than given NaN:
//! boundary vertices for the one-ring operators, zero mixed area, isolated
//! vertices, and Rayleigh neighborhoods with no usable direction.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::symmetric_eigenvalues;
use crate::error::Result;
use crate::math::{self, CompensatedVec3, Mat3, Vec3};
use crate::mesh::{self, average_edge_length, NeighborhoodTables, TriMesh};
use crate::spatial::KnnTable;

/// Cotangent weights are clamped to this magnitude.
pub const COT_CLAMP: f64 = 1e4;
/// Centered neighbors with `gᵀg ≤ RQ_SKIP_FACTOR · ℓ²` are skipped in the
/// Rayleigh scan (ℓ the average edge length).
pub const RQ_SKIP_FACTOR: f64 = 1e-12;
/// Neighborhood sizes of the multi-scale Rayleigh loss.
pub const RQ_SCALES: [usize; 3] = [8, 16, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureKind {
    Gaussian,
    MeanNormal,
    UniformLaplacian,
    Eigen,
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexStatus {
    Ok,
    Boundary,
    ZeroArea,
    Isolated,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    /// Gaussian curvature, 1/cm².
    Scalar(Vec<f64>),
    /// Mean-curvature normal (1/cm) or uniform Laplacian (cm).
    Vector(Vec<Vec3>),
    /// `(RQ_min, RQ_max)`, cm².
    Pair(Vec<[f64; 2]>),
    /// `(σ_min, σ_mid, σ_max)`, cm².
    Triple(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub kind: CurvatureKind,
    pub values: FieldValues,
    pub status: Vec<VertexStatus>,
    /// Neighborhood size for the eigen and Rayleigh kinds.
    pub k: Option<usize>,
    pub clamp_events: usize,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }

    pub fn is_valid(&self, v: usize) -> bool {
        self.status[v] == VertexStatus::Ok
    }

    pub fn valid_count(&self) -> usize {
        self.status.iter().filter(|s| **s == VertexStatus::Ok).count()
    }

    /// One scalar per vertex for display and summaries: the Gaussian value,
    /// the vector norm, `RQ_min`, or `σ_min`.
    pub fn magnitude(&self, v: usize) -> f64 {
        match &self.values {
            FieldValues::Scalar(s) => s[v],
            FieldValues::Vector(s) => s[v].norm(),
            FieldValues::Pair(s) => s[v][0],
            FieldValues::Triple(s) => s[v][0],
        }
    }

    /// Mean of [`CurvatureField::magnitude`] over valid vertices.
    pub fn mean_magnitude(&self) -> Option<f64> {
        let n = self.valid_count();
        if n == 0 {
            return None;
        }
        let total = math::sum((0..self.len()).filter(|&v| self.is_valid(v)).map(|v| self.magnitude(v)));
        Some(total / n as f64)
    }

    pub fn scalars(&self) -> Option<&[f64]> {
        match &self.values {
            FieldValues::Scalar(s) => Some(s),
            _ => None,
        }
    }

    pub fn vectors(&self) -> Option<&[Vec3]> {
        match &self.values {
            FieldValues::Vector(s) => Some(s),
            _ => None,
        }
    }

    pub fn pairs(&self) -> Option<&[[f64; 2]]> {
        match &self.values {
            FieldValues::Pair(s) => Some(s),
            _ => None,
        }
    }

    pub fn triples(&self) -> Option<&[[f64; 3]]> {
        match &self.values {
            FieldValues::Triple(s) => Some(s),
            _ => None,
        }
    }
}

fn one_ring_status(mesh: &TriMesh, area: &[f64], v: usize) -> VertexStatus {
    let topo = mesh.topology();
    if topo.vertex_faces(v).is_empty() {
        VertexStatus::Isolated
    } else if topo.is_boundary(v) {
        VertexStatus::Boundary
    } else if !(area[v] > 0.0) {
        VertexStatus::ZeroArea
    } else {
        VertexStatus::Ok
    }
}

/// `κ_GC = (2π − Σθ) / A_mixed`.
pub fn gaussian_curvature(mesh: &TriMesh) -> CurvatureField {
    let tables = NeighborhoodTables::build(mesh);
    let area = mesh::mixed_area(mesh);
    let mut values = vec![0.0; mesh.vertex_count()];
    let mut status = Vec::with_capacity(mesh.vertex_count());
    for v in 0..mesh.vertex_count() {
        let s = one_ring_status(mesh, &area, v);
        if s == VertexStatus::Ok {
            values[v] = mesh::angle_deficit(&tables, v) / area[v];
        }
        status.push(s);
    }
    CurvatureField { kind: CurvatureKind::Gaussian, values: FieldValues::Scalar(values), status, k: None, clamp_events: 0 }
}

/// Clamps a cotangent to `±COT_CLAMP`; NaN becomes 0. Returns whether the
/// value was changed.
pub(crate) fn clamp_cot(cot: f64) -> (f64, bool) {
    if cot.is_nan() {
        (0.0, true)
    } else if cot > COT_CLAMP {
        (COT_CLAMP, true)
    } else if cot < -COT_CLAMP {
        (-COT_CLAMP, true)
    } else {
        (cot, false)
    }
}

/// Intermediate quantities of the cotangent Laplacian, shared with the loss
/// and gradient code.
#[derive(Debug, Clone)]
pub(crate) struct MeanCurvatureParts {
    /// `Σ_j (cot α_ij + cot β_ij)(x_j − x_i)`.
    pub laplacian: Vec<Vec3>,
    pub area: Vec<f64>,
    /// Per-face corner cotangents after clamping, and whether each was clamped.
    pub cot: Vec<[f64; 3]>,
    pub clamped: Vec<[bool; 3]>,
    pub clamp_events: usize,
}

impl MeanCurvatureParts {
    pub fn compute(mesh: &TriMesh) -> MeanCurvatureParts {
        let n = mesh.vertex_count();
        let mut acc = vec![CompensatedVec3::default(); n];
        let mut cot = Vec::with_capacity(mesh.face_count());
        let mut clamped = Vec::with_capacity(mesh.face_count());
        let mut clamp_events = 0;
        for (f, tri) in mesh.triangles().iter().enumerate() {
            let p = mesh.corners(f);
            let mut c = [0.0; 3];
            let mut cl = [false; 3];
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let (value, hit) = clamp_cot(u.dot(v) / u.cross(v).norm());
                c[k] = value;
                cl[k] = hit;
                if hit {
                    clamp_events += 1;
                }
            }
            // the angle at corner k is opposite the edge (k+1, k+2)
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let d = mesh.position(b) - mesh.position(a);
                acc[a].add(d * c[k]);
                acc[b].add(-d * c[k]);
            }
            cot.push(c);
            clamped.push(cl);
        }
        MeanCurvatureParts {
            laplacian: acc.iter().map(|a| a.value()).collect(),
            area: mesh::mixed_area(mesh),
            cot,
            clamped,
            clamp_events,
        }
    }
}

/// `κ_MC = (1 / 2A_mixed) Σ_j (cot α_ij + cot β_ij)(x_j − x_i)`; norm `2H`,
/// pointing towards the concave side.
pub fn mean_curvature_normal(mesh: &TriMesh) -> CurvatureField {
    let parts = MeanCurvatureParts::compute(mesh);
    let mut values = vec![Vec3::ZERO; mesh.vertex_count()];
    let mut status = Vec::with_capacity(mesh.vertex_count());
    for v in 0..mesh.vertex_count() {
        let s = one_ring_status(mesh, &parts.area, v);
        if s == VertexStatus::Ok {
            values[v] = parts.laplacian[v] / (2.0 * parts.area[v]);
        }
        status.push(s);
    }
    CurvatureField {
        kind: CurvatureKind::MeanNormal,
        values: FieldValues::Vector(values),
        status,
        k: None,
        clamp_events: parts.clamp_events,
    }
}

/// `κ_UMC = (1/|N_i|) Σ_j (x_j − x_i)`.
pub fn uniform_laplacian_curvature(mesh: &TriMesh) -> CurvatureField {
    let topo = mesh.topology();
    let mut values = vec![Vec3::ZERO; mesh.vertex_count()];
    let mut status = vec![VertexStatus::Ok; mesh.vertex_count()];
    for v in 0..mesh.vertex_count() {
        let ring = topo.one_ring(v);
        if ring.is_empty() {
            status[v] = VertexStatus::Isolated;
            continue;
        }
        let mut acc = CompensatedVec3::default();
        for &j in ring {
            acc.add(mesh.position(j) - mesh.position(v));
        }
        values[v] = acc.value() / ring.len() as f64;
    }
    CurvatureField {
        kind: CurvatureKind::UniformLaplacian,
        values: FieldValues::Vector(values),
        status,
        k: None,
        clamp_events: 0,
    }
}

/// Covariance `(1/K) Σ (x_j − m)(x_j − m)ᵀ` of the given points about their
/// mean `m`, and the mean.
pub fn covariance_of(positions: &[Vec3], neighbors: &[usize]) -> (Mat3, Vec3) {
    let k = neighbors.len() as f64;
    let mut acc = CompensatedVec3::default();
    for &j in neighbors {
        acc.add(positions[j]);
    }
    let mean = acc.value() / k;
    let mut cov = Mat3::ZERO;
    for &j in neighbors {
        let d = positions[j] - mean;
        cov += d.outer(d);
    }
    (cov.scale(1.0 / k), mean)
}

/// Covariance of the `k` spatially nearest vertices of `v` (including `v`).
pub fn neighborhood_covariance(mesh: &TriMesh, v: usize, k: usize) -> Result<(Mat3, Vec3)> {
    let index = crate::spatial::PointIndex::new(mesh.positions().to_vec())?;
    let nbrs: Vec<usize> = index.knn(mesh.position(v), k)?.iter().map(|n| n.index).collect();
    Ok(covariance_of(mesh.positions(), &nbrs))
}

/// Sorted covariance eigenvalues per vertex. Diagnostic only.
pub fn eigen_curvature(mesh: &TriMesh, k: usize) -> Result<CurvatureField> {
    let table = KnnTable::build(mesh.positions(), k)?;
    let values = (0..mesh.vertex_count())
        .map(|v| {
            let (cov, _) = covariance_of(mesh.positions(), table.of(v));
            let ev = symmetric_eigenvalues(&cov);
            [ev[0].max(0.0), ev[1].max(0.0), ev[2].max(0.0)]
        })
        .collect();
    Ok(CurvatureField {
        kind: CurvatureKind::Eigen,
        values: FieldValues::Triple(values),
        status: vec![VertexStatus::Ok; mesh.vertex_count()],
        k: Some(k),
        clamp_events: 0,
    })
}

/// Rayleigh-quotient extremes of one neighborhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RayleighExtremes {
    pub min: f64,
    pub max: f64,
    /// Positions within the neighbor list of the minimizing and maximizing
    /// neighbor; `None` when every neighbor was skipped.
    pub argmin: Option<usize>,
    pub argmax: Option<usize>,
    /// Which neighbors passed the skip threshold.
    pub used: u64,
}

/// Scans `gᵀΣg / gᵀg` over the centered neighbors. Ties keep the earliest
/// neighbor in list order.
pub(crate) fn rayleigh_extremes(positions: &[Vec3], neighbors: &[usize], skip_sq: f64) -> RayleighExtremes {
    let (cov, mean) = covariance_of(positions, neighbors);
    let mut out = RayleighExtremes { min: 0.0, max: 0.0, argmin: None, argmax: None, used: 0 };
    for (slot, &j) in neighbors.iter().enumerate() {
        let g = positions[j] - mean;
        let gg = g.norm_squared();
        if !(gg > skip_sq) {
            continue;
        }
        if slot < 64 {
            out.used |= 1 << slot;
        }
        let q = cov.quadratic_form(g) / gg;
        if out.argmin.is_none() || q < out.min {
            out.min = q;
            out.argmin = Some(slot);
        }
        if out.argmax.is_none() || q > out.max {
            out.max = q;
            out.argmax = Some(slot);
        }
    }
    out
}

/// `gᵀg` threshold below which a centered neighbor is skipped.
pub fn rayleigh_skip_threshold(mesh: &TriMesh) -> f64 {
    let l = average_edge_length(mesh).unwrap_or(0.0);
    RQ_SKIP_FACTOR * l * l
}

/// Rayleigh-quotient field over a precomputed neighborhood table.
pub fn rayleigh_curvature_with(mesh: &TriMesh, table: &KnnTable) -> CurvatureField {
    let skip = rayleigh_skip_threshold(mesh);
    let mut values = Vec::with_capacity(mesh.vertex_count());
    let mut status = Vec::with_capacity(mesh.vertex_count());
    for v in 0..mesh.vertex_count() {
        let r = rayleigh_extremes(mesh.positions(), table.of(v), skip);
        if r.argmin.is_some() {
            values.push([r.min, r.max]);
            status.push(VertexStatus::Ok);
        } else {
            values.push([0.0, 0.0]);
            status.push(VertexStatus::Degenerate);
        }
    }
    CurvatureField {
        kind: CurvatureKind::Rayleigh,
        values: FieldValues::Pair(values),
        status,
        k: Some(table.k()),
        clamp_events: 0,
    }
}

/// `(RQ_min, RQ_max)` per vertex over its `k` spatially nearest vertices.
pub fn rayleigh_curvature(mesh: &TriMesh, k: usize) -> Result<CurvatureField> {
    let table = KnnTable::build(mesh.positions(), k)?;
    Ok(rayleigh_curvature_with(mesh, &table))
}
