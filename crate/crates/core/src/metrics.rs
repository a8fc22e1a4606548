//! Evaluation metrics between a predicted drape and its ground truth, and
//! interpenetration diagnostics against a body.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::losses::Body;
use crate::math::{self, CompensatedSum, Vec3};
use crate::mesh::TriMesh;

fn check_vertices(pred: &TriMesh, gt: &TriMesh) -> Result<()> {
    if pred.vertex_count() != gt.vertex_count() {
        return Err(Error::VertexCountMismatch { expected: gt.vertex_count(), found: pred.vertex_count() });
    }
    Ok(())
}

fn check_faces(pred: &TriMesh, gt: &TriMesh) -> Result<()> {
    if pred.face_count() != gt.face_count() {
        return Err(Error::FaceCountMismatch { expected: gt.face_count(), found: pred.face_count() });
    }
    Ok(())
}

/// Euclidean distance of every vertex to its ground-truth position (cm).
pub fn vertex_distances(pred: &TriMesh, gt: &TriMesh) -> Result<Vec<f64>> {
    check_vertices(pred, gt)?;
    Ok(pred.positions().iter().zip(gt.positions()).map(|(p, g)| (*p - *g).norm()).collect())
}

/// Mean vertex-to-vertex distance (cm).
pub fn e_dist(pred: &TriMesh, gt: &TriMesh) -> Result<f64> {
    let d = vertex_distances(pred, gt)?;
    Ok(math::sum(d.iter().copied()) / d.len() as f64)
}

/// Angle between corresponding facet normals, in degrees. Faces with zero
/// area on either mesh give `None`.
pub fn face_angles(pred: &TriMesh, gt: &TriMesh) -> Result<Vec<Option<f64>>> {
    check_faces(pred, gt)?;
    let (pe, ge) = (pred.zero_area_threshold(), gt.zero_area_threshold());
    Ok((0..pred.face_count())
        .map(|f| {
            let (cp, cg) = (pred.face_cross(f), gt.face_cross(f));
            let (sp, sg) = (cp.norm_squared(), cg.norm_squared());
            if math::sqrt(sp) <= pe || math::sqrt(sg) <= ge || sp == 0.0 || sg == 0.0 {
                return None;
            }
            let cos = (cp.dot(cg) / math::sqrt(sp * sg)).clamp(-1.0, 1.0);
            Some(math::acos(cos) * (180.0 / core::f64::consts::PI))
        })
        .collect())
}

/// Mean facet-normal angle error (degrees) over faces with non-zero area.
pub fn e_norm(pred: &TriMesh, gt: &TriMesh) -> Result<f64> {
    let angles = face_angles(pred, gt)?;
    let mut acc = CompensatedSum::new();
    let mut count = 0usize;
    for a in angles.into_iter().flatten() {
        acc.add(a);
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { acc.value() / count as f64 })
}

/// `100 · ‖ĝ − p̂‖ / ‖ĝ‖` after mapping both meshes through the per-axis
/// min-max normalization of the ground-truth bounding box.
pub fn normalized_l2_pct(pred: &TriMesh, gt: &TriMesh) -> Result<f64> {
    check_vertices(pred, gt)?;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in gt.positions() {
        for a in 0..3 {
            lo[a] = lo[a].min(p.component(a));
            hi[a] = hi[a].max(p.component(a));
        }
    }
    for a in 0..3 {
        if !(hi[a] > lo[a]) {
            return Err(Error::DegenerateBoundingBox { axis: a });
        }
    }
    let norm = |p: Vec3| Vec3::new((p.x - lo[0]) / (hi[0] - lo[0]), (p.y - lo[1]) / (hi[1] - lo[1]), (p.z - lo[2]) / (hi[2] - lo[2]));
    let mut diff = CompensatedSum::new();
    let mut base = CompensatedSum::new();
    for (p, g) in pred.positions().iter().zip(gt.positions()) {
        let (pn, gn) = (norm(*p), norm(*g));
        diff.add((gn - pn).norm_squared());
        base.add(gn.norm_squared());
    }
    Ok(100.0 * math::sqrt(diff.value()) / math::sqrt(base.value()))
}

/// What a precision curve measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionKind {
    /// Per-vertex distance (cm).
    Distance,
    /// Per-face normal angle (degrees).
    Angle,
}

/// How several samples are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// One fraction over all vertices (or faces) of all samples.
    #[default]
    Pooled,
    /// Mean of the per-sample fractions.
    PerSample,
}

/// Fraction of errors strictly below each threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionCurve {
    pub points: Vec<(f64, f64)>,
}

fn errors(pred: &TriMesh, gt: &TriMesh, kind: PrecisionKind) -> Result<Vec<f64>> {
    match kind {
        PrecisionKind::Distance => vertex_distances(pred, gt),
        PrecisionKind::Angle => Ok(face_angles(pred, gt)?.into_iter().flatten().collect()),
    }
}

/// Fractions of errors below each threshold, from errors sorted ascending.
fn fractions(sorted: &[f64], thresholds: &[f64]) -> Vec<f64> {
    thresholds
        .iter()
        .map(|t| if sorted.is_empty() { 1.0 } else { sorted.partition_point(|e| e < t) as f64 / sorted.len() as f64 })
        .collect()
}

pub fn precision_curve(pred: &TriMesh, gt: &TriMesh, thresholds: &[f64], kind: PrecisionKind) -> Result<PrecisionCurve> {
    precision_curve_samples(&[(pred, gt)], thresholds, kind, Pooling::Pooled)
}

pub fn precision_curve_samples(
    samples: &[(&TriMesh, &TriMesh)],
    thresholds: &[f64],
    kind: PrecisionKind,
    pooling: Pooling,
) -> Result<PrecisionCurve> {
    if thresholds.iter().any(|t| t.is_nan()) {
        return Err(Error::InvalidParameter("thresholds must not be NaN"));
    }
    let mut per_sample = Vec::with_capacity(samples.len());
    for (p, g) in samples {
        let mut e = errors(p, g, kind)?;
        e.sort_by(f64::total_cmp);
        per_sample.push(e);
    }
    let values = match pooling {
        Pooling::Pooled => {
            let mut all: Vec<f64> = per_sample.into_iter().flatten().collect();
            all.sort_by(f64::total_cmp);
            fractions(&all, thresholds)
        }
        Pooling::PerSample => {
            let mut acc = alloc::vec![0.0; thresholds.len()];
            for e in &per_sample {
                for (a, f) in acc.iter_mut().zip(fractions(e, thresholds)) {
                    *a += f;
                }
            }
            let n = per_sample.len().max(1) as f64;
            acc.into_iter().map(|a| a / n).collect()
        }
    };
    Ok(PrecisionCurve { points: thresholds.iter().copied().zip(values).collect() })
}

/// Garment vertices on the inner side of their matched offset body point.
#[derive(Debug, Clone, PartialEq)]
pub struct Penetrations {
    pub count: usize,
    /// Signed depth per garment vertex (cm); positive means inside.
    pub depths: Vec<f64>,
}

impl Penetrations {
    pub fn max_depth(&self) -> f64 {
        self.depths.iter().copied().fold(0.0, f64::max)
    }
}

pub fn penetration_count(garment: &TriMesh, body: &Body) -> Penetrations {
    let corr = body.correspondences(garment);
    let depths = body.depths(garment, &corr);
    let count = depths.iter().filter(|d| **d > 0.0).count();
    Penetrations { count, depths }
}

/// Summary metrics of one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub e_dist: f64,
    pub e_norm: f64,
    /// `None` when the ground truth is flat along an axis.
    pub normalized_l2_pct: Option<f64>,
    pub penetration_count: Option<usize>,
    pub precision_curve: PrecisionCurve,
}

pub fn evaluate(pred: &TriMesh, gt: &TriMesh, body: Option<&Body>, thresholds: &[f64]) -> Result<EvalReport> {
    let normalized = match normalized_l2_pct(pred, gt) {
        Ok(v) => Some(v),
        Err(Error::DegenerateBoundingBox { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        e_dist: e_dist(pred, gt)?,
        e_norm: e_norm(pred, gt)?,
        normalized_l2_pct: normalized,
        penetration_count: body.map(|b| penetration_count(pred, b).count),
        precision_curve: precision_curve(pred, gt, thresholds, PrecisionKind::Distance)?,
    })
}
