//! Draping loss terms between a predicted garment, its ground truth and a
//! body, and their weighted compositions.
//!
//! Discrete state that is expensive to recompute (garment→body matches,
//! proximity gates, K-nearest neighborhoods) lives in a [`Snapshot`]. The
//! plain loss functions capture a fresh snapshot per call; refinement reuses
//! one across several steps.

mod terms;
mod weights;

use alloc::vec::Vec;
use core::fmt;

pub use weights::LossWeights;

use crate::curvature::{rayleigh_curvature, CurvatureField, RQ_SCALES};
use crate::error::{Error, Result};
use crate::math::{self, Vec3};
use crate::mesh::{average_edge_length, vertex_normals, TriMesh};
use crate::spatial::{correspondences, CorrespondenceSet, KnnTable, PointIndex};

pub(crate) use terms::{KernelOutput, Want};

/// One loss term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Vert,
    Pen,
    Norm,
    Bend,
    /// Rayleigh-quotient curvature loss with neighborhood size `K`.
    Rq(usize),
    Mc,
}

impl Term {
    pub fn name(&self) -> alloc::string::String {
        match self {
            Term::Vert => "vert".into(),
            Term::Pen => "pen".into(),
            Term::Norm => "norm".into(),
            Term::Bend => "bend".into(),
            Term::Rq(k) => alloc::format!("rq{k}"),
            Term::Mc => "mc".into(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Weighted loss compositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// `L_vert + λ_pen L_pen + λ_norm L_norm + λ_bend L_bend`.
    P,
    /// `λ_p L_p + λ_MC L_MC`.
    McTot,
    /// `λ_p L_p + Σ_K λ_RQ^K L_RQ^K`, `K ∈ {8, 16, 32}`.
    RqTot,
    /// Both curvature losses on top of `λ_p L_p`.
    McRqTot,
}

impl Recipe {
    pub const ALL: [Recipe; 4] = [Recipe::P, Recipe::McTot, Recipe::RqTot, Recipe::McRqTot];

    pub fn name(&self) -> &'static str {
        match self {
            Recipe::P => "p",
            Recipe::McTot => "mc",
            Recipe::RqTot => "rq",
            Recipe::McRqTot => "mcrq",
        }
    }

    /// Terms and their effective weights. The interpenetration term is left
    /// out when there is no body.
    pub fn weighted_terms(&self, weights: &LossWeights, has_body: bool) -> Vec<(Term, f64)> {
        let scale = match self {
            Recipe::P => 1.0,
            _ => weights.lambda_p,
        };
        let mut out = alloc::vec![(Term::Vert, scale)];
        if has_body {
            out.push((Term::Pen, scale * weights.lambda_pen));
        }
        out.push((Term::Norm, scale * weights.lambda_norm));
        out.push((Term::Bend, scale * weights.lambda_bend));
        if matches!(self, Recipe::McTot | Recipe::McRqTot) {
            out.push((Term::Mc, weights.lambda_mc));
        }
        if matches!(self, Recipe::RqTot | Recipe::McRqTot) {
            for (i, k) in RQ_SCALES.iter().enumerate() {
                out.push((Term::Rq(*k), weights.lambda_rq[i]));
            }
        }
        out
    }
}

/// Event counts surfaced alongside loss values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Cotangents clamped in the mean-curvature operator.
    pub clamp_events: usize,
    /// Faces left out of the normal loss for having zero area.
    pub skipped_faces: usize,
    /// Vertices (or pairs) skipped for a degenerate configuration.
    pub degenerate: usize,
    /// Mean-curvature vertex terms dropped by the threshold.
    pub mc_dropped: usize,
    pub active_penetrations: usize,
    /// Garment vertices whose proximity gate was closed.
    pub gated_off: usize,
}

impl Counters {
    pub fn merge(&mut self, o: &Counters) {
        self.clamp_events += o.clamp_events;
        self.skipped_faces += o.skipped_faces;
        self.degenerate += o.degenerate;
        self.mc_dropped += o.mc_dropped;
        self.active_penetrations += o.active_penetrations;
        self.gated_off += o.gated_off;
    }
}

/// A body mesh with its vertex normals and the normal-offset points the
/// interpenetration test is made against.
#[derive(Debug, Clone)]
pub struct Body {
    mesh: TriMesh,
    normals: Vec<Vec3>,
    offset_points: Vec<Vec3>,
    offset: f64,
    index: PointIndex,
}

impl Body {
    /// Offsets every vertex by `offset_fraction` of the average edge length.
    pub fn new(mesh: TriMesh, offset_fraction: f64) -> Result<Body> {
        Body::with_clearance(mesh, offset_fraction, 0.0)
    }

    /// Like [`Body::new`], with an extra absolute `clearance` (cm) added to the
    /// offset.
    pub fn with_clearance(mesh: TriMesh, offset_fraction: f64, clearance: f64) -> Result<Body> {
        let offset = offset_fraction * average_edge_length(&mesh)? + clearance;
        let normals = vertex_normals(&mesh).normals;
        let offset_points = mesh.positions().iter().zip(&normals).map(|(p, n)| *p + *n * offset).collect();
        let index = PointIndex::new(mesh.positions().to_vec())?;
        Ok(Body { mesh, normals, offset_points, offset, index })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn offset_points(&self) -> &[Vec3] {
        &self.offset_points
    }

    /// Offset distance along the normals (cm).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn index(&self) -> &PointIndex {
        &self.index
    }

    /// Nearest body vertex of every garment vertex.
    pub fn correspondences(&self, garment: &TriMesh) -> CorrespondenceSet {
        correspondences(garment.positions(), &self.index)
    }

    /// Signed depth of each garment vertex below its matched offset plane
    /// (positive means inside).
    pub fn depths(&self, garment: &TriMesh, corr: &CorrespondenceSet) -> Vec<f64> {
        (0..garment.vertex_count()).map(|j| terms::violation(self, corr, j, garment.position(j))).collect()
    }
}

/// Predicted garment, ground truth and optional body.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub pred: &'a TriMesh,
    pub gt: &'a TriMesh,
    pub body: Option<&'a Body>,
}

impl<'a> Scene<'a> {
    pub fn new(pred: &'a TriMesh, gt: &'a TriMesh, body: Option<&'a Body>) -> Self {
        Scene { pred, gt, body }
    }

    fn check_vertices(&self) -> Result<()> {
        if self.pred.vertex_count() != self.gt.vertex_count() {
            return Err(Error::VertexCountMismatch { expected: self.gt.vertex_count(), found: self.pred.vertex_count() });
        }
        Ok(())
    }

    fn check_faces(&self) -> Result<()> {
        if self.pred.face_count() != self.gt.face_count() {
            return Err(Error::FaceCountMismatch { expected: self.gt.face_count(), found: self.pred.face_count() });
        }
        Ok(())
    }

    fn check_topology(&self) -> Result<()> {
        self.check_vertices()?;
        self.check_faces()?;
        if !self.pred.same_topology(self.gt) {
            return Err(Error::TopologyMismatch);
        }
        Ok(())
    }
}

/// Frozen discrete state a loss is evaluated under.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub correspondences: Option<CorrespondenceSet>,
    /// Interpenetration gate per garment vertex.
    pub gates: Vec<bool>,
    /// Predicted-mesh neighborhoods per Rayleigh scale.
    pub neighborhoods: Vec<KnnTable>,
    gt_rayleigh: Vec<CurvatureField>,
}

impl Snapshot {
    /// Captures the state needed by `terms`. Gates follow the ground-truth
    /// proximity test `‖x_pred − x_gt‖ < d_tol`.
    pub fn capture(scene: &Scene, weights: &LossWeights, terms: &[Term]) -> Result<Snapshot> {
        Snapshot::capture_inner(scene, weights, terms, true)
    }

    /// Like [`Snapshot::capture`] with every interpenetration gate open.
    pub fn capture_ungated(scene: &Scene, weights: &LossWeights, terms: &[Term]) -> Result<Snapshot> {
        Snapshot::capture_inner(scene, weights, terms, false)
    }

    pub fn for_recipe(scene: &Scene, weights: &LossWeights, recipe: Recipe) -> Result<Snapshot> {
        let terms: Vec<Term> = recipe.weighted_terms(weights, scene.body.is_some()).iter().map(|t| t.0).collect();
        Snapshot::capture(scene, weights, &terms)
    }

    fn capture_inner(scene: &Scene, weights: &LossWeights, terms: &[Term], gated: bool) -> Result<Snapshot> {
        let mut snap = Snapshot { correspondences: None, gates: Vec::new(), neighborhoods: Vec::new(), gt_rayleigh: Vec::new() };
        for term in terms {
            match term {
                Term::Pen if snap.correspondences.is_none() => {
                    scene.check_vertices()?;
                    let body = scene.body.ok_or(Error::MissingBody)?;
                    snap.correspondences = Some(body.correspondences(scene.pred));
                    snap.gates = scene
                        .pred
                        .positions()
                        .iter()
                        .zip(scene.gt.positions())
                        .map(|(p, g)| !gated || (*p - *g).norm() < weights.d_tol)
                        .collect();
                }
                Term::Rq(k) if snap.table(*k).is_none() => {
                    scene.check_vertices()?;
                    snap.neighborhoods.push(KnnTable::build(scene.pred.positions(), *k)?);
                    snap.gt_rayleigh.push(rayleigh_curvature(scene.gt, *k)?);
                }
                _ => {}
            }
        }
        Ok(snap)
    }

    fn table(&self, k: usize) -> Option<usize> {
        self.neighborhoods.iter().position(|t| t.k() == k)
    }

    /// Recomputes the predicted-side state at the current positions, keeping
    /// the ground-truth fields and the gating mode.
    pub fn refreshed(&self, scene: &Scene, weights: &LossWeights, gated: bool) -> Result<Snapshot> {
        let mut snap = self.clone();
        if self.correspondences.is_some() {
            let body = scene.body.ok_or(Error::MissingBody)?;
            snap.correspondences = Some(body.correspondences(scene.pred));
            if gated {
                snap.gates = scene
                    .pred
                    .positions()
                    .iter()
                    .zip(scene.gt.positions())
                    .map(|(p, g)| (*p - *g).norm() < weights.d_tol)
                    .collect();
            }
        }
        for t in snap.neighborhoods.iter_mut() {
            *t = KnnTable::build(scene.pred.positions(), t.k())?;
        }
        Ok(snap)
    }
}

/// Value of one loss term and the events behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermValue {
    pub value: f64,
    pub counters: Counters,
}

pub(crate) fn eval_term(
    term: Term,
    scene: &Scene,
    weights: &LossWeights,
    snapshot: &Snapshot,
    want: Want,
) -> Result<KernelOutput> {
    match term {
        Term::Vert => {
            scene.check_vertices()?;
            Ok(terms::vert(scene.pred, scene.gt, want))
        }
        Term::Pen => {
            scene.check_vertices()?;
            let body = scene.body.ok_or(Error::MissingBody)?;
            let corr = snapshot.correspondences.as_ref().ok_or(Error::InvalidParameter("snapshot has no correspondences"))?;
            if corr.len() != scene.pred.vertex_count() {
                return Err(Error::VertexCountMismatch { expected: scene.pred.vertex_count(), found: corr.len() });
            }
            Ok(terms::pen(scene.pred, body, corr, &snapshot.gates, want))
        }
        Term::Norm => {
            scene.check_faces()?;
            Ok(terms::norm(scene.pred, scene.gt, want))
        }
        Term::Bend => {
            scene.check_topology()?;
            if scene.pred.topology().two_edge_pairs().is_empty() {
                return Err(Error::EmptyTwoRing);
            }
            Ok(terms::bend(scene.pred, scene.gt, want))
        }
        Term::Rq(k) => {
            scene.check_vertices()?;
            let slot = snapshot.table(k).ok_or(Error::InvalidParameter("snapshot has no neighborhoods for this K"))?;
            Ok(terms::rq(scene.pred, &snapshot.neighborhoods[slot], &snapshot.gt_rayleigh[slot], want))
        }
        Term::Mc => {
            scene.check_topology()?;
            Ok(terms::mc(scene.pred, scene.gt, weights.mc_clamp_threshold, want))
        }
    }
}

fn single(term: Term, scene: &Scene, weights: &LossWeights) -> Result<TermValue> {
    let snap = Snapshot::capture(scene, weights, &[term])?;
    let out = eval_term(term, scene, weights, &snap, Want::default())?;
    Ok(TermValue { value: out.value, counters: out.counters })
}

/// Mean squared vertex distance (cm²).
pub fn l_vert(pred: &TriMesh, gt: &TriMesh) -> Result<TermValue> {
    single(Term::Vert, &Scene::new(pred, gt, None), &LossWeights::default())
}

/// Gated interpenetration penalty against the offset body (cm).
pub fn l_pen(pred: &TriMesh, gt: &TriMesh, body: &TriMesh, weights: &LossWeights) -> Result<TermValue> {
    weights.validate()?;
    let body = Body::new(body.clone(), weights.body_offset_fraction)?;
    single(Term::Pen, &Scene::new(pred, gt, Some(&body)), weights)
}

/// Mean of `(1 − n_gtᵀ n_pred)²` over faces with non-zero area.
pub fn l_norm(pred: &TriMesh, gt: &TriMesh) -> Result<TermValue> {
    single(Term::Norm, &Scene::new(pred, gt, None), &LossWeights::default())
}

/// Mean absolute change of distance over vertex pairs two edges apart (cm).
pub fn l_bend(pred: &TriMesh, gt: &TriMesh) -> Result<TermValue> {
    single(Term::Bend, &Scene::new(pred, gt, None), &LossWeights::default())
}

/// Squared difference of Rayleigh-quotient extremes at neighborhood size `k`.
pub fn l_rq(pred: &TriMesh, gt: &TriMesh, k: usize) -> Result<TermValue> {
    single(Term::Rq(k), &Scene::new(pred, gt, None), &LossWeights::default())
}

/// Mean squared difference of mean-curvature normals over interior vertices.
pub fn l_mc(pred: &TriMesh, gt: &TriMesh, threshold: Option<f64>) -> Result<TermValue> {
    let weights = LossWeights { mc_clamp_threshold: threshold, ..LossWeights::default() };
    single(Term::Mc, &Scene::new(pred, gt, None), &weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermEntry {
    pub term: Term,
    pub weight: f64,
    pub value: f64,
}

/// Per-term values, their weighted total and the snapshot used.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// `None` for ad-hoc weighted term lists.
    pub recipe: Option<Recipe>,
    pub terms: Vec<TermEntry>,
    pub total: f64,
    pub counters: Counters,
    pub correspondences: Option<CorrespondenceSet>,
}

impl LossReport {
    pub fn value(&self, term: Term) -> Option<f64> {
        self.terms.iter().find(|e| e.term == term).map(|e| e.value)
    }

    /// Sum of the Rayleigh terms over all scales present.
    pub fn rq_sum(&self) -> f64 {
        self.terms.iter().filter(|e| matches!(e.term, Term::Rq(_))).map(|e| e.value).sum()
    }
}

pub(crate) fn weighted_total(entries: &[TermEntry]) -> f64 {
    math::sum(entries.iter().map(|e| e.weight * e.value))
}

/// Evaluates a recipe under an existing snapshot. With `want.gradient` the
/// weighted gradient is returned as well.
pub(crate) fn evaluate(
    scene: &Scene,
    weights: &LossWeights,
    recipe: Recipe,
    snapshot: &Snapshot,
    want: Want,
) -> Result<(LossReport, Option<Vec<Vec3>>, Vec<i64>)> {
    let terms = recipe.weighted_terms(weights, scene.body.is_some());
    evaluate_terms(scene, weights, &terms, Some(recipe), snapshot, want)
}

/// Evaluates an arbitrary weighted term list under `snapshot`.
pub(crate) fn evaluate_terms(
    scene: &Scene,
    weights: &LossWeights,
    terms: &[(Term, f64)],
    recipe: Option<Recipe>,
    snapshot: &Snapshot,
    want: Want,
) -> Result<(LossReport, Option<Vec<Vec3>>, Vec<i64>)> {
    weights.validate()?;
    let mut entries = Vec::new();
    let mut counters = Counters::default();
    let mut gradient = if want.gradient { Some(alloc::vec![Vec3::ZERO; scene.pred.vertex_count()]) } else { None };
    let mut signature = Vec::new();
    for &(term, weight) in terms {
        let out = eval_term(term, scene, weights, snapshot, want)?;
        counters.merge(&out.counters);
        if let (Some(total), Some(g)) = (gradient.as_mut(), out.gradient.as_ref()) {
            for (t, gi) in total.iter_mut().zip(g) {
                *t += *gi * weight;
            }
        }
        signature.extend(out.signature);
        entries.push(TermEntry { term, weight, value: out.value });
    }
    let total = weighted_total(&entries);
    let report = LossReport { recipe, terms: entries, total, counters, correspondences: snapshot.correspondences.clone() };
    Ok((report, gradient, signature))
}

/// Evaluates `recipe` under a freshly captured snapshot.
pub fn compose(scene: &Scene, weights: &LossWeights, recipe: Recipe) -> Result<LossReport> {
    weights.validate()?;
    let snap = Snapshot::for_recipe(scene, weights, recipe)?;
    compose_with(scene, weights, recipe, &snap)
}

pub fn compose_with(scene: &Scene, weights: &LossWeights, recipe: Recipe, snapshot: &Snapshot) -> Result<LossReport> {
    Ok(evaluate(scene, weights, recipe, snapshot, Want::default())?.0)
}

#[cfg(test)]
mod tests;
