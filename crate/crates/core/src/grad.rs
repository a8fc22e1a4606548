//! Analytic gradients of the loss terms with respect to predicted vertex
//! positions, and a central-difference harness that checks them.
//!
//! Gradients are taken with every discrete selection held fixed: the
//! snapshot's matches, gates and neighborhoods, and whichever branch each
//! piecewise-smooth expression is on at the evaluation point.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::MeanCurvatureParts;
use crate::error::{Error, Result};
use crate::losses::{eval_term, evaluate, Body, LossReport, LossWeights, Recipe, Scene, Snapshot, Term, TermValue, Want};
use crate::math::{self, Vec3};
use crate::mesh::TriMesh;
use crate::scene::{perturbed, plane_grid};

/// Per-vertex gradient and the snapshot it was computed under.
#[derive(Debug, Clone, PartialEq)]
pub struct GradField {
    pub per_vertex: Vec<Vec3>,
    pub snapshot: Snapshot,
}

impl GradField {
    pub fn is_finite(&self) -> bool {
        self.per_vertex.iter().all(|g| g.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.per_vertex.iter().flat_map(|g| g.to_array()).fold(0.0, |m, c| m.max(math::abs(c)))
    }
}

/// A single term or a weighted recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Term(Term),
    Recipe(Recipe),
}

impl Objective {
    pub fn terms(&self, weights: &LossWeights, has_body: bool) -> Vec<Term> {
        match self {
            Objective::Term(t) => alloc::vec![*t],
            Objective::Recipe(r) => r.weighted_terms(weights, has_body).into_iter().map(|(t, _)| t).collect(),
        }
    }

    pub fn capture(&self, scene: &Scene, weights: &LossWeights) -> Result<Snapshot> {
        Snapshot::capture(scene, weights, &self.terms(weights, scene.body.is_some()))
    }

    /// Value, optional gradient and branch signature under `snapshot`.
    fn run(&self, scene: &Scene, weights: &LossWeights, snapshot: &Snapshot, want: Want) -> Result<(f64, Option<Vec<Vec3>>, Vec<i64>)> {
        match self {
            Objective::Term(t) => {
                let out = eval_term(*t, scene, weights, snapshot, want)?;
                Ok((out.value, out.gradient, out.signature))
            }
            Objective::Recipe(r) => {
                let (report, g, sig) = evaluate(scene, weights, *r, snapshot, want)?;
                Ok((report.total, g, sig))
            }
        }
    }

    /// Value under a fixed snapshot.
    pub fn value_with(&self, scene: &Scene, weights: &LossWeights, snapshot: &Snapshot) -> Result<f64> {
        Ok(self.run(scene, weights, snapshot, Want::default())?.0)
    }

    /// Value and gradient under a fixed snapshot.
    pub fn gradient_with(&self, scene: &Scene, weights: &LossWeights, snapshot: &Snapshot) -> Result<(f64, Vec<Vec3>)> {
        let (v, g, _) = self.run(scene, weights, snapshot, Want { gradient: true, signature: false })?;
        Ok((v, g.expect("gradient requested")))
    }

    fn signature(&self, scene: &Scene, weights: &LossWeights, snapshot: &Snapshot) -> Result<Vec<i64>> {
        Ok(self.run(scene, weights, snapshot, Want { gradient: false, signature: true })?.2)
    }
}

/// Gradient of one term under a freshly captured snapshot.
pub fn grad_term(term: Term, scene: &Scene, weights: &LossWeights) -> Result<(TermValue, GradField)> {
    weights.validate()?;
    let snapshot = Objective::Term(term).capture(scene, weights)?;
    grad_term_with(term, scene, weights, snapshot)
}

pub fn grad_term_with(term: Term, scene: &Scene, weights: &LossWeights, snapshot: Snapshot) -> Result<(TermValue, GradField)> {
    let out = eval_term(term, scene, weights, &snapshot, Want { gradient: true, signature: false })?;
    let per_vertex = out.gradient.expect("gradient requested");
    Ok((TermValue { value: out.value, counters: out.counters }, GradField { per_vertex, snapshot }))
}

/// Weighted recipe gradient under one shared snapshot.
pub fn grad_compose(scene: &Scene, weights: &LossWeights, recipe: Recipe) -> Result<(LossReport, GradField)> {
    weights.validate()?;
    let snapshot = Snapshot::for_recipe(scene, weights, recipe)?;
    grad_compose_with(scene, weights, recipe, snapshot)
}

pub fn grad_compose_with(scene: &Scene, weights: &LossWeights, recipe: Recipe, snapshot: Snapshot) -> Result<(LossReport, GradField)> {
    let (report, g, _) = evaluate(scene, weights, recipe, &snapshot, Want { gradient: true, signature: false })?;
    Ok((report, GradField { per_vertex: g.expect("gradient requested"), snapshot }))
}

/// Owned garment/body scene.
#[derive(Debug, Clone)]
pub struct SceneData {
    pub pred: TriMesh,
    pub gt: TriMesh,
    pub body: Body,
}

impl SceneData {
    pub fn scene(&self) -> Scene<'_> {
        Scene::new(&self.pred, &self.gt, Some(&self.body))
    }
}

/// Random scene for gradient checks: a jittered `7 × 7` garment hovering
/// over a flat body, with about half of its vertices close enough to their
/// ground truth for the interpenetration gate to open. Many of those sit
/// below the offset body plane.
pub fn random_scene(seed: u64, weights: &LossWeights) -> Result<SceneData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = plane_grid(7, 7, 1.0)?;
    let gt = perturbed(&base, 0.15, rng.gen());
    let body_mesh = plane_grid(17, 17, 0.5)?.map_positions(|p| p - Vec3::new(1.0, 1.0, 0.0));
    let body = Body::new(body_mesh, weights.body_offset_fraction)?;
    let lift = body.offset();
    let gt = gt.map_positions(|p| p + Vec3::new(0.0, 0.0, lift));
    let close = 0.45 * weights.d_tol / math::sqrt(3.0);
    let pred = gt.map_positions(|p| {
        let r = if rng.gen_bool(0.5) { close } else { 0.15 };
        p + Vec3::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r), rng.gen_range(-r..=r))
    });
    Ok(SceneData { pred, gt, body })
}

/// Settings of the central-difference check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub h: f64,
    pub trials: usize,
    /// Coordinates sampled per scene.
    pub coordinates: usize,
    pub seed: u64,
    /// Scenes drawn per trial before giving up.
    pub resample_budget: usize,
    /// Differences up to this size are reported as absolute errors.
    pub absolute_floor: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { h: 1e-6, trials: 30, coordinates: 12, seed: 0, resample_budget: 50, absolute_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSample {
    pub vertex: usize,
    pub axis: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub max_error: f64,
    pub worst: Option<FdSample>,
    pub samples: usize,
    /// Scenes rejected for sitting near a branch boundary.
    pub resamples: usize,
    pub value_mismatches: usize,
}

/// Error metric used by the harness: the absolute difference when it is at
/// most `floor`, the relative difference otherwise.
pub fn gradient_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let scale = math::abs(analytic).max(math::abs(numeric));
    let diff = math::abs(analytic - numeric);
    if diff <= floor {
        diff
    } else {
        diff / scale
    }
}

fn shifted(mesh: &TriMesh, vertex: usize, axis: usize, by: f64) -> TriMesh {
    let mut pos = mesh.positions().to_vec();
    *pos[vertex].component_mut(axis) += by;
    mesh.with_positions(pos).expect("same topology")
}

/// Checks one scene. Returns `None` when the scene is degenerate: zero-area
/// faces, clamped cotangents, or a branch change within `10h` of a sampled
/// coordinate.
pub fn check_scene(
    objective: Objective,
    data: &SceneData,
    weights: &LossWeights,
    cfg: &FdConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<FdSample>>> {
    let scene = data.scene();
    if !data.pred.zero_area_faces().is_empty() || !data.gt.zero_area_faces().is_empty() {
        return Ok(None);
    }
    let snapshot = objective.capture(&scene, weights)?;
    let (value, grad) = objective.gradient_with(&scene, weights, &snapshot)?;
    let plain = objective.value_with(&scene, weights, &snapshot)?;
    if value.to_bits() != plain.to_bits() {
        return Err(Error::InvalidParameter("gradient and value paths disagree"));
    }
    if MeanCurvatureParts::compute(&data.pred).clamp_events > 0 {
        return Ok(None);
    }
    let base_sig = objective.signature(&scene, weights, &snapshot)?;
    let n = data.pred.vertex_count();
    let mut samples = Vec::with_capacity(cfg.coordinates);
    for _ in 0..cfg.coordinates {
        let vertex = rng.gen_range(0..n);
        let axis = rng.gen_range(0..3);
        for s in [-10.0, 10.0] {
            let moved = shifted(&data.pred, vertex, axis, s * cfg.h);
            let sig = objective.signature(&Scene::new(&moved, &data.gt, Some(&data.body)), weights, &snapshot)?;
            if sig != base_sig {
                return Ok(None);
            }
        }
        let up = shifted(&data.pred, vertex, axis, cfg.h);
        let dn = shifted(&data.pred, vertex, axis, -cfg.h);
        let fu = objective.value_with(&Scene::new(&up, &data.gt, Some(&data.body)), weights, &snapshot)?;
        let fd = objective.value_with(&Scene::new(&dn, &data.gt, Some(&data.body)), weights, &snapshot)?;
        let numeric = (fu - fd) / (2.0 * cfg.h);
        let analytic = grad[vertex].component(axis);
        samples.push(FdSample { vertex, axis, analytic, numeric, error: gradient_error(analytic, numeric, cfg.absolute_floor) });
    }
    Ok(Some(samples))
}

/// Runs `cfg.trials` random scenes through [`check_scene`], drawing a new
/// scene whenever one is degenerate.
pub fn finite_difference_check(objective: Objective, weights: &LossWeights, cfg: &FdConfig) -> Result<FdReport> {
    finite_difference_check_with(objective, weights, cfg, |seed| random_scene(seed, weights))
}

/// Like [`finite_difference_check`] with a caller-supplied scene generator.
pub fn finite_difference_check_with<F>(objective: Objective, weights: &LossWeights, cfg: &FdConfig, mut make: F) -> Result<FdReport>
where
    F: FnMut(u64) -> Result<SceneData>,
{
    if !(cfg.h > 0.0) {
        return Err(Error::InvalidParameter("finite-difference step must be positive"));
    }
    weights.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = FdReport { max_error: 0.0, worst: None, samples: 0, resamples: 0, value_mismatches: 0 };
    for _ in 0..cfg.trials {
        let mut attempts = 0;
        loop {
            if attempts == cfg.resample_budget {
                return Err(Error::DegenerateScene { attempts });
            }
            attempts += 1;
            let data = make(rng.gen())?;
            match check_scene(objective, &data, weights, cfg, &mut rng)? {
                None => report.resamples += 1,
                Some(samples) => {
                    for s in samples {
                        report.samples += 1;
                        if s.error > report.max_error || report.worst.is_none() {
                            report.max_error = report.max_error.max(s.error);
                            report.worst = Some(s);
                        }
                    }
                    break;
                }
            }
        }
    }
    Ok(report)
}
