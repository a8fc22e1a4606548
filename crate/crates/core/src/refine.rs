//! Gradient-descent refinement of garment vertex positions toward a target
//! under a loss recipe, and a standalone interpenetration resolver.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::losses::{evaluate_terms, Body, LossReport, LossWeights, Recipe, Scene, Snapshot, Term, Want};
use crate::math::{self, Vec3};
use crate::mesh::{average_edge_length, TriMesh};
use crate::metrics::penetration_count;

/// Update rule applied to the per-vertex gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// Steepest descent with backtracking line search.
    Plain,
    /// Heavy-ball momentum.
    Momentum { beta: f64 },
    /// Adam with bias correction.
    Adaptive { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub const ADAPTIVE: Optimizer = Optimizer::Adaptive { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 };
    pub const MOMENTUM: Optimizer = Optimizer::Momentum { beta: 0.9 };

    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Plain => "plain",
            Optimizer::Momentum { .. } => "momentum",
            Optimizer::Adaptive { .. } => "adaptive",
        }
    }
}

/// Adam learning rate in units of the initial mesh's average edge length.
pub const DEFAULT_RELATIVE_STEP: f64 = 0.001;
pub const DEFAULT_SNAPSHOT_REFRESH: usize = 10;
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub recipe: Recipe,
    pub weights: LossWeights,
    pub steps: usize,
    pub optimizer: Optimizer,
    /// Displacement per unit gradient (cm). `None` picks
    /// `DEFAULT_RELATIVE_STEP ·` the initial average edge length for the
    /// momentum and adaptive rules, and a first line-search trial that moves
    /// the fastest vertex by one average edge length for plain descent.
    pub step_size: Option<f64>,
    pub snapshot_refresh_every: usize,
    pub trace_every: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            recipe: Recipe::P,
            weights: LossWeights::default(),
            steps: 100,
            optimizer: Optimizer::ADAPTIVE,
            step_size: None,
            snapshot_refresh_every: DEFAULT_SNAPSHOT_REFRESH,
            trace_every: 1,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1"));
        }
        if let Some(s) = self.step_size {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidParameter("step size must be positive"));
            }
        }
        if self.snapshot_refresh_every == 0 {
            return Err(Error::InvalidParameter("snapshot refresh interval must be at least 1"));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidParameter("trace interval must be at least 1"));
        }
        match self.optimizer {
            Optimizer::Plain => {}
            Optimizer::Momentum { beta } if (0.0..1.0).contains(&beta) => {}
            Optimizer::Adaptive { beta1, beta2, epsilon }
                if (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && epsilon > 0.0 => {}
            _ => return Err(Error::InvalidParameter("optimizer parameters out of range")),
        }
        Ok(())
    }
}

/// Loss state before the update of `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    /// Counts snapshot refreshes; entries with the same epoch share one
    /// snapshot.
    pub epoch: usize,
    pub report: LossReport,
    /// Penetrating vertices against the standard offset body, when a body
    /// was supplied.
    pub penetrations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub final_mesh: TriMesh,
    pub trace: Vec<TraceEntry>,
    /// Loss of the final mesh under a fresh snapshot.
    pub final_report: Option<LossReport>,
    pub steps_taken: usize,
    pub clamp_events: usize,
    pub degenerate_events: usize,
    /// Plain-descent steps where no trial step decreased the loss.
    pub line_search_failures: usize,
    /// Set when the run stopped on a non-finite loss.
    pub aborted: Option<Error>,
}

impl RefineResult {
    pub fn into_result(self) -> Result<RefineResult> {
        match self.aborted.clone() {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

struct Problem<'a> {
    target: &'a TriMesh,
    body: Option<&'a Body>,
    /// Standard-offset body used for penetration counts.
    count_body: Option<&'a Body>,
    terms: Vec<(Term, f64)>,
    recipe: Option<Recipe>,
    weights: LossWeights,
    gated: bool,
}

impl Problem<'_> {
    fn scene<'m>(&'m self, pred: &'m TriMesh) -> Scene<'m> {
        Scene::new(pred, self.target, self.body)
    }

    fn capture(&self, pred: &TriMesh) -> Result<Snapshot> {
        let terms: Vec<Term> = self.terms.iter().map(|t| t.0).collect();
        if self.gated {
            Snapshot::capture(&self.scene(pred), &self.weights, &terms)
        } else {
            Snapshot::capture_ungated(&self.scene(pred), &self.weights, &terms)
        }
    }

    fn eval(&self, pred: &TriMesh, snap: &Snapshot, gradient: bool) -> Result<(LossReport, Option<Vec<Vec3>>)> {
        let want = Want { gradient, signature: false };
        let (r, g, _) = evaluate_terms(&self.scene(pred), &self.weights, &self.terms, self.recipe, snap, want)?;
        Ok((r, g))
    }
}

fn displaced(mesh: &TriMesh, dir: &[Vec3], scale: f64) -> TriMesh {
    let pos = mesh.positions().iter().zip(dir).map(|(p, d)| *p + *d * scale).collect();
    mesh.with_positions(pos).expect("same vertex count")
}

fn run(init: &TriMesh, problem: &Problem, config: &RefineConfig) -> Result<RefineResult> {
    config.validate()?;
    let n = init.vertex_count();
    let scale = average_edge_length(init)?;
    let step = config.step_size.unwrap_or(DEFAULT_RELATIVE_STEP * scale);
    let mut x = init.clone();
    let mut snap = problem.capture(&x)?;
    let mut epoch = 0;
    let mut velocity = vec![Vec3::ZERO; n];
    let mut m1 = vec![Vec3::ZERO; n];
    let mut m2 = vec![Vec3::ZERO; n];
    let mut result = RefineResult {
        final_mesh: init.clone(),
        trace: Vec::new(),
        final_report: None,
        steps_taken: 0,
        clamp_events: 0,
        degenerate_events: 0,
        line_search_failures: 0,
        aborted: None,
    };
    for t in 0..config.steps {
        if t > 0 && t % config.snapshot_refresh_every == 0 {
            snap = snap.refreshed(&problem.scene(&x), &problem.weights, problem.gated)?;
            epoch += 1;
        }
        let (report, grad) = problem.eval(&x, &snap, true)?;
        let grad = grad.expect("gradient requested");
        result.clamp_events += report.counters.clamp_events;
        result.degenerate_events += report.counters.degenerate;
        let finite = report.total.is_finite() && grad.iter().all(|g| g.is_finite());
        if t % config.trace_every == 0 || !finite {
            let penetrations = problem.count_body.map(|b| penetration_count(&x, b).count);
            result.trace.push(TraceEntry { step: t, epoch, report: report.clone(), penetrations });
        }
        if !finite {
            result.aborted = Some(Error::NonFiniteLoss { step: t });
            result.final_mesh = x;
            return Ok(result);
        }
        x = match config.optimizer {
            Optimizer::Plain => {
                let gmax = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
                if gmax == 0.0 {
                    x
                } else {
                    let mut eta = config.step_size.unwrap_or(scale / gmax);
                    let mut accepted = None;
                    for _ in 0..=MAX_HALVINGS {
                        let trial = displaced(&x, &grad, -eta);
                        let (r, _) = problem.eval(&trial, &snap, false)?;
                        if r.total < report.total {
                            accepted = Some(trial);
                            break;
                        }
                        eta *= 0.5;
                    }
                    match accepted {
                        Some(m) => m,
                        None => {
                            result.line_search_failures += 1;
                            x
                        }
                    }
                }
            }
            Optimizer::Momentum { beta } => {
                for (v, g) in velocity.iter_mut().zip(&grad) {
                    *v = *v * beta + *g;
                }
                displaced(&x, &velocity, -step)
            }
            Optimizer::Adaptive { beta1, beta2, epsilon } => {
                let k = (t + 1) as i32;
                let c1 = 1.0 - pow(beta1, k);
                let c2 = 1.0 - pow(beta2, k);
                let mut dir = vec![Vec3::ZERO; n];
                for i in 0..n {
                    m1[i] = m1[i] * beta1 + grad[i] * (1.0 - beta1);
                    for a in 0..3 {
                        let g = grad[i].component(a);
                        let v = m2[i].component(a) * beta2 + g * g * (1.0 - beta2);
                        *m2[i].component_mut(a) = v;
                        *dir[i].component_mut(a) = (m1[i].component(a) / c1) / (math::sqrt(v / c2) + epsilon);
                    }
                }
                displaced(&x, &dir, -step)
            }
        };
        result.steps_taken = t + 1;
    }
    let fresh = problem.capture(&x)?;
    let (report, _) = problem.eval(&x, &fresh, false)?;
    if !report.total.is_finite() {
        result.aborted = Some(Error::NonFiniteLoss { step: config.steps });
    }
    let penetrations = problem.count_body.map(|b| penetration_count(&x, b).count);
    result.trace.push(TraceEntry { step: config.steps, epoch: epoch + 1, report: report.clone(), penetrations });
    result.final_report = Some(report);
    result.final_mesh = x;
    Ok(result)
}

fn pow(b: f64, e: i32) -> f64 {
    let mut r = 1.0;
    for _ in 0..e {
        r *= b;
    }
    r
}

/// Optimizes the positions of `init` toward `target` under `config.recipe`.
/// The interpenetration term is used only when `body` is given.
pub fn refine(init: &TriMesh, target: &TriMesh, body: Option<&Body>, config: &RefineConfig) -> Result<RefineResult> {
    if !init.same_topology(target) {
        return Err(Error::TopologyMismatch);
    }
    let problem = Problem {
        target,
        body,
        count_body: body,
        terms: config.recipe.weighted_terms(&config.weights, body.is_some()),
        recipe: Some(config.recipe),
        weights: config.weights,
        gated: true,
    };
    run(init, &problem, config)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolveConfig {
    /// Weight of the anchor term `L_vert(x, start)`.
    pub mu: f64,
    /// Extra distance (cm) the garment is pushed past the offset body.
    /// `None` uses `d_tol`.
    pub clearance: Option<f64>,
    pub refine: RefineConfig,
}

impl Default for ResolveConfig {
    fn default() -> Self {
        ResolveConfig {
            mu: 0.1,
            clearance: None,
            refine: RefineConfig { steps: 300, optimizer: Optimizer::Plain, snapshot_refresh_every: 1, ..RefineConfig::default() },
        }
    }
}

/// Minimizes `L_pen + μ · L_vert(x, garment)` with every proximity gate open,
/// pushing the garment out of the body while keeping it near its start.
pub fn resolve_penetration(garment: &TriMesh, body: &TriMesh, config: &ResolveConfig) -> Result<RefineResult> {
    if !(config.mu >= 0.0) || !config.mu.is_finite() {
        return Err(Error::InvalidParameter("anchor weight must be finite and non-negative"));
    }
    let weights = config.refine.weights;
    let clearance = config.clearance.unwrap_or(weights.d_tol);
    if !(clearance >= 0.0) {
        return Err(Error::InvalidParameter("clearance must be non-negative"));
    }
    let push = Body::with_clearance(body.clone(), weights.body_offset_fraction, clearance)?;
    let count = Body::new(body.clone(), weights.body_offset_fraction)?;
    let problem = Problem {
        target: garment,
        body: Some(&push),
        count_body: Some(&count),
        terms: vec![(Term::Pen, 1.0), (Term::Vert, config.mu)],
        recipe: None,
        weights,
        gated: false,
    };
    run(garment, &problem, &config.refine)
}
