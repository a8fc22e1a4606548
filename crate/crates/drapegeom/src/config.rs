//! Tool configuration: every tunable constant with its default, read from
//! TOML or from the JSON `config` object of an earlier report.
//!
//! Keys carry their unit (`_cm`, `_deg`, `_per_cm2`) where one applies.

use std::path::Path;

use drapegeom_core::curvature::RQ_SCALES;
use drapegeom_core::grad::FdConfig;
use drapegeom_core::losses::{LossWeights, Recipe};
use drapegeom_core::refine::{Optimizer, RefineConfig, ResolveConfig};
use drapegeom_core::spatial;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub weights: WeightsConfig,
    pub spatial: SpatialConfig,
    pub curvature: CurvatureConfig,
    pub metrics: MetricsConfig,
    pub refine: RefineSection,
    pub resolve: ResolveSection,
    pub gradcheck: GradcheckSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub lambda_pen: f64,
    pub lambda_norm: f64,
    pub lambda_bend: f64,
    pub lambda_p: f64,
    pub lambda_mc: f64,
    pub lambda_rq8: f64,
    pub lambda_rq16: f64,
    pub lambda_rq32: f64,
    pub d_tol_cm: f64,
    /// Fraction of the body's average edge length.
    pub body_offset_fraction: f64,
    pub mc_drop_threshold_per_cm2: Option<f64>,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig::from(&LossWeights::default())
    }
}

impl From<&LossWeights> for WeightsConfig {
    fn from(w: &LossWeights) -> Self {
        WeightsConfig {
            lambda_pen: w.lambda_pen,
            lambda_norm: w.lambda_norm,
            lambda_bend: w.lambda_bend,
            lambda_p: w.lambda_p,
            lambda_mc: w.lambda_mc,
            lambda_rq8: w.lambda_rq[0],
            lambda_rq16: w.lambda_rq[1],
            lambda_rq32: w.lambda_rq[2],
            d_tol_cm: w.d_tol,
            body_offset_fraction: w.body_offset_fraction,
            mc_drop_threshold_per_cm2: w.mc_clamp_threshold,
        }
    }
}

impl WeightsConfig {
    pub fn to_weights(&self) -> LossWeights {
        LossWeights {
            lambda_pen: self.lambda_pen,
            lambda_norm: self.lambda_norm,
            lambda_bend: self.lambda_bend,
            lambda_p: self.lambda_p,
            lambda_mc: self.lambda_mc,
            lambda_rq: [self.lambda_rq8, self.lambda_rq16, self.lambda_rq32],
            d_tol: self.d_tol_cm,
            body_offset_fraction: self.body_offset_fraction,
            mc_clamp_threshold: self.mc_drop_threshold_per_cm2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialConfig {
    pub pooling_k: usize,
    pub downsample_factor: usize,
    pub average_pooling_k: usize,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig {
            pooling_k: spatial::DEFAULT_POOLING_K,
            downsample_factor: spatial::DEFAULT_DOWNSAMPLE_FACTOR,
            average_pooling_k: spatial::DEFAULT_AVERAGE_POOLING_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureConfig {
    /// Neighborhood size of the eigen and Rayleigh fields.
    pub k: usize,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        CurvatureConfig { k: RQ_SCALES[1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub distance_thresholds_cm: Vec<f64>,
    pub angle_thresholds_deg: Vec<f64>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            distance_thresholds_cm: (0..=20).map(|i| i as f64 / 10.0).collect(),
            angle_thresholds_deg: (0..=18).map(|i| i as f64 * 5.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RecipeName {
    P,
    Mc,
    Rq,
    Mcrq,
}

impl RecipeName {
    pub fn recipe(self) -> Recipe {
        match self {
            RecipeName::P => Recipe::P,
            RecipeName::Mc => Recipe::McTot,
            RecipeName::Rq => Recipe::RqTot,
            RecipeName::Mcrq => Recipe::McRqTot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerName {
    Plain,
    Momentum,
    Adaptive,
}

/// Optimizer settings shared by `refine` and `resolve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerName,
    pub steps: usize,
    /// `None` derives the step from the initial mesh's average edge length.
    pub step_size_cm: Option<f64>,
    pub momentum_beta: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub snapshot_refresh_every: usize,
    pub trace_every: usize,
}

impl OptimizerConfig {
    fn from_refine(c: &RefineConfig) -> Self {
        let Optimizer::Momentum { beta } = Optimizer::MOMENTUM else { unreachable!() };
        let Optimizer::Adaptive { beta1, beta2, epsilon } = Optimizer::ADAPTIVE else { unreachable!() };
        let kind = match c.optimizer {
            Optimizer::Plain => OptimizerName::Plain,
            Optimizer::Momentum { .. } => OptimizerName::Momentum,
            Optimizer::Adaptive { .. } => OptimizerName::Adaptive,
        };
        OptimizerConfig {
            kind,
            steps: c.steps,
            step_size_cm: c.step_size,
            momentum_beta: beta,
            adam_beta1: beta1,
            adam_beta2: beta2,
            adam_epsilon: epsilon,
            snapshot_refresh_every: c.snapshot_refresh_every,
            trace_every: c.trace_every,
        }
    }

    fn to_refine(&self, recipe: Recipe, weights: LossWeights) -> RefineConfig {
        let optimizer = match self.kind {
            OptimizerName::Plain => Optimizer::Plain,
            OptimizerName::Momentum => Optimizer::Momentum { beta: self.momentum_beta },
            OptimizerName::Adaptive => {
                Optimizer::Adaptive { beta1: self.adam_beta1, beta2: self.adam_beta2, epsilon: self.adam_epsilon }
            }
        };
        RefineConfig {
            recipe,
            weights,
            steps: self.steps,
            optimizer,
            step_size: self.step_size_cm,
            snapshot_refresh_every: self.snapshot_refresh_every,
            trace_every: self.trace_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub recipe: RecipeName,
    pub optimizer: OptimizerConfig,
}

impl Default for RefineSection {
    fn default() -> Self {
        RefineSection { recipe: RecipeName::P, optimizer: OptimizerConfig::from_refine(&RefineConfig::default()) }
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::from_refine(&RefineConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolveSection {
    /// Weight of the pull back towards the starting garment.
    pub anchor_weight: f64,
    /// `None` uses `d_tol_cm`.
    pub clearance_cm: Option<f64>,
    pub optimizer: OptimizerConfig,
}

impl Default for ResolveSection {
    fn default() -> Self {
        let d = ResolveConfig::default();
        ResolveSection { anchor_weight: d.mu, clearance_cm: d.clearance, optimizer: OptimizerConfig::from_refine(&d.refine) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSection {
    pub h_cm: f64,
    pub trials: usize,
    pub coordinates_per_scene: usize,
    pub resample_budget: usize,
    pub absolute_floor: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        let d = FdConfig::default();
        GradcheckSection {
            h_cm: d.h,
            trials: d.trials,
            coordinates_per_scene: d.coordinates,
            resample_budget: d.resample_budget,
            absolute_floor: d.absolute_floor,
            tolerance: 1e-5,
            seed: d.seed,
        }
    }
}

impl GradcheckSection {
    pub fn fd_config(&self) -> FdConfig {
        FdConfig {
            h: self.h_cm,
            trials: self.trials,
            coordinates: self.coordinates_per_scene,
            seed: self.seed,
            resample_budget: self.resample_budget,
            absolute_floor: self.absolute_floor,
        }
    }
}

impl Config {
    pub fn weights(&self) -> LossWeights {
        self.weights.to_weights()
    }

    pub fn refine_config(&self) -> RefineConfig {
        self.refine.optimizer.to_refine(self.refine.recipe.recipe(), self.weights())
    }

    pub fn resolve_config(&self) -> ResolveConfig {
        ResolveConfig {
            mu: self.resolve.anchor_weight,
            clearance: self.resolve.clearance_cm,
            refine: self.resolve.optimizer.to_refine(Recipe::P, self.weights()),
        }
    }

    /// Rejects values the library would refuse, before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        self.weights().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.refine_config().validate().map_err(|e| Error::Config(format!("refine: {e}")))?;
        self.resolve_config().refine.validate().map_err(|e| Error::Config(format!("resolve: {e}")))?;
        if !(self.resolve.anchor_weight >= 0.0) || !self.resolve.anchor_weight.is_finite() {
            return bad("resolve.anchor_weight must be finite and non-negative");
        }
        if self.resolve.clearance_cm.is_some_and(|c| !(c >= 0.0)) {
            return bad("resolve.clearance_cm must be non-negative");
        }
        if self.spatial.pooling_k == 0 || self.spatial.downsample_factor == 0 || self.spatial.average_pooling_k == 0 {
            return bad("spatial sizes must be at least 1");
        }
        if self.curvature.k < 2 {
            return bad("curvature.k must be at least 2");
        }
        let g = &self.gradcheck;
        if !(g.h_cm > 0.0) || !(g.tolerance > 0.0) || !(g.absolute_floor >= 0.0) {
            return bad("gradcheck.h_cm and gradcheck.tolerance must be positive");
        }
        if g.coordinates_per_scene == 0 || g.resample_budget == 0 {
            return bad("gradcheck sample counts must be at least 1");
        }
        let m = &self.metrics;
        if m.distance_thresholds_cm.iter().chain(&m.angle_thresholds_deg).any(|t| t.is_nan()) {
            return bad("metric thresholds must not be NaN");
        }
        Ok(())
    }

    /// Reads a `.toml` file, or a `.json` file holding either a config or a
    /// report with a `config` member.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Config::from_json(&text, path)
        } else {
            Config::from_toml(&text, path)
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Config> {
        toml::from_str(text).map_err(|e| {
            let location = e.span().map_or(Location::Unknown, |s| Location::Line(line_of(text, s.start)));
            Error::parse(path, location, e.message().to_string())
        })
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Config> {
        let json_err = |e: serde_json::Error| Error::parse(path, Location::Line(e.line()), e.to_string());
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        let is_report = value.get("tool").and_then(|t| t.as_str()) == Some(crate::TOOL_NAME);
        if is_report {
            value = value.get_mut("config").map(serde_json::Value::take).unwrap_or_default();
        }
        serde_json::from_value(value).map_err(|e| Error::parse(path, Location::Unknown, e.to_string()))
    }

    /// Reads a weights file: either a full config or a bare table of weight
    /// keys.
    pub fn load_weights(path: &Path) -> Result<WeightsConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if let Ok(w) = toml::from_str::<WeightsConfig>(&text) {
            return Ok(w);
        }
        Ok(Config::from_toml(&text, path)?.weights)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}
