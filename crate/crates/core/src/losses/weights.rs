use crate::curvature::RQ_SCALES;
use crate::error::{Error, Result};

/// Loss weights and tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_pen: f64,
    pub lambda_norm: f64,
    pub lambda_bend: f64,
    /// Weight of the whole physics loss inside the fine-tuning recipes.
    pub lambda_p: f64,
    pub lambda_mc: f64,
    /// Weights of the Rayleigh loss at `K = 8, 16, 32`.
    pub lambda_rq: [f64; 3],
    /// Ground-truth proximity gate of the interpenetration term (cm).
    pub d_tol: f64,
    /// Body points are pushed along their normal by this fraction of the
    /// body's average edge length.
    pub body_offset_fraction: f64,
    /// Per-vertex mean-curvature terms above this value are dropped.
    pub mc_clamp_threshold: Option<f64>,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_pen: 1.0,
            lambda_norm: 0.3,
            lambda_bend: 0.5,
            lambda_p: 0.1,
            lambda_mc: 10.0,
            lambda_rq: [500.0, 50.0, 10.0],
            d_tol: 0.05,
            body_offset_fraction: 0.20,
            mc_clamp_threshold: None,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_pen, self.lambda_norm, self.lambda_bend, self.lambda_p, self.lambda_mc];
        if all.iter().chain(self.lambda_rq.iter()).any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("loss weights must be finite and non-negative"));
        }
        if !(self.d_tol >= 0.0) {
            return Err(Error::InvalidParameter("d_tol must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.body_offset_fraction) {
            return Err(Error::InvalidParameter("body offset fraction must lie in [0, 1]"));
        }
        if let Some(t) = self.mc_clamp_threshold {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter("mean-curvature threshold must be non-negative"));
            }
        }
        Ok(())
    }

    /// Weight of the Rayleigh loss at neighborhood size `k`, if `k` is one of
    /// the standard scales.
    pub fn lambda_rq_for(&self, k: usize) -> Option<f64> {
        RQ_SCALES.iter().position(|s| *s == k).map(|i| self.lambda_rq[i])
    }
}
