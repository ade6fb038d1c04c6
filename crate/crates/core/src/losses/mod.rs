//! Training losses with analytic gradients with respect to the saliency
//! inputs.
//!
//! Normalization: partial cross entropy averages over labeled pixels, the
//! local coherence term averages over counted pixel pairs, and the affinity
//! loss is a sum of two ratios. Degenerate ratio denominators follow the
//! guards in [`crate::numeric`].

mod composite;
mod gsa;
mod lsc;
mod partition;
mod pce;
mod ssc;
mod ssim;

pub use composite::{composite_loss, CompositeResult, HeadInput, Supervision, TermBreakdown};
pub use gsa::{gsa_loss, gsa_loss_dense, gsa_loss_values, GsaParts};
pub use lsc::{lsc_loss, LscKernel, LscKernelConfig};
pub use partition::{gsa_partition, DescentOptions, DescentResult};
pub use pce::partial_cross_entropy;
pub use ssc::{ssc_loss, SscResult};
pub use ssim::{ssim, ssim_with_grad, SsimConfig};

use crate::error::{Error, Result};

/// A scalar loss and its gradient with respect to the input values, in the
/// same order as the input.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl LossResult {
    pub fn zero(len: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; len],
        }
    }
}

/// Loss weights for the staged composite.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    /// Weight of the global affinity loss.
    pub mu: f64,
    /// Weight of the local coherence loss. The default is carried over from
    /// earlier scribble-supervision work and has not been re-tuned here.
    pub beta: f64,
    /// SSIM share of the scale-consistency loss.
    pub alpha_ssc: f64,
    /// Weight of each auxiliary head, in head order.
    pub lambda_stage: Vec<f64>,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            mu: 0.15,
            beta: 0.3,
            alpha_ssc: 0.85,
            lambda_stage: vec![0.8, 0.6, 0.4],
        }
    }
}

impl LossWeights {
    /// Only the partial cross entropy (and scale consistency, if the caller
    /// supplies a second-scale prediction) remain active.
    pub fn pce_only() -> Self {
        Self {
            mu: 0.0,
            beta: 0.0,
            lambda_stage: vec![0.0; 3],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "loss weight {name} must be finite and nonnegative, got {v}"
                )))
            }
        };
        finite_nonneg("mu", self.mu)?;
        finite_nonneg("beta", self.beta)?;
        finite_nonneg("alpha_ssc", self.alpha_ssc)?;
        if self.alpha_ssc > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha_ssc must lie in [0, 1], got {}",
                self.alpha_ssc
            )));
        }
        for &l in &self.lambda_stage {
            finite_nonneg("lambda_stage", l)?;
        }
        Ok(())
    }
}

pub(crate) fn ensure_same_dims(
    what: &'static str,
    (w0, h0): (usize, usize),
    (w1, h1): (usize, usize),
) -> Result<()> {
    if (w0, h0) != (w1, h1) {
        return Err(Error::DimensionMismatch {
            what,
            expected: format!("{w0}x{h0}"),
            actual: format!("{w1}x{h1}"),
        });
    }
    Ok(())
}
