use super::ssim::{ssim_with_grad, SsimConfig};
use super::ensure_same_dims;
use crate::error::{Error, Result};
use crate::grid::SaliencyMap;

/// Scale-consistency loss value with gradients for both operands.
#[derive(Debug, Clone, PartialEq)]
pub struct SscResult {
    pub value: f64,
    /// Gradient with respect to the downscaled full-resolution prediction.
    pub grad_downscaled_pred: Vec<f64>,
    /// Gradient with respect to the prediction on the downscaled input.
    pub grad_pred_of_downscaled: Vec<f64>,
}

/// `alpha * (1 - SSIM(a, b)) / 2 + (1 - alpha) * mean |a - b|`, where `a` is
/// the full-resolution prediction downscaled and `b` the prediction made on
/// the downscaled input.
pub fn ssc_loss(
    pred_full_downscaled: &SaliencyMap,
    pred_of_downscaled_input: &SaliencyMap,
    alpha: f64,
    ssim_cfg: SsimConfig,
) -> Result<SscResult> {
    let (a, b) = (pred_full_downscaled, pred_of_downscaled_input);
    ensure_same_dims("scale-consistency operand", (a.width(), a.height()), (b.width(), b.height()))?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let n = a.len() as f64;
    let mut l1 = 0.0;
    let mut ga = vec![0.0; a.len()];
    let mut gb = vec![0.0; b.len()];
    for (i, (&x, &y)) in a.values().iter().zip(b.values()).enumerate() {
        let d = x - y;
        l1 += d.abs();
        let s = if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
        ga[i] = (1.0 - alpha) * s / n;
        gb[i] = -(1.0 - alpha) * s / n;
    }
    let mut value = (1.0 - alpha) * l1 / n;
    if alpha > 0.0 {
        let (s, gsa, gsb) = ssim_with_grad(a, b, ssim_cfg)?;
        value += alpha * (1.0 - s) / 2.0;
        for (g, d) in ga.iter_mut().zip(&gsa) {
            *g -= alpha * d / 2.0;
        }
        for (g, d) in gb.iter_mut().zip(&gsb) {
            *g -= alpha * d / 2.0;
        }
    }
    Ok(SscResult {
        value,
        grad_downscaled_pred: ga,
        grad_pred_of_downscaled: gb,
    })
}
