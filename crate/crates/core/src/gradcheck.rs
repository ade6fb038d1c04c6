//! Central finite-difference checks of the analytic loss gradients.
//!
//! Random instances keep every pair of values that meets inside an absolute
//! value (local coherence pairs, the L1 part of scale consistency) at least
//! `1e-3` apart, so no finite-difference stencil straddles a kink.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::affinity::{build_graph_with, GraphOptions};
use crate::error::Result;
use crate::grid::{FeatureField, Label, PatchSaliency, RgbImage, SaliencyMap, ScribbleMask};
use crate::losses::{
    composite_loss, gsa_loss, lsc_loss, partial_cross_entropy, ssc_loss, HeadInput, LossWeights,
    LscKernelConfig, SsimConfig, Supervision,
};
use crate::resample::Resampler;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub step: f64,
    pub rel_tol: f64,
    /// Components whose absolute error is below this pass regardless of the
    /// relative error.
    pub abs_tol: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-5,
            rel_tol: 1e-4,
            abs_tol: 1e-7,
        }
    }
}

/// Worst-case errors over the checked components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckOutcome {
    pub components: usize,
    pub failures: usize,
    pub max_abs_err: f64,
    /// Largest relative error among components whose absolute error exceeds
    /// the absolute tolerance, so the check passes iff this is within the
    /// relative tolerance.
    pub max_rel_err: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn merge(&mut self, other: &CheckOutcome) {
        self.components += other.components;
        self.failures += other.failures;
        self.max_abs_err = self.max_abs_err.max(other.max_abs_err);
        self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
    }
}

/// Compare `analytic` with central differences of `f` at `x`.
pub fn check_gradient(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x: &[f64],
    analytic: &[f64],
    cfg: &GradCheckConfig,
) -> Result<CheckOutcome> {
    assert_eq!(x.len(), analytic.len(), "gradient length");
    let mut out = CheckOutcome::default();
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + cfg.step;
        let plus = f(&probe)?;
        probe[k] = x[k] - cfg.step;
        let minus = f(&probe)?;
        probe[k] = x[k];
        let fd = (plus - minus) / (2.0 * cfg.step);
        let abs = (fd - analytic[k]).abs();
        let scale = fd.abs().max(analytic[k].abs());
        let rel = if scale > 0.0 { abs / scale } else { 0.0 };
        out.components += 1;
        out.max_abs_err = out.max_abs_err.max(abs);
        if abs > cfg.abs_tol {
            out.max_rel_err = out.max_rel_err.max(rel);
        }
        if !(abs <= cfg.abs_tol || rel <= cfg.rel_tol) {
            out.failures += 1;
        }
    }
    Ok(out)
}

/// Summary for one loss over all its random instances.
#[derive(Debug, Clone, PartialEq)]
pub struct LossCheck {
    pub loss: &'static str,
    pub instances: usize,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<LossCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome.passed())
    }

    pub fn get(&self, loss: &str) -> Option<&LossCheck> {
        self.checks.iter().find(|c| c.loss == loss)
    }
}

pub const SUITE_LOSSES: [&str; 5] = ["pce", "lsc", "ssc", "gsa", "composite"];

/// `n` values in `(0.02, 0.98)`, pairwise at least `0.48 / n` apart.
fn spread_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let gap = 0.96 / n as f64;
    let mut v: Vec<f64> = (0..n)
        .map(|k| 0.02 + gap * (k as f64 + 0.25 + 0.5 * rng.random::<f64>()))
        .collect();
    v.shuffle(rng);
    v
}

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Result<ScribbleMask> {
    let mut labels: Vec<Label> = (0..w * h)
        .map(|_| match rng.random_range(0..4) {
            0 => Label::Foreground,
            1 => Label::Background,
            _ => Label::Unlabeled,
        })
        .collect();
    labels[0] = Label::Foreground;
    labels[1] = Label::Background;
    labels.shuffle(rng);
    ScribbleMask::new(w, h, labels)
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Result<RgbImage> {
    RgbImage::new(w, h, (0..w * h * 3).map(|_| rng.random()).collect())
}

fn random_features(rng: &mut ChaCha8Rng, gh: usize, gw: usize, d: usize) -> Result<FeatureField> {
    FeatureField::new(gh, gw, d, (0..gh * gw * d).map(|_| StandardNormal.sample(rng)).collect())
}

/// `base` pushed away from itself by `[1e-2, 0.2)` in a random direction,
/// staying inside `(0, 1)`.
fn offset_map(rng: &mut ChaCha8Rng, base: &[f64]) -> Vec<f64> {
    base.iter()
        .map(|&v| {
            let d = rng.random_range(0.01..0.2);
            if (rng.random_bool(0.5) && v + d < 0.99) || v - d <= 0.01 {
                v + d
            } else {
                v - d
            }
        })
        .collect()
}

fn check_pce(rng: &mut ChaCha8Rng, cfg: &GradCheckConfig) -> Result<CheckOutcome> {
    let (w, h) = (rng.random_range(3..=12), rng.random_range(3..=12));
    let mask = random_mask(rng, w, h)?;
    let x: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.02..0.98)).collect();
    let eval = |v: &[f64]| partial_cross_entropy(&SaliencyMap::new(w, h, v.to_vec())?, &mask);
    let analytic = eval(&x)?.grad;
    check_gradient(|v| Ok(eval(v)?.value), &x, &analytic, cfg)
}

fn check_lsc(rng: &mut ChaCha8Rng, cfg: &GradCheckConfig) -> Result<CheckOutcome> {
    let (w, h) = (rng.random_range(4..=10), rng.random_range(4..=10));
    let image = random_image(rng, w, h)?;
    let kernel = LscKernelConfig {
        radius: rng.random_range(1..w.min(h).min(4)),
        sigma_color: rng.random_range(0.1..0.6),
        sigma_pos: rng.random_range(1.0..6.0),
    };
    let x = spread_values(rng, w * h);
    let eval = |v: &[f64]| lsc_loss(&SaliencyMap::new(w, h, v.to_vec())?, &image, kernel);
    let analytic = eval(&x)?.grad;
    check_gradient(|v| Ok(eval(v)?.value), &x, &analytic, cfg)
}

fn check_ssc(rng: &mut ChaCha8Rng, cfg: &GradCheckConfig) -> Result<CheckOutcome> {
    let (w, h) = (rng.random_range(7..=12), rng.random_range(7..=12));
    let ssim = SsimConfig {
        window: [3, 5, 7][rng.random_range(0..3)],
        ..SsimConfig::default()
    };
    let alpha = rng.random_range(0.0..1.0);
    let a: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.02..0.98)).collect();
    let b = offset_map(rng, &a);
    let n = w * h;
    let eval = |v: &[f64]| {
        ssc_loss(
            &SaliencyMap::new(w, h, v[..n].to_vec())?,
            &SaliencyMap::new(w, h, v[n..].to_vec())?,
            alpha,
            ssim,
        )
    };
    let x: Vec<f64> = a.iter().chain(&b).copied().collect();
    let r = eval(&x)?;
    let analytic: Vec<f64> = r.grad_downscaled_pred.iter().chain(&r.grad_pred_of_downscaled).copied().collect();
    check_gradient(|v| Ok(eval(v)?.value), &x, &analytic, cfg)
}

fn check_gsa(rng: &mut ChaCha8Rng, cfg: &GradCheckConfig) -> Result<CheckOutcome> {
    let (gh, gw, d) = (rng.random_range(1..=8), rng.random_range(2..=8), rng.random_range(2..=16));
    let features = random_features(rng, gh, gw, d)?;
    // Every other instance takes the clamped, dense route.
    let clamp = rng.random_bool(0.5);
    let graph = build_graph_with(
        &features,
        GraphOptions {
            materialize: clamp,
            clamp_negative: clamp,
        },
    )?;
    let x: Vec<f64> = (0..gh * gw).map(|_| rng.random_range(0.02..0.98)).collect();
    let eval = |v: &[f64]| gsa_loss(&PatchSaliency::new(gh, gw, v.to_vec())?, &graph);
    let analytic = eval(&x)?.grad;
    check_gradient(|v| Ok(eval(v)?.value), &x, &analytic, cfg)
}

fn check_composite(rng: &mut ChaCha8Rng, cfg: &GradCheckConfig) -> Result<CheckOutcome> {
    let (w, h) = (12, 12);
    let (sw, sh) = (6, 6);
    let image = random_image(rng, w, h)?;
    let mask = random_mask(rng, w, h)?;
    let d = rng.random_range(2..=8);
    let features = random_features(rng, 3, 3, d)?;
    let graph = build_graph_with(&features, GraphOptions::default())?;
    let aux = rng.random_range(0..=3);
    let weights = LossWeights {
        mu: rng.random_range(0.05..1.0),
        beta: rng.random_range(0.05..1.0),
        alpha_ssc: rng.random_range(0.0..1.0),
        lambda_stage: (0..aux).map(|_| rng.random_range(0.1..1.0)).collect(),
    };
    let sup = Supervision {
        image: &image,
        mask: &mask,
        graph: &graph,
        patch_grid: (3, 3),
        lsc: LscKernelConfig {
            radius: 2,
            ..LscKernelConfig::default()
        },
        ssim: SsimConfig {
            window: 5,
            ..SsimConfig::default()
        },
    };
    let n = w * h;
    let mut x = Vec::with_capacity((aux + 1) * n + sw * sh);
    for _ in 0..=aux {
        x.extend(spread_values(rng, n));
    }
    let down = Resampler::new(w, h, sw, sh)?.forward(&x[..n]);
    x.extend(offset_map(rng, &down));
    let eval = |v: &[f64]| {
        let maps = (0..=aux)
            .map(|k| SaliencyMap::new(w, h, v[k * n..(k + 1) * n].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let small = SaliencyMap::new(sw, sh, v[(aux + 1) * n..].to_vec())?;
        let mut heads = vec![HeadInput {
            pred: &maps[0],
            pred_of_downscaled: Some(&small),
        }];
        heads.extend(maps[1..].iter().map(HeadInput::new));
        composite_loss(&heads, &sup, &weights)
    };
    let r = eval(&x)?;
    let mut analytic: Vec<f64> = r.grads.concat();
    analytic.extend(r.grad_pred_of_downscaled.expect("dominant head has a downscaled prediction"));
    check_gradient(|v| Ok(eval(v)?.value), &x, &analytic, cfg)
}

/// Check every loss on `instances` random instances drawn from `seed`.
pub fn run_suite(seed: u64, instances: usize, cfg: &GradCheckConfig) -> Result<SuiteReport> {
    type Checker = fn(&mut ChaCha8Rng, &GradCheckConfig) -> Result<CheckOutcome>;
    let checkers: [(&'static str, Checker); 5] = [
        ("pce", check_pce),
        ("lsc", check_lsc),
        ("ssc", check_ssc),
        ("gsa", check_gsa),
        ("composite", check_composite),
    ];
    let mut checks = Vec::with_capacity(checkers.len());
    for (index, (loss, checker)) in checkers.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
        let mut outcome = CheckOutcome::default();
        for _ in 0..instances {
            outcome.merge(&checker(&mut rng, cfg)?);
        }
        checks.push(LossCheck {
            loss,
            instances,
            outcome,
        });
    }
    Ok(SuiteReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_a_wrong_gradient() {
        let x = [0.3, -1.2];
        let square = |v: &[f64]| Ok(v.iter().map(|a| a * a).sum::<f64>());
        let good = check_gradient(square, &x, &[0.6, -2.4], &GradCheckConfig::default()).unwrap();
        assert!(good.passed());
        let bad = check_gradient(square, &x, &[0.6, -2.0], &GradCheckConfig::default()).unwrap();
        assert_eq!(bad.failures, 1);
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let a = run_suite(7, 3, &GradCheckConfig::default()).unwrap();
        assert!(a.passed(), "{a:?}");
        assert_eq!(a, run_suite(7, 3, &GradCheckConfig::default()).unwrap());
        assert_eq!(a.checks.len(), SUITE_LOSSES.len());
    }
}
