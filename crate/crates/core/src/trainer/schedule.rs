use crate::error::{Error, Result};
use crate::losses::{LscKernelConfig, SsimConfig};

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Fraction of all steps spent ramping from `lr_min` to `lr_max`.
    pub warmup_fraction: f64,
    pub seed: u64,
    /// Side length images are expected at; 0 accepts any size.
    pub input_size: usize,
    pub flip_augmentation: bool,
    /// Hidden width of the saliency head.
    pub hidden_width: usize,
    /// Auxiliary heads tapped off the hidden layer (0 to 3).
    pub aux_heads: usize,
    /// Enables the scale-consistency term via a second pass on a
    /// half-resolution input.
    pub ssc_enabled: bool,
    pub lsc: LscKernelConfig,
    pub ssim: SsimConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            batch_size: 16,
            lr_max: 5e-3,
            lr_min: 1e-5,
            momentum: 0.9,
            weight_decay: 5e-4,
            warmup_fraction: 0.1,
            seed: 42,
            input_size: 0,
            flip_augmentation: true,
            hidden_width: 32,
            aux_heads: 1,
            ssc_enabled: true,
            lsc: LscKernelConfig::default(),
            ssim: SsimConfig::default(),
        }
    }
}

/// Peak learning rate of [`TrainConfig::desk_benchmark`].
pub const DESK_LR_MAX: f64 = 0.1;

impl TrainConfig {
    /// Defaults with the peak learning rate raised to [`DESK_LR_MAX`]. At
    /// 64x64 with 50 scenes a run is only 160 steps, and the default peak
    /// barely moves the head from its initialization in that budget.
    pub fn desk_benchmark() -> Self {
        Self {
            lr_max: DESK_LR_MAX,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.lr_min > 0.0 && self.lr_max > 0.0 && self.lr_min <= self.lr_max) {
            return bad(format!(
                "learning rates must satisfy 0 < lr_min <= lr_max (got {} and {})",
                self.lr_min, self.lr_max
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) || !(self.weight_decay >= 0.0) {
            return bad("momentum must lie in [0, 1) and weight decay be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return bad(format!("warmup fraction {} outside [0, 1]", self.warmup_fraction));
        }
        if self.batch_size == 0 || self.hidden_width == 0 {
            return bad("batch size and hidden width must be positive".into());
        }
        if self.aux_heads > 3 {
            return bad(format!("at most 3 auxiliary heads, got {}", self.aux_heads));
        }
        Ok(())
    }

    /// Number of warm-up steps for a run of `total` steps.
    pub fn warmup_steps(&self, total: usize) -> usize {
        ((self.warmup_fraction * total as f64).round() as usize).min(total.saturating_sub(1))
    }
}

/// Triangular schedule: linear `lr_min -> lr_max` over the warm-up steps,
/// then linear back to `lr_min` at the last step.
pub fn triangular_lr(step: usize, total: usize, cfg: &TrainConfig) -> Result<f64> {
    if step >= total {
        return Err(Error::InvalidArgument(format!(
            "step {step} out of range for {total} total steps"
        )));
    }
    let peak = cfg.warmup_steps(total);
    let span = cfg.lr_max - cfg.lr_min;
    let lr = if step < peak {
        cfg.lr_min + span * step as f64 / peak as f64
    } else if step == peak {
        cfg.lr_max
    } else {
        let tail = total - 1 - peak;
        cfg.lr_min + span * (total - 1 - step) as f64 / tail as f64
    };
    Ok(lr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        let cfg = TrainConfig::default();
        let total = 200;
        assert_eq!(triangular_lr(0, total, &cfg).unwrap(), 1e-5);
        let peak = cfg.warmup_steps(total);
        assert_eq!(peak, 20);
        assert_eq!(triangular_lr(peak, total, &cfg).unwrap(), 5e-3);
        assert_eq!(triangular_lr(total - 1, total, &cfg).unwrap(), 1e-5);
        assert!(triangular_lr(total, total, &cfg).is_err());
    }

    #[test]
    fn continuous_and_bounded() {
        let cfg = TrainConfig::default();
        let total = 137;
        let rates: Vec<f64> = (0..total).map(|s| triangular_lr(s, total, &cfg).unwrap()).collect();
        let max_step = (cfg.lr_max - cfg.lr_min) / cfg.warmup_steps(total) as f64;
        for pair in rates.windows(2) {
            assert!((pair[1] - pair[0]).abs() <= max_step + 1e-15);
        }
        assert!(rates.iter().all(|&r| (cfg.lr_min..=cfg.lr_max).contains(&r)));
    }

    #[test]
    fn degenerate_totals() {
        let cfg = TrainConfig::default();
        assert_eq!(triangular_lr(0, 1, &cfg).unwrap(), cfg.lr_max);
        let no_warmup = TrainConfig {
            warmup_fraction: 0.0,
            ..cfg
        };
        assert_eq!(triangular_lr(0, 10, &no_warmup).unwrap(), no_warmup.lr_max);
    }

    #[test]
    fn rejects_inverted_rates() {
        let cfg = TrainConfig {
            lr_min: 1.0,
            lr_max: 0.1,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
