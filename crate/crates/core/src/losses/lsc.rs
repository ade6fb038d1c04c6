//! Local saliency coherence: a bilateral-kernel weighted L1 penalty between
//! each pixel and its neighbours inside a square window.
//!
//! ```text
//! F(i,j) = 1/|K_i| * exp(-|I_i - I_j|^2 / 2 sigma_I^2 - |P_i - P_j|^2 / 2 sigma_P^2)
//! L      = sum_i sum_{j in K_i} F(i,j) |S_i - S_j| / sum_i |K_i|
//! ```
//!
//! `K_i` is the window of Chebyshev radius `radius` around `i`, clipped to
//! the image and excluding `i`.

use super::{ensure_same_dims, LossResult};
use crate::error::{Error, Result};
use crate::grid::{RgbImage, SaliencyMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LscKernelConfig {
    pub radius: usize,
    /// Color scale, for RGB in `[0, 1]`.
    pub sigma_color: f64,
    /// Spatial scale in pixels.
    pub sigma_pos: f64,
}

impl Default for LscKernelConfig {
    fn default() -> Self {
        Self {
            radius: 5,
            sigma_color: 0.1,
            sigma_pos: 5.0,
        }
    }
}

/// Bilateral kernel bound to one image. Color weights are evaluated lazily;
/// only the spatial table and per-pixel normalizers are precomputed.
#[derive(Debug, Clone)]
pub struct LscKernel<'a> {
    image: &'a RgbImage,
    cfg: LscKernelConfig,
    /// `(dx, dy, spatial weight)` for the forward half of the window.
    offsets: Vec<(isize, isize, f64)>,
    inv_window: Vec<f64>,
    pair_count: f64,
}

impl<'a> LscKernel<'a> {
    pub fn new(image: &'a RgbImage, cfg: LscKernelConfig) -> Result<Self> {
        let (w, h) = (image.width(), image.height());
        if cfg.radius == 0 || cfg.radius >= w.min(h) {
            return Err(Error::InvalidArgument(format!(
                "window radius {} must be in [1, {}) for a {w}x{h} image",
                cfg.radius,
                w.min(h)
            )));
        }
        if !(cfg.sigma_color > 0.0 && cfg.sigma_pos > 0.0) {
            return Err(Error::InvalidArgument(
                "kernel scales must be positive".into(),
            ));
        }
        let r = cfg.radius as isize;
        let mut offsets = Vec::new();
        for dy in 0..=r {
            for dx in -r..=r {
                if dy == 0 && dx <= 0 {
                    continue;
                }
                let d2 = (dx * dx + dy * dy) as f64;
                offsets.push((dx, dy, (-d2 / (2.0 * cfg.sigma_pos * cfg.sigma_pos)).exp()));
            }
        }
        let span = |c: usize, n: usize| (c + cfg.radius).min(n - 1) + 1 - c.saturating_sub(cfg.radius);
        let mut inv_window = Vec::with_capacity(w * h);
        let mut pair_count = 0.0;
        for y in 0..h {
            for x in 0..w {
                let k = (span(x, w) * span(y, h) - 1) as f64;
                inv_window.push(1.0 / k);
                pair_count += k;
            }
        }
        Ok(Self {
            image,
            cfg,
            offsets,
            inv_window,
            pair_count,
        })
    }

    pub fn config(&self) -> LscKernelConfig {
        self.cfg
    }

    /// Number of ordered pixel pairs the loss averages over.
    pub fn pair_count(&self) -> f64 {
        self.pair_count
    }

    /// Visit each unordered in-window pair once as `(i, j, F(i,j) + F(j,i))`.
    fn for_each_pair(&self, mut f: impl FnMut(usize, usize, f64)) {
        let (w, h) = (self.image.width(), self.image.height());
        let rgb = self.image.data();
        let color_scale = 1.0 / (2.0 * self.cfg.sigma_color * self.cfg.sigma_color);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let ci = &rgb[i * 3..i * 3 + 3];
                for &(dx, dy, spatial) in &self.offsets {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    let cj = &rgb[j * 3..j * 3 + 3];
                    let dc = (ci[0] - cj[0]).powi(2) + (ci[1] - cj[1]).powi(2) + (ci[2] - cj[2]).powi(2);
                    let kernel = spatial * (-dc * color_scale).exp();
                    f(i, j, kernel * (self.inv_window[i] + self.inv_window[j]));
                }
            }
        }
    }

    pub fn evaluate(&self, pred: &SaliencyMap) -> Result<LossResult> {
        ensure_same_dims(
            "saliency map",
            (self.image.width(), self.image.height()),
            (pred.width(), pred.height()),
        )?;
        let s = pred.values();
        let norm = 1.0 / self.pair_count;
        let mut value = 0.0;
        let mut grad = vec![0.0; s.len()];
        self.for_each_pair(|i, j, weight| {
            let d = s[i] - s[j];
            value += weight * d.abs();
            // Subgradient of |d| is taken as 0 at d = 0.
            let g = weight * norm * if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
            grad[i] += g;
            grad[j] -= g;
        });
        Ok(LossResult {
            value: value * norm,
            grad,
        })
    }
}

/// Local saliency coherence loss of `pred` against the colors of `image`.
pub fn lsc_loss(pred: &SaliencyMap, image: &RgbImage, kernel: LscKernelConfig) -> Result<LossResult> {
    LscKernel::new(image, kernel)?.evaluate(pred)
}
