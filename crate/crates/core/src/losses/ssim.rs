//! Single-scale SSIM over Gaussian-weighted sliding windows (no padding),
//! with its gradient with respect to both inputs.

use super::ensure_same_dims;
use crate::error::{Error, Result};
use crate::grid::SaliencyMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    /// Odd window side length.
    pub window: usize,
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            c1: 0.01 * 0.01,
            c2: 0.03 * 0.03,
        }
    }
}

impl SsimConfig {
    /// Normalized 2-D Gaussian window, row-major.
    fn kernel(&self) -> Vec<f64> {
        let half = (self.window / 2) as f64;
        let g1: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - half;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let sum: f64 = g1.iter().sum();
        let g1: Vec<f64> = g1.iter().map(|v| v / sum).collect();
        let mut k = Vec::with_capacity(self.window * self.window);
        for a in &g1 {
            for b in &g1 {
                k.push(a * b);
            }
        }
        k
    }

    fn validate(&self, w: usize, h: usize) -> Result<()> {
        if self.window == 0 || self.window % 2 == 0 || !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "SSIM window must be odd and sigma positive (window {}, sigma {})",
                self.window, self.sigma
            )));
        }
        if w < self.window || h < self.window {
            return Err(Error::InvalidArgument(format!(
                "{w}x{h} map is smaller than the {0}x{0} SSIM window",
                self.window
            )));
        }
        Ok(())
    }
}

/// Mean SSIM between two maps.
pub fn ssim(x: &SaliencyMap, y: &SaliencyMap, cfg: SsimConfig) -> Result<f64> {
    Ok(run(x, y, cfg, false)?.0)
}

/// Mean SSIM together with its gradients with respect to `x` and `y`.
pub fn ssim_with_grad(
    x: &SaliencyMap,
    y: &SaliencyMap,
    cfg: SsimConfig,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (v, gx, gy) = run(x, y, cfg, true)?;
    Ok((v, gx.unwrap(), gy.unwrap()))
}

type SsimOutput = (f64, Option<Vec<f64>>, Option<Vec<f64>>);

fn run(x: &SaliencyMap, y: &SaliencyMap, cfg: SsimConfig, want_grad: bool) -> Result<SsimOutput> {
    ensure_same_dims("SSIM operand", (x.width(), x.height()), (y.width(), y.height()))?;
    let (w, h) = (x.width(), x.height());
    cfg.validate(w, h)?;
    let k = cfg.window;
    let kernel = cfg.kernel();
    let (xs, ys) = (x.values(), y.values());
    let (ow, oh) = (w - k + 1, h - k + 1);
    let windows = (ow * oh) as f64;

    // Per-window partial derivatives with respect to the raw moments
    // m_x, m_y, E[x^2], E[y^2], E[xy].
    let mut coeffs = if want_grad {
        vec![[0.0; 5]; ow * oh]
    } else {
        Vec::new()
    };
    let mut total = 0.0;
    for oy in 0..oh {
        for ox in 0..ow {
            let (mut mx, mut my, mut qx, mut qy, mut pxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for ky in 0..k {
                let row = (oy + ky) * w + ox;
                for kx in 0..k {
                    let g = kernel[ky * k + kx];
                    let (a, b) = (xs[row + kx], ys[row + kx]);
                    mx += g * a;
                    my += g * b;
                    qx += g * (a * a);
                    qy += g * (b * b);
                    pxy += g * (a * b);
                }
            }
            let a1 = 2.0 * (mx * my) + cfg.c1;
            let a2 = 2.0 * (pxy - mx * my) + cfg.c2;
            let b1 = mx * mx + my * my + cfg.c1;
            let b2 = (qx - mx * mx) + (qy - my * my) + cfg.c2;
            let s = (a1 * a2) / (b1 * b2);
            total += s;
            if want_grad {
                let inv = 1.0 / (b1 * b2);
                let d_mx = (2.0 * my * a2 - 2.0 * my * a1) * inv - s * (2.0 * mx / b1 - 2.0 * mx / b2);
                let d_my = (2.0 * mx * a2 - 2.0 * mx * a1) * inv - s * (2.0 * my / b1 - 2.0 * my / b2);
                let d_q = -s / b2;
                let d_p = 2.0 * a1 * inv;
                coeffs[oy * ow + ox] = [d_mx, d_my, d_q, d_q, d_p];
            }
        }
    }
    let value = total / windows;
    if !want_grad {
        return Ok((value, None, None));
    }

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for oy in 0..oh {
        for ox in 0..ow {
            let [d_mx, d_my, d_qx, d_qy, d_p] = coeffs[oy * ow + ox];
            for ky in 0..k {
                let row = (oy + ky) * w + ox;
                for kx in 0..k {
                    let g = kernel[ky * k + kx] / windows;
                    let i = row + kx;
                    let (a, b) = (xs[i], ys[i]);
                    gx[i] += g * (d_mx + 2.0 * d_qx * a + d_p * b);
                    gy[i] += g * (d_my + 2.0 * d_qy * b + d_p * a);
                }
            }
        }
    }
    Ok((value, Some(gx), Some(gy)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn self_similarity_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = SaliencyMap::new(20, 15, (0..300).map(|_| rng.random()).collect()).unwrap();
        assert_eq!(ssim(&x, &x, SsimConfig::default()).unwrap(), 1.0);
        let c = SaliencyMap::constant(12, 12, 0.5).unwrap();
        assert_eq!(ssim(&c, &c, SsimConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn constant_zero_vs_one_closed_form() {
        let a = SaliencyMap::constant(16, 16, 0.0).unwrap();
        let b = SaliencyMap::constant(16, 16, 1.0).unwrap();
        let c1: f64 = 1e-4;
        let v = ssim(&a, &b, SsimConfig::default()).unwrap();
        assert!((v - c1 / (1.0 + c1)).abs() < 1e-15);
    }

    #[test]
    fn window_larger_than_map_is_rejected() {
        let a = SaliencyMap::constant(10, 20, 0.0).unwrap();
        assert!(matches!(
            ssim(&a, &a, SsimConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn symmetric_in_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = SaliencyMap::new(13, 13, (0..169).map(|_| rng.random()).collect()).unwrap();
        let y = SaliencyMap::new(13, 13, (0..169).map(|_| rng.random()).collect()).unwrap();
        let (vxy, gx, gy) = ssim_with_grad(&x, &y, SsimConfig::default()).unwrap();
        let (vyx, gy2, gx2) = ssim_with_grad(&y, &x, SsimConfig::default()).unwrap();
        assert!((vxy - vyx).abs() < 1e-15);
        for (a, b) in gx.iter().zip(&gx2).chain(gy.iter().zip(&gy2)) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
