//! Bilinear resampling and patch pooling.
//!
//! Both are linear operators; each exposes its adjoint (`backward`) so
//! gradients on the output can be pulled back to the input.

use crate::error::{Error, Result};
use crate::grid::{PatchSaliency, SaliencyMap};

#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

/// Half-pixel-centred interpolation taps from `src` samples to `dst` samples.
fn axis_taps(src: usize, dst: usize) -> Vec<Tap> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            Tap {
                lo,
                hi,
                frac: pos - lo as f64,
            }
        })
        .collect()
}

/// Separable bilinear resampler between two fixed grid sizes.
#[derive(Debug, Clone)]
pub struct Resampler {
    src_w: usize,
    src_h: usize,
    dst_w: usize,
    dst_h: usize,
    xs: Vec<Tap>,
    ys: Vec<Tap>,
}

impl Resampler {
    pub fn new(src_w: usize, src_h: usize, dst_w: usize, dst_h: usize) -> Result<Self> {
        if src_w == 0 || src_h == 0 || dst_w == 0 || dst_h == 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot resample {src_w}x{src_h} to {dst_w}x{dst_h}: dimensions must be at least 1"
            )));
        }
        Ok(Self {
            src_w,
            src_h,
            dst_w,
            dst_h,
            xs: axis_taps(src_w, dst_w),
            ys: axis_taps(src_h, dst_h),
        })
    }

    pub fn src_dims(&self) -> (usize, usize) {
        (self.src_w, self.src_h)
    }

    pub fn dst_dims(&self) -> (usize, usize) {
        (self.dst_w, self.dst_h)
    }

    pub fn is_identity(&self) -> bool {
        self.src_w == self.dst_w && self.src_h == self.dst_h
    }

    /// Resample a row-major plane. Uses `a + t (b - a)` so constant planes
    /// come through exactly.
    pub fn forward(&self, src: &[f64]) -> Vec<f64> {
        assert_eq!(src.len(), self.src_w * self.src_h, "resampler input size");
        if self.is_identity() {
            return src.to_vec();
        }
        let mut rows = vec![0.0; self.src_h * self.dst_w];
        for y in 0..self.src_h {
            let row = &src[y * self.src_w..(y + 1) * self.src_w];
            for (x, t) in self.xs.iter().enumerate() {
                let (a, b) = (row[t.lo], row[t.hi]);
                rows[y * self.dst_w + x] = a + t.frac * (b - a);
            }
        }
        let mut out = vec![0.0; self.dst_h * self.dst_w];
        for (y, t) in self.ys.iter().enumerate() {
            for x in 0..self.dst_w {
                let a = rows[t.lo * self.dst_w + x];
                let b = rows[t.hi * self.dst_w + x];
                out[y * self.dst_w + x] = a + t.frac * (b - a);
            }
        }
        out
    }

    /// Adjoint of [`forward`](Self::forward).
    pub fn backward(&self, grad_out: &[f64]) -> Vec<f64> {
        assert_eq!(grad_out.len(), self.dst_w * self.dst_h, "resampler grad size");
        if self.is_identity() {
            return grad_out.to_vec();
        }
        let mut rows = vec![0.0; self.src_h * self.dst_w];
        for (y, t) in self.ys.iter().enumerate() {
            for x in 0..self.dst_w {
                let g = grad_out[y * self.dst_w + x];
                rows[t.lo * self.dst_w + x] += (1.0 - t.frac) * g;
                rows[t.hi * self.dst_w + x] += t.frac * g;
            }
        }
        let mut out = vec![0.0; self.src_h * self.src_w];
        for y in 0..self.src_h {
            for (x, t) in self.xs.iter().enumerate() {
                let g = rows[y * self.dst_w + x];
                out[y * self.src_w + t.lo] += (1.0 - t.frac) * g;
                out[y * self.src_w + t.hi] += t.frac * g;
            }
        }
        out
    }

    /// Resample an interleaved multi-channel plane (`channels` values per sample).
    pub fn forward_interleaved(&self, src: &[f64], channels: usize) -> Vec<f64> {
        assert_eq!(src.len(), self.src_w * self.src_h * channels);
        let mut out = vec![0.0; self.dst_w * self.dst_h * channels];
        let mut plane = vec![0.0; self.src_w * self.src_h];
        for c in 0..channels {
            for (p, v) in plane.iter_mut().enumerate() {
                *v = src[p * channels + c];
            }
            for (p, v) in self.forward(&plane).into_iter().enumerate() {
                out[p * channels + c] = v;
            }
        }
        out
    }
}

/// Bilinearly resample a saliency map to `new_w x new_h`.
pub fn resample_bilinear(map: &SaliencyMap, new_w: usize, new_h: usize) -> Result<SaliencyMap> {
    let r = Resampler::new(map.width(), map.height(), new_w, new_h)?;
    SaliencyMap::new(new_w, new_h, r.forward(map.values()))
}

/// Mean pooling from a pixel map onto a patch grid, with a bilinear
/// pre-resample when the map is not an exact multiple of the grid.
#[derive(Debug, Clone)]
pub struct PatchPooler {
    grid_w: usize,
    grid_h: usize,
    pre: Option<Resampler>,
    work_w: usize,
    work_h: usize,
}

impl PatchPooler {
    pub fn new(map_w: usize, map_h: usize, grid_w: usize, grid_h: usize) -> Result<Self> {
        if grid_w == 0 || grid_h == 0 {
            return Err(Error::InvalidArgument("patch grid must be at least 1x1".into()));
        }
        if grid_w > map_w || grid_h > map_h {
            return Err(Error::InvalidArgument(format!(
                "patch grid {grid_w}x{grid_h} is larger than the {map_w}x{map_h} map"
            )));
        }
        let nearest = |n: usize, g: usize| ((n as f64 / g as f64).round() as usize).max(1) * g;
        let (work_w, work_h) = (nearest(map_w, grid_w), nearest(map_h, grid_h));
        let pre = if (work_w, work_h) == (map_w, map_h) {
            None
        } else {
            Some(Resampler::new(map_w, map_h, work_w, work_h)?)
        };
        Ok(Self {
            grid_w,
            grid_h,
            pre,
            work_w,
            work_h,
        })
    }

    pub fn forward(&self, map: &[f64]) -> Vec<f64> {
        let resized;
        let work = match &self.pre {
            Some(r) => {
                resized = r.forward(map);
                &resized[..]
            }
            None => map,
        };
        let (bw, bh) = (self.work_w / self.grid_w, self.work_h / self.grid_h);
        let count = (bw * bh) as f64;
        let mut out = vec![0.0; self.grid_w * self.grid_h];
        for (p, slot) in out.iter_mut().enumerate() {
            let (gy, gx) = (p / self.grid_w, p % self.grid_w);
            let mut sum = 0.0;
            for y in gy * bh..(gy + 1) * bh {
                let row = &work[y * self.work_w + gx * bw..y * self.work_w + (gx + 1) * bw];
                sum += row.iter().sum::<f64>();
            }
            *slot = sum / count;
        }
        out
    }

    pub fn backward(&self, grad_patch: &[f64]) -> Vec<f64> {
        assert_eq!(grad_patch.len(), self.grid_w * self.grid_h);
        let (bw, bh) = (self.work_w / self.grid_w, self.work_h / self.grid_h);
        let count = (bw * bh) as f64;
        let mut work = vec![0.0; self.work_w * self.work_h];
        for (y, row) in work.chunks_exact_mut(self.work_w).enumerate() {
            for (x, g) in row.iter_mut().enumerate() {
                *g = grad_patch[(y / bh) * self.grid_w + x / bw] / count;
            }
        }
        match &self.pre {
            Some(r) => r.backward(&work),
            None => work,
        }
    }
}

/// Mean-pool `map` onto a `grid_h x grid_w` patch grid.
pub fn pool_to_patches(map: &SaliencyMap, grid_h: usize, grid_w: usize) -> Result<PatchSaliency> {
    let pooler = PatchPooler::new(map.width(), map.height(), grid_w, grid_h)?;
    PatchSaliency::new(grid_h, grid_w, pooler.forward(map.values()))
}
