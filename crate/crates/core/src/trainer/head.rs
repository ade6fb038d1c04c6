//! Two-layer pixel-wise saliency head.
//!
//! Each pixel sees its RGB value and the bilinearly upsampled, unit-normalized
//! patch feature at its location:
//!
//! ```text
//! h     = tanh(W1 x + b1)
//! s_dom = sigmoid(w2 . h + b2)
//! s_k   = sigmoid(a_k . h + c_k)      auxiliary taps
//! ```
//!
//! Parameters live in one flat vector: `W1` (hidden x input, row-major),
//! `b1`, `w2`, `b2`, then `(a_k, c_k)` per auxiliary tap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::{FeatureField, RgbImage, SaliencyMap};
use crate::resample::Resampler;

/// Per-pixel head inputs, `channels` values per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelInputs {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl PixelInputs {
    pub fn new(image: &RgbImage, features: &FeatureField) -> Result<Self> {
        let (w, h) = (image.width(), image.height());
        if w < features.grid_w() || h < features.grid_h() {
            return Err(Error::DimensionMismatch {
                what: "feature grid",
                expected: format!("at most {w}x{h} patches"),
                actual: format!("{}x{}", features.grid_w(), features.grid_h()),
            });
        }
        let d = features.dim();
        let unit = features.unit_normalized();
        let up = Resampler::new(features.grid_w(), features.grid_h(), w, h)?.forward_interleaved(unit.data(), d);
        let channels = 3 + d;
        let mut data = Vec::with_capacity(w * h * channels);
        for (rgb, f) in image.data().chunks_exact(3).zip(up.chunks_exact(d)) {
            data.extend_from_slice(rgb);
            data.extend_from_slice(f);
        }
        Ok(Self {
            width: w,
            height: h,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyHead {
    inputs: usize,
    hidden: usize,
    aux: usize,
    params: Vec<f64>,
}

/// Forward-pass intermediates needed by [`SaliencyHead::backward`].
#[derive(Debug, Clone)]
pub struct Activations {
    hidden: Vec<f64>,
    /// Dominant output first, then each auxiliary tap.
    pub outputs: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl SaliencyHead {
    /// `W1 ~ N(0, 1/inputs)` from `seed`; every other parameter is zero, so a
    /// fresh head predicts 0.5 everywhere.
    pub fn new(inputs: usize, hidden: usize, aux: usize, seed: u64) -> Result<Self> {
        if inputs == 0 || hidden == 0 || aux > 3 {
            return Err(Error::InvalidArgument(format!(
                "head needs positive input and hidden widths and at most 3 auxiliary taps, got {inputs}/{hidden}/{aux}"
            )));
        }
        let mut params = vec![0.0; Self::count(inputs, hidden, aux)];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, (1.0 / inputs as f64).sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        params[..hidden * inputs].iter_mut().for_each(|p| *p = normal.sample(&mut rng));
        Ok(Self {
            inputs,
            hidden,
            aux,
            params,
        })
    }

    /// Rebuild a head from a flat parameter vector.
    pub fn from_params(inputs: usize, hidden: usize, aux: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::count(inputs, hidden, aux);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "head parameters",
                expected: expected.to_string(),
                actual: params.len().to_string(),
            });
        }
        if let Some((index, &value)) = params.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "head parameters",
                index,
                value,
            });
        }
        Ok(Self {
            inputs,
            hidden,
            aux,
            params,
        })
    }

    fn count(inputs: usize, hidden: usize, aux: usize) -> usize {
        hidden * inputs + 2 * hidden + 1 + aux * (hidden + 1)
    }

    pub fn input_width(&self) -> usize {
        self.inputs
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden
    }

    pub fn aux_count(&self) -> usize {
        self.aux
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offsets(&self) -> (usize, usize, usize, usize) {
        let b1 = self.hidden * self.inputs;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden;
        (b1, w2, b2, b2 + 1)
    }

    fn check_inputs(&self, x: &PixelInputs) -> Result<()> {
        if x.channels != self.inputs {
            return Err(Error::DimensionMismatch {
                what: "head input channels",
                expected: self.inputs.to_string(),
                actual: x.channels.to_string(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &PixelInputs) -> Result<Activations> {
        self.check_inputs(x)?;
        let (hw, c) = (self.hidden, self.inputs);
        let (o_b1, o_w2, o_b2, o_aux) = self.offsets();
        let p = &self.params;
        let n = x.len();
        let mut hidden = vec![0.0; n * hw];
        let mut outputs = vec![vec![0.0; n]; 1 + self.aux];
        for i in 0..n {
            let xi = x.pixel(i);
            let hi = &mut hidden[i * hw..(i + 1) * hw];
            for (u, slot) in hi.iter_mut().enumerate() {
                let row = &p[u * c..(u + 1) * c];
                let z: f64 = row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + p[o_b1 + u];
                *slot = z.tanh();
            }
            let z: f64 = hi.iter().zip(&p[o_w2..o_b2]).map(|(a, b)| a * b).sum::<f64>() + p[o_b2];
            outputs[0][i] = sigmoid(z);
            for k in 0..self.aux {
                let base = o_aux + k * (hw + 1);
                let z: f64 = hi.iter().zip(&p[base..base + hw]).map(|(a, b)| a * b).sum::<f64>() + p[base + hw];
                outputs[k + 1][i] = sigmoid(z);
            }
        }
        Ok(Activations { hidden, outputs })
    }

    /// Accumulate into `grad` the parameter gradient given `d_out[k][i]`,
    /// the derivative of the loss with respect to output `k` at pixel `i`.
    /// Outputs without a gradient may be passed as `None`.
    pub fn backward(
        &self,
        x: &PixelInputs,
        acts: &Activations,
        d_out: &[Option<&[f64]>],
        grad: &mut [f64],
    ) -> Result<()> {
        self.check_inputs(x)?;
        if d_out.len() != acts.outputs.len() || grad.len() != self.params.len() {
            return Err(Error::InvalidArgument(
                "backward needs one gradient slot per output and a full-length accumulator".into(),
            ));
        }
        let (hw, c) = (self.hidden, self.inputs);
        let (o_b1, o_w2, o_b2, o_aux) = self.offsets();
        let n = x.len();
        let mut dh = vec![0.0; hw];
        for i in 0..n {
            let hi = &acts.hidden[i * hw..(i + 1) * hw];
            dh.iter_mut().for_each(|v| *v = 0.0);
            let mut any = false;
            for (k, d) in d_out.iter().enumerate() {
                let Some(d) = d else { continue };
                let s = acts.outputs[k][i];
                let dz = d[i] * s * (1.0 - s);
                if dz == 0.0 {
                    continue;
                }
                any = true;
                let (w_off, b_off) = if k == 0 {
                    (o_w2, o_b2)
                } else {
                    let base = o_aux + (k - 1) * (hw + 1);
                    (base, base + hw)
                };
                for u in 0..hw {
                    grad[w_off + u] += dz * hi[u];
                    dh[u] += dz * self.params[w_off + u];
                }
                grad[b_off] += dz;
            }
            if !any {
                continue;
            }
            let xi = x.pixel(i);
            for u in 0..hw {
                let dpre = dh[u] * (1.0 - hi[u] * hi[u]);
                if dpre == 0.0 {
                    continue;
                }
                for (g, xv) in grad[u * c..(u + 1) * c].iter_mut().zip(xi) {
                    *g += dpre * xv;
                }
                grad[o_b1 + u] += dpre;
            }
        }
        Ok(())
    }

    /// All outputs as saliency maps, dominant first.
    pub fn predict_all(&self, x: &PixelInputs) -> Result<Vec<SaliencyMap>> {
        self.forward(x)?
            .outputs
            .into_iter()
            .map(|v| SaliencyMap::new(x.width, x.height, v))
            .collect()
    }
}

/// Dominant-output saliency of `head` on `image` with `features`.
pub fn predict(head: &SaliencyHead, image: &RgbImage, features: &FeatureField) -> Result<SaliencyMap> {
    let x = PixelInputs::new(image, features)?;
    let mut acts = head.forward(&x)?;
    SaliencyMap::new(x.width, x.height, acts.outputs.swap_remove(0))
}
