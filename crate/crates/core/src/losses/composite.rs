//! Staged composite loss.
//!
//! ```text
//! L       = L_dom + sum_k lambda_k L_aux^k
//! L_dom   = pce + ssc + beta lsc + mu gsa
//! L_aux^k = pce + beta lsc + mu gsa
//! ```
//!
//! Terms whose weight is zero are skipped and reported as `None`.

use super::{
    gsa_loss_values, partial_cross_entropy, ssc_loss, LossWeights, LscKernel, LscKernelConfig,
    SsimConfig,
};
use crate::affinity::SimilarityGraph;
use crate::error::{Error, Result};
use crate::grid::{RgbImage, SaliencyMap, ScribbleMask};
use crate::resample::{PatchPooler, Resampler};

/// Per-image supervision shared by every head.
#[derive(Debug, Clone, Copy)]
pub struct Supervision<'a> {
    pub image: &'a RgbImage,
    pub mask: &'a ScribbleMask,
    pub graph: &'a SimilarityGraph,
    /// Patch grid of `graph` as `(grid_h, grid_w)`.
    pub patch_grid: (usize, usize),
    pub lsc: LscKernelConfig,
    pub ssim: SsimConfig,
}

/// One head's prediction. Only the dominant (first) head may carry a
/// prediction made on the downscaled input, which enables the
/// scale-consistency term.
#[derive(Debug, Clone, Copy)]
pub struct HeadInput<'a> {
    pub pred: &'a SaliencyMap,
    pub pred_of_downscaled: Option<&'a SaliencyMap>,
}

impl<'a> HeadInput<'a> {
    pub fn new(pred: &'a SaliencyMap) -> Self {
        Self {
            pred,
            pred_of_downscaled: None,
        }
    }
}

/// Unweighted term values for one head.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TermBreakdown {
    pub pce: f64,
    pub ssc: Option<f64>,
    pub lsc: Option<f64>,
    pub gsa: Option<f64>,
    /// Stage weight applied to this head (1 for the dominant head).
    pub stage_weight: f64,
    /// `pce + ssc + beta lsc + mu gsa` before the stage weight.
    pub head_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeResult {
    pub value: f64,
    pub terms: Vec<TermBreakdown>,
    /// Gradient of `value` with respect to each head's prediction.
    pub grads: Vec<Vec<f64>>,
    /// Gradient with respect to the dominant head's downscaled-input prediction.
    pub grad_pred_of_downscaled: Option<Vec<f64>>,
}

fn axpy(acc: &mut [f64], scale: f64, g: &[f64]) {
    for (a, v) in acc.iter_mut().zip(g) {
        *a += scale * v;
    }
}

pub fn composite_loss(
    heads: &[HeadInput<'_>],
    sup: &Supervision<'_>,
    weights: &LossWeights,
) -> Result<CompositeResult> {
    weights.validate()?;
    let Some((_, aux)) = heads.split_first() else {
        return Err(Error::InvalidArgument("at least a dominant head is required".into()));
    };
    if aux.len() > 3 || aux.len() > weights.lambda_stage.len() {
        return Err(Error::InvalidArgument(format!(
            "{} auxiliary heads but {} stage weights (at most 3 supported)",
            aux.len(),
            weights.lambda_stage.len()
        )));
    }
    if aux.iter().any(|h| h.pred_of_downscaled.is_some()) {
        return Err(Error::InvalidArgument(
            "only the dominant head takes a downscaled-input prediction".into(),
        ));
    }

    let (w, h) = (sup.image.width(), sup.image.height());
    let lsc_kernel = if weights.beta > 0.0 {
        Some(LscKernel::new(sup.image, sup.lsc)?)
    } else {
        None
    };
    let pooler = if weights.mu > 0.0 {
        let (gh, gw) = sup.patch_grid;
        if gh * gw != sup.graph.node_count() {
            return Err(Error::DimensionMismatch {
                what: "patch grid",
                expected: format!("{} nodes", sup.graph.node_count()),
                actual: format!("{gh}x{gw}"),
            });
        }
        Some(PatchPooler::new(w, h, gw, gh)?)
    } else {
        None
    };

    let mut value = 0.0;
    let mut terms = Vec::with_capacity(heads.len());
    let mut grads = Vec::with_capacity(heads.len());
    let mut grad_small = None;

    for (index, head) in heads.iter().enumerate() {
        let pred = head.pred;
        if (pred.width(), pred.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                what: "head prediction",
                expected: format!("{w}x{h}"),
                actual: format!("{}x{}", pred.width(), pred.height()),
            });
        }
        let stage_weight = if index == 0 { 1.0 } else { weights.lambda_stage[index - 1] };
        let mut grad = vec![0.0; pred.len()];
        let mut t = TermBreakdown {
            stage_weight,
            ..TermBreakdown::default()
        };

        let pce = partial_cross_entropy(pred, sup.mask)?;
        t.pce = pce.value;
        axpy(&mut grad, 1.0, &pce.grad);
        let mut head_total = pce.value;

        if let Some(small) = head.pred_of_downscaled {
            let down = Resampler::new(w, h, small.width(), small.height())?;
            let downscaled = SaliencyMap::new(small.width(), small.height(), down.forward(pred.values()))?;
            let ssc = ssc_loss(&downscaled, small, weights.alpha_ssc, sup.ssim)?;
            t.ssc = Some(ssc.value);
            head_total += ssc.value;
            axpy(&mut grad, 1.0, &down.backward(&ssc.grad_downscaled_pred));
            grad_small = Some(ssc.grad_pred_of_downscaled);
        }

        if let Some(kernel) = &lsc_kernel {
            let lsc = kernel.evaluate(pred)?;
            t.lsc = Some(lsc.value);
            head_total += weights.beta * lsc.value;
            axpy(&mut grad, weights.beta, &lsc.grad);
        }

        if let Some(pooler) = &pooler {
            let patches = pooler.forward(pred.values());
            let (gsa, _) = gsa_loss_values(&patches, sup.graph)?;
            t.gsa = Some(gsa.value);
            head_total += weights.mu * gsa.value;
            axpy(&mut grad, weights.mu, &pooler.backward(&gsa.grad));
        }

        t.head_total = head_total;
        value += stage_weight * head_total;
        if index > 0 {
            grad.iter_mut().for_each(|g| *g *= stage_weight);
        }
        terms.push(t);
        grads.push(grad);
    }

    Ok(CompositeResult {
        value,
        terms,
        grads,
        grad_pred_of_downscaled: grad_small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::build_graph;
    use crate::grid::{FeatureField, Label};
    use crate::losses::{gsa_loss, lsc_loss, partial_cross_entropy};
    use crate::resample::{pool_to_patches, resample_bilinear};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        image: RgbImage,
        mask: ScribbleMask,
        graph: SimilarityGraph,
        preds: Vec<SaliencyMap>,
        small: SaliencyMap,
    }

    fn fixture(seed: u64) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (16, 16);
        let image = RgbImage::new(w, h, (0..w * h * 3).map(|_| rng.random()).collect()).unwrap();
        let labels = (0..w * h)
            .map(|_| match rng.random_range(0..5) {
                0 => Label::Foreground,
                1 => Label::Background,
                _ => Label::Unlabeled,
            })
            .collect();
        let mask = ScribbleMask::new(w, h, labels).unwrap();
        let features = FeatureField::new(4, 4, 5, (0..80).map(|_| rng.random()).collect()).unwrap();
        let graph = build_graph(&features, false).unwrap();
        let mut map = |w: usize, h: usize| {
            SaliencyMap::new(w, h, (0..w * h).map(|_| rng.random_range(0.05..0.95)).collect()).unwrap()
        };
        let preds = vec![map(16, 16), map(16, 16), map(16, 16)];
        let small = map(8, 8);
        Fixture {
            image,
            mask,
            graph,
            preds,
            small,
        }
    }

    fn supervision(f: &Fixture) -> Supervision<'_> {
        Supervision {
            image: &f.image,
            mask: &f.mask,
            graph: &f.graph,
            patch_grid: (4, 4),
            lsc: LscKernelConfig {
                radius: 3,
                ..LscKernelConfig::default()
            },
            ssim: SsimConfig {
                window: 7,
                ..SsimConfig::default()
            },
        }
    }

    fn heads(f: &Fixture) -> Vec<HeadInput<'_>> {
        let mut heads = vec![HeadInput {
            pred: &f.preds[0],
            pred_of_downscaled: Some(&f.small),
        }];
        heads.extend(f.preds[1..].iter().map(HeadInput::new));
        heads
    }

    #[test]
    fn zero_weights_collapse_to_pce_plus_ssc() {
        let f = fixture(1);
        let sup = supervision(&f);
        let weights = LossWeights {
            mu: 0.0,
            beta: 0.0,
            lambda_stage: vec![0.0, 0.0],
            ..LossWeights::default()
        };
        let r = composite_loss(&heads(&f), &sup, &weights).unwrap();
        let pce = partial_cross_entropy(&f.preds[0], &f.mask).unwrap().value;
        let down = resample_bilinear(&f.preds[0], 8, 8).unwrap();
        let ssc = ssc_loss(&down, &f.small, 0.85, sup.ssim).unwrap().value;
        assert!((r.value - (pce + ssc)).abs() < 1e-15);
        assert!(r.grads[1].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn recomposes_individual_losses() {
        let f = fixture(2);
        let sup = supervision(&f);
        let weights = LossWeights {
            lambda_stage: vec![0.8, 0.6],
            ..LossWeights::default()
        };
        let r = composite_loss(&heads(&f), &sup, &weights).unwrap();
        let mut expected = 0.0;
        for (k, pred) in f.preds.iter().enumerate() {
            let mut head = partial_cross_entropy(pred, &f.mask).unwrap().value
                + weights.beta * lsc_loss(pred, &f.image, sup.lsc).unwrap().value
                + weights.mu * gsa_loss(&pool_to_patches(pred, 4, 4).unwrap(), &f.graph).unwrap().value;
            if k == 0 {
                let down = resample_bilinear(pred, 8, 8).unwrap();
                head += ssc_loss(&down, &f.small, 0.85, sup.ssim).unwrap().value;
            } else {
                head *= weights.lambda_stage[k - 1];
            }
            expected += head;
        }
        assert!((r.value - expected).abs() < 1e-12);
        assert_eq!(r.terms.len(), 3);
        assert!(r.grad_pred_of_downscaled.is_some());
    }

    #[test]
    fn default_gsa_weight() {
        assert_eq!(LossWeights::default().mu, 0.15);
        assert_eq!(LossWeights::default().alpha_ssc, 0.85);
    }

    #[test]
    fn rejects_bad_head_layouts() {
        let f = fixture(3);
        let sup = supervision(&f);
        assert!(composite_loss(&[], &sup, &LossWeights::default()).is_err());
        let too_many: Vec<HeadInput> = (0..5).map(|_| HeadInput::new(&f.preds[0])).collect();
        assert!(composite_loss(&too_many, &sup, &LossWeights::default()).is_err());
        let bad_aux = [
            HeadInput::new(&f.preds[0]),
            HeadInput {
                pred: &f.preds[1],
                pred_of_downscaled: Some(&f.small),
            },
        ];
        assert!(composite_loss(&bad_aux, &sup, &LossWeights::default()).is_err());
    }
}
