use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::head::{Activations, PixelInputs, SaliencyHead};
use super::scene::SyntheticScene;
use super::schedule::{triangular_lr, TrainConfig};
use crate::affinity::{build_graph, SimilarityGraph};
use crate::error::{Error, Result};
use crate::grid::{validate_pair, FeatureField, RgbImage, SaliencyMap, ScribbleMask};
use crate::losses::{composite_loss, CompositeResult, HeadInput, LossWeights, Supervision};
use crate::metrics::iou_adaptive;
use crate::resample::Resampler;

/// Separates the batch-order stream from the head initialization stream.
const SHUFFLE_STREAM: u64 = 0x5eed_5a1e;

/// One image with everything a training step needs precomputed.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    image: RgbImage,
    mask: ScribbleMask,
    graph: SimilarityGraph,
    grid: (usize, usize),
    full: PixelInputs,
    /// Inputs at half resolution for the scale-consistency pass.
    small: Option<PixelInputs>,
}

impl TrainingSample {
    pub fn new(image: RgbImage, features: &FeatureField, mask: ScribbleMask, with_small: bool) -> Result<Self> {
        validate_pair(&image, &mask)?;
        let full = PixelInputs::new(&image, features)?;
        let small = if with_small {
            let (w, h) = (image.width(), image.height());
            let (sw, sh) = ((w / 2).max(1), (h / 2).max(1));
            let down = Resampler::new(w, h, sw, sh)?;
            let small_image = RgbImage::new(sw, sh, down.forward_interleaved(image.data(), 3))?;
            Some(PixelInputs::new(&small_image, features)?)
        } else {
            None
        };
        Ok(Self {
            graph: build_graph(features, false)?,
            grid: (features.grid_h(), features.grid_w()),
            image,
            mask,
            full,
            small,
        })
    }

    pub fn from_scene(scene: &SyntheticScene, with_small: bool) -> Result<Self> {
        Self::new(scene.image.clone(), &scene.features, scene.scribbles.clone(), with_small)
    }

    pub fn inputs(&self) -> &PixelInputs {
        &self.full
    }
}

fn to_map(x: &PixelInputs, values: &[f64]) -> Result<SaliencyMap> {
    SaliencyMap::new(x.width(), x.height(), values.to_vec())
}

/// Composite loss of `head` on one sample and its gradient with respect to
/// the head parameters.
pub fn loss_and_grad(
    head: &SaliencyHead,
    sample: &TrainingSample,
    weights: &LossWeights,
    cfg: &TrainConfig,
) -> Result<(CompositeResult, Vec<f64>)> {
    let acts = head.forward(&sample.full)?;
    let small_acts: Option<Activations> = sample.small.as_ref().map(|x| head.forward(x)).transpose()?;
    let maps = acts
        .outputs
        .iter()
        .map(|o| to_map(&sample.full, o))
        .collect::<Result<Vec<_>>>()?;
    let small_map = match (&sample.small, &small_acts) {
        (Some(x), Some(a)) => Some(to_map(x, &a.outputs[0])?),
        _ => None,
    };
    let mut heads = vec![HeadInput {
        pred: &maps[0],
        pred_of_downscaled: small_map.as_ref(),
    }];
    heads.extend(maps[1..].iter().map(HeadInput::new));
    let sup = Supervision {
        image: &sample.image,
        mask: &sample.mask,
        graph: &sample.graph,
        patch_grid: sample.grid,
        lsc: cfg.lsc,
        ssim: cfg.ssim,
    };
    let result = composite_loss(&heads, &sup, weights)?;

    let mut grad = vec![0.0; head.params().len()];
    let d_out: Vec<Option<&[f64]>> = result.grads.iter().map(|g| Some(&g[..])).collect();
    head.backward(&sample.full, &acts, &d_out, &mut grad)?;
    if let (Some(x), Some(a), Some(g)) = (&sample.small, &small_acts, &result.grad_pred_of_downscaled) {
        let mut d_small: Vec<Option<&[f64]>> = vec![None; a.outputs.len()];
        d_small[0] = Some(g);
        head.backward(x, a, &d_small, &mut grad)?;
    }
    Ok((result, grad))
}

/// Per-epoch means over all training steps of the epoch (values before each
/// update), plus the learning rate of the epoch's last step and IoU at the
/// adaptive threshold after the epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
    pub pce: f64,
    pub ssc: Option<f64>,
    pub lsc: Option<f64>,
    pub gsa: Option<f64>,
    /// Stage-weighted sum of auxiliary head losses.
    pub aux: Option<f64>,
    pub train_iou: f64,
    pub test_iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub head: SaliencyHead,
    pub log: Vec<EpochLog>,
}

fn check_finite(step: usize, r: &CompositeResult) -> Result<()> {
    let dom = &r.terms[0];
    let named = [
        ("total", Some(r.value)),
        ("pce", Some(dom.pce)),
        ("ssc", dom.ssc),
        ("lsc", dom.lsc),
        ("gsa", dom.gsa),
    ];
    for (term, value) in named {
        if let Some(value) = value.filter(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { step, term, value });
        }
    }
    for t in &r.terms[1..] {
        if !t.head_total.is_finite() {
            return Err(Error::NonFiniteLoss {
                step,
                term: "aux",
                value: t.head_total,
            });
        }
    }
    Ok(())
}

/// Mean IoU at the adaptive threshold of the dominant output.
pub fn mean_iou(head: &SaliencyHead, inputs: &[PixelInputs], gts: &[&SaliencyMap]) -> Result<f64> {
    let mut total = 0.0;
    for (x, gt) in inputs.iter().zip(gts) {
        let acts = head.forward(x)?;
        total += iou_adaptive(&to_map(x, &acts.outputs[0])?, gt)?;
    }
    Ok(total / inputs.len().max(1) as f64)
}

#[derive(Default)]
struct Running {
    count: usize,
    loss: f64,
    pce: f64,
    ssc: f64,
    lsc: f64,
    gsa: f64,
    aux: f64,
}

impl Running {
    fn add(&mut self, r: &CompositeResult) {
        let dom = &r.terms[0];
        self.count += 1;
        self.loss += r.value;
        self.pce += dom.pce;
        self.ssc += dom.ssc.unwrap_or(0.0);
        self.lsc += dom.lsc.unwrap_or(0.0);
        self.gsa += dom.gsa.unwrap_or(0.0);
        self.aux += r.terms[1..].iter().map(|t| t.stage_weight * t.head_total).sum::<f64>();
    }
}

/// SGD with momentum and decoupled-from-nothing (L2) weight decay:
/// `v <- m v + (g + wd p)`, `p <- p - lr v`.
fn sgd_step(params: &mut [f64], velocity: &mut [f64], grad: &[f64], lr: f64, cfg: &TrainConfig) {
    for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = cfg.momentum * *v + g + cfg.weight_decay * *p;
        *p -= lr * *v;
    }
}

/// Train a fresh head on `dataset`, reporting IoU on `holdout` after each
/// epoch (empty `holdout` gives `test_iou = None`).
pub fn train(
    dataset: &[SyntheticScene],
    holdout: &[SyntheticScene],
    cfg: &TrainConfig,
    weights: &LossWeights,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    weights.validate()?;
    let Some(first) = dataset.first() else {
        return Err(Error::InvalidArgument("training set is empty".into()));
    };
    if weights.lambda_stage.len() < cfg.aux_heads {
        return Err(Error::InvalidArgument(format!(
            "{} auxiliary heads need as many stage weights, got {}",
            cfg.aux_heads,
            weights.lambda_stage.len()
        )));
    }
    let dim = first.features.dim();
    for scene in dataset.iter().chain(holdout) {
        if scene.features.dim() != dim {
            return Err(Error::DimensionMismatch {
                what: "feature dimension",
                expected: dim.to_string(),
                actual: scene.features.dim().to_string(),
            });
        }
        let (w, h) = (scene.image.width(), scene.image.height());
        if cfg.input_size != 0 && (w, h) != (cfg.input_size, cfg.input_size) {
            return Err(Error::DimensionMismatch {
                what: "scene size",
                expected: format!("{0}x{0}", cfg.input_size),
                actual: format!("{w}x{h}"),
            });
        }
    }

    let mut head = SaliencyHead::new(3 + dim, cfg.hidden_width, cfg.aux_heads, cfg.seed)?;
    if cfg.epochs == 0 {
        return Ok(TrainOutcome { head, log: Vec::new() });
    }

    let mut samples = Vec::with_capacity(dataset.len());
    for scene in dataset {
        let mut variants = vec![TrainingSample::from_scene(scene, cfg.ssc_enabled)?];
        if cfg.flip_augmentation {
            variants.push(TrainingSample::from_scene(&scene.flip_horizontal(), cfg.ssc_enabled)?);
        }
        samples.push(variants);
    }
    let train_inputs: Vec<PixelInputs> = samples.iter().map(|v| v[0].full.clone()).collect();
    let train_gt: Vec<&SaliencyMap> = dataset.iter().map(|s| &s.gt).collect();
    let test_inputs = holdout
        .iter()
        .map(|s| PixelInputs::new(&s.image, &s.features))
        .collect::<Result<Vec<_>>>()?;
    let test_gt: Vec<&SaliencyMap> = holdout.iter().map(|s| &s.gt).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SHUFFLE_STREAM);
    let steps_per_epoch = dataset.len().div_ceil(cfg.batch_size);
    let total = cfg.epochs * steps_per_epoch;
    let mut velocity = vec![0.0; head.params().len()];
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut step = 0;
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut running = Running::default();
        let mut lr = cfg.lr_min;
        for batch in order.chunks(cfg.batch_size) {
            lr = triangular_lr(step, total, cfg)?;
            let mut grad = vec![0.0; velocity.len()];
            for &i in batch {
                let variant = if cfg.flip_augmentation && rng.random_bool(0.5) { 1 } else { 0 };
                let (r, g) = loss_and_grad(&head, &samples[i][variant], weights, cfg)?;
                check_finite(step, &r)?;
                running.add(&r);
                grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            sgd_step(head.params_mut(), &mut velocity, &grad, lr, cfg);
            step += 1;
        }
        let n = running.count as f64;
        log.push(EpochLog {
            epoch,
            lr,
            loss: running.loss / n,
            pce: running.pce / n,
            ssc: cfg.ssc_enabled.then(|| running.ssc / n),
            lsc: (weights.beta > 0.0).then(|| running.lsc / n),
            gsa: (weights.mu > 0.0).then(|| running.gsa / n),
            aux: (cfg.aux_heads > 0).then(|| running.aux / n),
            train_iou: mean_iou(&head, &train_inputs, &train_gt)?,
            test_iou: if holdout.is_empty() {
                None
            } else {
                Some(mean_iou(&head, &test_inputs, &test_gt)?)
            },
        });
    }
    Ok(TrainOutcome { head, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Label;
    use crate::losses::{LscKernelConfig, SsimConfig};
    use crate::trainer::scene::{generate_scene, SceneSpec};

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let scene = generate_scene(&SceneSpec::default(), 1).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train(&[scene], &[], &cfg, &LossWeights::default()).unwrap();
        let init = SaliencyHead::new(19, cfg.hidden_width, cfg.aux_heads, cfg.seed).unwrap();
        assert_eq!(out.head, init);
        assert!(out.log.is_empty());
    }

    #[test]
    fn pce_decreases_with_single_labeled_pixels() {
        let mut scene = generate_scene(&SceneSpec::default(), 2).unwrap();
        let (w, h) = (scene.image.width(), scene.image.height());
        let fg = scene.scribbles.labels().iter().position(|&l| l == Label::Foreground).unwrap();
        let bg = scene.scribbles.labels().iter().position(|&l| l == Label::Background).unwrap();
        let mut mask = ScribbleMask::unlabeled(w, h).unwrap();
        mask.set(fg % w, fg / w, Label::Foreground);
        mask.set(bg % w, bg / w, Label::Background);
        scene.scribbles = mask;
        let cfg = TrainConfig {
            epochs: 10,
            ssc_enabled: false,
            flip_augmentation: false,
            ..TrainConfig::default()
        };
        let weights = LossWeights {
            mu: 0.0,
            beta: 0.0,
            ..LossWeights::default()
        };
        let out = train(&[scene], &[], &cfg, &weights).unwrap();
        for pair in out.log.windows(2) {
            assert!(pair[1].pce < pair[0].pce, "{} !< {}", pair[1].pce, pair[0].pce);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SceneSpec::default();
        let scenes: Vec<_> = (0..3).map(|s| generate_scene(&spec, s).unwrap()).collect();
        let a = train(&scenes[..2], &scenes[2..], &quick_cfg(), &LossWeights::default()).unwrap();
        let b = train(&scenes[..2], &scenes[2..], &quick_cfg(), &LossWeights::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.log.len(), 2);
        assert!(a.log.iter().all(|e| e.gsa.is_some() && e.ssc.is_some() && e.test_iou.is_some()));
    }

    #[test]
    fn end_to_end_gradient_on_small_scene() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let (w, h) = (16, 16);
        let image = RgbImage::new(w, h, (0..w * h * 3).map(|_| rng.random()).collect()).unwrap();
        let features = FeatureField::new(4, 4, 6, (0..96).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let mut mask = ScribbleMask::unlabeled(w, h).unwrap();
        for x in 2..7 {
            mask.set(x, 4, Label::Foreground);
            mask.set(x + 7, 12, Label::Background);
        }
        let sample = TrainingSample::new(image, &features, mask, true).unwrap();
        let cfg = TrainConfig {
            aux_heads: 2,
            hidden_width: 6,
            lsc: LscKernelConfig {
                radius: 3,
                ..LscKernelConfig::default()
            },
            ssim: SsimConfig {
                window: 7,
                ..SsimConfig::default()
            },
            ..TrainConfig::default()
        };
        let mut head = SaliencyHead::new(9, cfg.hidden_width, cfg.aux_heads, 3).unwrap();
        head.params_mut().iter_mut().for_each(|p| *p = rng.random_range(-0.8..0.8));
        let weights = LossWeights::default();
        let (_, grad) = loss_and_grad(&head, &sample, &weights, &cfg).unwrap();
        let step = 1e-6;
        let mut worst: f64 = 0.0;
        for k in 0..grad.len() {
            let mut plus = head.clone();
            plus.params_mut()[k] += step;
            let mut minus = head.clone();
            minus.params_mut()[k] -= step;
            let fp = loss_and_grad(&plus, &sample, &weights, &cfg).unwrap().0.value;
            let fm = loss_and_grad(&minus, &sample, &weights, &cfg).unwrap().0.value;
            let fd = (fp - fm) / (2.0 * step);
            let err = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-3);
            worst = worst.max(err);
        }
        assert!(worst < 1e-3, "worst relative error {worst}");
    }

    #[test]
    fn rejects_empty_and_mismatched_sets() {
        assert!(train(&[], &[], &TrainConfig::default(), &LossWeights::default()).is_err());
        let scene = generate_scene(&SceneSpec::default(), 4).unwrap();
        let cfg = TrainConfig {
            input_size: 32,
            ..TrainConfig::default()
        };
        assert!(train(&[scene], &[], &cfg, &LossWeights::default()).is_err());
    }
}
