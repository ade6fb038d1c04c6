use super::{ensure_same_dims, LossResult};
use crate::error::{Error, Result};
use crate::grid::{SaliencyMap, ScribbleMask};
use crate::numeric::EPS_CLIP;

/// Binary cross entropy over labeled pixels only, averaged over the labeled
/// count. Unlabeled pixels get zero gradient; so do predictions pinned by the
/// log-argument clip.
pub fn partial_cross_entropy(pred: &SaliencyMap, mask: &ScribbleMask) -> Result<LossResult> {
    ensure_same_dims(
        "scribble mask",
        (pred.width(), pred.height()),
        (mask.width(), mask.height()),
    )?;
    let labeled = mask.labeled_count();
    if labeled == 0 {
        return Err(Error::EmptySupervision);
    }
    let scale = 1.0 / labeled as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; pred.len()];
    for (i, (&p, label)) in pred.values().iter().zip(mask.labels()).enumerate() {
        let Some(y) = label.target() else { continue };
        let clipped = p.clamp(EPS_CLIP, 1.0 - EPS_CLIP);
        let active = clipped == p;
        if y == 1.0 {
            value -= clipped.ln();
            if active {
                grad[i] = -scale / clipped;
            }
        } else {
            value -= (1.0 - clipped).ln();
            if active {
                grad[i] = scale / (1.0 - clipped);
            }
        }
    }
    Ok(LossResult {
        value: value * scale,
        grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Label;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_pixel_half_is_ln2() {
        let pred = SaliencyMap::constant(3, 3, 0.5).unwrap();
        let mut mask = ScribbleMask::unlabeled(3, 3).unwrap();
        mask.set(1, 1, Label::Foreground);
        let r = partial_cross_entropy(&pred, &mask).unwrap();
        assert!((r.value - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.grad[4], -2.0);
        assert_eq!(r.grad.iter().filter(|&&g| g != 0.0).count(), 1);
    }

    #[test]
    fn perfect_prediction_is_near_zero() {
        let mut mask = ScribbleMask::unlabeled(4, 1).unwrap();
        mask.set(0, 0, Label::Foreground);
        mask.set(3, 0, Label::Background);
        let pred = SaliencyMap::new(4, 1, vec![1.0, 0.3, 0.7, 0.0]).unwrap();
        let r = partial_cross_entropy(&pred, &mask).unwrap();
        assert!(r.value <= -(1.0 - EPS_CLIP).ln() + 1e-18);
        assert!(r.value <= 1e-6);
        assert!(r.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn matches_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (w, h) = (9, 7);
        let values: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<Label> = (0..w * h)
            .map(|_| match rng.random_range(0..3) {
                0 => Label::Unlabeled,
                1 => Label::Background,
                _ => Label::Foreground,
            })
            .collect();
        let pred = SaliencyMap::new(w, h, values.clone()).unwrap();
        let mask = ScribbleMask::new(w, h, labels.clone()).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for (p, l) in values.iter().zip(&labels) {
            let p = p.clamp(1e-7, 1.0 - 1e-7);
            match l {
                Label::Foreground => {
                    sum += -p.ln();
                    count += 1;
                }
                Label::Background => {
                    sum += -(1.0 - p).ln();
                    count += 1;
                }
                Label::Unlabeled => {}
            }
        }
        let r = partial_cross_entropy(&pred, &mask).unwrap();
        assert!((r.value - sum / count as f64).abs() < 1e-12);
        for (g, l) in r.grad.iter().zip(&labels) {
            if *l == Label::Unlabeled {
                assert_eq!(*g, 0.0);
            }
        }
    }

    #[test]
    fn errors() {
        let pred = SaliencyMap::constant(3, 3, 0.5).unwrap();
        let empty = ScribbleMask::unlabeled(3, 3).unwrap();
        assert!(matches!(
            partial_cross_entropy(&pred, &empty),
            Err(Error::EmptySupervision)
        ));
        let other = ScribbleMask::unlabeled(2, 3).unwrap();
        assert!(matches!(
            partial_cross_entropy(&pred, &other),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
