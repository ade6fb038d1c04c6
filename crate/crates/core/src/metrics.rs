//! Saliency evaluation metrics.
//!
//! F-measure and E-measure are evaluated at the 256 thresholds `t / 255`,
//! binarizing with `pred >= t / 255`, and averaged. F uses `beta^2 = 0.3`.
//! Dataset summaries average per-image scores.

use crate::error::{Error, Result};
use crate::grid::SaliencyMap;

pub const BETA_SQUARED: f64 = 0.3;
pub const THRESHOLDS: usize = 256;

/// Per-threshold curves, indexed by `t` for threshold `t / 255`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f_measure: Vec<f64>,
    pub e_measure: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub f_beta: f64,
    pub mae: f64,
    pub e_measure: f64,
    pub iou_adaptive: f64,
    pub curves: Option<Curves>,
}

fn check_pair(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<()> {
    if !pred.same_dims(gt) {
        return Err(Error::DimensionMismatch {
            what: "ground truth",
            expected: format!("{}x{}", pred.width(), pred.height()),
            actual: format!("{}x{}", gt.width(), gt.height()),
        });
    }
    if let Some((index, &value)) = gt
        .values()
        .iter()
        .enumerate()
        .find(|(_, &v)| v != 0.0 && v != 1.0)
    {
        return Err(Error::NonBinaryGroundTruth { index, value });
    }
    Ok(())
}

fn threshold(t: usize) -> f64 {
    t as f64 / 255.0
}

/// Mean absolute error.
pub fn mae(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<f64> {
    check_pair(pred, gt)?;
    let sum: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(p, g)| (p - g).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

fn precision_recall_f(tp: usize, predicted: usize, positives: usize) -> (f64, f64, f64) {
    let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
    let recall = tp as f64 / positives as f64;
    let den = BETA_SQUARED * precision + recall;
    let f = if den == 0.0 {
        0.0
    } else {
        (1.0 + BETA_SQUARED) * precision * recall / den
    };
    (precision, recall, f)
}

/// Per-threshold precision, recall and F-measure.
fn f_curves(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_pair(pred, gt)?;
    let positives = gt.values().iter().filter(|&&g| g == 1.0).count();
    if positives == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    // Histogram by the highest threshold each pixel still passes.
    let mut hist_pos = [0usize; THRESHOLDS];
    let mut hist_all = [0usize; THRESHOLDS];
    for (&p, &g) in pred.values().iter().zip(gt.values()) {
        let mut level = ((p * 255.0).floor() as usize).min(255);
        while level < 255 && p >= threshold(level + 1) {
            level += 1;
        }
        while level > 0 && p < threshold(level) {
            level -= 1;
        }
        hist_all[level] += 1;
        if g == 1.0 {
            hist_pos[level] += 1;
        }
    }
    let (mut precision, mut recall, mut f) = (vec![0.0; THRESHOLDS], vec![0.0; THRESHOLDS], vec![0.0; THRESHOLDS]);
    let (mut tp, mut predicted) = (0usize, 0usize);
    for t in (0..THRESHOLDS).rev() {
        tp += hist_pos[t];
        predicted += hist_all[t];
        let (p, r, fm) = precision_recall_f(tp, predicted, positives);
        precision[t] = p;
        recall[t] = r;
        f[t] = fm;
    }
    Ok((precision, recall, f))
}

/// Mean F-measure over the 256 thresholds.
pub fn mean_f_measure(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<f64> {
    let (_, _, f) = f_curves(pred, gt)?;
    Ok(f.iter().sum::<f64>() / THRESHOLDS as f64)
}

/// Enhanced-alignment score of one binary prediction against binary truth.
fn e_at(fm: &[bool], gt: &[f64], gt_mean: f64) -> f64 {
    let n = gt.len() as f64;
    let fg = fm.iter().filter(|&&b| b).count() as f64;
    if gt_mean == 0.0 {
        // Empty truth: score the fraction predicted as background.
        return 1.0 - fg / n;
    }
    if gt_mean == 1.0 {
        return fg / n;
    }
    let fm_mean = fg / n;
    let mut total = 0.0;
    for (&b, &g) in fm.iter().zip(gt) {
        let phi_s = if b { 1.0 } else { 0.0 } - fm_mean;
        let phi_g = g - gt_mean;
        let align = 2.0 * phi_g * phi_s / (phi_g * phi_g + phi_s * phi_s + f64::EPSILON);
        total += (align + 1.0).powi(2) / 4.0;
    }
    total / n
}

fn e_curve(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<Vec<f64>> {
    check_pair(pred, gt)?;
    let gt_mean = gt.mean();
    Ok((0..THRESHOLDS)
        .map(|t| e_at(&pred.binarize(threshold(t)), gt.values(), gt_mean))
        .collect())
}

/// Mean enhanced-alignment measure over the 256 thresholds.
pub fn e_measure(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<f64> {
    Ok(e_curve(pred, gt)?.iter().sum::<f64>() / THRESHOLDS as f64)
}

/// Intersection over union of two binary masks; 1 when both are empty.
pub fn iou(pred: &[bool], gt: &[bool]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::DimensionMismatch {
            what: "mask",
            expected: format!("{} pixels", gt.len()),
            actual: format!("{} pixels", pred.len()),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in pred.iter().zip(gt) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Adaptive threshold: twice the mean saliency, capped at 1.
pub fn adaptive_threshold(pred: &SaliencyMap) -> f64 {
    (2.0 * pred.mean()).min(1.0)
}

/// IoU of the prediction binarized at its adaptive threshold.
pub fn iou_adaptive(pred: &SaliencyMap, gt: &SaliencyMap) -> Result<f64> {
    check_pair(pred, gt)?;
    let gt_mask: Vec<bool> = gt.values().iter().map(|&g| g == 1.0).collect();
    iou(&pred.binarize(adaptive_threshold(pred)), &gt_mask)
}

/// Every metric for one image.
pub fn evaluate(pred: &SaliencyMap, gt: &SaliencyMap, with_curves: bool) -> Result<MetricReport> {
    let (precision, recall, f) = f_curves(pred, gt)?;
    let e = e_curve(pred, gt)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(MetricReport {
        f_beta: mean(&f),
        mae: mae(pred, gt)?,
        e_measure: mean(&e),
        iou_adaptive: iou_adaptive(pred, gt)?,
        curves: with_curves.then_some(Curves {
            precision,
            recall,
            f_measure: f,
            e_measure: e,
        }),
    })
}

/// Per-image average of reports.
pub fn aggregate(reports: &[MetricReport]) -> Option<MetricReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Some(MetricReport {
        f_beta: avg(|r| r.f_beta),
        mae: avg(|r| r.mae),
        e_measure: avg(|r| r.e_measure),
        iou_adaptive: avg(|r| r.iou_adaptive),
        curves: None,
    })
}
