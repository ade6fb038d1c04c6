//! Global semantic affinity loss over patch predictions.
//!
//! With patch saliency `S`, similarities `e_ij` and `w = sum_j t_j` over unit
//! features `t`:
//!
//! ```text
//! L_f = 1 - sum_ij S_i S_j e_ij / sum_ij S_i e_ij
//!     = 1 - |u|^2 / (u . w),           u = sum_i S_i t_i
//! L_b = same with S replaced by 1 - S
//! L   = L_f + L_b
//! ```
//!
//! The factored form costs `O(N D)` instead of `O(N^2)`. Graphs with clamped
//! similarities have no factored form and use the dense route.

use super::LossResult;
use crate::affinity::SimilarityGraph;
use crate::error::{Error, Result};
use crate::grid::PatchSaliency;
use crate::numeric::{dot, EPS_DEN};

/// Foreground and background terms of the affinity loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsaParts {
    pub foreground: f64,
    pub background: f64,
}

/// One `1 - num/den` term and its gradient with respect to the weights
/// that produced it, given per-node `d num / d s_k` and `d den / d s_k`.
fn ratio_term(num: f64, den: f64, dnum: &[f64], dden: &[f64]) -> (f64, Vec<f64>) {
    if den.abs() <= EPS_DEN {
        return (0.0, vec![0.0; dnum.len()]);
    }
    let value = 1.0 - num / den;
    let inv2 = 1.0 / (den * den);
    let grad = dnum
        .iter()
        .zip(dden)
        .map(|(&a, &b)| -(a * den - num * b) * inv2)
        .collect();
    (value, grad)
}

fn check_len(values: &[f64], graph: &SimilarityGraph) -> Result<()> {
    if values.len() != graph.node_count() {
        return Err(Error::DimensionMismatch {
            what: "patch saliency",
            expected: format!("{} patches", graph.node_count()),
            actual: format!("{} patches", values.len()),
        });
    }
    Ok(())
}

fn factored_term(graph: &SimilarityGraph, weights: &[f64], total: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
    let n = graph.node_count();
    let mut u = vec![0.0; graph.dim()];
    for (i, &s) in weights.iter().enumerate() {
        for (a, t) in u.iter_mut().zip(graph.unit_vector(i)) {
            *a += s * t;
        }
    }
    let num = dot(&u, &u);
    let den = dot(&u, total);
    let dnum: Vec<f64> = (0..n).map(|k| 2.0 * dot(graph.unit_vector(k), &u)).collect();
    ratio_term(num, den, &dnum, e)
}

fn dense_term(m: &[f64], n: usize, weights: &[f64], row_sums: &[f64]) -> (f64, Vec<f64>) {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut dnum = vec![0.0; n];
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let ms: f64 = row.iter().zip(weights).map(|(a, b)| a * b).sum();
        num += weights[i] * ms;
        den += weights[i] * row_sums[i];
        dnum[i] = 2.0 * ms;
    }
    ratio_term(num, den, &dnum, row_sums)
}

fn assemble(fg: (f64, Vec<f64>), bg: (f64, Vec<f64>)) -> (LossResult, GsaParts) {
    // Background weights are 1 - S, so their gradient flips sign.
    let grad = fg.1.iter().zip(&bg.1).map(|(f, b)| f - b).collect();
    (
        LossResult {
            value: fg.0 + bg.0,
            grad,
        },
        GsaParts {
            foreground: fg.0,
            background: bg.0,
        },
    )
}

/// Affinity loss on raw patch values (must lie in `[0, 1]`), choosing the
/// factored or dense route from the graph.
pub fn gsa_loss_values(values: &[f64], graph: &SimilarityGraph) -> Result<(LossResult, GsaParts)> {
    check_len(values, graph)?;
    if graph.clamps_negative() {
        return dense(values, graph);
    }
    let n = graph.node_count();
    let mut total = vec![0.0; graph.dim()];
    for i in 0..n {
        for (a, t) in total.iter_mut().zip(graph.unit_vector(i)) {
            *a += t;
        }
    }
    let e: Vec<f64> = (0..n).map(|k| dot(graph.unit_vector(k), &total)).collect();
    let background: Vec<f64> = values.iter().map(|s| 1.0 - s).collect();
    Ok(assemble(
        factored_term(graph, values, &total, &e),
        factored_term(graph, &background, &total, &e),
    ))
}

fn dense(values: &[f64], graph: &SimilarityGraph) -> Result<(LossResult, GsaParts)> {
    let m = graph
        .matrix()
        .ok_or_else(|| Error::InvalidArgument("dense affinity loss requires a materialized graph".into()))?;
    let n = graph.node_count();
    let row_sums: Vec<f64> = m.chunks_exact(n).map(|r| r.iter().sum()).collect();
    let background: Vec<f64> = values.iter().map(|s| 1.0 - s).collect();
    Ok(assemble(
        dense_term(m, n, values, &row_sums),
        dense_term(m, n, &background, &row_sums),
    ))
}

/// Global semantic affinity loss of patch predictions over `graph`.
pub fn gsa_loss(patch_pred: &PatchSaliency, graph: &SimilarityGraph) -> Result<LossResult> {
    Ok(gsa_loss_values(patch_pred.values(), graph)?.0)
}

/// Affinity loss through the materialized similarity matrix, `O(N^2)`.
pub fn gsa_loss_dense(patch_pred: &PatchSaliency, graph: &SimilarityGraph) -> Result<LossResult> {
    check_len(patch_pred.values(), graph)?;
    Ok(dense(patch_pred.values(), graph)?.0)
}
