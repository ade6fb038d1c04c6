//! Graph bipartition by minimizing the affinity loss directly over patch
//! saliency in `[0, 1]^N`.
//!
//! `S = 0.5` is a stationary point of the loss (foreground and background
//! terms mirror each other), so descent starts from a small seeded
//! perturbation of it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gsa::gsa_loss_values;
use crate::affinity::{Bipartition, SimilarityGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    /// Step size in units of `1 / N`, matching the `O(1 / N)` gradient scale.
    pub step: f64,
    pub max_iterations: usize,
    /// Stop once no value moves more than this in one step.
    pub tolerance: f64,
    /// Half-width of the uniform start perturbation around 0.5.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            step: 0.5,
            max_iterations: 5000,
            tolerance: 1e-9,
            perturbation: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub saliency: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    /// Nodes with saliency `>= 0.5` on side A.
    pub partition: Bipartition,
}

/// Projected gradient descent on the affinity loss.
pub fn gsa_partition(graph: &SimilarityGraph, opts: &DescentOptions) -> Result<DescentResult> {
    if !(opts.step > 0.0 && (0.0..0.5).contains(&opts.perturbation)) {
        return Err(Error::InvalidArgument(
            "descent needs a positive step and a perturbation in [0, 0.5)".into(),
        ));
    }
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut s: Vec<f64> = (0..n)
        .map(|_| 0.5 + opts.perturbation * rng.random_range(-1.0..=1.0))
        .collect();
    let eta = opts.step * n as f64;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let (r, _) = gsa_loss_values(&s, graph)?;
        let mut moved: f64 = 0.0;
        for (v, g) in s.iter_mut().zip(&r.grad) {
            let next = (*v - eta * g).clamp(0.0, 1.0);
            moved = moved.max((next - *v).abs());
            *v = next;
        }
        iterations += 1;
        if moved <= opts.tolerance {
            break;
        }
    }
    let loss = gsa_loss_values(&s, graph)?.0.value;
    let partition = Bipartition::from_mask(&s.iter().map(|&v| v >= 0.5).collect::<Vec<_>>());
    Ok(DescentResult {
        saliency: s,
        loss,
        iterations,
        partition,
    })
}
