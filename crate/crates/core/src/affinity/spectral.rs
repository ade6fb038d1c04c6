//! Spectral relaxation of the normalized cut, used as a reference
//! partitioner.
//!
//! With nonnegative weights `W` (negative similarities clamped to 0) and
//! degrees `d`, the normalized Laplacian is `L = I - D^-1/2 W D^-1/2`. Its
//! spectrum lies in `[0, 2]` and `D^1/2 1` spans the null space, so the
//! Fiedler vector is the dominant eigenvector of the shifted operator
//! `2I - L = I + D^-1/2 W D^-1/2` once `D^1/2 1` is deflated.

use super::{Bipartition, Side, SimilarityGraph};
use crate::error::{Error, Result};
use crate::numeric::dot;

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 10_000,
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn project_out(v: &mut [f64], unit: &[f64]) {
    let c = dot(v, unit);
    v.iter_mut().zip(unit).for_each(|(x, u)| *x -= c * u);
}

/// Bipartition by thresholding the Fiedler vector at 0. Node 0 is always
/// labelled `A`.
pub fn spectral_bipartition(graph: &SimilarityGraph) -> Result<Bipartition> {
    spectral_bipartition_with(graph, SpectralOptions::default())
}

pub fn spectral_bipartition_with(
    graph: &SimilarityGraph,
    opts: SpectralOptions,
) -> Result<Bipartition> {
    let n = graph.node_count();
    let m = graph.require_matrix()?;
    if n < 2 {
        return Err(Error::InvalidArgument(
            "spectral bipartition needs at least 2 nodes".into(),
        ));
    }

    let weights: Vec<f64> = m.iter().map(|&s| s.max(0.0)).collect();
    let mut inv_sqrt_deg = vec![0.0; n];
    for (i, row) in weights.chunks_exact(n).enumerate() {
        let d: f64 = row.iter().sum();
        if d <= 0.0 {
            return Err(Error::IsolatedNode { node: i });
        }
        inv_sqrt_deg[i] = 1.0 / d.sqrt();
    }

    // Trivial eigenvector D^1/2 1.
    let mut trivial: Vec<f64> = inv_sqrt_deg.iter().map(|s| 1.0 / s).collect();
    normalize(&mut trivial);

    let apply = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let row = &weights[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * inv_sqrt_deg[j] * v[j];
            }
            out[i] = v[i] + inv_sqrt_deg[i] * acc;
        }
    };

    // Deterministic start with no symmetry to the node ordering.
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 1.0) * 0.754_877_666).fract() - 0.5)
        .collect();
    project_out(&mut v, &trivial);
    if normalize(&mut v) == 0.0 {
        v = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        project_out(&mut v, &trivial);
        normalize(&mut v);
    }

    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        apply(&v, &mut next);
        project_out(&mut next, &trivial);
        let lambda = dot(&next, &v);
        residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if normalize(&mut next) == 0.0 {
            break;
        }
        std::mem::swap(&mut v, &mut next);
        if residual < opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: opts.max_iterations,
            residual,
        });
    }

    let fiedler: Vec<f64> = v.iter().zip(&inv_sqrt_deg).map(|(x, s)| x * s).collect();
    let sign = if fiedler[0] < 0.0 { -1.0 } else { 1.0 };
    let assignment = fiedler
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            if i == 0 || sign * f >= 0.0 {
                Side::A
            } else {
                Side::B
            }
        })
        .collect();
    Ok(Bipartition::new(assignment))
}
