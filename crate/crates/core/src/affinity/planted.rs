//! Two-cluster feature fields with known labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::FeatureField;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedField {
    pub features: FeatureField,
    /// `true` for nodes drawn around the first mean.
    pub labels: Vec<bool>,
}

/// Each node takes one of two orthonormal means (random directions,
/// orthogonalized) with probability 1/2 plus isotropic `N(0, sigma^2)`
/// noise. Both clusters are guaranteed non-empty.
pub fn planted_field(grid_h: usize, grid_w: usize, dim: usize, sigma: f64, seed: u64) -> Result<PlantedField> {
    let n = grid_h * grid_w;
    if dim < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "planted field needs dim >= 2 and at least 2 nodes, got dim {dim}, {n} nodes"
        )));
    }
    let noise = Normal::new(0.0, sigma)
        .map_err(|_| Error::InvalidArgument(format!("noise sigma must be finite and >= 0, got {sigma}")))?;
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let unit = |v: &mut Vec<f64>| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    };
    let mut a: Vec<f64> = (0..dim).map(|_| gauss.sample(&mut rng)).collect();
    unit(&mut a);
    let mut b: Vec<f64> = (0..dim).map(|_| gauss.sample(&mut rng)).collect();
    let proj: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    b.iter_mut().zip(&a).for_each(|(y, x)| *y -= proj * x);
    unit(&mut b);

    let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        labels[0] = !labels[0];
    }
    let mut data = Vec::with_capacity(n * dim);
    for &l in &labels {
        let mean = if l { &a } else { &b };
        data.extend(mean.iter().map(|m| m + noise.sample(&mut rng)));
    }
    Ok(PlantedField {
        features: FeatureField::new(grid_h, grid_w, dim, data)?,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_clusters_are_orthonormal() {
        let p = planted_field(4, 4, 8, 0.0, 3).unwrap();
        let rows: Vec<&[f64]> = (0..16).map(|i| p.features.vector(i)).collect();
        let first = p.labels.iter().position(|&l| l).unwrap();
        let second = p.labels.iter().position(|&l| !l).unwrap();
        let dot: f64 = rows[first].iter().zip(rows[second]).map(|(x, y)| x * y).sum();
        assert!(dot.abs() < 1e-12);
        for r in &rows {
            assert!((r.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(p, planted_field(4, 4, 8, 0.0, 3).unwrap());
    }
}
