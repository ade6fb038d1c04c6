//! Cosine-similarity graphs over patch features and the set energies
//! defined on them.
//!
//! For a bipartition `(A, B)` of the nodes `V`, with set association
//! `C(X, Y) = sum_{i in X, j in Y} sim(i, j)` (self-pairs included):
//!
//! ```text
//! ncut(A, B) = C(A,B) / C(A,V) + C(A,B) / C(B,V)
//! gsa(A, B)  = C(A,A) / C(A,V) + C(B,B) / C(B,V)
//! ```

mod planted;
mod spectral;

pub use planted::{planted_field, PlantedField};
pub use spectral::{spectral_bipartition, SpectralOptions};

use crate::error::{Error, Result};
use crate::grid::FeatureField;
use crate::numeric::{affinity_ratio, cut_ratio, dot, EPS_NORM};

/// Cosine similarity of two vectors; 0 if either is (numerically) zero.
pub fn cosine_similarity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "cosine similarity operand",
            expected: format!("length {}", p.len()),
            actual: format!("length {}", q.len()),
        });
    }
    let np = dot(p, p).sqrt();
    let nq = dot(q, q).sqrt();
    if np < EPS_NORM || nq < EPS_NORM {
        return Ok(0.0);
    }
    Ok((dot(p, q) / (np * nq)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphOptions {
    /// Store the dense `n x n` similarity matrix.
    pub materialize: bool,
    /// Replace negative similarities with 0. Forces materialization, since
    /// clamped similarities have no factored form.
    pub clamp_negative: bool,
}

/// Pairwise cosine similarities between patches.
///
/// The unit-normalized features are always kept, so any set association
/// can be computed in factored form as an inner product of summed vectors.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    n: usize,
    dim: usize,
    normalized: Vec<f64>,
    matrix: Option<Vec<f64>>,
    clamp_negative: bool,
}

/// Build a similarity graph with default options except `materialize`.
pub fn build_graph(features: &FeatureField, materialize: bool) -> Result<SimilarityGraph> {
    build_graph_with(
        features,
        GraphOptions {
            materialize,
            clamp_negative: false,
        },
    )
}

pub fn build_graph_with(features: &FeatureField, opts: GraphOptions) -> Result<SimilarityGraph> {
    let (n, dim) = (features.patch_count(), features.dim());
    let mut normalized = vec![0.0; n * dim];
    let mut any_nonzero = false;
    for (src, dst) in features.vectors().zip(normalized.chunks_exact_mut(dim)) {
        let norm = dot(src, src).sqrt();
        if norm >= EPS_NORM {
            any_nonzero = true;
            for (d, s) in dst.iter_mut().zip(src) {
                *d = s / norm;
            }
        }
    }
    if !any_nonzero {
        return Err(Error::DegenerateFeatures);
    }

    let matrix = (opts.materialize || opts.clamp_negative).then(|| {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            let ti = &normalized[i * dim..(i + 1) * dim];
            let nonzero = ti.iter().any(|&v| v != 0.0);
            m[i * n + i] = if nonzero { 1.0 } else { 0.0 };
            for j in i + 1..n {
                let mut s = dot(ti, &normalized[j * dim..(j + 1) * dim]).clamp(-1.0, 1.0);
                if opts.clamp_negative {
                    s = s.max(0.0);
                }
                m[i * n + j] = s;
                m[j * n + i] = s;
            }
        }
        m
    });

    Ok(SimilarityGraph {
        n,
        dim,
        normalized,
        matrix,
        clamp_negative: opts.clamp_negative,
    })
}

impl SimilarityGraph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_materialized(&self) -> bool {
        self.matrix.is_some()
    }

    pub fn clamps_negative(&self) -> bool {
        self.clamp_negative
    }

    pub fn matrix(&self) -> Option<&[f64]> {
        self.matrix.as_deref()
    }

    pub fn normalized_features(&self) -> &[f64] {
        &self.normalized
    }

    /// Unit-norm feature vector of node `i` (all zeros for zero-norm input).
    pub fn unit_vector(&self, i: usize) -> &[f64] {
        &self.normalized[i * self.dim..(i + 1) * self.dim]
    }

    /// Similarity between nodes `i` and `j`.
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        match &self.matrix {
            Some(m) => m[i * self.n + j],
            None => {
                if i == j && self.unit_vector(i).iter().any(|&v| v != 0.0) {
                    1.0
                } else {
                    dot(self.unit_vector(i), self.unit_vector(j)).clamp(-1.0, 1.0)
                }
            }
        }
    }

    fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        match nodes.iter().find(|&&i| i >= self.n) {
            Some(&index) => Err(Error::NodeOutOfRange { index, n: self.n }),
            None => Ok(()),
        }
    }

    /// Sum of the unit feature vectors of `nodes`.
    pub fn summed_vector(&self, nodes: &[usize]) -> Result<Vec<f64>> {
        self.check_nodes(nodes)?;
        let mut acc = vec![0.0; self.dim];
        for &i in nodes {
            for (a, v) in acc.iter_mut().zip(self.unit_vector(i)) {
                *a += v;
            }
        }
        Ok(acc)
    }

    fn require_matrix(&self) -> Result<&[f64]> {
        self.matrix
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("operation requires a materialized graph".into()))
    }
}

/// `C(X, Y)`: explicit double sum of similarities, self-pairs included.
pub fn set_association(graph: &SimilarityGraph, x: &[usize], y: &[usize]) -> Result<f64> {
    graph.check_nodes(x)?;
    graph.check_nodes(y)?;
    let mut total = 0.0;
    for &i in x {
        for &j in y {
            total += graph.similarity(i, j);
        }
    }
    Ok(total)
}

/// `C(X, Y)` as `(sum_X t_i) . (sum_Y t_j)` over unit features, in `O((|X| + |Y|) D)`.
pub fn set_association_factored(graph: &SimilarityGraph, x: &[usize], y: &[usize]) -> Result<f64> {
    if graph.clamp_negative {
        return Err(Error::InvalidArgument(
            "clamped similarities have no factored form".into(),
        ));
    }
    Ok(dot(&graph.summed_vector(x)?, &graph.summed_vector(y)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

/// Assignment of every node to one of two sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    assignment: Vec<Side>,
}

impl Bipartition {
    pub fn new(assignment: Vec<Side>) -> Self {
        Self { assignment }
    }

    /// Nodes where `in_a[i]` is true go to `A`.
    pub fn from_mask(in_a: &[bool]) -> Self {
        Self::new(in_a.iter().map(|&a| if a { Side::A } else { Side::B }).collect())
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[Side] {
        &self.assignment
    }

    pub fn side(&self, i: usize) -> Side {
        self.assignment[i]
    }

    pub fn members(&self, side: Side) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == side)
            .collect()
    }

    /// Fraction of nodes on which two partitions agree, maximized over a
    /// swap of labels.
    pub fn agreement(&self, other: &Bipartition) -> f64 {
        assert_eq!(self.len(), other.len(), "partition sizes differ");
        if self.is_empty() {
            return 1.0;
        }
        let same = self
            .assignment
            .iter()
            .zip(&other.assignment)
            .filter(|(a, b)| a == b)
            .count();
        let n = self.len();
        same.max(n - same) as f64 / n as f64
    }
}

/// Set associations needed by both energies, from one pass over the matrix.
struct Associations {
    aa: f64,
    ab: f64,
    bb: f64,
}

impl Associations {
    fn of(graph: &SimilarityGraph, part: &Bipartition) -> Result<Self> {
        let m = graph.require_matrix()?;
        if part.len() != graph.n {
            return Err(Error::DimensionMismatch {
                what: "bipartition",
                expected: format!("{} nodes", graph.n),
                actual: format!("{} nodes", part.len()),
            });
        }
        let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
        for i in 0..graph.n {
            let row = &m[i * graph.n..(i + 1) * graph.n];
            for (j, &s) in row.iter().enumerate() {
                match (part.side(i), part.side(j)) {
                    (Side::A, Side::A) => aa += s,
                    (Side::B, Side::B) => bb += s,
                    (Side::A, Side::B) => ab += s,
                    (Side::B, Side::A) => {}
                }
            }
        }
        Ok(Self { aa, ab, bb })
    }
}

/// Normalized-cut energy of a bipartition. Lower is a cleaner split.
pub fn ncut_energy(graph: &SimilarityGraph, part: &Bipartition) -> Result<f64> {
    let c = Associations::of(graph, part)?;
    Ok(cut_ratio(c.ab, c.aa + c.ab) + cut_ratio(c.ab, c.bb + c.ab))
}

/// Intra-set affinity energy of a bipartition; at most 2 for nonnegative
/// similarities. Higher is a cleaner split.
pub fn gsa_set_energy(graph: &SimilarityGraph, part: &Bipartition) -> Result<f64> {
    let c = Associations::of(graph, part)?;
    Ok(affinity_ratio(c.aa, c.aa + c.ab) + affinity_ratio(c.bb, c.bb + c.ab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(rows: &[&[f64]]) -> FeatureField {
        let dim = rows[0].len();
        FeatureField::new(1, rows.len(), dim, rows.concat()).unwrap()
    }

    fn random_field(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> FeatureField {
        let data = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        FeatureField::new(1, n, dim, data).unwrap()
    }

    fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Bipartition {
        Bipartition::from_mask(&(0..n).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>())
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[3.0, 4.0], &[6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine_similarity(&[1.0, 0.0], &[-1.0, 0.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn graph_examples() {
        let g = build_graph(&field(&[&[2.0, 1.0], &[2.0, 1.0]]), true).unwrap();
        for &v in g.matrix().unwrap() {
            assert!((v - 1.0).abs() < 1e-15);
        }
        let g = build_graph(&field(&[&[1.0, 0.0], &[0.0, 1.0]]), true).unwrap();
        assert_eq!(g.matrix().unwrap(), &[1.0, 0.0, 0.0, 1.0]);
        let g = build_graph(&field(&[&[1.0, 0.0], &[0.0, 1.0]]), false).unwrap();
        assert!(g.matrix().is_none());
        assert!(matches!(
            build_graph(&field(&[&[0.0, 0.0], &[0.0, 0.0]]), true),
            Err(Error::DegenerateFeatures)
        ));
    }

    #[test]
    fn matrix_matches_pairwise_cosine_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<f64> = (0..16 * 8 * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = FeatureField::new(16, 8, 4, data).unwrap();
        let g = build_graph(&f, true).unwrap();
        let m = g.matrix().unwrap();
        let n = f.patch_count();
        for i in 0..n {
            for j in 0..n {
                let oracle = cosine_similarity(f.vector(i), f.vector(j)).unwrap();
                assert!((m[i * n + j] - oracle).abs() < 1e-12);
                assert_eq!(m[i * n + j], m[j * n + i]);
            }
        }
    }

    #[test]
    fn zero_vectors_are_disconnected() {
        let g = build_graph(&field(&[&[1.0, 1.0], &[0.0, 0.0], &[1.0, 0.0]]), true).unwrap();
        let m = g.matrix().unwrap();
        assert_eq!(&m[3..6], &[0.0, 0.0, 0.0]);
        assert_eq!(g.similarity(1, 1), 0.0);
    }

    #[test]
    fn clamping_removes_negatives() {
        let f = field(&[&[1.0, 0.0], &[-1.0, 0.1]]);
        let opts = GraphOptions {
            materialize: false,
            clamp_negative: true,
        };
        let g = build_graph_with(&f, opts).unwrap();
        assert!(g.is_materialized());
        assert_eq!(g.similarity(0, 1), 0.0);
        assert!(set_association_factored(&g, &[0], &[1]).is_err());
    }

    #[test]
    fn set_association_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = build_graph(&random_field(&mut rng, 6, 3), true).unwrap();
        assert!((set_association(&g, &[0], &[0]).unwrap() - 1.0).abs() < 1e-15);

        let ortho = build_graph(&field(&[&[1.0, 0.0], &[0.0, 1.0]]), true).unwrap();
        assert_eq!(set_association(&ortho, &[0], &[1]).unwrap(), 0.0);

        assert!(matches!(
            set_association(&g, &[0, 9], &[1]),
            Err(Error::NodeOutOfRange { index: 9, n: 6 })
        ));
    }

    #[test]
    fn set_association_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_field(&mut rng, 20, 5);
        let g = build_graph(&f, true).unwrap();
        let x: Vec<usize> = (0..20).filter(|_| rng.random_bool(0.4)).collect();
        let y: Vec<usize> = (0..20).filter(|_| rng.random_bool(0.6)).collect();
        let mut oracle = 0.0;
        for &i in &x {
            for &j in &y {
                oracle += cosine_similarity(f.vector(i), f.vector(j)).unwrap();
            }
        }
        assert!((set_association(&g, &x, &y).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let ortho = build_graph(&field(&[&[1.0, 0.0], &[0.0, 1.0]]), true).unwrap();
        let split = Bipartition::from_mask(&[true, false]);
        assert_eq!(ncut_energy(&ortho, &split).unwrap(), 0.0);
        assert_eq!(gsa_set_energy(&ortho, &split).unwrap(), 2.0);

        let row: &[f64] = &[1.0, 2.0];
        let same = build_graph(&field(&[row; 4]), true).unwrap();
        let half = Bipartition::from_mask(&[true, true, false, false]);
        assert!((ncut_energy(&same, &half).unwrap() - 1.0).abs() < 1e-15);
        assert!((gsa_set_energy(&same, &half).unwrap() - 1.0).abs() < 1e-15);

        let all_a = Bipartition::from_mask(&[true; 4]);
        let ncut = ncut_energy(&same, &all_a).unwrap();
        assert!(ncut.is_finite());
        assert_eq!(ncut, 0.0);
        let all_b = Bipartition::from_mask(&[false; 4]);
        assert_eq!(ncut_energy(&same, &all_b).unwrap(), 0.0);
        // C(A,A)/C(A,V) = 1, and the empty side contributes the guarded 1.
        assert_eq!(gsa_set_energy(&same, &all_a).unwrap(), 2.0);
    }

    #[test]
    fn energies_need_matrix() {
        let g = build_graph(&field(&[&[1.0, 0.0], &[0.0, 1.0]]), false).unwrap();
        assert!(ncut_energy(&g, &Bipartition::from_mask(&[true, false])).is_err());
    }

    #[test]
    fn power_of_two_scaling_is_bitwise_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_field(&mut rng, 10, 4);
        let scaled = FeatureField::new(1, 10, 4, f.data().iter().map(|v| v * 8.0).collect()).unwrap();
        let (a, b) = (build_graph(&f, true).unwrap(), build_graph(&scaled, true).unwrap());
        assert_eq!(a.normalized_features(), b.normalized_features());
        assert_eq!(a.matrix(), b.matrix());
    }

    proptest! {
        #[test]
        fn positive_scaling_leaves_graph_unchanged(seed in 0u64..500, scale in 1e-3f64..1e3, node in 0usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(&mut rng, 12, 5);
            let mut data = f.data().to_vec();
            data[node * 5..(node + 1) * 5].iter_mut().for_each(|v| *v *= scale);
            let scaled = FeatureField::new(1, 12, 5, data).unwrap();
            let (a, b) = (build_graph(&f, true).unwrap(), build_graph(&scaled, true).unwrap());
            for (x, y) in a.matrix().unwrap().iter().zip(b.matrix().unwrap()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn association_bridge_identities(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = build_graph(&random_field(&mut rng, 15, 4), true).unwrap();
            let part = random_partition(&mut rng, 15);
            let (a, b) = (part.members(Side::A), part.members(Side::B));
            let all: Vec<usize> = (0..15).collect();
            let cav = set_association(&g, &a, &all).unwrap();
            let caa = set_association(&g, &a, &a).unwrap();
            let cab = set_association(&g, &a, &b).unwrap();
            prop_assert!((cav - caa - cab).abs() < 1e-10);
            prop_assert!((set_association_factored(&g, &a, &b).unwrap() - cab).abs() < 1e-10);
            prop_assert!((set_association_factored(&g, &a, &all).unwrap() - cav).abs() < 1e-10);
            if cav.abs() > 1e-3 {
                prop_assert!((caa / cav - (1.0 - cab / cav)).abs() < 1e-10);
            }
        }
    }
}
