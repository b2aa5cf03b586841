//! Untrained multi-layer graph convolution feedforward.
//!
//! Each layer computes `Z ← tanh(P · Z · W)` followed by row-wise l2
//! normalization, where `P = D̂^(-1/2)(A + I)D̂^(-1/2)` and `W` is a frozen
//! random matrix. No training happens anywhere: a layer acts as a random
//! projection of the degree-normalized neighborhood average, which is enough
//! to sharpen community structure in the features it receives.

use crate::error::{Error, Result};
use crate::features::{spmm, EmbeddingMatrix};
use crate::graph::{Graph, SparseMatrix};
use crate::rng::Stream;

/// Layer widths `[input, hidden..., output]` plus the weight seed.
/// Activation is fixed to tanh.
#[derive(Debug, Clone)]
pub struct LayerConfig {
    pub dims: Vec<usize>,
    pub seed: u64,
}

/// Table of widths keyed by graph size; nearest bracket wins.
const LAYER_BRACKETS: &[(usize, &[usize])] = &[
    (1_000, &[256, 128, 64]),
    (5_000, &[1024, 512, 256, 128]),
    (10_000, &[4096, 2048, 1024, 512, 256]),
    (50_000, &[4096, 2048, 1024, 512, 256]),
    (100_000, &[4096, 2048, 1024, 512, 256]),
    (200_000, &[4096, 2048, 1024, 512, 256]),
];

impl LayerConfig {
    pub fn new(dims: Vec<usize>, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidParameter(
                "layer configuration needs an input and at least one output width".into(),
            ));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter("layer widths must be >= 1".into()));
        }
        Ok(LayerConfig { dims, seed })
    }

    /// Default widths for a graph of `num_nodes` nodes (nearest bracket).
    pub fn for_num_nodes(num_nodes: usize, seed: u64) -> Self {
        let dims = nearest_bracket(num_nodes).to_vec();
        LayerConfig { dims, seed }
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }
}

pub(crate) fn nearest_bracket(num_nodes: usize) -> &'static [usize] {
    LAYER_BRACKETS
        .iter()
        .min_by_key(|(n, _)| n.abs_diff(num_nodes))
        .map(|(_, dims)| *dims)
        .unwrap()
}

/// Frozen random layer weights; `matrices[k]` has shape `dims[k] x dims[k+1]`
/// with entries i.i.d. normal, std `dims[k+1]^(-1/2)` (the same scaling as
/// the feature projection, so expected row norms carry through the stack).
#[derive(Debug, Clone)]
pub struct GnnWeights {
    pub matrices: Vec<EmbeddingMatrix>,
}

impl GnnWeights {
    pub fn sample(cfg: &LayerConfig) -> Self {
        let mut matrices = Vec::with_capacity(cfg.dims.len() - 1);
        for (k, pair) in cfg.dims.windows(2).enumerate() {
            let (rows, cols) = (pair[0], pair[1]);
            let std_dev = 1.0 / (cols as f64).sqrt();
            let mut w = EmbeddingMatrix::zeros(rows, cols);
            let mut stream = Stream::derive(cfg.seed, "gnn-weights", k as u64);
            for i in 0..rows {
                for v in w.row_mut(i) {
                    *v = stream.gaussian_scaled(std_dev);
                }
            }
            matrices.push(w);
        }
        GnnWeights { matrices }
    }
}

/// `D̂^(-1/2)(A + I)D̂^(-1/2)`: the self-edge-augmented, degree-normalized
/// propagation matrix with `N + 2|E|` nonzeros.
pub fn propagation_matrix(g: &Graph) -> SparseMatrix {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| 1.0 / ((d + 1) as f64).sqrt())
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(n + 2 * g.num_edges());
    let mut values = Vec::with_capacity(n + 2 * g.num_edges());
    offsets.push(0);
    for i in 0..n {
        let mut placed_diag = false;
        for &j in g.neighbors(i) {
            if !placed_diag && j > i {
                col_indices.push(i);
                values.push(inv_sqrt[i] * inv_sqrt[i]);
                placed_diag = true;
            }
            col_indices.push(j);
            values.push(inv_sqrt[i] * inv_sqrt[j]);
        }
        if !placed_diag {
            col_indices.push(i);
            values.push(inv_sqrt[i] * inv_sqrt[i]);
        }
        offsets.push(col_indices.len());
    }
    SparseMatrix {
        rows: n,
        cols: n,
        csr_offsets: offsets,
        csr_col_indices: col_indices,
        csr_values: values,
    }
}

/// One feedforward pass: per layer `Z ← tanh(P·Z·W)` then row-wise l2
/// normalization (including after the last layer). Deterministic for fixed
/// `(g, y, cfg)`.
pub fn forward(g: &Graph, y: &EmbeddingMatrix, cfg: &LayerConfig) -> Result<EmbeddingMatrix> {
    if y.rows != g.num_nodes() {
        return Err(Error::SizeMismatch {
            left: y.rows,
            right: g.num_nodes(),
            context: "feature rows vs graph nodes",
        });
    }
    if y.cols != cfg.input_dim() {
        return Err(Error::SizeMismatch {
            left: y.cols,
            right: cfg.input_dim(),
            context: "feature columns vs first layer width",
        });
    }
    let p = propagation_matrix(g);
    let weights = GnnWeights::sample(cfg);
    let mut z: Option<EmbeddingMatrix> = None;
    for w in &weights.matrices {
        let aggregated = match &z {
            None => spmm(&p, y),
            Some(prev) => spmm(&p, prev),
        };
        let mut next = aggregated.matmul(w);
        for v in next.values_mut() {
            *v = v.tanh();
        }
        next.l2_normalize_rows();
        z = Some(next);
    }
    Ok(z.expect("layer config has at least one weight matrix"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{gaussian_projection, normalized_adjacency};

    fn entry(m: &SparseMatrix, i: usize, j: usize) -> f64 {
        let (cols, vals) = m.row(i);
        cols.iter()
            .position(|&c| c == j)
            .map(|p| vals[p])
            .unwrap_or(0.0)
    }

    #[test]
    fn propagation_isolated_node_is_identity() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let p = propagation_matrix(&g);
        assert_eq!(p.nnz(), 1);
        assert_eq!(entry(&p, 0, 0), 1.0);
    }

    #[test]
    fn propagation_single_edge_all_half() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let p = propagation_matrix(&g);
        assert_eq!(p.nnz(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert!((entry(&p, i, j) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn propagation_row_sums_at_most_one() {
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (5, 6)]).unwrap();
        let p = propagation_matrix(&g);
        p.validate().unwrap();
        assert_eq!(p.nnz(), 7 + 2 * 6);
        for i in 0..7 {
            let (_, vals) = p.row(i);
            let sum: f64 = vals.iter().sum();
            assert!(sum <= 1.0 + 1e-12, "row {i} sums to {sum}");
        }
        // triangle rows: every closed-neighborhood degree equal -> sums exactly 1
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = propagation_matrix(&tri);
        for i in 0..3 {
            let (_, vals) = p.row(i);
            assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    fn demo_input(n: usize, cols: usize, seed: u64) -> EmbeddingMatrix {
        let mut y = EmbeddingMatrix::zeros(n, cols);
        let mut s = Stream::derive(seed, "gnn-test-input", 0);
        for i in 0..n {
            for v in y.row_mut(i) {
                *v = s.gaussian();
            }
        }
        y
    }

    #[test]
    fn forward_rows_are_unit_norm() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        let y = demo_input(6, 8, 1);
        let cfg = LayerConfig::new(vec![8, 4, 3], 7).unwrap();
        let z = forward(&g, &y, &cfg).unwrap();
        assert!(z.is_finite());
        for i in 0..6 {
            let norm: f64 = z.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "row {i} norm {norm}");
        }
    }

    #[test]
    fn structurally_identical_nodes_get_identical_rows() {
        // star 0-{1,2}: nodes 1 and 2 are swappable by an automorphism
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let mut y = EmbeddingMatrix::zeros(3, 4);
        y.row_mut(0).copy_from_slice(&[1.0, -2.0, 0.5, 3.0]);
        y.row_mut(1).copy_from_slice(&[0.25, 0.5, -1.0, 2.0]);
        y.row_mut(2).copy_from_slice(&[0.25, 0.5, -1.0, 2.0]);
        let cfg = LayerConfig::new(vec![4, 3], 11).unwrap();
        let z = forward(&g, &y, &cfg).unwrap();
        assert_eq!(z.row(1), z.row(2));
    }

    #[test]
    fn forward_is_deterministic() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let y = demo_input(5, 6, 3);
        let cfg = LayerConfig::new(vec![6, 4, 2], 19).unwrap();
        let a = forward(&g, &y, &cfg).unwrap();
        let b = forward(&g, &y, &cfg).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let y = demo_input(3, 5, 2);
        let cfg = LayerConfig::new(vec![4, 2], 1).unwrap();
        assert!(forward(&g, &y, &cfg).is_err());
    }

    #[test]
    fn forward_is_permutation_equivariant() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let y = demo_input(6, 5, 8);
        let cfg = LayerConfig::new(vec![5, 3], 21).unwrap();
        let z = forward(&g, &y, &cfg).unwrap();

        let perm = [3usize, 5, 0, 1, 4, 2]; // node v -> perm[v]
        let edges: Vec<(usize, usize)> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        let pg = Graph::from_edges(6, &edges).unwrap();
        let mut py = EmbeddingMatrix::zeros(6, 5);
        for v in 0..6 {
            py.row_mut(perm[v]).copy_from_slice(y.row(v));
        }
        let pz = forward(&pg, &py, &cfg).unwrap();
        for v in 0..6 {
            for (a, b) in z.row(v).iter().zip(pz.row(perm[v])) {
                assert!((a - b).abs() < 1e-12, "node {v}: {a} vs {b}");
            }
        }
    }

    // Pipeline-level sanity: embeddings from two bridged cliques separate the
    // cliques in cosine similarity, averaged over seeds.
    #[test]
    fn two_clique_embeddings_separate() {
        let mut edges = Vec::new();
        for a in 0..8usize {
            for b in (a + 1)..8 {
                edges.push((a, b));
                edges.push((a + 8, b + 8));
            }
        }
        edges.push((0, 8)); // bridge
        let g = Graph::from_edges(16, &edges).unwrap();
        let x = normalized_adjacency(&g);

        let mut wins = 0;
        for seed in 0..10u64 {
            let y = gaussian_projection(&x, 16, seed).unwrap();
            let cfg = LayerConfig::new(vec![16, 8], seed).unwrap();
            let z = forward(&g, &y, &cfg).unwrap();
            let cos = |i: usize, j: usize| -> f64 {
                z.row(i).iter().zip(z.row(j)).map(|(a, b)| a * b).sum()
            };
            let (mut intra, mut inter) = (Vec::new(), Vec::new());
            for i in 0..16 {
                for j in (i + 1)..16 {
                    if (i < 8) == (j < 8) {
                        intra.push(cos(i, j));
                    } else {
                        inter.push(cos(i, j));
                    }
                }
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            if mean(&intra) > mean(&inter) {
                wins += 1;
            }
        }
        assert!(wins >= 9, "cliques separated in only {wins}/10 seeds");
    }
}
