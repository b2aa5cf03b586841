//! Objective-derived sparse statistics and their random-projection features.
//!
//! Two sparse matrices summarize a graph's structure for partitioning: the
//! degree-normalized adjacency `M` (from normalized-cut minimization) and the
//! reduced modularity matrix `Q̃` (the modularity matrix restricted to the
//! adjacency pattern, from modularity maximization). Either is compressed to
//! `L` columns by multiplication with a Gaussian matrix whose entries have
//! standard deviation `L^(-1/2)`, which approximately preserves pairwise row
//! distances (Johnson–Lindenstrauss) while keeping the cost at
//! `O(nnz(X) · L)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, SparseMatrix};
use crate::rng::Stream;

/// Which structural statistic feeds the pipeline; selects between the two
/// method variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// `M = D^(-1/2) A D^(-1/2)`, the RaftGP-C route.
    NormalizedAdjacency,
    /// `Q̃`, the modularity matrix on the adjacency pattern, the RaftGP-M route.
    ReducedModularity,
}

impl FeatureKind {
    pub fn build(self, g: &Graph) -> Result<SparseMatrix> {
        match self {
            FeatureKind::NormalizedAdjacency => Ok(normalized_adjacency(g)),
            FeatureKind::ReducedModularity => reduced_modularity(g),
        }
    }
}

/// Dense row-major real matrix; row `i` is node `v_i`'s feature or embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub rows: usize,
    pub cols: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        EmbeddingMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// Densify a sparse matrix (used by the no-projection ablation, where the
    /// raw statistic feeds the GNN directly).
    pub fn from_sparse(x: &SparseMatrix) -> Self {
        let mut out = EmbeddingMatrix::zeros(x.rows, x.cols);
        for i in 0..x.rows {
            let (cols, vals) = x.row(i);
            let row = out.row_mut(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Dense product `self · other`, row-parallel. Each output row is a
    /// sequential accumulation, so results are bit-identical regardless of
    /// thread count.
    pub fn matmul(&self, other: &EmbeddingMatrix) -> EmbeddingMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let (n, inner, m) = (self.rows, self.cols, other.cols);
        let mut out = EmbeddingMatrix::zeros(n, m);
        out.values
            .par_chunks_mut(m)
            .zip(self.values.par_chunks(inner))
            .for_each(|(out_row, a_row)| {
                for (k, &a) in a_row.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let b_row = &other.values[k * m..(k + 1) * m];
                    for (o, &b) in out_row.iter_mut().zip(b_row) {
                        *o += a * b;
                    }
                }
            });
        out
    }

    /// Scale each row to unit l2 norm; all-zero rows stay zero.
    pub fn l2_normalize_rows(&mut self) {
        let cols = self.cols;
        self.values.par_chunks_mut(cols).for_each(|row| {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in row {
                    *v /= norm;
                }
            }
        });
    }
}

/// Sparse-dense product `x · z`, row-parallel with per-row sequential sums.
pub fn spmm(x: &SparseMatrix, z: &EmbeddingMatrix) -> EmbeddingMatrix {
    assert_eq!(x.cols, z.rows, "spmm dimension mismatch");
    let m = z.cols;
    let mut out = EmbeddingMatrix::zeros(x.rows, m);
    out.values
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(i, out_row)| {
            let (cols, vals) = x.row(i);
            for (&k, &v) in cols.iter().zip(vals) {
                let z_row = z.row(k);
                for (o, &b) in out_row.iter_mut().zip(z_row) {
                    *o += v * b;
                }
            }
        });
    out
}

/// `M = D^(-1/2) A D^(-1/2)`: exactly `1/sqrt(deg(i)·deg(j))` on edges, zero
/// elsewhere. Isolated nodes yield empty rows.
pub fn normalized_adjacency(g: &Graph) -> SparseMatrix {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| if d > 0 { 1.0 / (d as f64).sqrt() } else { 0.0 })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(2 * g.num_edges());
    let mut values = Vec::with_capacity(2 * g.num_edges());
    offsets.push(0);
    for i in 0..n {
        for &j in g.neighbors(i) {
            col_indices.push(j);
            values.push(inv_sqrt[i] * inv_sqrt[j]);
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

/// Reduced modularity matrix `Q̃`: `1 − deg(i)·deg(j)/(2e)` on edges, zero
/// elsewhere (off-edge modularity entries are dropped to keep the adjacency
/// sparsity pattern).
pub fn reduced_modularity(g: &Graph) -> Result<SparseMatrix> {
    let two_e = 2.0 * g.num_edges() as f64;
    if g.num_edges() == 0 {
        return Err(Error::DegenerateInput(
            "reduced modularity needs at least one edge".into(),
        ));
    }
    let n = g.num_nodes();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(2 * g.num_edges());
    let mut values = Vec::with_capacity(2 * g.num_edges());
    offsets.push(0);
    for i in 0..n {
        let di = g.degree(i) as f64;
        for &j in g.neighbors(i) {
            col_indices.push(j);
            values.push(1.0 - di * g.degree(j) as f64 / two_e);
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

/// Project `x` to `target_dim` columns: `Y = X·Θ` with `Θ` entries i.i.d.
/// normal, mean 0, standard deviation `target_dim^(-1/2)`.
///
/// Row `k` of `Θ` comes from the substream `(seed, "projection", k)` and is
/// generated exactly once: the product runs column-by-column over `X`
/// (transposed access), so `Θ` never needs materializing. Fixed inputs give
/// bit-identical output.
pub fn gaussian_projection(
    x: &SparseMatrix,
    target_dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix> {
    if target_dim == 0 {
        return Err(Error::InvalidParameter(
            "projection dimension must be >= 1".into(),
        ));
    }
    let std_dev = 1.0 / (target_dim as f64).sqrt();
    // Transpose to CSC-style access: per column k, the rows it touches.
    let (col_offsets, col_rows, col_vals) = transpose(x);
    let mut y = EmbeddingMatrix::zeros(x.rows, target_dim);
    let mut theta_row = vec![0.0; target_dim];
    for k in 0..x.cols {
        let start = col_offsets[k];
        let end = col_offsets[k + 1];
        if start == end {
            continue;
        }
        let mut stream = Stream::derive(seed, "projection", k as u64);
        for t in theta_row.iter_mut() {
            *t = stream.gaussian_scaled(std_dev);
        }
        for idx in start..end {
            let i = col_rows[idx];
            let v = col_vals[idx];
            let row = y.row_mut(i);
            for (o, &t) in row.iter_mut().zip(&theta_row) {
                *o += v * t;
            }
        }
    }
    Ok(y)
}

fn transpose(x: &SparseMatrix) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut counts = vec![0usize; x.cols + 1];
    for &c in &x.csr_col_indices {
        counts[c + 1] += 1;
    }
    for k in 0..x.cols {
        counts[k + 1] += counts[k];
    }
    let mut rows = vec![0usize; x.nnz()];
    let mut vals = vec![0.0; x.nnz()];
    let mut cursor = counts.clone();
    for i in 0..x.rows {
        let (cols, values) = x.row(i);
        for (&c, &v) in cols.iter().zip(values) {
            let slot = cursor[c];
            rows[slot] = i;
            vals[slot] = v;
            cursor[c] += 1;
        }
    }
    (counts, rows, vals)
}
