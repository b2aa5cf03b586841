//! Core graph, sparse-matrix, and partition types plus their text formats.
//!
//! `Graph` is an undirected, unweighted, simple graph in CSR form; it is the
//! universal input of every stage. `SparseMatrix` is a general real-valued
//! CSR matrix. Both are immutable after construction and safe to share
//! across threads.
//!
//! File formats (UTF-8, LF newlines):
//! - edge list: one `u v` pair per line, 0-based ids, each undirected edge
//!   written once with `u < v`; an optional header `# N <n>` declares the
//!   node count so trailing isolated nodes survive a round-trip.
//! - partition: one `node_id block_id` pair per line, nodes in order,
//!   block ids dense in `[0, K)`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected unweighted simple graph in compressed sparse row form.
///
/// Neighbor lists are sorted ascending, never contain the node itself, and
/// mirror each other: `(i, j)` is present iff `(j, i)` is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    csr_offsets: Vec<usize>,
    csr_neighbors: Vec<usize>,
    degrees: Vec<usize>,
}

impl Graph {
    /// Build a graph from an edge list, symmetrizing and dropping self-loops
    /// and duplicates. `num_nodes` must cover every endpoint.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        for &(u, v) in edges {
            let id = u.max(v);
            if id >= num_nodes {
                return Err(Error::NodeOutOfBounds { id, num_nodes });
            }
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut csr_offsets = Vec::with_capacity(num_nodes + 1);
        let mut csr_neighbors = Vec::new();
        let mut degrees = Vec::with_capacity(num_nodes);
        csr_offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            degrees.push(list.len());
            csr_neighbors.extend_from_slice(list);
            csr_offsets.push(csr_neighbors.len());
        }
        Ok(Graph {
            num_nodes,
            csr_offsets,
            csr_neighbors,
            degrees,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.csr_neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.csr_neighbors[self.csr_offsets[v]..self.csr_offsets[v + 1]]
    }

    /// Iterate each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| u < v)
    }
}

/// General CSR real-valued sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub csr_offsets: Vec<usize>,
    pub csr_col_indices: Vec<usize>,
    pub csr_values: Vec<f64>,
}

impl SparseMatrix {
    pub fn nnz(&self) -> usize {
        self.csr_values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.csr_offsets[i]..self.csr_offsets[i + 1];
        (
            &self.csr_col_indices[range.clone()],
            &self.csr_values[range],
        )
    }

    /// Check the CSR structural invariants. Used by tests and debug paths.
    pub fn validate(&self) -> Result<()> {
        if self.csr_offsets.len() != self.rows + 1 {
            return Err(Error::Internal("offset array length mismatch".into()));
        }
        if *self.csr_offsets.last().unwrap() != self.csr_values.len()
            || self.csr_col_indices.len() != self.csr_values.len()
        {
            return Err(Error::Internal("value count mismatch".into()));
        }
        for i in 0..self.rows {
            let (cols, _) = self.row(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Internal(format!("row {i} columns not sorted")));
            }
            if cols.iter().any(|&c| c >= self.cols) {
                return Err(Error::Internal(format!("row {i} column out of bounds")));
            }
        }
        Ok(())
    }
}

/// Block assignment for all nodes, block ids dense in `[0, num_blocks)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_blocks: usize,
}

impl Partition {
    /// Wrap an assignment vector, verifying that every block id in
    /// `[0, max+1)` is used at least once.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::DegenerateInput("empty partition".into()));
        }
        let num_blocks = assignment.iter().max().unwrap() + 1;
        let mut seen = vec![false; num_blocks];
        for &b in &assignment {
            seen[b] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::DegenerateInput(format!(
                "block id {missing} unused; block ids must be dense"
            )));
        }
        Ok(Partition {
            assignment,
            num_blocks,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Node lists per block, each sorted ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks];
        for (v, &b) in self.assignment.iter().enumerate() {
            blocks[b].push(v);
        }
        blocks
    }
}

/// Load an edge list. Lines starting with `#` are headers/comments; the form
/// `# N <n>` declares the node count.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut declared_n: Option<usize> = None;
    let mut max_id: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("N") {
                if let Some(n) = it.next().and_then(|t| t.parse().ok()) {
                    declared_n = Some(n);
                }
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or(())
                .and_then(|t| t.parse::<usize>().map_err(|_| ()))
                .map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected `u v` node-id pair, got {line:?}"),
                })
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("trailing tokens after edge, got {line:?}"),
            });
        }
        max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u.max(v))));
        edges.push((u, v));
    }
    let num_nodes = match (declared_n, max_id) {
        (Some(n), Some(m)) => {
            if m >= n {
                return Err(Error::NodeOutOfBounds {
                    id: m,
                    num_nodes: n,
                });
            }
            n
        }
        (Some(n), None) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    Graph::from_edges(num_nodes, &edges)
}

/// Write a graph as an edge list, one `u v` line per undirected edge with
/// `u < v`. The `# N` header is emitted only when needed to preserve
/// trailing isolated nodes.
pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let inferred = g
        .edges()
        .map(|(_, v)| v + 1)
        .max()
        .unwrap_or(0);
    if g.num_nodes() > inferred {
        out.push_str(&format!("# N {}\n", g.num_nodes()));
    }
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load a partition file (`node_id block_id` lines covering every node
/// exactly once, dense block ids).
pub fn load_partition(path: impl AsRef<Path>) -> Result<Partition> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut parse = || -> Result<usize> {
            it.next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected `node_id block_id` pair, got {line:?}"),
                })
        };
        let node = parse()?;
        let block = parse()?;
        pairs.push((node, block));
    }
    if pairs.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "{}: empty partition file",
            path.display()
        )));
    }
    let n = pairs.len();
    let mut assignment = vec![usize::MAX; n];
    for (node, block) in pairs {
        if node >= n {
            return Err(Error::NodeOutOfBounds {
                id: node,
                num_nodes: n,
            });
        }
        if assignment[node] != usize::MAX {
            return Err(Error::DegenerateInput(format!(
                "{}: node {node} assigned twice",
                path.display()
            )));
        }
        assignment[node] = block;
    }
    Partition::from_assignment(assignment)
}

/// Write a partition as `node_id block_id` lines in node order.
pub fn save_partition(p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (v, &b) in p.assignment().iter().enumerate() {
        out.push_str(&format!("{v} {b}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
