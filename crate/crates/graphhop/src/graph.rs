//! Graph storage and the smoothing operators built on it.
//!
//! A [`Graph`] is undirected and attributed, stored in compressed sparse row
//! form with neighbor lists sorted per row. Construction symmetrizes the
//! input edge list, drops self-loops, and collapses duplicates, so the rest
//! of the crate can assume a simple graph.
//!
//! Three derived operators are exposed as [`CsrMatrix`] values: the
//! row-stochastic adjacency `D^-1 A` used for aggregation, the symmetric
//! normalization `D^-1/2 A D^-1/2` used by the classical propagation
//! baseline, and the unnormalized Laplacian `D - A` used for smoothness
//! measurements. Powers of the row-stochastic operator are never formed
//! explicitly; [`Graph::aggregate`] applies it repeatedly instead.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Undirected attributed graph in CSR form.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    attributes: Array2<f64>,
}

impl Graph {
    /// Builds a graph from an edge list and a dense `n x d` attribute matrix.
    ///
    /// The node count is the attribute row count. Edges are symmetrized,
    /// self-loops dropped, and duplicates (including reversed copies)
    /// collapsed. An edge endpoint outside `0..n` is an error.
    pub fn build(edges: &[(usize, usize)], attributes: Array2<f64>) -> Result<Self> {
        let n = attributes.nrows();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(Error::NodeOutOfRange { id: v, n });
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            neighbors.extend_from_slice(row);
            offsets.push(neighbors.len());
        }
        Ok(Graph {
            n,
            offsets,
            neighbors,
            attributes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn attr_dim(&self) -> usize {
        self.attributes.ncols()
    }

    pub fn attributes(&self) -> ArrayView2<'_, f64> {
        self.attributes.view()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Undirected edge list with `u < v`, ascending. Inverse of [`Graph::build`].
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Row-stochastic adjacency `D^-1 A`. Rows of isolated nodes are zero,
    /// so aggregation leaves them with no neighbor signal rather than NaN.
    pub fn normalized_adjacency(&self) -> CsrMatrix {
        let mut values = Vec::with_capacity(self.neighbors.len());
        for v in 0..self.n {
            let d = self.degree(v);
            let w = if d == 0 { 0.0 } else { 1.0 / d as f64 };
            values.extend(std::iter::repeat(w).take(d));
        }
        CsrMatrix {
            n: self.n,
            offsets: self.offsets.clone(),
            indices: self.neighbors.clone(),
            values,
        }
    }

    /// Symmetrically normalized adjacency `D^-1/2 A D^-1/2`.
    pub fn symmetric_normalized_adjacency(&self) -> CsrMatrix {
        let inv_sqrt: Vec<f64> = (0..self.n)
            .map(|v| {
                let d = self.degree(v);
                if d == 0 {
                    0.0
                } else {
                    1.0 / (d as f64).sqrt()
                }
            })
            .collect();
        let mut values = Vec::with_capacity(self.neighbors.len());
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                values.push(inv_sqrt[u] * inv_sqrt[v]);
            }
        }
        CsrMatrix {
            n: self.n,
            offsets: self.offsets.clone(),
            indices: self.neighbors.clone(),
            values,
        }
    }

    /// Unnormalized combinatorial Laplacian `L = D - A`, symmetric positive
    /// semidefinite.
    pub fn unnormalized_laplacian(&self) -> CsrMatrix {
        let mut offsets = Vec::with_capacity(self.n + 1);
        let mut indices = Vec::with_capacity(self.neighbors.len() + self.n);
        let mut values = Vec::with_capacity(self.neighbors.len() + self.n);
        offsets.push(0);
        for u in 0..self.n {
            let mut placed_diag = false;
            for &v in self.neighbors(u) {
                if !placed_diag && v > u {
                    indices.push(u);
                    values.push(self.degree(u) as f64);
                    placed_diag = true;
                }
                indices.push(v);
                values.push(-1.0);
            }
            if !placed_diag {
                indices.push(u);
                values.push(self.degree(u) as f64);
            }
            offsets.push(indices.len());
        }
        CsrMatrix {
            n: self.n,
            offsets,
            indices,
            values,
        }
    }

    /// Concatenates `source` with its first `hops` neighborhood averages:
    /// block `m` holds `(D^-1 A)^m source`, computed by repeated sparse
    /// application. Block 0 is a verbatim copy of `source`.
    pub fn aggregate(&self, source: ArrayView2<'_, f64>, hops: usize) -> Result<AggregatedMatrix> {
        if source.nrows() != self.n {
            return Err(Error::ShapeMismatch {
                context: "aggregate source",
                expected: format!("{} rows", self.n),
                got: format!("{} rows", source.nrows()),
            });
        }
        let k = source.ncols();
        let mut values = Array2::zeros((self.n, k * (hops + 1)));
        values.slice_mut(ndarray::s![.., 0..k]).assign(&source);
        let mut madds = 0usize;
        for m in 1..=hops {
            let (prev, mut cur) = values.multi_slice_mut((
                ndarray::s![.., (m - 1) * k..m * k],
                ndarray::s![.., m * k..(m + 1) * k],
            ));
            for u in 0..self.n {
                let d = self.degree(u);
                if d == 0 {
                    continue;
                }
                let inv = 1.0 / d as f64;
                for &v in self.neighbors(u) {
                    for c in 0..k {
                        cur[[u, c]] += prev[[v, c]];
                    }
                }
                for c in 0..k {
                    cur[[u, c]] *= inv;
                }
            }
            madds += self.neighbors.len() * k;
        }
        Ok(AggregatedMatrix {
            values,
            hops,
            block_width: k,
            madds,
        })
    }
}

/// General sparse matrix in CSR form; used for the operators derived from a
/// [`Graph`]. Column indices are sorted within each row.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` sparse matrix from `(row, col, value)` triplets.
    /// Duplicate coordinates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in triplets {
            if i >= n {
                return Err(Error::NodeOutOfRange { id: i, n });
            }
            if j >= n {
                return Err(Error::NodeOutOfRange { id: j, n });
            }
            rows[i].push((j, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, w) in row.iter() {
                if last == Some(j) {
                    *values.last_mut().expect("value present") += w;
                } else {
                    indices.push(j);
                    values.push(w);
                    last = Some(j);
                }
            }
            offsets.push(indices.len());
        }
        Ok(CsrMatrix {
            n,
            offsets,
            indices,
            values,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row `i` as parallel slices of column indices and values.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Dense `self * rhs` for an `n x k` right-hand side.
    pub fn apply(&self, rhs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if rhs.nrows() != self.n {
            return Err(Error::ShapeMismatch {
                context: "sparse apply",
                expected: format!("{} rows", self.n),
                got: format!("{} rows", rhs.nrows()),
            });
        }
        let k = rhs.ncols();
        let mut out = Array2::zeros((self.n, k));
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                for c in 0..k {
                    out[[i, c]] += w * rhs[[j, c]];
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                out[[i, j]] += w;
            }
        }
        out
    }

    /// `trace(H^T self H)`, the quadratic form summed over columns of `H`.
    pub fn trace_quadratic(&self, h: ArrayView2<'_, f64>) -> Result<f64> {
        let sh = self.apply(h)?;
        Ok(h.iter().zip(sh.iter()).map(|(a, b)| a * b).sum())
    }
}

/// Multi-hop neighborhood averages of a source matrix, stored as the
/// horizontal concatenation `[source | avg^1 | ... | avg^hops]`.
#[derive(Debug, Clone)]
pub struct AggregatedMatrix {
    values: Array2<f64>,
    hops: usize,
    block_width: usize,
    madds: usize,
}

impl AggregatedMatrix {
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn block_width(&self) -> usize {
        self.block_width
    }

    /// Block `m` (the `m`-hop average; 0 is the source itself).
    pub fn block(&self, m: usize) -> ArrayView2<'_, f64> {
        let k = self.block_width;
        self.values.slice(ndarray::s![.., m * k..(m + 1) * k])
    }

    /// Counted multiply-adds spent building the blocks.
    pub fn madds(&self) -> usize {
        self.madds
    }
}

/// Disjoint labeled / validation / test node sets over `0..n`. Everything
/// outside the labeled set is unlabeled; validation and test nodes are drawn
/// from the unlabeled pool and keep their ground truth hidden from training.
#[derive(Debug, Clone)]
pub struct NodeSplit {
    n: usize,
    labeled: Vec<usize>,
    validation: Vec<usize>,
    test: Vec<usize>,
    labeled_mask: Vec<bool>,
}

impl NodeSplit {
    pub fn new(
        n: usize,
        mut labeled: Vec<usize>,
        mut validation: Vec<usize>,
        mut test: Vec<usize>,
    ) -> Result<Self> {
        labeled.sort_unstable();
        validation.sort_unstable();
        test.sort_unstable();
        let mut seen = vec![0u8; n];
        for (name, set) in [
            ("labeled", &labeled),
            ("validation", &validation),
            ("test", &test),
        ] {
            for &v in set {
                if v >= n {
                    return Err(Error::SplitInfeasible(format!(
                        "{name} node {v} out of range for n = {n}"
                    )));
                }
                if seen[v] != 0 {
                    return Err(Error::SplitInfeasible(format!(
                        "node {v} appears in more than one subset (or twice in {name})"
                    )));
                }
                seen[v] = 1;
            }
        }
        let mut labeled_mask = vec![false; n];
        for &v in &labeled {
            labeled_mask[v] = true;
        }
        Ok(NodeSplit {
            n,
            labeled,
            validation,
            test,
            labeled_mask,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn validation(&self) -> &[usize] {
        &self.validation
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    pub fn is_labeled(&self, v: usize) -> bool {
        self.labeled_mask[v]
    }

    /// All nodes outside the labeled set, ascending.
    pub fn unlabeled(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| !self.labeled_mask[v]).collect()
    }
}
