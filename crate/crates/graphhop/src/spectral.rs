//! Graph Fourier analysis used to check the smoothness assumption behind
//! label propagation.
//!
//! The eigenvectors of the unnormalized Laplacian, ordered by ascending
//! eigenvalue, form a frequency basis for signals on the graph: small
//! eigenvalues mean slow variation across edges. Reconstructing the label
//! indicator matrix from only the bottom (or top) `k` frequencies and scoring
//! the result shows how much of the label signal lives at each end of the
//! spectrum. On homophilous graphs the low-frequency curve should dominate
//! the high-frequency one long before `k` reaches `n`.
//!
//! The decomposition is dense and cubic in `n`, so it is guarded by a node
//! cap rather than left to exhaust memory on inputs it was never meant for.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, Graph};
use crate::labels::{evaluate, Labels};
use crate::linalg;

/// Hard cap on the node count accepted by [`eigendecompose`].
pub const MAX_EIGEN_NODES: usize = 20_000;

/// Full Laplacian eigenbasis: eigenvalues ascending, eigenvectors as the
/// matching columns of an orthonormal matrix.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: Array2<f64>,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> ArrayView2<'_, f64> {
        self.eigenvectors.view()
    }

    pub fn node_count(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Which end of the spectrum a band-limited reconstruction keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyOrder {
    /// The `k` smallest eigenvalues (smooth components).
    Low,
    /// The `k` largest eigenvalues (oscillatory components).
    High,
}

/// Dense eigendecomposition of a sparse symmetric matrix, typically a graph
/// Laplacian. Fails on asymmetric input and on graphs beyond
/// [`MAX_EIGEN_NODES`].
pub fn eigendecompose(m: &CsrMatrix) -> Result<SpectralBasis> {
    let n = m.node_count();
    if n > MAX_EIGEN_NODES {
        return Err(Error::CapacityExceeded {
            what: "dense eigendecomposition",
            limit: MAX_EIGEN_NODES,
            n,
        });
    }
    for i in 0..n {
        let (cols, vals) = m.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            let delta = (w - m.get(j, i)).abs();
            if delta > 1e-9 {
                return Err(Error::NotSymmetric { i, j, delta });
            }
        }
    }
    let eig = linalg::symmetric_eigen(&m.to_dense())?;
    Ok(SpectralBasis {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
    })
}

/// Projects `y` onto the span of `k` eigenvectors from the chosen end of the
/// spectrum: `Q_k (Q_k^T y)`. Requires `1 <= k <= n`.
pub fn bandlimited_reconstruction(
    basis: &SpectralBasis,
    y: ArrayView2<'_, f64>,
    k: usize,
    order: FrequencyOrder,
) -> Result<Array2<f64>> {
    let n = basis.node_count();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "band width k = {k} outside 1..={n}"
        )));
    }
    if y.nrows() != n {
        return Err(Error::ShapeMismatch {
            context: "bandlimited reconstruction",
            expected: format!("{n} rows"),
            got: format!("{} rows", y.nrows()),
        });
    }
    let q = match order {
        FrequencyOrder::Low => basis.eigenvectors.slice(s![.., 0..k]),
        FrequencyOrder::High => basis.eigenvectors.slice(s![.., n - k..n]),
    };
    let coeffs = q.t().dot(&y);
    Ok(q.dot(&coeffs))
}

/// Accuracy of band-limited label reconstructions as the band widens.
#[derive(Debug, Clone)]
pub struct FrequencyCurve {
    /// Band widths, one per step.
    pub ks: Vec<usize>,
    /// Fraction of the spectrum each band covers, in (0, 1].
    pub fractions: Vec<f64>,
    /// Score (accuracy or micro-F1) keeping the lowest `k` frequencies.
    pub low: Vec<f64>,
    /// Score keeping the highest `k` frequencies.
    pub high: Vec<f64>,
}

impl FrequencyCurve {
    /// Scores at the widest band not exceeding the given spectrum fraction.
    pub fn at_fraction(&self, fraction: f64) -> Option<(usize, f64, f64)> {
        let mut out = None;
        for (i, &f) in self.fractions.iter().enumerate() {
            if f <= fraction + 1e-12 {
                out = Some((self.ks[i], self.low[i], self.high[i]));
            }
        }
        out
    }
}

/// Sweeps band-limited reconstruction of the ground-truth indicator matrix
/// over `steps` evenly spaced spectrum fractions (the last step always covers
/// the full spectrum) and scores both frequency orders at each width.
pub fn frequency_accuracy_curve(g: &Graph, labels: &Labels, steps: usize) -> Result<FrequencyCurve> {
    if steps == 0 {
        return Err(Error::InvalidConfig {
            field: "steps",
            message: "must be positive".into(),
        });
    }
    if labels.node_count() != g.node_count() {
        return Err(Error::ShapeMismatch {
            context: "frequency curve labels",
            expected: format!("{} nodes", g.node_count()),
            got: format!("{} nodes", labels.node_count()),
        });
    }
    let n = g.node_count();
    let basis = eigendecompose(&g.unnormalized_laplacian())?;
    let y = labels.indicator();
    let all: Vec<usize> = (0..n).collect();

    let mut curve = FrequencyCurve {
        ks: Vec::with_capacity(steps),
        fractions: Vec::with_capacity(steps),
        low: Vec::with_capacity(steps),
        high: Vec::with_capacity(steps),
    };
    for step in 1..=steps {
        let k = ((step * n) / steps).max(1);
        let low = bandlimited_reconstruction(&basis, y.view(), k, FrequencyOrder::Low)?;
        let high = bandlimited_reconstruction(&basis, y.view(), k, FrequencyOrder::High)?;
        curve.ks.push(k);
        curve.fractions.push(k as f64 / n as f64);
        curve.low.push(evaluate(low.view(), labels, &all));
        curve.high.push(evaluate(high.view(), labels, &all));
    }
    Ok(curve)
}
