//! Classical label propagation with a damped restart toward the seed labels.
//!
//! Starting from `H0` (one-hot rows for labeled nodes, zero rows elsewhere),
//! the iteration spreads scores over the symmetrically normalized adjacency
//! `S = D^-1/2 A D^-1/2`:
//!
//! ```text
//! H <- alpha * S * H + (1 - alpha) * H0
//! ```
//!
//! Because `alpha < 1` the map is a contraction, so the iteration converges
//! to the unique fixed point `(1 - alpha) (I - alpha S)^-1 H0`, which
//! [`lp_closed_form`] computes directly by a dense solve. The two routes
//! check each other: they must agree to tight tolerance on any graph small
//! enough for the dense path.
//!
//! Scores are relative evidence, not probabilities; rows need not sum to one
//! and hub-adjacent entries can exceed it. Decisions are row argmax.
//!
//! [`lp_cost`] reports the quadratic objective this family of methods
//! trades off: seed fidelity `||H_l - Y_l||_F^2` plus `alpha` times the
//! total variation `tr(H^T L H)` under the unnormalized Laplacian.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSplit};
use crate::labels::Labels;
use crate::linalg;

/// Hard cap on the node count accepted by the dense closed form.
pub const MAX_DENSE_SOLVE_NODES: usize = 5_000;

/// Damping and termination settings for the iterative route.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LpConfig {
    /// Propagation weight in (0, 1); the restart weight is `1 - alpha`.
    pub alpha: f64,
    /// Stop once the Frobenius norm of an update falls to this value.
    pub tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            alpha: 0.99,
            tol: 1e-9,
            max_iter: 1_000,
        }
    }
}

impl LpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig {
                field: "alpha",
                message: format!("must lie strictly inside (0, 1), got {}", self.alpha),
            });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "tol",
                message: format!("must be a positive finite number, got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig {
                field: "max_iter",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Outcome of the iterative route.
#[derive(Debug, Clone)]
pub struct LpRun {
    /// Final `n x c` score matrix.
    pub scores: Array2<f64>,
    /// Frobenius norm of each update, in iteration order.
    pub residuals: Vec<f64>,
    /// Whether the residual reached `tol` within the budget.
    pub converged: bool,
}

/// One-hot rows for labeled nodes, zero rows for everything else: the
/// canonical starting point for propagation.
pub fn seed_matrix(labels: &Labels, split: &NodeSplit) -> Array2<f64> {
    let mut h0 = Array2::zeros((labels.node_count(), labels.class_count()));
    for &v in split.labeled() {
        for &c in labels.classes_of(v) {
            h0[[v, c]] = 1.0;
        }
    }
    h0
}

/// Iterates the damped spreading update until the change falls below
/// `cfg.tol` or the budget runs out.
pub fn lp_iterate(g: &Graph, h0: ArrayView2<'_, f64>, cfg: &LpConfig) -> Result<LpRun> {
    cfg.validate()?;
    if h0.nrows() != g.node_count() {
        return Err(Error::ShapeMismatch {
            context: "propagation seed",
            expected: format!("{} rows", g.node_count()),
            got: format!("{} rows", h0.nrows()),
        });
    }
    let s = g.symmetric_normalized_adjacency();
    let restart = h0.mapv(|x| x * (1.0 - cfg.alpha));
    let mut h = h0.to_owned();
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let mut next = s.apply(h.view())?;
        next.mapv_inplace(|x| x * cfg.alpha);
        next += &restart;
        let residual = (&next - &h).mapv(|x| x * x).sum().sqrt();
        h = next;
        residuals.push(residual);
        if residual <= cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(LpRun {
        scores: h,
        residuals,
        converged,
    })
}

/// Fixed point of the spreading update, `(1 - alpha)(I - alpha S)^-1 H0`,
/// by dense LU solve. Guarded by [`MAX_DENSE_SOLVE_NODES`].
pub fn lp_closed_form(g: &Graph, h0: ArrayView2<'_, f64>, alpha: f64) -> Result<Array2<f64>> {
    LpConfig {
        alpha,
        ..LpConfig::default()
    }
    .validate()?;
    let n = g.node_count();
    if n > MAX_DENSE_SOLVE_NODES {
        return Err(Error::CapacityExceeded {
            what: "dense propagation solve",
            limit: MAX_DENSE_SOLVE_NODES,
            n,
        });
    }
    if h0.nrows() != n {
        return Err(Error::ShapeMismatch {
            context: "propagation seed",
            expected: format!("{n} rows"),
            got: format!("{} rows", h0.nrows()),
        });
    }
    let mut a = g.symmetric_normalized_adjacency().to_dense();
    a.mapv_inplace(|x| -alpha * x);
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    let b = h0.mapv(|x| x * (1.0 - alpha));
    linalg::solve(a, b)
}

/// Quadratic objective `||H_l - Y_l||_F^2 + alpha * tr(H^T L H)` with the
/// unnormalized Laplacian. `targets` rows align with `labeled`.
pub fn lp_cost(
    g: &Graph,
    h: ArrayView2<'_, f64>,
    labeled: &[usize],
    targets: ArrayView2<'_, f64>,
    alpha: f64,
) -> Result<f64> {
    if targets.nrows() != labeled.len() {
        return Err(Error::ShapeMismatch {
            context: "cost targets",
            expected: format!("{} rows", labeled.len()),
            got: format!("{} rows", targets.nrows()),
        });
    }
    let mut fidelity = 0.0;
    for (i, &v) in labeled.iter().enumerate() {
        for c in 0..h.ncols() {
            let d = h[[v, c]] - targets[[i, c]];
            fidelity += d * d;
        }
    }
    let smoothness = g.unnormalized_laplacian().trace_quadratic(h)?;
    Ok(fidelity + alpha * smoothness)
}
