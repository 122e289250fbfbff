//! Ground-truth labels, soft label embeddings, and the scoring rules that
//! compare one to the other.
//!
//! A [`LabelEmbedding`] is the `n x c` matrix of per-class scores that
//! propagation methods push around. In multi-class mode each row is either a
//! probability vector or all zero; an all-zero row means "no information
//! yet", which is how the classical baseline starts unlabeled nodes. In
//! multi-label mode entries are independent Bernoulli probabilities.
//!
//! Hard decisions always break score ties toward the lowest class index so
//! that runs are reproducible down to the byte.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prediction regime: exactly one class per node, or any subset of classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    MultiClass,
    MultiLabel,
}

/// Ground-truth class assignments for every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    classes: usize,
    task: TaskKind,
    assignments: Vec<Vec<usize>>,
}

impl Labels {
    pub fn multiclass(classes: usize, per_node: Vec<usize>) -> Result<Self> {
        for (v, &c) in per_node.iter().enumerate() {
            if c >= classes {
                return Err(Error::Domain(format!(
                    "node {v} has class {c}, but only {classes} classes exist"
                )));
            }
        }
        Ok(Labels {
            classes,
            task: TaskKind::MultiClass,
            assignments: per_node.into_iter().map(|c| vec![c]).collect(),
        })
    }

    pub fn multilabel(classes: usize, per_node: Vec<Vec<usize>>) -> Result<Self> {
        let mut assignments = Vec::with_capacity(per_node.len());
        for (v, mut set) in per_node.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::Domain(format!("node {v} has no label")));
            }
            if let Some(&c) = set.iter().find(|&&c| c >= classes) {
                return Err(Error::Domain(format!(
                    "node {v} has class {c}, but only {classes} classes exist"
                )));
            }
            assignments.push(set);
        }
        Ok(Labels {
            classes,
            task: TaskKind::MultiLabel,
            assignments,
        })
    }

    pub fn node_count(&self) -> usize {
        self.assignments.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    /// Sorted classes of node `v` (a single element in multi-class mode).
    pub fn classes_of(&self, v: usize) -> &[usize] {
        &self.assignments[v]
    }

    /// The class of node `v` in multi-class mode.
    pub fn class_of(&self, v: usize) -> usize {
        self.assignments[v][0]
    }

    /// Nodes per class.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.classes];
        for set in &self.assignments {
            for &c in set {
                h[c] += 1;
            }
        }
        h
    }

    /// Indicator rows for the given nodes, in their order.
    pub fn indicator_rows(&self, nodes: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((nodes.len(), self.classes));
        for (i, &v) in nodes.iter().enumerate() {
            for &c in &self.assignments[v] {
                out[[i, c]] = 1.0;
            }
        }
        out
    }

    /// Full `n x c` indicator matrix.
    pub fn indicator(&self) -> Array2<f64> {
        let nodes: Vec<usize> = (0..self.node_count()).collect();
        self.indicator_rows(&nodes)
    }
}

/// Soft per-class scores for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEmbedding {
    values: Array2<f64>,
    task: TaskKind,
}

impl LabelEmbedding {
    /// Wraps a score matrix after checking the mode's row invariant:
    /// entries in `[0, 1]` and, for multi-class, each row summing to one
    /// (within 1e-9) or being entirely zero.
    pub fn new(values: Array2<f64>, task: TaskKind) -> Result<Self> {
        for (i, row) in values.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &x in row {
                if !x.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&x) {
                    return Err(Error::NonFinite {
                        context: format!("label embedding row {i} entry {x}"),
                    });
                }
                sum += x;
            }
            if task == TaskKind::MultiClass && (sum - 1.0).abs() > 1e-9 && sum.abs() > 1e-9 {
                return Err(Error::Domain(format!(
                    "label embedding row {i} sums to {sum}, expected 0 or 1"
                )));
            }
        }
        Ok(LabelEmbedding { values, task })
    }

    /// One-hot (or multi-hot) embedding of ground truth.
    pub fn from_labels(labels: &Labels) -> Self {
        LabelEmbedding {
            values: labels.indicator(),
            task: labels.task(),
        }
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.values.ncols()
    }

    /// Hard decision per row; ties go to the lowest class index.
    pub fn argmax_rows(&self) -> Vec<usize> {
        self.values
            .rows()
            .into_iter()
            .map(|row| argmax(row.as_slice().expect("contiguous row")))
            .collect()
    }

    /// Mean Shannon entropy (nats) of the listed rows.
    pub fn mean_row_entropy(&self, nodes: &[usize]) -> f64 {
        if nodes.is_empty() {
            return 0.0;
        }
        let total: f64 = nodes
            .iter()
            .map(|&v| {
                self.values
                    .row(v)
                    .iter()
                    .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
                    .sum::<f64>()
            })
            .sum();
        total / nodes.len() as f64
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of `nodes` whose argmax matches the ground-truth class.
pub fn argmax_accuracy(scores: ArrayView2<'_, f64>, labels: &Labels, nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let hits = nodes
        .iter()
        .filter(|&&v| {
            let row = scores.row(v);
            argmax(row.as_slice().expect("contiguous row")) == labels.class_of(v)
        })
        .count();
    hits as f64 / nodes.len() as f64
}

/// Micro-averaged F1 over `nodes`, thresholding scores at 0.5.
pub fn micro_f1(scores: ArrayView2<'_, f64>, labels: &Labels, nodes: &[usize]) -> f64 {
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for &v in nodes {
        let truth = labels.classes_of(v);
        for c in 0..labels.class_count() {
            let predicted = scores[[v, c]] >= 0.5;
            let actual = truth.binary_search(&c).is_ok();
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                (false, false) => {}
            }
        }
    }
    let denom = 2 * tp + fp + fnn;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Task-appropriate score: argmax accuracy for multi-class, micro-F1 for
/// multi-label.
pub fn evaluate(scores: ArrayView2<'_, f64>, labels: &Labels, nodes: &[usize]) -> f64 {
    match labels.task() {
        TaskKind::MultiClass => argmax_accuracy(scores, labels, nodes),
        TaskKind::MultiLabel => micro_f1(scores, labels, nodes),
    }
}
