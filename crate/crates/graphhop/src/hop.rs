//! The iterative classifier-mediated propagation method this crate is named
//! for.
//!
//! A run has two stages:
//!
//! 1. **Initialization.** Node attributes are concatenated with their 1..M
//!    hop neighborhood averages and a logistic regression is trained on the
//!    labeled rows. Its predictions, with labeled rows pinned back to their
//!    one-hot truth, form the starting soft labels `H0`.
//! 2. **Iteration.** Each round aggregates the current soft labels over the
//!    same 0..M hops, trains one fresh zero-initialized classifier per hop
//!    on the pair `[current | hop-m average]` (labeled rows supervised,
//!    unlabeled rows pulled toward their sharpened previous scores and away
//!    from indecision), averages the per-hop predictions, and blends the
//!    result with the previous soft labels using the residual weight `tau`.
//!    Labeled rows are pinned after every update.
//!
//! Training a regressor on aggregated *labels* rather than multiplying by a
//! fixed smoothing matrix is what separates this from the classical
//! baseline in [`crate::lp`]: the classifier learns per-class reliability
//! of neighborhood evidence instead of trusting it uniformly.
//!
//! The loop never stops itself before `max_iter`; over-smoothing shows up as
//! a validation-score peak followed by decay, and the harness picks the best
//! iteration afterwards. With `tau` close to one updates are damped and the
//! decay flattens.

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::classifier::{
    sharpen, train, AdamState, LRModel, LossWeights, TrainDataset, TrainReport, TrainSchedule,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSplit};
use crate::labels::{evaluate, LabelEmbedding, Labels, TaskKind};

/// Everything a run needs besides the data. Serializes flat so it can sit
/// directly in a config file section.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphHopConfig {
    /// Aggregation depth M; the iteration stage trains one classifier per
    /// hop in `1..=hops`.
    pub hops: usize,
    /// Number of label-update iterations to run (no early exit).
    pub max_iter: usize,
    /// Sharpening temperature for unlabeled consistency targets.
    pub temperature: f64,
    /// Weight of the consistency loss on unlabeled rows.
    pub consistency: f64,
    /// Weight of the self-entropy loss on unlabeled rows.
    pub entropy: f64,
    /// Divide unlabeled losses by the class count.
    pub scale_by_classes: bool,
    /// Residual blend weight in [0, 1): fraction of the previous soft
    /// labels kept in each update.
    pub residual: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Ablation switch: train a single classifier on the full hop
    /// concatenation instead of one per hop pair.
    pub full_concat: bool,
    /// Start each iteration's classifiers from the previous iteration's
    /// parameters instead of zero.
    pub warm_start: bool,
}

impl Default for GraphHopConfig {
    fn default() -> Self {
        GraphHopConfig {
            hops: 2,
            max_iter: 100,
            temperature: 1.0,
            consistency: 1.0,
            entropy: 0.0,
            scale_by_classes: true,
            residual: 0.0,
            learning_rate: 0.01,
            weight_decay: 5e-5,
            batch_size: 512,
            max_epochs: 1_000,
            patience: 10,
            seed: 0,
            full_concat: false,
            warm_start: false,
        }
    }
}

impl GraphHopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hops == 0 {
            return Err(Error::InvalidConfig {
                field: "hops",
                message: "must be at least 1".into(),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig {
                field: "max_iter",
                message: "must be at least 1".into(),
            });
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "temperature",
                message: format!("must be positive and finite, got {}", self.temperature),
            });
        }
        if !(0.0..1.0).contains(&self.residual) {
            return Err(Error::InvalidConfig {
                field: "residual",
                message: format!("must lie in [0, 1), got {}", self.residual),
            });
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "learning_rate",
                message: format!("must be positive and finite, got {}", self.learning_rate),
            });
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::InvalidConfig {
                field: "weight_decay",
                message: format!("must be nonnegative and finite, got {}", self.weight_decay),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig {
                field: "batch_size",
                message: "must be at least 1".into(),
            });
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig {
                field: "max_epochs",
                message: "must be at least 1".into(),
            });
        }
        self.loss_weights().validate()
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            consistency: self.consistency,
            entropy: self.entropy,
            scale_by_classes: self.scale_by_classes,
        }
    }

    fn schedule(&self, seed: u64) -> TrainSchedule {
        TrainSchedule {
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed,
        }
    }
}

/// Decorrelated per-stage seed derived from the master seed.
fn derive_seed(master: u64, stage: u64, unit: u64) -> u64 {
    let mut x = master
        ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ unit.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Snapshot of run quality after one iteration (or after initialization,
/// as iteration 0).
#[derive(Debug, Clone, Copy)]
pub struct IterationMetrics {
    pub iteration: usize,
    /// Score on the validation nodes; NaN when there are none.
    pub validation_score: f64,
    /// Score on the test nodes; NaN when there are none.
    pub test_score: f64,
    /// Frobenius norm of the change from the previous soft labels.
    pub frobenius_delta: f64,
    /// Mean row entropy of the unlabeled soft labels (nats).
    pub mean_entropy: f64,
}

/// Metrics for the initialization state plus every iteration.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub initial: Option<IterationMetrics>,
    pub steps: Vec<IterationMetrics>,
}

impl IterationTrace {
    /// All recorded rows, initialization first.
    pub fn all(&self) -> impl Iterator<Item = &IterationMetrics> {
        self.initial.iter().chain(self.steps.iter())
    }

    /// The row with the best validation score, earliest on ties.
    /// Initialization counts as iteration 0. Falls back to the last row
    /// when no validation nodes exist.
    pub fn best(&self) -> Option<&IterationMetrics> {
        let mut best: Option<&IterationMetrics> = None;
        for row in self.all() {
            if row.validation_score.is_nan() {
                continue;
            }
            if best.map_or(true, |b| row.validation_score > b.validation_score) {
                best = Some(row);
            }
        }
        best.or_else(|| self.steps.last().or(self.initial.as_ref()))
    }
}

/// Counted work and peak memory of one run.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct RunAccounting {
    /// Multiply-adds spent applying the smoothing operator.
    pub aggregation_madds: usize,
    /// Multiply-adds spent in classifier forward/backward passes.
    pub update_madds: usize,
    /// Largest per-batch resident value count across all training runs;
    /// scales with batch size and class count, not with node count.
    pub peak_batch_values: usize,
    /// Values held in one classifier's parameters, gradient, and optimizer
    /// state; scales with the square of the class count during iteration.
    pub param_values: usize,
    /// Total classifier epochs run.
    pub epochs_total: usize,
}

impl RunAccounting {
    fn absorb(&mut self, report: &TrainReport) {
        self.update_madds += report.update_madds;
        self.peak_batch_values = self.peak_batch_values.max(report.peak_batch_values);
        self.param_values = self.param_values.max(report.param_values);
        self.epochs_total += report.epochs_run;
    }
}

/// Result of the initialization stage.
#[derive(Debug, Clone)]
pub struct InitOutput {
    pub embedding: LabelEmbedding,
    pub model: LRModel,
    pub report: TrainReport,
    /// Classes with no labeled example; predictions for them are untrained.
    pub warnings: Vec<String>,
}

/// Pins labeled rows to their ground-truth indicator.
fn pin_labeled(h: &mut Array2<f64>, split: &NodeSplit, labels: &Labels) {
    for &v in split.labeled() {
        let mut row = h.row_mut(v);
        row.fill(0.0);
        for &c in labels.classes_of(v) {
            row[c] = 1.0;
        }
    }
}

/// Trains the initialization classifier on hop-aggregated attributes and
/// returns its predictions with labeled rows pinned.
///
/// `hops` may be 0 here, in which case this is a plain logistic regression
/// on raw attributes.
pub fn initialize(
    g: &Graph,
    split: &NodeSplit,
    labels: &Labels,
    cfg: &GraphHopConfig,
) -> Result<InitOutput> {
    if labels.node_count() != g.node_count() {
        return Err(Error::ShapeMismatch {
            context: "initialization labels",
            expected: format!("{} nodes", g.node_count()),
            got: format!("{} nodes", labels.node_count()),
        });
    }
    let c = labels.class_count();
    let agg = g.aggregate(g.attributes(), cfg.hops)?;
    let features = agg.values();

    let mut warnings = Vec::new();
    let mut seen = vec![false; c];
    for &v in split.labeled() {
        for &class in labels.classes_of(v) {
            seen[class] = true;
        }
    }
    for (class, seen) in seen.iter().enumerate() {
        if !seen {
            warnings.push(format!(
                "class {class} has no labeled example; its scores are untrained"
            ));
        }
    }

    let y_l = labels.indicator_rows(split.labeled());
    let y_val = labels.indicator_rows(split.validation());
    let mut model = LRModel::zeros(c, features.ncols(), labels.task());
    let mut opt = AdamState::new(c, features.ncols(), cfg.learning_rate, cfg.weight_decay);
    let supervised_only = LossWeights {
        consistency: 0.0,
        entropy: 0.0,
        scale_by_classes: cfg.scale_by_classes,
    };
    let data = TrainDataset {
        features,
        labeled: split.labeled(),
        labeled_targets: y_l.view(),
        unlabeled: &[],
        unlabeled_targets: None,
        validation: if split.validation().is_empty() {
            None
        } else {
            Some((split.validation(), y_val.view()))
        },
    };
    let report = train(
        &mut model,
        &data,
        &supervised_only,
        &mut opt,
        &cfg.schedule(derive_seed(cfg.seed, 0, 0)),
    )?;

    let mut h0 = model.predict(features);
    pin_labeled(&mut h0, split, labels);
    Ok(InitOutput {
        embedding: LabelEmbedding::new(h0, labels.task())?,
        model,
        report,
        warnings,
    })
}

/// How the per-hop update scores are produced; the identity mode exists so
/// tests can check the pure-propagation limit of the update rule.
pub(crate) enum UpdateRule<'a> {
    Train {
        iteration: usize,
        accounting: &'a mut RunAccounting,
        models: Option<&'a mut Vec<LRModel>>,
    },
    /// Score each hop with its aggregated block verbatim.
    IdentityBlocks,
}

/// One label-update iteration: aggregate the previous soft labels, score
/// each hop, average, blend with the residual weight, and pin labeled rows.
pub fn iterate_once(
    g: &Graph,
    h_prev: ArrayView2<'_, f64>,
    split: &NodeSplit,
    labels: &Labels,
    cfg: &GraphHopConfig,
    iteration: usize,
) -> Result<Array2<f64>> {
    let mut accounting = RunAccounting::default();
    iterate_once_impl(
        g,
        h_prev,
        split,
        labels,
        cfg,
        UpdateRule::Train {
            iteration,
            accounting: &mut accounting,
            models: None,
        },
    )
}

pub(crate) fn iterate_once_impl(
    g: &Graph,
    h_prev: ArrayView2<'_, f64>,
    split: &NodeSplit,
    labels: &Labels,
    cfg: &GraphHopConfig,
    rule: UpdateRule<'_>,
) -> Result<Array2<f64>> {
    let n = g.node_count();
    let c = labels.class_count();
    if h_prev.nrows() != n || h_prev.ncols() != c {
        return Err(Error::ShapeMismatch {
            context: "iteration input",
            expected: format!("{n} x {c}"),
            got: format!("{} x {}", h_prev.nrows(), h_prev.ncols()),
        });
    }
    let agg = g.aggregate(h_prev, cfg.hops)?;

    let mut mean = Array2::zeros((n, c));
    match rule {
        UpdateRule::IdentityBlocks => {
            for m in 1..=cfg.hops {
                mean += &agg.block(m);
            }
            mean /= cfg.hops as f64;
        }
        UpdateRule::Train {
            iteration,
            accounting,
            models,
        } => {
            accounting.aggregation_madds += agg.madds();
            let unlabeled = split.unlabeled();
            let targets_u = sharpen(
                h_prev.select(Axis(0), &unlabeled).view(),
                cfg.temperature,
                labels.task(),
            )?;
            let y_l = labels.indicator_rows(split.labeled());
            let y_val = labels.indicator_rows(split.validation());
            let weights = cfg.loss_weights();

            // Either one classifier on the full concatenation, or one per
            // hop pair [block 0 | block m], averaged.
            let jobs: Vec<(usize, Array2<f64>)> = if cfg.full_concat {
                vec![(0, agg.values().to_owned())]
            } else {
                (1..=cfg.hops)
                    .map(|m| {
                        let mut input = Array2::zeros((n, 2 * c));
                        input.slice_mut(s![.., 0..c]).assign(&agg.block(0));
                        input.slice_mut(s![.., c..2 * c]).assign(&agg.block(m));
                        (m, input)
                    })
                    .collect()
            };
            let denom = jobs.len() as f64;
            for (m, input) in jobs {
                let mut model = match models.as_ref().and_then(|ms| ms.get(m.saturating_sub(1))) {
                    Some(prev) if cfg.warm_start => prev.clone(),
                    _ => LRModel::zeros(c, input.ncols(), labels.task()),
                };
                let mut opt =
                    AdamState::new(c, input.ncols(), cfg.learning_rate, cfg.weight_decay);
                let data = TrainDataset {
                    features: input.view(),
                    labeled: split.labeled(),
                    labeled_targets: y_l.view(),
                    unlabeled: &unlabeled,
                    unlabeled_targets: Some(targets_u.view()),
                    validation: if split.validation().is_empty() {
                        None
                    } else {
                        Some((split.validation(), y_val.view()))
                    },
                };
                let report = train(
                    &mut model,
                    &data,
                    &weights,
                    &mut opt,
                    &cfg.schedule(derive_seed(cfg.seed, iteration as u64, m as u64)),
                )?;
                accounting.absorb(&report);
                mean += &model.predict(input.view());
                if let Some(ms) = models.as_deref_mut() {
                    let slot = m.saturating_sub(1);
                    if slot < ms.len() {
                        ms[slot] = model;
                    } else {
                        ms.push(model);
                    }
                }
            }
            mean /= denom;
        }
    }

    let tau = cfg.residual;
    let mut next = mean * (1.0 - tau) + &h_prev.mapv(|x| x * tau);
    pin_labeled(&mut next, split, labels);
    Ok(next)
}

/// A complete run: final and best-validation soft labels, the metric trace,
/// and the accounting report.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_embedding: LabelEmbedding,
    /// Soft labels at the best validation iteration (the final ones when no
    /// validation nodes exist).
    pub best_embedding: LabelEmbedding,
    pub best_iteration: usize,
    pub trace: IterationTrace,
    pub warnings: Vec<String>,
    pub accounting: RunAccounting,
}

fn metrics_for(
    h: ArrayView2<'_, f64>,
    iteration: usize,
    delta: f64,
    split: &NodeSplit,
    labels: &Labels,
) -> IterationMetrics {
    let score = |nodes: &[usize]| {
        if nodes.is_empty() {
            f64::NAN
        } else {
            evaluate(h, labels, nodes)
        }
    };
    let unlabeled = split.unlabeled();
    let entropy = LabelEmbedding::new(h.to_owned(), labels.task())
        .map(|e| e.mean_row_entropy(&unlabeled))
        .unwrap_or(f64::NAN);
    IterationMetrics {
        iteration,
        validation_score: score(split.validation()),
        test_score: score(split.test()),
        frobenius_delta: delta,
        mean_entropy: entropy,
    }
}

/// Initialization followed by `max_iter` label-update iterations.
pub fn run(
    g: &Graph,
    split: &NodeSplit,
    labels: &Labels,
    cfg: &GraphHopConfig,
) -> Result<RunOutput> {
    cfg.validate()?;
    let init = initialize(g, split, labels, cfg)?;
    let mut accounting = RunAccounting::default();
    accounting.absorb(&init.report);

    let mut trace = IterationTrace::default();
    let mut h = init.embedding.values().to_owned();
    trace.initial = Some(metrics_for(h.view(), 0, 0.0, split, labels));

    let mut best = trace.initial.expect("initial metrics recorded");
    let mut best_h = h.clone();
    let mut models: Vec<LRModel> = Vec::new();
    for iteration in 1..=cfg.max_iter {
        let next = iterate_once_impl(
            g,
            h.view(),
            split,
            labels,
            cfg,
            UpdateRule::Train {
                iteration,
                accounting: &mut accounting,
                models: Some(&mut models),
            },
        )?;
        let delta = (&next - &h).mapv(|x| x * x).sum().sqrt();
        h = next;
        let row = metrics_for(h.view(), iteration, delta, split, labels);
        trace.steps.push(row);
        let improved = if best.validation_score.is_nan() {
            true // no validation signal: keep the latest state
        } else {
            row.validation_score > best.validation_score
        };
        if improved {
            best = row;
            best_h = h.clone();
        }
    }

    let task = labels.task();
    Ok(RunOutput {
        final_embedding: LabelEmbedding::new(h, task)?,
        best_embedding: LabelEmbedding::new(best_h, task)?,
        best_iteration: best.iteration,
        trace,
        warnings: init.warnings,
        accounting,
    })
}
