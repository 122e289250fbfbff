//! Transductive node classification by iterative, classifier-mediated label
//! propagation, together with the classical propagation baseline it improves
//! on and the measurement tools used to study both.
//!
//! The pieces fit together like this:
//!
//! * [`graph`] stores an undirected attributed graph in compressed sparse row
//!   form and provides the normalized-adjacency smoothing operators and
//!   multi-hop aggregation every other module consumes.
//! * [`lp`] is the classical baseline: iterative spreading with a damped
//!   restart toward the seed labels, plus its closed-form solution.
//! * [`classifier`] is a multinomial (or per-label binary) logistic
//!   regression trained with Adam on a weighted sum of supervised,
//!   consistency, and entropy losses.
//! * [`hop`] runs the full method: initialize soft labels from aggregated
//!   attributes, then alternate label aggregation with classifier updates,
//!   optionally damped by a residual blend.
//! * [`spectral`] verifies the low-frequency assumption behind all of the
//!   above by reconstructing labels from the bottom or top of the Laplacian
//!   spectrum.
//! * [`analysis`] bounds how far labels can travel per iteration and reports
//!   counted work and peak batch-resident memory.
//! * [`data`] reads and writes the plain-text dataset format and generates
//!   the synthetic fixtures used throughout the test suite.
//!
//! Everything is deterministic: the same configuration, data, and seed
//! reproduce byte-identical traces.

pub mod analysis;
pub mod classifier;
pub mod data;
mod error;
pub mod graph;
pub mod hop;
pub mod labels;
pub(crate) mod linalg;
pub mod lp;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{AggregatedMatrix, CsrMatrix, Graph, NodeSplit};
pub use labels::{LabelEmbedding, Labels, TaskKind};
