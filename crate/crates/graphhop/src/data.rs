//! Dataset loading, saving, split sampling, and synthetic generators.
//!
//! A dataset directory holds three plain-text files:
//!
//! * `edges.txt` - one `u v` pair per line; `#` starts a comment and blank
//!   lines are skipped. The graph is undirected, so order and duplicates do
//!   not matter.
//! * `features.txt` - a `n d` header line, then `n` rows of `d`
//!   whitespace-separated floats.
//! * `labels.txt` - a `n c` header (with an optional trailing `multilabel`
//!   token), then `n` lines holding either a single class id or a
//!   `;`-separated list of ids.
//!
//! Splits live in a separate JSON file recording the labeled, validation,
//! and test index arrays together with the seed that drew them.
//!
//! [`save_dataset`] writes the canonical form (sorted edges, shortest
//! round-trip float formatting), so save followed by load is the identity
//! and the byte stream is stable enough to fingerprint.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSplit};
use crate::labels::{Labels, TaskKind};

/// A graph with ground-truth labels and, when one was stored alongside,
/// a node split.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub graph: Graph,
    pub labels: Labels,
    pub split: Option<NodeSplit>,
}

impl DatasetBundle {
    /// Canonical serialized form of graph, attributes, and labels; stable
    /// input for content fingerprints.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(render_edges(&self.graph).as_bytes());
        out.extend_from_slice(render_features(&self.graph).as_bytes());
        out.extend_from_slice(render_labels(&self.labels).as_bytes());
        out
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Content lines with their 1-based line numbers; comments and blanks
/// dropped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read_to_string(path)?;
    let mut edges = Vec::new();
    for (lineno, line) in content_lines(&text) {
        let mut fields = line.split_whitespace();
        let (u, v) = match (fields.next(), fields.next(), fields.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => return Err(parse_err(path, lineno, "expected exactly two node ids")),
        };
        let u: usize = u
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node id `{u}`")))?;
        let v: usize = v
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node id `{v}`")))?;
        edges.push((u, v));
    }
    Ok(edges)
}

fn parse_features(path: &Path) -> Result<Array2<f64>> {
    let text = read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing `n d` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(path, lineno, "header must be `n d`"));
    }
    let n: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(path, lineno, format!("bad node count `{}`", dims[0])))?;
    let d: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(path, lineno, format!("bad feature dim `{}`", dims[1])))?;
    let mut values = Array2::zeros((n, d));
    let mut row = 0usize;
    for (lineno, line) in lines {
        if row >= n {
            return Err(parse_err(path, lineno, format!("more than {n} feature rows")));
        }
        let mut count = 0usize;
        for field in line.split_whitespace() {
            if count >= d {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("row has more than {d} values"),
                ));
            }
            values[[row, count]] = field
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad float `{field}`")))?;
            count += 1;
        }
        if count != d {
            return Err(parse_err(
                path,
                lineno,
                format!("row has {count} values, expected {d}"),
            ));
        }
        row += 1;
    }
    if row != n {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("found {row} feature rows, expected {n}"),
        ));
    }
    Ok(values)
}

fn parse_labels(path: &Path) -> Result<Labels> {
    let text = read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing `n c` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let multilabel = match fields.as_slice() {
        [_, _] => false,
        [_, _, tag] if *tag == "multilabel" => true,
        _ => {
            return Err(parse_err(
                path,
                lineno,
                "header must be `n c` or `n c multilabel`",
            ))
        }
    };
    let n: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(path, lineno, format!("bad node count `{}`", fields[0])))?;
    let c: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(path, lineno, format!("bad class count `{}`", fields[1])))?;
    let mut per_node: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (lineno, line) in lines {
        if per_node.len() >= n {
            return Err(parse_err(path, lineno, format!("more than {n} label rows")));
        }
        let mut set = Vec::new();
        for field in line.split(';') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let id: usize = field
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad class id `{field}`")))?;
            if id >= c {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("class id {id} out of range for {c} classes"),
                ));
            }
            set.push(id);
        }
        if set.is_empty() {
            return Err(parse_err(path, lineno, "node has no label"));
        }
        if !multilabel && set.len() > 1 {
            return Err(parse_err(
                path,
                lineno,
                "multiple classes on one node in single-label data",
            ));
        }
        per_node.push(set);
    }
    if per_node.len() != n {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("found {} label rows, expected {n}", per_node.len()),
        ));
    }
    if multilabel {
        Labels::multilabel(c, per_node)
    } else {
        Labels::multiclass(c, per_node.into_iter().map(|s| s[0]).collect())
    }
}

/// Reads `edges.txt`, `features.txt`, and `labels.txt` from a directory,
/// plus `split.json` when present.
pub fn load_dataset(dir: &Path) -> Result<DatasetBundle> {
    let attributes = parse_features(&dir.join("features.txt"))?;
    let labels = parse_labels(&dir.join("labels.txt"))?;
    if labels.node_count() != attributes.nrows() {
        return Err(Error::ShapeMismatch {
            context: "dataset",
            expected: format!("{} labeled nodes", attributes.nrows()),
            got: format!("{} labeled nodes", labels.node_count()),
        });
    }
    let edges = parse_edges(&dir.join("edges.txt"))?;
    let graph = Graph::build(&edges, attributes)?;
    let split_path = dir.join("split.json");
    let split = if split_path.exists() {
        Some(load_split(&split_path, graph.node_count())?.1)
    } else {
        None
    };
    Ok(DatasetBundle {
        graph,
        labels,
        split,
    })
}

fn render_edges(graph: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in graph.edge_list() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

fn render_features(graph: &Graph) -> String {
    let attrs = graph.attributes();
    let mut out = format!("{} {}\n", attrs.nrows(), attrs.ncols());
    for row in attrs.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

fn render_labels(labels: &Labels) -> String {
    let mut out = match labels.task() {
        TaskKind::MultiClass => format!("{} {}\n", labels.node_count(), labels.class_count()),
        TaskKind::MultiLabel => format!(
            "{} {} multilabel\n",
            labels.node_count(),
            labels.class_count()
        ),
    };
    for v in 0..labels.node_count() {
        let fields: Vec<String> = labels
            .classes_of(v)
            .iter()
            .map(|c| c.to_string())
            .collect();
        out.push_str(&fields.join(";"));
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(contents.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the canonical dataset files into `dir` (which must exist).
pub fn save_dataset(dir: &Path, bundle: &DatasetBundle) -> Result<()> {
    write_file(&dir.join("edges.txt"), &render_edges(&bundle.graph))?;
    write_file(&dir.join("features.txt"), &render_features(&bundle.graph))?;
    write_file(&dir.join("labels.txt"), &render_labels(&bundle.labels))
}

/// On-disk split format: the three index arrays plus the seed that drew
/// them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitFile {
    pub seed: u64,
    pub labeled: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn save_split(path: &Path, split: &NodeSplit, seed: u64) -> Result<()> {
    let file = SplitFile {
        seed,
        labeled: split.labeled().to_vec(),
        validation: split.validation().to_vec(),
        test: split.test().to_vec(),
    };
    let json = serde_json::to_string_pretty(&file).expect("split serializes");
    write_file(path, &json)
}

pub fn load_split(path: &Path, n: usize) -> Result<(u64, NodeSplit)> {
    let text = read_to_string(path)?;
    let file: SplitFile = serde_json::from_str(&text)
        .map_err(|e| parse_err(path, e.line(), e.to_string()))?;
    let split = NodeSplit::new(n, file.labeled, file.validation, file.test)?;
    Ok((file.seed, split))
}

/// How to draw the labeled set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// The same number of labeled nodes from every class (single-label
    /// tasks only).
    PerClass { labels_per_class: usize },
    /// A uniform random fraction of all nodes, at least one.
    Fraction { fraction: f64 },
}

/// Recipe for a reproducible labeled/validation/test split.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    /// Number of validation nodes drawn from the unlabeled pool.
    pub validation: usize,
    pub seed: u64,
}

/// Draws a split according to `spec`. Within one seed the outcome is fully
/// deterministic; infeasible requests (an undersized class, or not enough
/// unlabeled nodes left for validation) fail with the offender named.
pub fn sample_split(labels: &Labels, spec: &SplitSpec) -> Result<NodeSplit> {
    let n = labels.node_count();
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut labeled = Vec::new();
    match spec.mode {
        SplitMode::PerClass { labels_per_class } => {
            if labels.task() != TaskKind::MultiClass {
                return Err(Error::SplitInfeasible(
                    "per-class sampling requires single-label data".into(),
                ));
            }
            if labels_per_class == 0 {
                return Err(Error::SplitInfeasible("labels_per_class is zero".into()));
            }
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); labels.class_count()];
            for v in 0..n {
                members[labels.class_of(v)].push(v);
            }
            for (class, mut pool) in members.into_iter().enumerate() {
                if pool.len() < labels_per_class {
                    return Err(Error::SplitInfeasible(format!(
                        "class {class} has {} nodes, need {labels_per_class}",
                        pool.len()
                    )));
                }
                pool.shuffle(&mut rng);
                labeled.extend_from_slice(&pool[..labels_per_class]);
            }
        }
        SplitMode::Fraction { fraction } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::SplitInfeasible(format!(
                    "label fraction {fraction} outside (0, 1]"
                )));
            }
            let count = ((fraction * n as f64).round() as usize).clamp(1, n);
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(&mut rng);
            labeled.extend_from_slice(&pool[..count]);
        }
    }
    labeled.sort_unstable();
    let mut rest: Vec<usize> = (0..n).filter(|v| labeled.binary_search(v).is_err()).collect();
    if rest.len() < spec.validation {
        return Err(Error::SplitInfeasible(format!(
            "{} unlabeled nodes left, need {} for validation",
            rest.len(),
            spec.validation
        )));
    }
    rest.shuffle(&mut rng);
    let validation = rest[..spec.validation].to_vec();
    let test = rest[spec.validation..].to_vec();
    NodeSplit::new(n, labeled, validation, test)
}

/// Synthetic dataset families used by the test suite and the generator
/// command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticSpec {
    /// Two disjoint cliques labeled by membership.
    TwoClique {
        size_a: usize,
        size_b: usize,
        attr_dim: usize,
        /// Distance of each class mean from the origin along its own axis.
        attr_sep: f64,
        attr_std: f64,
    },
    /// Stochastic block model: one class per block, Gaussian attributes
    /// around per-class means.
    Sbm {
        block_sizes: Vec<usize>,
        intra_p: f64,
        inter_p: f64,
        attr_dim: usize,
        attr_sep: f64,
        attr_std: f64,
    },
    /// Rooted tree where every internal node has `branching` children and
    /// leaves sit at distance `depth` from the root. Labels alternate by
    /// level parity.
    Tree { branching: usize, depth: usize },
    /// Path graph labeled by half.
    Path { nodes: usize },
}

/// Gaussian attributes: class `k` is centered at `attr_sep` along axis
/// `k mod attr_dim`.
fn class_attributes(
    labels: &Labels,
    attr_dim: usize,
    attr_sep: f64,
    attr_std: f64,
    rng: &mut ChaCha20Rng,
) -> Result<Array2<f64>> {
    if attr_dim == 0 {
        return Ok(Array2::zeros((labels.node_count(), 0)));
    }
    let noise = Normal::new(0.0, attr_std).map_err(|_| Error::InvalidConfig {
        field: "attr_std",
        message: format!("must be positive and finite, got {attr_std}"),
    })?;
    let mut attrs = Array2::zeros((labels.node_count(), attr_dim));
    for v in 0..labels.node_count() {
        let axis = labels.class_of(v) % attr_dim;
        for j in 0..attr_dim {
            let mean = if j == axis { attr_sep } else { 0.0 };
            attrs[[v, j]] = mean + noise.sample(rng);
        }
    }
    Ok(attrs)
}

fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidConfig {
            field,
            message: format!("must be a probability in [0, 1], got {p}"),
        });
    }
    Ok(())
}

/// Generates a dataset deterministically from a spec and a seed.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<DatasetBundle> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (edges, labels) = match spec {
        SyntheticSpec::TwoClique {
            size_a, size_b, ..
        } => {
            if *size_a == 0 || *size_b == 0 {
                return Err(Error::InvalidConfig {
                    field: "size",
                    message: "clique sizes must be positive".into(),
                });
            }
            let mut edges = Vec::new();
            for (base, size) in [(0, *size_a), (*size_a, *size_b)] {
                for i in 0..size {
                    for j in (i + 1)..size {
                        edges.push((base + i, base + j));
                    }
                }
            }
            let mut assignment = vec![0usize; size_a + size_b];
            for slot in assignment.iter_mut().skip(*size_a) {
                *slot = 1;
            }
            (edges, Labels::multiclass(2, assignment)?)
        }
        SyntheticSpec::Sbm {
            block_sizes,
            intra_p,
            inter_p,
            ..
        } => {
            check_probability("intra_p", *intra_p)?;
            check_probability("inter_p", *inter_p)?;
            if block_sizes.is_empty() || block_sizes.contains(&0) {
                return Err(Error::InvalidConfig {
                    field: "block_sizes",
                    message: "need at least one nonempty block".into(),
                });
            }
            let mut assignment = Vec::new();
            for (block, &size) in block_sizes.iter().enumerate() {
                assignment.extend(std::iter::repeat(block).take(size));
            }
            let n = assignment.len();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    let p = if assignment[u] == assignment[v] {
                        *intra_p
                    } else {
                        *inter_p
                    };
                    if p > 0.0 && rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            (edges, Labels::multiclass(block_sizes.len(), assignment)?)
        }
        SyntheticSpec::Tree { branching, depth } => {
            if *branching < 1 {
                return Err(Error::InvalidConfig {
                    field: "branching",
                    message: "must be at least 1".into(),
                });
            }
            let mut edges = Vec::new();
            let mut assignment = vec![0usize];
            let mut frontier = vec![0usize];
            let mut next_id = 1usize;
            for level in 1..=*depth {
                let mut next_frontier = Vec::new();
                for &parent in &frontier {
                    for _ in 0..*branching {
                        edges.push((parent, next_id));
                        assignment.push(level % 2);
                        next_frontier.push(next_id);
                        next_id += 1;
                    }
                }
                frontier = next_frontier;
            }
            (edges, Labels::multiclass(2, assignment)?)
        }
        SyntheticSpec::Path { nodes } => {
            if *nodes < 2 {
                return Err(Error::InvalidConfig {
                    field: "nodes",
                    message: "path needs at least 2 nodes".into(),
                });
            }
            let edges: Vec<(usize, usize)> = (0..nodes - 1).map(|i| (i, i + 1)).collect();
            let assignment: Vec<usize> = (0..*nodes).map(|i| usize::from(i >= nodes / 2)).collect();
            (edges, Labels::multiclass(2, assignment)?)
        }
    };

    let attributes = match spec {
        SyntheticSpec::TwoClique {
            attr_dim,
            attr_sep,
            attr_std,
            ..
        }
        | SyntheticSpec::Sbm {
            attr_dim,
            attr_sep,
            attr_std,
            ..
        } => class_attributes(&labels, *attr_dim, *attr_sep, *attr_std, &mut rng)?,
        SyntheticSpec::Tree { .. } | SyntheticSpec::Path { .. } => {
            class_attributes(&labels, 2, 1.0, 1.0, &mut rng)?
        }
    };
    let graph = Graph::build(&edges, attributes)?;
    Ok(DatasetBundle {
        graph,
        labels,
        split: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sbm_spec() -> SyntheticSpec {
        SyntheticSpec::Sbm {
            block_sizes: vec![100, 100],
            intra_p: 0.05,
            inter_p: 0.01,
            attr_dim: 4,
            attr_sep: 1.0,
            attr_std: 1.0,
        }
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let bundle = generate_synthetic(&sbm_spec(), 7).unwrap();
        let dir = tempdir().unwrap();
        save_dataset(dir.path(), &bundle).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(bundle.graph.edge_list(), loaded.graph.edge_list());
        assert_eq!(bundle.graph.attributes(), loaded.graph.attributes());
        assert_eq!(bundle.labels, loaded.labels);
        assert!(loaded.split.is_none());
    }

    #[test]
    fn multilabel_round_trip() {
        let labels = Labels::multilabel(3, vec![vec![0, 2], vec![1], vec![0, 1, 2]]).unwrap();
        let graph = Graph::build(&[(0, 1), (1, 2)], Array2::zeros((3, 2))).unwrap();
        let bundle = DatasetBundle {
            graph,
            labels,
            split: None,
        };
        let dir = tempdir().unwrap();
        save_dataset(dir.path(), &bundle).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(bundle.labels, loaded.labels);
        assert_eq!(loaded.labels.task(), TaskKind::MultiLabel);
    }

    #[test]
    fn split_file_round_trip() {
        let split = NodeSplit::new(10, vec![0, 1], vec![2, 3], vec![4, 5, 6]).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("split.json");
        save_split(&path, &split, 99).unwrap();
        let (seed, loaded) = load_split(&path, 10).unwrap();
        assert_eq!(seed, 99);
        assert_eq!(loaded.labeled(), split.labeled());
        assert_eq!(loaded.validation(), split.validation());
        assert_eq!(loaded.test(), split.test());
    }

    #[test]
    fn parse_errors_carry_file_and_line() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("features.txt"), "2 2\n1.0 2.0\n3.0\n").unwrap();
        std::fs::write(dir.path().join("labels.txt"), "2 2\n0\n1\n").unwrap();
        std::fs::write(dir.path().join("edges.txt"), "0 1\n").unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 2"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn label_count_mismatch_is_detected() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("features.txt"), "2 1\n1.0\n2.0\n").unwrap();
        std::fs::write(dir.path().join("labels.txt"), "3 2\n0\n1\n0\n").unwrap();
        std::fs::write(dir.path().join("edges.txt"), "0 1\n").unwrap();
        assert!(matches!(
            load_dataset(dir.path()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_class_is_rejected_with_line() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("features.txt"), "2 1\n1.0\n2.0\n").unwrap();
        std::fs::write(dir.path().join("labels.txt"), "2 2\n0\n5\n").unwrap();
        std::fs::write(dir.path().join("edges.txt"), "").unwrap();
        match load_dataset(dir.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn edge_endpoint_beyond_node_count_fails() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("features.txt"), "2 1\n1.0\n2.0\n").unwrap();
        std::fs::write(dir.path().join("labels.txt"), "2 2\n0\n1\n").unwrap();
        std::fs::write(dir.path().join("edges.txt"), "0 9\n").unwrap();
        assert!(matches!(
            load_dataset(dir.path()),
            Err(Error::NodeOutOfRange { id: 9, n: 2 })
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("features.txt"), "# attrs\n2 1\n\n1.0\n2.0\n").unwrap();
        std::fs::write(dir.path().join("labels.txt"), "2 2\n0\n1 # second\n").unwrap();
        std::fs::write(dir.path().join("edges.txt"), "# a comment\n\n0 1 # inline\n").unwrap();
        let bundle = load_dataset(dir.path()).unwrap();
        assert_eq!(bundle.graph.edge_count(), 1);
        assert_eq!(bundle.labels.class_of(1), 1);
    }

    #[test]
    fn per_class_split_draws_exact_counts() {
        let bundle = generate_synthetic(&sbm_spec(), 3).unwrap();
        let spec = SplitSpec {
            mode: SplitMode::PerClass {
                labels_per_class: 5,
            },
            validation: 20,
            seed: 11,
        };
        let split = sample_split(&bundle.labels, &spec).unwrap();
        assert_eq!(split.labeled().len(), 10);
        assert_eq!(split.validation().len(), 20);
        assert_eq!(split.test().len(), 200 - 10 - 20);
        let mut per_class = [0usize; 2];
        for &v in split.labeled() {
            per_class[bundle.labels.class_of(v)] += 1;
        }
        assert_eq!(per_class, [5, 5]);
    }

    #[test]
    fn splits_are_deterministic_per_seed() {
        let bundle = generate_synthetic(&sbm_spec(), 3).unwrap();
        let spec = SplitSpec {
            mode: SplitMode::Fraction { fraction: 0.05 },
            validation: 30,
            seed: 4,
        };
        let a = sample_split(&bundle.labels, &spec).unwrap();
        let b = sample_split(&bundle.labels, &spec).unwrap();
        assert_eq!(a.labeled(), b.labeled());
        assert_eq!(a.validation(), b.validation());
        let other = sample_split(
            &bundle.labels,
            &SplitSpec {
                seed: 5,
                ..spec
            },
        )
        .unwrap();
        assert_ne!(a.labeled(), other.labeled());
    }

    #[test]
    fn undersized_class_is_named_in_the_error() {
        let labels = Labels::multiclass(2, vec![0, 0, 0, 1]).unwrap();
        let spec = SplitSpec {
            mode: SplitMode::PerClass {
                labels_per_class: 2,
            },
            validation: 0,
            seed: 0,
        };
        match sample_split(&labels, &spec).unwrap_err() {
            Error::SplitInfeasible(msg) => assert!(msg.contains("class 1"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validation_demand_beyond_pool_fails() {
        let labels = Labels::multiclass(2, vec![0, 1, 0, 1]).unwrap();
        let spec = SplitSpec {
            mode: SplitMode::PerClass {
                labels_per_class: 1,
            },
            validation: 3,
            seed: 0,
        };
        assert!(sample_split(&labels, &spec).is_err());
    }

    #[test]
    fn per_class_rejects_multilabel() {
        let labels = Labels::multilabel(2, vec![vec![0], vec![0, 1]]).unwrap();
        let spec = SplitSpec {
            mode: SplitMode::PerClass {
                labels_per_class: 1,
            },
            validation: 0,
            seed: 0,
        };
        assert!(sample_split(&labels, &spec).is_err());
    }

    #[test]
    fn two_clique_structure() {
        let spec = SyntheticSpec::TwoClique {
            size_a: 5,
            size_b: 4,
            attr_dim: 2,
            attr_sep: 2.0,
            attr_std: 0.5,
        };
        let bundle = generate_synthetic(&spec, 1).unwrap();
        assert_eq!(bundle.graph.node_count(), 9);
        assert_eq!(bundle.graph.edge_count(), 10 + 6);
        assert_eq!(bundle.labels.histogram(), vec![5, 4]);
        // No edges cross the cliques.
        for u in 0..5 {
            for &v in bundle.graph.neighbors(u) {
                assert!(v < 5);
            }
        }
    }

    #[test]
    fn tree_node_count_matches_geometric_sum() {
        let bundle = generate_synthetic(&SyntheticSpec::Tree { branching: 3, depth: 4 }, 0).unwrap();
        // 1 + 3 + 9 + 27 + 81
        assert_eq!(bundle.graph.node_count(), 121);
        assert_eq!(bundle.graph.edge_count(), 120);
        assert_eq!(bundle.graph.degree(0), 3);
    }

    #[test]
    fn path_structure_and_labels() {
        let bundle = generate_synthetic(&SyntheticSpec::Path { nodes: 7 }, 0).unwrap();
        assert_eq!(bundle.graph.edge_count(), 6);
        assert_eq!(bundle.labels.class_of(0), 0);
        assert_eq!(bundle.labels.class_of(6), 1);
    }

    #[test]
    fn sbm_inter_block_edge_count_tracks_expectation() {
        // 100 x 100 pairs at p = 0.01: expectation 100, sd just under 10.
        // The mean over 10 seeds has sd about 3.1; a +-16 window is more
        // than five standard errors.
        let mut total = 0usize;
        for seed in 0..10 {
            let bundle = generate_synthetic(&sbm_spec(), seed).unwrap();
            for (u, v) in bundle.graph.edge_list() {
                let cross = (u < 100) != (v < 100);
                if cross {
                    total += 1;
                }
            }
        }
        let mean = total as f64 / 10.0;
        assert!((mean - 100.0).abs() < 16.0, "inter-block mean {mean}");
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic(&sbm_spec(), 42).unwrap();
        let b = generate_synthetic(&sbm_spec(), 42).unwrap();
        assert_eq!(a.graph.edge_list(), b.graph.edge_list());
        assert_eq!(a.graph.attributes(), b.graph.attributes());
        let c = generate_synthetic(&sbm_spec(), 43).unwrap();
        assert_ne!(a.graph.edge_list(), c.graph.edge_list());
    }
}
