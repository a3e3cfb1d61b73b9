//! Plain-text dataset files.
//!
//! * edges: one `u v` pair per line, `#` comments allowed
//! * features: an `n m` header line, then `n` rows of `m` reals
//! * labels: one `node_id class_id` pair per line, every node exactly once
//!
//! Reals are written in the shortest form that parses back to the same
//! bits, switching to exponent notation for very large or small values.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use arnoldi_gcn_core::dense::DenseMatrix;
use arnoldi_gcn_core::graph::{parse_edge_list, LabeledGraph};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file} line {line}: {reason}")]
    Malformed {
        file: &'static str,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Core(#[from] arnoldi_gcn_core::Error),
}

fn malformed(file: &'static str, line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        file,
        line,
        reason: reason.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Shortest round-trip text for a real, e.g. `0.1`, `1.0`, `1.5e-7`.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_features(text: &str) -> Result<DenseMatrix, FormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| malformed("features", 1, "missing `n m` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| malformed("features", line, "header must be two non-negative integers"))?;
    let [n, m] = dims[..] else {
        return Err(malformed("features", line, "header must be two non-negative integers"));
    };
    let mut values = Vec::with_capacity(n * m);
    let mut rows = 0;
    for (line, row) in lines {
        let parsed: Vec<f64> = row
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| malformed("features", line, "expected real numbers"))?;
        if parsed.len() != m {
            return Err(malformed("features", line, format!("expected {m} values, found {}", parsed.len())));
        }
        if parsed.iter().any(|v| !v.is_finite()) {
            return Err(malformed("features", line, "non-finite value"));
        }
        values.extend(parsed);
        rows += 1;
    }
    if rows != n {
        return Err(malformed("features", 1, format!("header declares {n} rows, found {rows}")));
    }
    Ok(DenseMatrix::from_vec(n, m, values)?)
}

pub fn write_features(features: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", features.rows(), features.cols());
    for i in 0..features.rows() {
        let row: Vec<String> = features.row(i).iter().copied().map(real).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Labels for nodes `0..n`, each listed exactly once in any order.
pub fn parse_labels(text: &str, n: usize) -> Result<Vec<usize>, FormatError> {
    let mut labels = vec![None; n];
    for (line, row) in content_lines(text) {
        let ids: Vec<usize> = row
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| malformed("labels", line, "expected `node_id class_id` integers"))?;
        let [node, class] = ids[..] else {
            return Err(malformed("labels", line, "expected `node_id class_id`"));
        };
        let slot = labels
            .get_mut(node)
            .ok_or_else(|| malformed("labels", line, format!("node {node} out of range for {n} nodes")))?;
        if slot.replace(class).is_some() {
            return Err(malformed("labels", line, format!("node {node} labelled twice")));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(node, l)| l.ok_or_else(|| malformed("labels", 0, format!("node {node} has no label"))))
        .collect()
}

pub fn write_labels(labels: &[usize]) -> String {
    labels.iter().enumerate().map(|(i, l)| format!("{i} {l}\n")).collect()
}

/// A dataset loaded from edge, feature and label files.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Stem of the edge file.
    pub name: String,
    pub data: LabeledGraph,
    pub ignored_self_loops: usize,
}

/// Node count comes from the feature file; the edge list may leave
/// trailing nodes isolated but must not name nodes beyond it.
pub fn load_dataset(edges: &Path, features: &Path, labels: &Path) -> Result<Dataset, FormatError> {
    let features = parse_features(&read_text(features)?)?;
    let n = features.rows();
    let parsed = parse_edge_list(read_text(edges)?.lines())?;
    if parsed.graph.node_count() > n {
        return Err(malformed(
            "edges",
            0,
            format!("node id {} exceeds the {n} feature rows", parsed.graph.node_count() - 1),
        ));
    }
    let graph = parsed.graph.with_node_count(n)?;
    let labels = parse_labels(&read_text(labels)?, n)?;
    let name = edges
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Dataset {
        name,
        data: LabeledGraph {
            graph,
            features,
            labels,
        },
        ignored_self_loops: parsed.ignored_self_loops,
    })
}

/// Paths `PREFIX.edges`, `PREFIX.features`, `PREFIX.labels`.
pub fn dataset_paths(prefix: &Path) -> [PathBuf; 3] {
    ["edges", "features", "labels"].map(|ext| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(".");
        p.push(ext);
        PathBuf::from(p)
    })
}

pub fn save_dataset(prefix: &Path, data: &LabeledGraph) -> Result<[PathBuf; 3], FormatError> {
    let paths = dataset_paths(prefix);
    write_text(&paths[0], &data.graph.to_edge_list())?;
    write_text(&paths[1], &write_features(&data.features))?;
    write_text(&paths[2], &write_labels(&data.labels))?;
    Ok(paths)
}
