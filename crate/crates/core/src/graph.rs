//! Undirected graphs, their self-loop normalized operators and a dense
//! spectral oracle for small graphs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;

use crate::dense::{dot, symmetric_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::rng::{seeded, standard_normal};

/// Largest graph the dense oracle accepts.
pub const ORACLE_MAX_NODES: usize = 64;

/// Eigenvalues this far outside a closed filter domain are clamped onto it.
pub const ORACLE_CLAMP_TOLERANCE: f64 = 1e-9;

/// Compressed sparse row matrix with columns sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`, ascending by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// `self · x` for a vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }
}

/// Simple undirected graph. Edges are stored once as `(u, v)` with
/// `u < v`, sorted; the adjacency structure holds both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: CsrMatrix,
}

impl SparseGraph {
    /// Builds a graph from arbitrary pairs. Self-loops are dropped and
    /// duplicates (in either orientation) merged.
    pub fn from_edges(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u >= node_count || v >= node_count {
                return Err(Error::DimensionMismatch {
                    context: "SparseGraph::from_edges endpoint",
                    expected: node_count,
                    found: u.max(v),
                });
            }
            if u != v {
                edges.push((u.min(v), u.max(v)));
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let mut degree = vec![0usize; node_count];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut neighbors: Vec<Vec<usize>> = degree.iter().map(|&d| Vec::with_capacity(d)).collect();
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        let mut row_ptr = Vec::with_capacity(node_count + 1);
        let mut col_idx = Vec::with_capacity(2 * edges.len());
        row_ptr.push(0);
        for list in &mut neighbors {
            list.sort_unstable();
            col_idx.extend_from_slice(list);
            row_ptr.push(col_idx.len());
        }
        let values = vec![1.0; col_idx.len()];
        Ok(Self {
            node_count,
            edges,
            adjacency: CsrMatrix {
                n_rows: node_count,
                n_cols: node_count,
                row_ptr,
                col_idx,
                values,
            },
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.row_ptr[i + 1] - self.adjacency.row_ptr[i]
    }

    /// Same edges over `node_count` nodes (at least the current count).
    pub fn with_node_count(&self, node_count: usize) -> Result<Self> {
        Self::from_edges(node_count.max(self.node_count), self.edges.iter().copied())
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for (v, _) in self.adjacency.row(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.node_count
    }

    /// Edge-list text: one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Result of parsing edge-list text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEdgeList {
    pub graph: SparseGraph,
    /// Number of `u u` lines skipped.
    pub ignored_self_loops: usize,
}

/// Parses whitespace-separated `u v` pairs, one per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_edge_list<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<ParsedEdgeList> {
    let mut pairs = Vec::new();
    let mut ignored_self_loops = 0;
    let mut max_id: Option<usize> = None;
    for (i, line) in lines.into_iter().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next_id = || -> Result<usize> {
            fields
                .next()
                .ok_or(Error::MalformedLine {
                    line: line_no,
                    reason: "expected two node ids",
                })?
                .parse::<usize>()
                .map_err(|_| Error::MalformedLine {
                    line: line_no,
                    reason: "node ids must be non-negative integers",
                })
        };
        let u = next_id()?;
        let v = next_id()?;
        if fields.next().is_some() {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: "expected exactly two node ids",
            });
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        if u == v {
            ignored_self_loops += 1;
        } else {
            pairs.push((u, v));
        }
    }
    let node_count = max_id.map_or(0, |m| m + 1);
    Ok(ParsedEdgeList {
        graph: SparseGraph::from_edges(node_count, pairs)?,
        ignored_self_loops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `P̃ = D̃^{-1/2} (A + I) D̃^{-1/2}`.
    NormalizedAdjacency,
    /// `L̃ = I − P̃`.
    Laplacian,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::NormalizedAdjacency => "adjacency",
            OperatorKind::Laplacian => "laplacian",
        }
    }
}

/// A symmetric propagation matrix built from a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOperator {
    kind: OperatorKind,
    matrix: CsrMatrix,
}

impl PropagationOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.n_rows
    }
}

/// Self-loop normalized adjacency or Laplacian of `graph`.
pub fn propagation_operator(graph: &SparseGraph, kind: OperatorKind) -> PropagationOperator {
    let n = graph.node_count();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| 1.0 / libm::sqrt((graph.degree(i) + 1) as f64))
        .collect();
    let sign = match kind {
        OperatorKind::NormalizedAdjacency => 1.0,
        OperatorKind::Laplacian => -1.0,
    };
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(graph.adjacency().nnz() + n);
    let mut values = Vec::with_capacity(graph.adjacency().nnz() + n);
    row_ptr.push(0);
    for i in 0..n {
        let mut diagonal_done = false;
        let push_diag = |col_idx: &mut Vec<usize>, values: &mut Vec<f64>| {
            let p = inv_sqrt_deg[i] * inv_sqrt_deg[i];
            col_idx.push(i);
            values.push(match kind {
                OperatorKind::NormalizedAdjacency => p,
                OperatorKind::Laplacian => 1.0 - p,
            });
        };
        for (j, _) in graph.adjacency().row(i) {
            if !diagonal_done && j > i {
                push_diag(&mut col_idx, &mut values);
                diagonal_done = true;
            }
            col_idx.push(j);
            values.push(sign * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
        }
        if !diagonal_done {
            push_diag(&mut col_idx, &mut values);
        }
        row_ptr.push(col_idx.len());
    }
    PropagationOperator {
        kind,
        matrix: CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr,
            col_idx,
            values,
        },
    }
}

/// Sparse × dense product. Each output entry sums its row's terms in
/// ascending column order.
pub fn spmm(operator: &PropagationOperator, dense: &DenseMatrix) -> Result<DenseMatrix> {
    csr_matmul(&operator.matrix, dense)
}

pub fn csr_matmul(matrix: &CsrMatrix, dense: &DenseMatrix) -> Result<DenseMatrix> {
    if matrix.n_cols != dense.rows() {
        return Err(Error::DimensionMismatch {
            context: "spmm",
            expected: matrix.n_cols,
            found: dense.rows(),
        });
    }
    let m = dense.cols();
    let mut out = DenseMatrix::zeros(matrix.n_rows, m);
    for i in 0..matrix.n_rows {
        let out_row = out.row_mut(i);
        for (j, v) in matrix.row(i) {
            for (o, &x) in out_row.iter_mut().zip(dense.row(j)) {
                *o += v * x;
            }
        }
    }
    Ok(out)
}

/// Stochastic block model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub feature_shift: f64,
    pub seed: u64,
}

/// Graph with node features and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub graph: SparseGraph,
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
}

impl LabeledGraph {
    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

/// Samples a stochastic block model with Gaussian class features.
///
/// Nodes are numbered block by block. Each pair `i < j` is visited once in
/// lexicographic order and becomes an edge with probability `p_in` inside a
/// block and `p_out` across blocks. Each class then draws a random unit
/// direction scaled by `feature_shift` as its mean; node features are the
/// class mean plus standard normal noise.
pub fn sbm_generate(config: &SbmConfig) -> Result<LabeledGraph> {
    for p in [config.p_in, config.p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
    }
    if config.block_sizes.is_empty() || config.block_sizes.contains(&0) {
        return Err(Error::InvalidCount("every block needs at least one node"));
    }
    let labels: Vec<usize> = config
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| core::iter::repeat_n(b, size))
        .collect();
    let n = labels.len();
    let mut rng = seeded(config.seed);

    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if labels[i] == labels[j] { config.p_in } else { config.p_out };
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    let graph = SparseGraph::from_edges(n, pairs)?;

    let m = config.feature_dim;
    let means: Vec<Vec<f64>> = (0..config.block_sizes.len())
        .map(|_| {
            let mut dir: Vec<f64> = (0..m).map(|_| standard_normal(&mut rng)).collect();
            let norm = libm::sqrt(dot(&dir, &dir));
            let scale = if norm > 0.0 { config.feature_shift / norm } else { 0.0 };
            dir.iter_mut().for_each(|v| *v *= scale);
            dir
        })
        .collect();
    let mut features = DenseMatrix::zeros(n, m);
    for (i, &label) in labels.iter().enumerate() {
        for (f, &mu) in features.row_mut(i).iter_mut().zip(&means[label]) {
            *f = mu + standard_normal(&mut rng);
        }
    }
    Ok(LabeledGraph {
        graph,
        features,
        labels,
    })
}

/// `U g(Λ) Uᵀ · signal` from a dense eigendecomposition of the operator.
pub fn exact_filter_oracle(
    operator: &PropagationOperator,
    filter: &FilterSpec,
    signal: &DenseMatrix,
) -> Result<DenseMatrix> {
    let n = operator.size();
    if n > ORACLE_MAX_NODES {
        return Err(Error::GraphTooLarge {
            nodes: n,
            limit: ORACLE_MAX_NODES,
        });
    }
    if signal.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "exact_filter_oracle",
            expected: n,
            found: signal.rows(),
        });
    }
    let eig = symmetric_eigen(&operator.matrix.to_dense())?;
    let domain = filter.domain();
    let mut response = Vec::with_capacity(n);
    for (index, &lambda) in eig.eigenvalues.iter().enumerate() {
        let x = domain
            .clamp_within(lambda, ORACLE_CLAMP_TOLERANCE)
            .ok_or(Error::OutsideDomain { index, value: lambda })?;
        response.push(filter.evaluate(x));
    }
    let u = &eig.eigenvectors;
    let mut projected = u.t_matmul(signal)?;
    for (k, &g) in response.iter().enumerate() {
        projected.row_mut(k).iter_mut().for_each(|v| *v *= g);
    }
    u.matmul(&projected)
}
