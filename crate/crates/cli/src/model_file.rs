//! Serialized models.
//!
//! A header of `key value...` lines, then one section per parameter block:
//! a line naming the block followed by its rows of reals. The plan is not
//! stored; it is rebuilt from the header, which reproduces the fit exactly.
//!
//! ```text
//! # arnoldi-gcn model
//! dims 16 64 3
//! K 10
//! depth 9
//! mode recurrence
//! filter g1
//! alpha none
//! scheme chebyshev
//! split 0.6 0.2 0.2 7
//! w1
//! ...16 rows of 64 reals...
//! b1
//! ...
//! ```

use std::fmt::Write as _;

use arnoldi_gcn_core::dense::DenseMatrix;
use arnoldi_gcn_core::filters::{builtin_filter_with_default_alpha, FilterSpec};
use arnoldi_gcn_core::gcn::{ModelParams, PropagationMode, PropagationPlan, SplitSpec};
use arnoldi_gcn_core::graph::SparseGraph;
use arnoldi_gcn_core::sampling::SampleScheme;

use crate::formats::{real, FormatError};

const MAGIC: &str = "# arnoldi-gcn model";

/// Everything needed to rebuild a trained model on a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub filter: String,
    pub alpha: Option<f64>,
    pub scheme: SampleScheme,
    /// Requested number of samples and degree.
    pub k: usize,
    pub mode: PropagationMode,
    pub split: SplitSpec,
    pub params: ModelParams,
}

fn join(values: &[f64]) -> String {
    values.iter().copied().map(real).collect::<Vec<_>>().join(" ")
}

impl ModelFile {
    pub fn filter_spec(&self) -> Result<FilterSpec, FormatError> {
        Ok(builtin_filter_with_default_alpha(&self.filter, self.alpha)?)
    }

    pub fn plan(&self, graph: &SparseGraph) -> Result<PropagationPlan, FormatError> {
        let filter = self.filter_spec()?;
        Ok(PropagationPlan::for_filter(graph, &filter, self.scheme, self.k, self.mode)?)
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "dims {} {} {}", p.input_dim(), p.hidden(), p.num_classes());
        let _ = writeln!(out, "K {}", self.k);
        let _ = writeln!(out, "depth {}", p.gamma.len() - 1);
        let _ = writeln!(out, "mode {}", self.mode);
        let _ = writeln!(out, "filter {}", self.filter);
        let _ = writeln!(out, "alpha {}", self.alpha.map_or("none".to_string(), real));
        let _ = writeln!(out, "scheme {}", self.scheme);
        let s = &self.split;
        let _ = writeln!(
            out,
            "split {} {} {} {}",
            real(s.train_fraction),
            real(s.val_fraction),
            real(s.test_fraction),
            s.seed
        );
        for (name, m) in [("w1", &p.w1), ("w2", &p.w2)] {
            let _ = writeln!(out, "{name}");
            for i in 0..m.rows() {
                let _ = writeln!(out, "{}", join(m.row(i)));
            }
            if name == "w1" {
                let _ = writeln!(out, "b1\n{}", join(&p.b1));
            }
        }
        let _ = writeln!(out, "b2\n{}", join(&p.b2));
        let _ = writeln!(out, "gamma\n{}", join(&p.gamma));
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader {
            lines: text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).collect(),
            pos: 0,
        };
        match r.raw("model file marker")? {
            (_, MAGIC) => {}
            (line, _) => return Err(bad(line, "missing model file marker")),
        }

        let (line, dims) = r.keyed("dims")?;
        let dims: Vec<usize> = parse_all(&dims, line)?;
        let [m, h, c] = dims[..] else {
            return Err(bad(line, "dims needs three integers"));
        };
        let k = single::<usize>(r.keyed("K")?)?;
        let depth = single::<usize>(r.keyed("depth")?)?;
        let mode = single::<PropagationMode>(r.keyed("mode")?)?;
        let filter = single::<String>(r.keyed("filter")?)?;
        let alpha = match r.keyed("alpha")? {
            (_, v) if v[..] == ["none"] => None,
            field => Some(single::<f64>(field)?),
        };
        let scheme = single::<SampleScheme>(r.keyed("scheme")?)?;
        let (line, split) = r.keyed("split")?;
        let [tr, va, te, seed] = split[..] else {
            return Err(bad(line, "split needs three fractions and a seed"));
        };
        let split = SplitSpec {
            train_fraction: parse_one(tr, line)?,
            val_fraction: parse_one(va, line)?,
            test_fraction: parse_one(te, line)?,
            seed: parse_one(seed, line)?,
        };
        split.validate()?;

        let w1 = DenseMatrix::from_vec(m, h, r.block("w1", m, h)?)?;
        let b1 = r.block("b1", 1, h)?;
        let w2 = DenseMatrix::from_vec(h, c, r.block("w2", h, c)?)?;
        let b2 = r.block("b2", 1, c)?;
        let gamma = r.block("gamma", 1, depth + 1)?;
        let params = ModelParams { w1, b1, w2, b2, gamma };
        params.validate()?;
        Ok(Self {
            filter,
            alpha,
            scheme,
            k,
            mode,
            split,
            params,
        })
    }
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, what: &str) -> Result<(usize, &'a str), FormatError> {
        let next = self.lines.get(self.pos).copied();
        self.pos += 1;
        next.ok_or_else(|| bad(0, format!("truncated before {what}")))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), FormatError> {
        let (line, text) = self.raw(key)?;
        let mut fields = text.split_whitespace();
        if fields.next() != Some(key) {
            return Err(bad(line, format!("expected `{key}`")));
        }
        Ok((line, fields.collect()))
    }

    fn block(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>, FormatError> {
        let (line, rest) = self.keyed(name)?;
        if !rest.is_empty() {
            return Err(bad(line, format!("`{name}` takes no values on its own line")));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line, text) = self.raw(name)?;
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields.len() != cols {
                return Err(bad(line, format!("`{name}` rows need {cols} values")));
            }
            values.extend(parse_all::<f64>(&fields, line)?);
        }
        Ok(values)
    }
}

fn bad(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        file: "model",
        line,
        reason: reason.into(),
    }
}

fn parse_one<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, FormatError> {
    s.parse().map_err(|_| bad(line, format!("cannot parse `{s}`")))
}

fn parse_all<T: std::str::FromStr>(fields: &[&str], line: usize) -> Result<Vec<T>, FormatError> {
    fields.iter().map(|s| parse_one(s, line)).collect()
}

fn single<T: std::str::FromStr>((line, fields): (usize, Vec<&str>)) -> Result<T, FormatError> {
    match fields[..] {
        [v] => parse_one(v, line),
        _ => Err(bad(line, "expected one value")),
    }
}
