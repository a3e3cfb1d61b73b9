//! Forward pass, loss and hand-derived reverse-mode gradients.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{PropagationMode, PropagationPlan};
use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::spmm;
use crate::rng::SeededRng;

/// MLP weights plus the propagation coefficients `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub w1: DenseMatrix,
    pub b1: Vec<f64>,
    pub w2: DenseMatrix,
    pub b2: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl ModelParams {
    /// Glorot-uniform weights, zero biases, and the given `γ`.
    pub fn init(input_dim: usize, hidden: usize, classes: usize, gamma: Vec<f64>, rng: &mut SeededRng) -> Self {
        let mut glorot = |rows: usize, cols: usize| {
            let a = libm::sqrt(6.0 / (rows + cols) as f64);
            DenseMatrix::from_fn(rows, cols, |_, _| a * (2.0 * rng.random::<f64>() - 1.0))
        };
        let w1 = glorot(input_dim, hidden);
        let w2 = glorot(hidden, classes);
        Self {
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; classes],
            gamma,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.cols()
    }

    /// Checks shapes against each other and that every entry is finite.
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("ModelParams b1", self.hidden(), self.b1.len()),
            ("ModelParams w2 rows", self.hidden(), self.w2.rows()),
            ("ModelParams b2", self.num_classes(), self.b2.len()),
        ];
        for (context, expected, found) in checks {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                });
            }
        }
        if self.gamma.is_empty() {
            return Err(Error::InvalidCount("gamma needs at least one coefficient"));
        }
        let mut offset = 0;
        for block in self.blocks() {
            if let Some(i) = block.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(offset + i));
            }
            offset += block.len();
        }
        Ok(())
    }

    /// `[w1, b1, w2, b2, γ]` as flat slices.
    pub fn blocks(&self) -> [&[f64]; 5] {
        [self.w1.values(), &self.b1, self.w2.values(), &self.b2, &self.gamma]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.w1.values_mut(),
            &mut self.b1,
            self.w2.values_mut(),
            &mut self.b2,
            &mut self.gamma,
        ]
    }
}

/// Gradients with the same layout as [`ModelParams`].
pub type Gradients = ModelParams;

/// Inverted-dropout masks; each entry is `0` or `1/(1−p)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropoutMasks {
    pub hidden: Option<DenseMatrix>,
    pub propagation: Option<DenseMatrix>,
}

impl DropoutMasks {
    /// Evaluation mode.
    pub fn none() -> Self {
        Self::default()
    }

    /// Draws the hidden-layer mask, then the `H0` mask, row-major. A rate of
    /// zero draws nothing.
    pub fn sample(
        nodes: usize,
        hidden: usize,
        classes: usize,
        dropout: f64,
        propagation_dropout: Option<f64>,
        rng: &mut SeededRng,
    ) -> Self {
        Self {
            hidden: draw_mask(nodes, hidden, dropout, rng),
            propagation: propagation_dropout.and_then(|p| draw_mask(nodes, classes, p, rng)),
        }
    }
}

fn draw_mask(rows: usize, cols: usize, p: f64, rng: &mut SeededRng) -> Option<DenseMatrix> {
    if p <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - p);
    Some(DenseMatrix::from_fn(rows, cols, |_, _| {
        if rng.random::<f64>() < p {
            0.0
        } else {
            keep
        }
    }))
}

fn apply_mask(m: &mut DenseMatrix, mask: Option<&DenseMatrix>) {
    if let Some(mask) = mask {
        m.values_mut().iter_mut().zip(mask.values()).for_each(|(v, k)| *v *= k);
    }
}

fn add_row_bias(m: &mut DenseMatrix, bias: &[f64]) {
    for i in 0..m.rows() {
        m.row_mut(i).iter_mut().zip(bias).for_each(|(v, b)| *v += b);
    }
}

fn column_sums(m: &DenseMatrix) -> Vec<f64> {
    let mut s = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        s.iter_mut().zip(m.row(i)).for_each(|(a, v)| *a += v);
    }
    s
}

struct MlpState {
    pre_hidden: DenseMatrix,
    hidden: DenseMatrix,
    output: DenseMatrix,
}

fn mlp_with_mask(params: &ModelParams, x: &DenseMatrix, mask: Option<&DenseMatrix>) -> Result<MlpState> {
    let mut pre_hidden = x.matmul(&params.w1)?;
    add_row_bias(&mut pre_hidden, &params.b1);
    let mut hidden = pre_hidden.clone();
    hidden.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    apply_mask(&mut hidden, mask);
    let mut output = hidden.matmul(&params.w2)?;
    add_row_bias(&mut output, &params.b2);
    Ok(MlpState {
        pre_hidden,
        hidden,
        output,
    })
}

/// `relu(X·w1 + b1)`, inverted dropout with rate `dropout` drawn from
/// `rng`, then `·w2 + b2`. `dropout = 0` is evaluation mode and leaves
/// `rng` untouched.
pub fn mlp_forward(params: &ModelParams, x: &DenseMatrix, dropout: f64, rng: &mut SeededRng) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&dropout) {
        return Err(Error::InvalidProbability(dropout));
    }
    let mask = draw_mask(x.rows(), params.hidden(), dropout, rng);
    Ok(mlp_with_mask(params, x, mask.as_ref())?.output)
}

/// Propagated terms `T_0..T_K` and `Z = Σ γ_k T_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub terms: Vec<DenseMatrix>,
    pub output: DenseMatrix,
}

pub fn propagate(plan: &PropagationPlan, h0: &DenseMatrix, gamma: &[f64]) -> Result<Propagation> {
    let depth = plan.depth();
    if gamma.len() != depth + 1 {
        return Err(Error::DimensionMismatch {
            context: "propagate gamma",
            expected: depth + 1,
            found: gamma.len(),
        });
    }
    if h0.rows() != plan.operator().size() {
        return Err(Error::DimensionMismatch {
            context: "propagate H0 rows",
            expected: plan.operator().size(),
            found: h0.rows(),
        });
    }
    let mut terms = Vec::with_capacity(depth + 1);
    terms.push(h0.clone());
    match plan.mode() {
        PropagationMode::MonomialPowers => {
            for k in 1..=depth {
                let next = spmm(plan.operator(), &terms[k - 1])?;
                terms.push(next);
            }
        }
        PropagationMode::BasisRecurrence => {
            let h = plan.approximant().basis().expect("validated plan").h_table();
            for m in 1..=depth {
                let mut next = spmm(plan.operator(), &terms[m - 1])?;
                for (l, t) in terms.iter().enumerate() {
                    next.axpy(-h[(l, m - 1)], t);
                }
                next.scale(1.0 / h[(m, m - 1)]);
                terms.push(next);
            }
        }
    }
    let mut output = DenseMatrix::zeros(h0.rows(), h0.cols());
    for (g, t) in gamma.iter().zip(&terms) {
        output.axpy(*g, t);
    }
    Ok(Propagation { terms, output })
}

/// Intermediates retained for [`backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardState {
    pub masks: DropoutMasks,
    pub pre_hidden: DenseMatrix,
    pub hidden: DenseMatrix,
    /// MLP output after propagation dropout.
    pub h0: DenseMatrix,
    pub terms: Vec<DenseMatrix>,
    pub logits: DenseMatrix,
}

pub fn forward(
    params: &ModelParams,
    plan: &PropagationPlan,
    x: &DenseMatrix,
    masks: &DropoutMasks,
) -> Result<ForwardState> {
    let mlp = mlp_with_mask(params, x, masks.hidden.as_ref())?;
    let mut h0 = mlp.output;
    apply_mask(&mut h0, masks.propagation.as_ref());
    let prop = propagate(plan, &h0, &params.gamma)?;
    Ok(ForwardState {
        masks: masks.clone(),
        pre_hidden: mlp.pre_hidden,
        hidden: mlp.hidden,
        h0,
        terms: prop.terms,
        logits: prop.output,
    })
}

fn check_targets(z: &DenseMatrix, labels: &[usize], mask: &[usize]) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if labels.len() != z.rows() {
        return Err(Error::DimensionMismatch {
            context: "labels",
            expected: z.rows(),
            found: labels.len(),
        });
    }
    for &i in mask {
        if i >= z.rows() {
            return Err(Error::DimensionMismatch {
                context: "mask node",
                expected: z.rows(),
                found: i,
            });
        }
        if labels[i] >= z.cols() {
            return Err(Error::InvalidLabel {
                node: i,
                label: labels[i],
                classes: z.cols(),
            });
        }
    }
    Ok(())
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(row.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}

/// Mean softmax cross-entropy over `mask` plus `weight_decay/2·(‖w1‖² + ‖w2‖²)`.
pub fn loss(z: &DenseMatrix, labels: &[usize], mask: &[usize], params: &ModelParams, weight_decay: f64) -> Result<f64> {
    check_targets(z, labels, mask)?;
    let data: f64 = mask
        .iter()
        .map(|&i| log_sum_exp(z.row(i)) - z.row(i)[labels[i]])
        .sum::<f64>()
        / mask.len() as f64;
    let reg = dot(params.w1.values(), params.w1.values()) + dot(params.w2.values(), params.w2.values());
    Ok(data + 0.5 * weight_decay * reg)
}

/// Gradient of the data term of [`loss`] with respect to `Z`.
pub fn loss_gradient(z: &DenseMatrix, labels: &[usize], mask: &[usize]) -> Result<DenseMatrix> {
    check_targets(z, labels, mask)?;
    let scale = 1.0 / mask.len() as f64;
    let mut g = DenseMatrix::zeros(z.rows(), z.cols());
    for &i in mask {
        let lse = log_sum_exp(z.row(i));
        for (j, (out, &v)) in g.row_mut(i).iter_mut().zip(z.row(i)).enumerate() {
            let target = if j == labels[i] { 1.0 } else { 0.0 };
            *out += scale * (libm::exp(v - lse) - target);
        }
    }
    Ok(g)
}

/// Reverse-mode gradients of a scalar whose gradient with respect to the
/// logits is `upstream`. Weight decay is not included; see
/// [`Gradients::add_weight_decay`]. Relies on the operator being symmetric.
pub fn backward(
    params: &ModelParams,
    plan: &PropagationPlan,
    x: &DenseMatrix,
    state: &ForwardState,
    upstream: &DenseMatrix,
    learn_gamma: bool,
) -> Result<Gradients> {
    let depth = state.terms.len() - 1;
    if upstream.rows() != state.logits.rows() || upstream.cols() != state.logits.cols() {
        return Err(Error::DimensionMismatch {
            context: "backward upstream",
            expected: state.logits.rows() * state.logits.cols(),
            found: upstream.rows() * upstream.cols(),
        });
    }
    let gamma_grad = if learn_gamma {
        state.terms.iter().map(|t| dot(upstream.values(), t.values())).collect()
    } else {
        vec![0.0; depth + 1]
    };

    // Adjoints S_k of the terms, walked from the last term down.
    let mut adj: Vec<DenseMatrix> = params
        .gamma
        .iter()
        .map(|&g| {
            let mut s = upstream.clone();
            s.scale(g);
            s
        })
        .collect();
    for m in (1..=depth).rev() {
        let s_m = adj[m].clone();
        let pushed = spmm(plan.operator(), &s_m)?;
        match plan.mode() {
            PropagationMode::MonomialPowers => adj[m - 1].axpy(1.0, &pushed),
            PropagationMode::BasisRecurrence => {
                let h = plan.approximant().basis().expect("validated plan").h_table();
                let sub = h[(m, m - 1)];
                adj[m - 1].axpy(1.0 / sub, &pushed);
                for (l, s_l) in adj.iter_mut().enumerate().take(m) {
                    s_l.axpy(-h[(l, m - 1)] / sub, &s_m);
                }
            }
        }
    }

    let mut d_out = adj.swap_remove(0);
    apply_mask(&mut d_out, state.masks.propagation.as_ref());
    let w2 = state.hidden.t_matmul(&d_out)?;
    let b2 = column_sums(&d_out);
    let mut d_hidden = d_out.matmul_t(&params.w2)?;
    apply_mask(&mut d_hidden, state.masks.hidden.as_ref());
    d_hidden
        .values_mut()
        .iter_mut()
        .zip(state.pre_hidden.values())
        .for_each(|(d, &p)| {
            if p <= 0.0 {
                *d = 0.0;
            }
        });
    let w1 = x.t_matmul(&d_hidden)?;
    let b1 = column_sums(&d_hidden);
    Ok(Gradients {
        w1,
        b1,
        w2,
        b2,
        gamma: gamma_grad,
    })
}

impl ModelParams {
    /// Adds the gradient of `weight_decay/2·(‖w1‖² + ‖w2‖²)`.
    pub fn add_weight_decay(&mut self, params: &ModelParams, weight_decay: f64) {
        self.w1.axpy(weight_decay, &params.w1);
        self.w2.axpy(weight_decay, &params.w2);
    }
}
