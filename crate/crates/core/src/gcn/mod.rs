//! Spectral GCNs with fixed (Arnoldi-GCN) or learnable (G-Arnoldi-GCN)
//! propagation coefficients.
//!
//! A two-layer MLP maps node features to per-class scores `H0`; the
//! propagation step then applies the fitted filter polynomial to `H0`
//! through the graph operator: `Z = Σ_k γ_k T_k` where `T_k` is either the
//! power `M^k H0` or the `k`-th Arnoldi basis polynomial of `M` applied to
//! `H0`. With `γ` frozen at the fit's coefficients the model is
//! Arnoldi-GCN; letting the optimizer update `γ` gives G-Arnoldi-GCN.

mod metrics;
mod model;
mod train;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use metrics::{accuracy, auroc, softmax_rows};
pub use model::{
    backward, forward, loss, loss_gradient, mlp_forward, propagate, DropoutMasks, ForwardState, Gradients,
    ModelParams, Propagation,
};
pub use train::{make_split, predict_and_score, predict_proba, train, EpochRecord, Score, Split, TrainOutcome};

use crate::approx::{fit_filter, FitMethod, PolynomialApproximant};
use crate::error::{Error, Result};
use crate::filters::{FilterSpec, SpectrumKind};
use crate::graph::{propagation_operator, OperatorKind, PropagationOperator, SparseGraph};
use crate::sampling::{sample, SampleScheme};

/// How the polynomial is applied to the graph operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagationMode {
    /// `H^(k) = M H^(k−1)` with monomial coefficients.
    MonomialPowers,
    /// Replays the Arnoldi recurrence with `M` in place of `diag(ω)`.
    BasisRecurrence,
}

impl PropagationMode {
    pub fn name(self) -> &'static str {
        match self {
            PropagationMode::MonomialPowers => "monomial",
            PropagationMode::BasisRecurrence => "recurrence",
        }
    }
}

impl fmt::Display for PropagationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropagationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(PropagationMode::MonomialPowers),
            "recurrence" => Ok(PropagationMode::BasisRecurrence),
            _ => Err(Error::InvalidConfig("unknown propagation mode")),
        }
    }
}

pub fn operator_kind_for(spectrum: SpectrumKind) -> OperatorKind {
    match spectrum {
        SpectrumKind::Adjacency => OperatorKind::NormalizedAdjacency,
        SpectrumKind::Laplacian => OperatorKind::Laplacian,
    }
}

/// Operator, mode and fitted polynomial for one propagation layer.
#[derive(Debug, Clone)]
pub struct PropagationPlan {
    operator: PropagationOperator,
    mode: PropagationMode,
    approximant: PolynomialApproximant,
}

impl PropagationPlan {
    pub fn new(
        operator: PropagationOperator,
        mode: PropagationMode,
        approximant: PolynomialApproximant,
        spectrum: SpectrumKind,
    ) -> Result<Self> {
        if operator.kind() != operator_kind_for(spectrum) {
            return Err(Error::PlanMismatch("operator kind does not match the filter's spectrum"));
        }
        match mode {
            PropagationMode::MonomialPowers if approximant.monomial_coefficients().is_none() => {
                return Err(Error::PlanMismatch("monomial propagation needs monomial coefficients"));
            }
            PropagationMode::BasisRecurrence
                if approximant.basis().is_none() || approximant.basis_coefficients().is_none() =>
            {
                return Err(Error::PlanMismatch("recurrence propagation needs an Arnoldi basis"));
            }
            _ => {}
        }
        Ok(Self {
            operator,
            mode,
            approximant,
        })
    }

    /// Samples `degree` points of `filter` on its default interval with
    /// `scheme`, fits by Arnoldi, and pairs the fit with the operator
    /// matching the filter's spectrum.
    pub fn for_filter(
        graph: &SparseGraph,
        filter: &FilterSpec,
        scheme: SampleScheme,
        degree: usize,
        mode: PropagationMode,
    ) -> Result<Self> {
        Self::for_filter_sampled(graph, filter, scheme, degree, degree, mode)
    }

    /// Like [`PropagationPlan::for_filter`] with `samples` points instead of
    /// `degree`; `samples > degree` keeps the full requested degree.
    pub fn for_filter_sampled(
        graph: &SparseGraph,
        filter: &FilterSpec,
        scheme: SampleScheme,
        samples: usize,
        degree: usize,
        mode: PropagationMode,
    ) -> Result<Self> {
        let samples = sample(scheme, filter.default_interval(), samples)?;
        let mut approximant = fit_filter(filter, &samples, degree, FitMethod::Arnoldi)?;
        if mode == PropagationMode::MonomialPowers {
            approximant = approximant.with_monomial_coefficients();
        }
        let operator = propagation_operator(graph, operator_kind_for(filter.spectrum()));
        Self::new(operator, mode, approximant, filter.spectrum())
    }

    pub fn operator(&self) -> &PropagationOperator {
        &self.operator
    }

    pub fn mode(&self) -> PropagationMode {
        self.mode
    }

    pub fn approximant(&self) -> &PolynomialApproximant {
        &self.approximant
    }

    /// Highest propagation order `K`; `γ` has `K + 1` entries.
    pub fn depth(&self) -> usize {
        self.initial_gamma_slice().len() - 1
    }

    fn initial_gamma_slice(&self) -> &[f64] {
        match self.mode {
            PropagationMode::MonomialPowers => self.approximant.monomial_coefficients(),
            PropagationMode::BasisRecurrence => self.approximant.basis_coefficients(),
        }
        .expect("validated at construction")
    }

    /// `γ` initialized to the fitted coefficients in this plan's mode.
    pub fn initial_gamma(&self) -> Vec<f64> {
        self.initial_gamma_slice().to_vec()
    }
}

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub epochs: usize,
    /// Stop after this many epochs without a strictly better validation
    /// accuracy.
    pub patience: usize,
    pub seed: u64,
    pub learn_gamma: bool,
    /// Learning rate for `γ`; defaults to `learning_rate`.
    pub propagation_learning_rate: Option<f64>,
    /// Element dropout on `H0` before propagation.
    pub propagation_dropout: Option<f64>,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            weight_decay: 5e-4,
            dropout: 0.5,
            epochs: 1000,
            patience: 100,
            seed: 0,
            learn_gamma: true,
            propagation_learning_rate: None,
            propagation_dropout: None,
            hidden: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rate_ok = |r: f64| r.is_finite() && r >= 0.0;
        if !rate_ok(self.learning_rate) || !self.propagation_learning_rate.is_none_or(rate_ok) {
            return Err(Error::InvalidConfig("learning rates must be finite and non-negative"));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InvalidConfig("weight decay must be finite and non-negative"));
        }
        let drop_ok = |p: f64| (0.0..1.0).contains(&p);
        if !drop_ok(self.dropout) || !self.propagation_dropout.is_none_or(drop_ok) {
            return Err(Error::InvalidConfig("dropout must lie in [0, 1)"));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1"));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidConfig("hidden width must be at least 1"));
        }
        Ok(())
    }
}

/// Train/validation/test fractions and the permutation seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, val_fraction: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            train_fraction,
            val_fraction,
            test_fraction: 1.0 - train_fraction - val_fraction,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [self.train_fraction, self.val_fraction, self.test_fraction];
        if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidConfig("split fractions must be positive"));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("split fractions must sum to 1"));
        }
        Ok(())
    }
}
