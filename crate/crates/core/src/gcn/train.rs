//! Full-graph training with Adam and early stopping, plus evaluation.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::metrics::{accuracy, auroc, softmax_rows};
use super::model::{backward, forward, loss, loss_gradient, DropoutMasks, ModelParams};
use super::{PropagationPlan, SplitSpec, TrainConfig};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::rng::seeded;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Disjoint node index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` with the split seed, then takes rounded train and
/// validation counts from the front; the rest is test.
pub fn make_split(n: usize, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let n_train = libm::round(n as f64 * spec.train_fraction) as usize;
    let n_val = libm::round(n as f64 * spec.val_fraction) as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(Error::InvalidConfig("split leaves an empty node set"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded(spec.seed));
    let take = |range: core::ops::Range<usize>| {
        let mut s = perm[range].to_vec();
        s.sort_unstable();
        s
    };
    Ok(Split {
        train: take(0..n_train),
        val: take(n_train..n_train + n_val),
        test: take(n_train + n_val..n),
    })
}

/// One row of the training trace. `train_loss` is measured before the
/// epoch's update, `val_accuracy` after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy.
    pub params: ModelParams,
    pub trace: Vec<EpochRecord>,
    pub split: Split,
    pub best_epoch: usize,
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(params: &ModelParams) -> Self {
        let zeros: Vec<Vec<f64>> = params.blocks().iter().map(|b| vec![0.0; b.len()]).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    /// One step; `rates[b]` is the learning rate of block `b`, `None` skips it.
    fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, rates: [Option<f64>; 5]) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(BETA1, self.t as f64);
        let c2 = 1.0 - libm::pow(BETA2, self.t as f64);
        for (b, (p, g)) in params.blocks_mut().into_iter().zip(grads.blocks()).enumerate() {
            let Some(lr) = rates[b] else { continue };
            for (i, (p, &g)) in p.iter_mut().zip(g).enumerate() {
                let m = &mut self.m[b][i];
                let v = &mut self.v[b][i];
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *p -= lr * (*m / c1) / (libm::sqrt(*v / c2) + EPSILON);
            }
        }
    }
}

fn check_data(data: &LabeledGraph, plan: &PropagationPlan) -> Result<()> {
    let n = data.graph.node_count();
    for (context, found) in [
        ("features rows", data.features.rows()),
        ("labels", data.labels.len()),
        ("operator size", plan.operator().size()),
    ] {
        if found != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: n,
                found,
            });
        }
    }
    Ok(())
}

/// Trains from `γ = plan.initial_gamma()` and Glorot-initialized MLP
/// weights. All randomness (initialization, then per-epoch dropout masks)
/// comes from `config.seed`; the split uses its own seed.
pub fn train(
    data: &LabeledGraph,
    plan: &PropagationPlan,
    config: &TrainConfig,
    split_spec: &SplitSpec,
) -> Result<TrainOutcome> {
    config.validate()?;
    check_data(data, plan)?;
    let n = data.graph.node_count();
    let split = make_split(n, split_spec)?;
    let classes = data.num_classes();
    let mut rng = seeded(config.seed);
    let mut params = ModelParams::init(data.features.cols(), config.hidden, classes, plan.initial_gamma(), &mut rng);
    let mut adam = Adam::new(&params);
    let lr = Some(config.learning_rate);
    let gamma_lr = if config.learn_gamma {
        Some(config.propagation_learning_rate.unwrap_or(config.learning_rate))
    } else {
        None
    };
    let rates = [lr, lr, lr, lr, gamma_lr];

    let mut trace = Vec::new();
    let mut best = (f64::NEG_INFINITY, params.clone(), 0);
    let mut stale = 0;
    for epoch in 1..=config.epochs {
        let masks = DropoutMasks::sample(n, config.hidden, classes, config.dropout, config.propagation_dropout, &mut rng);
        let state = forward(&params, plan, &data.features, &masks)?;
        let train_loss = loss(&state.logits, &data.labels, &split.train, &params, config.weight_decay)?;
        let upstream = loss_gradient(&state.logits, &data.labels, &split.train)?;
        let mut grads = backward(&params, plan, &data.features, &state, &upstream, config.learn_gamma)?;
        grads.add_weight_decay(&params, config.weight_decay);
        adam.step(&mut params, &grads, rates);

        let eval = forward(&params, plan, &data.features, &DropoutMasks::none())?;
        let val_accuracy = accuracy(&eval.logits, &data.labels, &split.val)?;
        trace.push(EpochRecord {
            epoch,
            train_loss,
            val_accuracy,
        });
        if val_accuracy > best.0 {
            best = (val_accuracy, params.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best.1,
        trace,
        split,
        best_epoch: best.2,
    })
}

/// Softmax class probabilities in evaluation mode.
pub fn predict_proba(params: &ModelParams, plan: &PropagationPlan, features: &DenseMatrix) -> Result<DenseMatrix> {
    let state = forward(params, plan, features, &DropoutMasks::none())?;
    Ok(softmax_rows(&state.logits))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub accuracy: f64,
    /// Only for two-class models.
    pub auroc: Option<f64>,
}

impl Score {
    /// AUROC when available, else accuracy.
    pub fn headline(&self) -> f64 {
        self.auroc.unwrap_or(self.accuracy)
    }
}

/// Accuracy over `mask` and, for two classes, AUROC of the class-1
/// probability.
pub fn predict_and_score(
    params: &ModelParams,
    plan: &PropagationPlan,
    data: &LabeledGraph,
    mask: &[usize],
) -> Result<Score> {
    check_data(data, plan)?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let proba = predict_proba(params, plan, &data.features)?;
    let accuracy = accuracy(&proba, &data.labels, mask)?;
    let auroc = if params.num_classes() == 2 {
        let scores: Vec<f64> = mask.iter().map(|&i| proba[(i, 1)]).collect();
        let positive: Vec<bool> = mask.iter().map(|&i| data.labels[i] == 1).collect();
        auroc(&scores, &positive)
    } else {
        None
    };
    Ok(Score { accuracy, auroc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::builtin_filter_with_default_alpha;
    use crate::gcn::{propagate, PropagationMode};
    use crate::graph::{sbm_generate, SbmConfig};
    use crate::sampling::SampleScheme;

    fn spec(train: f64, val: f64, seed: u64) -> SplitSpec {
        SplitSpec::new(train, val, seed).unwrap()
    }

    #[test]
    fn split_sizes() {
        let s = make_split(100, &spec(0.6, 0.2, 1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (60, 20, 20));
        let s = make_split(200, &spec(0.025, 0.025, 1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (5, 5, 190));
    }

    #[test]
    fn split_is_a_seeded_partition() {
        let a = make_split(50, &spec(0.5, 0.3, 9)).unwrap();
        assert_eq!(a, make_split(50, &spec(0.5, 0.3, 9)).unwrap());
        let mut all: Vec<usize> = a.train.iter().chain(&a.val).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_empty_sets() {
        assert!(make_split(10, &spec(0.01, 0.5, 0)).is_err());
        assert!(SplitSpec::new(0.6, 0.4, 0).is_err());
    }

    fn data(seed: u64) -> LabeledGraph {
        sbm_generate(&SbmConfig {
            block_sizes: vec![30, 30],
            p_in: 0.2,
            p_out: 0.02,
            feature_dim: 4,
            feature_shift: 3.0,
            seed,
        })
        .unwrap()
    }

    fn plan_for(d: &LabeledGraph, mode: PropagationMode) -> PropagationPlan {
        let f = builtin_filter_with_default_alpha("g1", None).unwrap();
        PropagationPlan::for_filter(&d.graph, &f, SampleScheme::Chebyshev, 10, mode).unwrap()
    }

    #[test]
    fn zero_rate_single_epoch_keeps_initial_parameters() {
        let d = data(1);
        let plan = plan_for(&d, PropagationMode::BasisRecurrence);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 1,
            learn_gamma: false,
            seed: 5,
            ..TrainConfig::default()
        };
        let out = train(&d, &plan, &cfg, &spec(0.6, 0.2, 0)).unwrap();
        let init = ModelParams::init(4, cfg.hidden, 2, plan.initial_gamma(), &mut seeded(5));
        assert_eq!(out.params, init);
        assert_eq!(out.trace.len(), 1);
        let masks = DropoutMasks::sample(60, cfg.hidden, 2, cfg.dropout, None, &mut {
            let mut r = seeded(5);
            let _ = ModelParams::init(4, cfg.hidden, 2, plan.initial_gamma(), &mut r);
            r
        });
        let state = forward(&init, &plan, &d.features, &masks).unwrap();
        let expected = loss(&state.logits, &d.labels, &out.split.train, &init, cfg.weight_decay).unwrap();
        assert_eq!(out.trace[0].train_loss, expected);
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let d = data(2);
        let plan = plan_for(&d, PropagationMode::BasisRecurrence);
        let cfg = TrainConfig {
            epochs: 200,
            patience: 1000,
            seed: 3,
            ..TrainConfig::default()
        };
        let a = train(&d, &plan, &cfg, &spec(0.6, 0.2, 4)).unwrap();
        assert_eq!(a.trace.len(), 200);
        assert!(a.trace[199].train_loss < a.trace[0].train_loss);
        let b = train(&d, &plan, &cfg, &spec(0.6, 0.2, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frozen_gamma_survives_training() {
        let d = data(3);
        let plan = plan_for(&d, PropagationMode::MonomialPowers);
        let cfg = TrainConfig {
            epochs: 20,
            learn_gamma: false,
            ..TrainConfig::default()
        };
        let out = train(&d, &plan, &cfg, &spec(0.6, 0.2, 0)).unwrap();
        assert_eq!(out.params.gamma, plan.initial_gamma());
    }

    #[test]
    fn learnable_and_fixed_models_agree_at_start() {
        let d = data(4);
        let plan = plan_for(&d, PropagationMode::BasisRecurrence);
        let init = |learn: bool| {
            let cfg = TrainConfig {
                learn_gamma: learn,
                ..TrainConfig::default()
            };
            ModelParams::init(4, cfg.hidden, 2, plan.initial_gamma(), &mut seeded(cfg.seed))
        };
        let a = forward(&init(true), &plan, &d.features, &DropoutMasks::none()).unwrap();
        let b = forward(&init(false), &plan, &d.features, &DropoutMasks::none()).unwrap();
        assert_eq!(a.logits, b.logits);
        let direct = propagate(&plan, &a.h0, plan.approximant().basis_coefficients().unwrap()).unwrap();
        assert_eq!(direct.output, a.logits);
    }

    #[test]
    fn scoring_reports_auroc_for_two_classes() {
        let d = data(5);
        let plan = plan_for(&d, PropagationMode::BasisRecurrence);
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let out = train(&d, &plan, &cfg, &spec(0.6, 0.2, 1)).unwrap();
        let s = predict_and_score(&out.params, &plan, &d, &out.split.test).unwrap();
        assert!((0.0..=1.0).contains(&s.accuracy));
        let a = s.auroc.unwrap();
        assert!((0.0..=1.0).contains(&a));
        assert_eq!(predict_and_score(&out.params, &plan, &d, &[]), Err(Error::EmptyMask));
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig {
                dropout: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: -1.0,
                ..TrainConfig::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
        assert!(TrainConfig::default().validate().is_ok());
    }
}
