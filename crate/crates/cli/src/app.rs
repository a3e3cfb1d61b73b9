//! Subcommand grammar and dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use arnoldi_gcn_core::approx::{
    basis_orthonormality_condition, build_vandermonde, condition_number, evaluate_approximant, fit_filter,
    vandermonde_condition_bound, ArnoldiBasis, FitMethod,
};
use arnoldi_gcn_core::filters::{builtin_filter_with_default_alpha, eval_filter};
use arnoldi_gcn_core::gcn::{predict_and_score, train, PropagationMode, PropagationPlan, SplitSpec, TrainConfig};
use arnoldi_gcn_core::graph::{sbm_generate, SbmConfig};
use arnoldi_gcn_core::sampling::{sample, Interval, SampleScheme};

use crate::formats::{load_dataset, read_text, real, save_dataset, write_text, Dataset};
use crate::model_file::ModelFile;

#[derive(Parser, Debug)]
#[command(name = "arnoldi-gcn", version, about = "Polynomial spectral filters and spectral GCNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample points on an interval.
    Sample(SampleArgs),
    /// Tabulate a built-in filter on a uniform grid.
    FilterEval(FilterEvalArgs),
    /// Fit a filter and report coefficients and the error curve.
    Approx(ApproxArgs),
    /// Conditioning of the Vandermonde matrix and of the Arnoldi basis.
    Condition(ConditionArgs),
    /// Generate a stochastic block model dataset.
    Synth(SynthArgs),
    /// Train a spectral GCN.
    Train(TrainArgs),
    /// Score a saved model.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write the table here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    scheme: SampleScheme,
    #[arg(long, allow_negative_numbers = true)]
    lower: f64,
    #[arg(long, allow_negative_numbers = true)]
    upper: f64,
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct FilterEvalArgs {
    #[arg(long)]
    filter: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// Defaults to the filter's sampling interval.
    #[arg(long, allow_negative_numbers = true)]
    lower: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    upper: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[arg(long)]
    filter: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = "chebyshev")]
    scheme: SampleScheme,
    #[arg(long, default_value_t = 40)]
    r: usize,
    #[arg(long = "K", default_value_t = 40)]
    k: usize,
    #[arg(long, default_value = "arnoldi")]
    method: FitMethod,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// Also list monomial coefficients recovered from the basis.
    #[arg(long)]
    emit_monomial: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ConditionArgs {
    #[arg(long, default_value = "chebyshev")]
    scheme: SampleScheme,
    #[arg(long, allow_negative_numbers = true, default_value_t = -0.9)]
    lower: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.9)]
    upper: f64,
    #[arg(long = "r-list", value_delimiter = ',', default_value = "40")]
    r_list: Vec<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    blocks: Vec<usize>,
    #[arg(long = "p-in")]
    p_in: f64,
    #[arg(long = "p-out")]
    p_out: f64,
    #[arg(long = "feature-dim", default_value_t = 16)]
    feature_dim: usize,
    #[arg(long = "feature-shift", default_value_t = 1.0)]
    feature_shift: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "out-prefix")]
    out_prefix: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    filter: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = "chebyshev")]
    scheme: SampleScheme,
    #[arg(long = "K", default_value_t = 10)]
    k: usize,
    #[arg(long, default_value = "recurrence")]
    mode: PropagationMode,
    #[arg(long = "learn-gamma", default_value_t = true, action = clap::ArgAction::Set)]
    learn_gamma: bool,
    #[arg(long = "train-frac", default_value_t = 0.6)]
    train_frac: f64,
    #[arg(long = "val-frac", default_value_t = 0.2)]
    val_frac: f64,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long = "prop-lr")]
    prop_lr: Option<f64>,
    #[arg(long = "weight-decay", default_value_t = 5e-4)]
    weight_decay: f64,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    #[arg(long = "prop-dropout")]
    prop_dropout: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    #[arg(long, default_value_t = 100)]
    patience: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "model-out")]
    model_out: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MaskChoice {
    Test,
    All,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "test")]
    mask: MaskChoice,
    /// Defaults to the seed stored in the model.
    #[arg(long = "split-seed")]
    split_seed: Option<u64>,
    #[command(flatten)]
    out: Output,
}

/// Parses `argv` (program name first), runs the subcommand, and returns the
/// process exit code: 0 on success, 2 on usage errors, 1 on runtime errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return 0;
            }
            if !e.render().to_string().contains("Usage:") {
                print_synopsis(argv.get(1));
            }
            return 2;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let header = reproducibility_header(&matches);
    match dispatch(cli.command, &header) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn print_synopsis(sub: Option<&OsString>) {
    let mut cmd = Cli::command();
    cmd.build();
    let usage = match sub.and_then(|s| s.to_str()).and_then(|s| cmd.find_subcommand_mut(s)) {
        Some(c) => c.render_usage(),
        None => cmd.render_usage(),
    };
    eprintln!("\n{usage}");
}

/// `# arnoldi-gcn VERSION seed=S SUBCOMMAND --flag value ...` with every
/// flag of the subcommand, defaults included.
fn reproducibility_header(matches: &ArgMatches) -> String {
    let Some((name, sub)) = matches.subcommand() else {
        return String::new();
    };
    let cmd = Cli::command();
    let Some(spec) = cmd.find_subcommand(name) else {
        return String::new();
    };
    let mut flags = String::new();
    let mut seed = "none".to_string();
    for arg in spec.get_arguments() {
        let id = arg.get_id().as_str();
        let (Some(long), Some(raw)) = (arg.get_long(), sub.get_raw(id)) else {
            continue;
        };
        let value = raw.map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>().join(",");
        if id == "seed" || id == "split_seed" {
            seed = value.clone();
        }
        let _ = write!(flags, " --{long} {value}");
    }
    format!("# arnoldi-gcn {} seed={seed} {name}{flags}", env!("CARGO_PKG_VERSION"))
}

fn emit(out: &Output, header: &str, body: &str) -> Result<()> {
    let text = format!("{header}\n{body}");
    match &out.output {
        Some(path) => write_text(path, &text)?,
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed reader (e.g. `| head`) is not an error
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn dispatch(command: Command, header: &str) -> Result<()> {
    match command {
        Command::Sample(a) => cmd_sample(a, header),
        Command::FilterEval(a) => cmd_filter_eval(a, header),
        Command::Approx(a) => cmd_approx(a, header),
        Command::Condition(a) => cmd_condition(a, header),
        Command::Synth(a) => cmd_synth(a, header),
        Command::Train(a) => cmd_train(a, header),
        Command::Evaluate(a) => cmd_evaluate(a, header),
    }
}

fn cmd_sample(a: SampleArgs, header: &str) -> Result<()> {
    let set = sample(a.scheme, Interval::new(a.lower, a.upper)?, a.r)?;
    let names: Vec<String> = (1..=set.len()).map(|i| format!("x{i}")).collect();
    let values: Vec<String> = set.points().iter().copied().map(real).collect();
    emit(&a.out, header, &format!("{}\n{}\n", names.join(","), values.join(",")))
}

fn cmd_filter_eval(a: FilterEvalArgs, header: &str) -> Result<()> {
    let filter = builtin_filter_with_default_alpha(&a.filter, a.alpha)?;
    let default = filter.default_interval();
    let interval = Interval::new(a.lower.unwrap_or(default.lower()), a.upper.unwrap_or(default.upper()))?;
    let grid = interval.grid(a.grid);
    let values = eval_filter(&filter, &grid)?;
    let mut body = String::from("omega,value\n");
    for (x, v) in grid.iter().zip(&values) {
        let _ = writeln!(body, "{},{}", real(*x), real(*v));
    }
    emit(&a.out, header, &body)
}

fn cmd_approx(a: ApproxArgs, header: &str) -> Result<()> {
    let filter = builtin_filter_with_default_alpha(&a.filter, a.alpha)?;
    let interval = filter.default_interval();
    let samples = sample(a.scheme, interval, a.r)?;
    let mut approx = fit_filter(&filter, &samples, a.k, a.method)?;
    if a.emit_monomial {
        approx = approx.with_monomial_coefficients();
    }
    let grid = interval.grid(a.grid);
    let exact = eval_filter(&filter, &grid)?;
    let fitted = evaluate_approximant(&approx, &grid)?;
    let max_err = exact.iter().zip(&fitted).fold(0.0f64, |m, (e, f)| m.max((e - f).abs()));

    let mut body = String::new();
    let _ = writeln!(body, "# filter={} method={} degree={}", filter.name(), a.method, approx.degree());
    if let Some(b) = approx.basis().and_then(ArnoldiBasis::breakdown) {
        let _ = writeln!(
            body,
            "# breakdown requested_degree={} effective_degree={} subdiagonal={}",
            b.requested_degree,
            b.effective_degree,
            real(b.subdiagonal)
        );
    }
    if approx.degenerate {
        let _ = writeln!(body, "# degenerate=true");
    }
    if a.emit_monomial && approx.monomial_untrusted {
        let _ = writeln!(body, "# monomial_untrusted=true");
    }
    let _ = writeln!(body, "# max_abs_error={}", real(max_err));
    body.push_str("section,index,omega,value,reference,abs_error\n");
    if let Some(c) = approx.basis_coefficients() {
        for (k, v) in c.iter().enumerate() {
            let _ = writeln!(body, "basis,{k},,{},,", real(*v));
        }
    }
    if approx.basis().is_none() || a.emit_monomial {
        if let Some(c) = approx.monomial_coefficients() {
            for (k, v) in c.iter().enumerate() {
                let _ = writeln!(body, "monomial,{k},,{},,", real(*v));
            }
        }
    }
    for (i, ((x, e), f)) in grid.iter().zip(&exact).zip(&fitted).enumerate() {
        let _ = writeln!(
            body,
            "error,{i},{},{},{},{}",
            real(*x),
            real(*f),
            real(*e),
            real((e - f).abs())
        );
    }
    emit(&a.out, header, &body)
}

fn cmd_condition(a: ConditionArgs, header: &str) -> Result<()> {
    let interval = Interval::new(a.lower, a.upper)?;
    let mut body = String::from("r,kappa_V,bound,kappa_QgramQ\n");
    for &r in &a.r_list {
        if r == 0 {
            bail!("--r-list entries must be positive");
        }
        let samples = sample(a.scheme, interval, r)?;
        let v = build_vandermonde(&samples, r - 1)?;
        let kappa_v = condition_number(v.entries(), "vandermonde").condition_number;
        let bound = vandermonde_condition_bound(interval, r).map_or(String::new(), real);
        let gram = basis_orthonormality_condition(&ArnoldiBasis::build(&samples, r - 1)).condition_number;
        let _ = writeln!(body, "{r},{},{bound},{}", real(kappa_v), real(gram));
    }
    emit(&a.out, header, &body)
}

fn cmd_synth(a: SynthArgs, header: &str) -> Result<()> {
    let data = sbm_generate(&SbmConfig {
        block_sizes: a.blocks,
        p_in: a.p_in,
        p_out: a.p_out,
        feature_dim: a.feature_dim,
        feature_shift: a.feature_shift,
        seed: a.seed,
    })?;
    let paths = save_dataset(&a.out_prefix, &data)?;
    let mut body = String::new();
    for p in &paths {
        let _ = writeln!(body, "# wrote {}", p.display());
    }
    body.push_str("nodes,edges,classes,feature_dim\n");
    let _ = writeln!(
        body,
        "{},{},{},{}",
        data.graph.node_count(),
        data.graph.edge_count(),
        data.num_classes(),
        data.features.cols()
    );
    emit(&a.out, header, &body)
}

fn summary_line(
    dataset: &str,
    model: &ModelFile,
    seed: u64,
    mask: &str,
    score: &arnoldi_gcn_core::gcn::Score,
) -> String {
    let metric = if score.auroc.is_some() { "auroc" } else { "accuracy" };
    format!(
        "summary dataset={dataset} filter={} scheme={} K={} mode={} seed={seed} {mask}_{metric}={}",
        model.filter,
        model.scheme,
        model.k,
        model.mode,
        real(score.headline())
    )
}

fn self_loop_note(dataset: &Dataset) -> String {
    match dataset.ignored_self_loops {
        0 => String::new(),
        n => format!("# ignored_self_loops={n}\n"),
    }
}

fn cmd_train(a: TrainArgs, header: &str) -> Result<()> {
    let dataset = load_dataset(&a.data.edges, &a.data.features, &a.data.labels)?;
    let filter = builtin_filter_with_default_alpha(&a.filter, a.alpha)?;
    let plan = PropagationPlan::for_filter(&dataset.data.graph, &filter, a.scheme, a.k, a.mode)?;
    let config = TrainConfig {
        learning_rate: a.lr,
        weight_decay: a.weight_decay,
        dropout: a.dropout,
        epochs: a.epochs,
        patience: a.patience,
        seed: a.seed,
        learn_gamma: a.learn_gamma,
        propagation_learning_rate: a.prop_lr,
        propagation_dropout: a.prop_dropout,
        hidden: a.hidden,
    };
    let split = SplitSpec::new(a.train_frac, a.val_frac, a.seed)?;
    let outcome = train(&dataset.data, &plan, &config, &split)?;
    let score = predict_and_score(&outcome.params, &plan, &dataset.data, &outcome.split.test)?;

    let model = ModelFile {
        filter: a.filter.clone(),
        alpha: filter.alpha(),
        scheme: a.scheme,
        k: a.k,
        mode: a.mode,
        split,
        params: outcome.params,
    };
    if let Some(path) = &a.model_out {
        write_text(path, &model.to_text()).context("writing model")?;
    }
    let mut body = self_loop_note(&dataset);
    let _ = writeln!(body, "# best_epoch={}", outcome.best_epoch);
    body.push_str("epoch,train_loss,val_accuracy\n");
    for r in &outcome.trace {
        let _ = writeln!(body, "{},{},{}", r.epoch, real(r.train_loss), real(r.val_accuracy));
    }
    emit(&a.out, header, &body)?;
    eprintln!("{}", summary_line(&dataset.name, &model, a.seed, "test", &score));
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs, header: &str) -> Result<()> {
    let model = ModelFile::parse(&read_text(&a.model)?).context("reading model")?;
    let dataset = load_dataset(&a.data.edges, &a.data.features, &a.data.labels)?;
    let n = dataset.data.graph.node_count();
    if model.params.input_dim() != dataset.data.features.cols() {
        bail!(
            "model expects {} features, dataset has {}",
            model.params.input_dim(),
            dataset.data.features.cols()
        );
    }
    let plan = model.plan(&dataset.data.graph)?;
    if plan.depth() + 1 != model.params.gamma.len() {
        bail!("model gamma length does not match the rebuilt propagation plan");
    }
    let spec = SplitSpec {
        seed: a.split_seed.unwrap_or(model.split.seed),
        ..model.split
    };
    let mask: Vec<usize> = match a.mask {
        MaskChoice::Test => arnoldi_gcn_core::gcn::make_split(n, &spec)?.test,
        MaskChoice::All => (0..n).collect(),
    };
    let mask_name = match a.mask {
        MaskChoice::Test => "test",
        MaskChoice::All => "all",
    };
    let score = predict_and_score(&model.params, &plan, &dataset.data, &mask)?;
    let mut body = self_loop_note(&dataset);
    body.push_str("dataset,filter,scheme,K,mode,seed,mask,accuracy,auroc\n");
    let _ = writeln!(
        body,
        "{},{},{},{},{},{},{mask_name},{},{}",
        dataset.name,
        model.filter,
        model.scheme,
        model.k,
        model.mode,
        spec.seed,
        real(score.accuracy),
        score.auroc.map_or(String::new(), real)
    );
    emit(&a.out, header, &body)?;
    eprintln!("{}", summary_line(&dataset.name, &model, spec.seed, mask_name, &score));
    Ok(())
}
