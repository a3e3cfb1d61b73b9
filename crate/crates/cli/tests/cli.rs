use std::path::Path;
use std::process::{Command, Output};

use arnoldi_gcn::formats::{load_dataset, parse_features, save_dataset, write_features};
use arnoldi_gcn_core::dense::DenseMatrix;
use arnoldi_gcn_core::graph::{sbm_generate, SbmConfig};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arnoldi-gcn")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Checks the table shape and returns the header and data rows.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = loop {
        let line = lines.next().expect("table has a header");
        if !line.starts_with('#') {
            break line;
        }
    };
    let header: Vec<String> = header.split(',').map(str::to_string).collect();
    let rows: Vec<Vec<String>> = lines
        .map(|l| {
            assert!(!l.starts_with('#'), "comment after header: {l}");
            l.split(',').map(str::to_string).collect::<Vec<_>>()
        })
        .collect();
    for row in &rows {
        assert_eq!(row.len(), header.len(), "ragged row {row:?}");
    }
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn synth(prefix: &Path, seed: &str) {
    let out = cli(&[
        "synth", "--blocks", "40,40", "--p-in", "0.15", "--p-out", "0.01", "--feature-dim", "6",
        "--feature-shift", "1.5", "--seed", seed, "--out-prefix", prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn sample_prints_chebyshev_nodes() {
    let out = cli(&["sample", "--scheme", "chebyshev", "--lower", "-0.9", "--upper", "0.9", "--r", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# arnoldi-gcn "));
    assert!(text.lines().next().unwrap().contains("sample --scheme chebyshev --lower -0.9 --upper 0.9 --r 10"));
    let (header, rows) = table(&text);
    assert_eq!(header.len(), 10);
    assert_eq!(rows.len(), 1);
    let mut expected: Vec<f64> = (1..=10)
        .map(|k| 0.9 * (std::f64::consts::PI * (2 * k - 1) as f64 / 20.0).cos())
        .collect();
    expected.sort_by(f64::total_cmp);
    for (got, want) in rows[0].iter().zip(expected) {
        assert!((num(got) - want).abs() < 1e-15, "{got} vs {want}");
    }
}

#[test]
fn approx_g1_reports_small_error() {
    let out = cli(&[
        "approx", "--filter", "g1", "--scheme", "chebyshev", "--r", "40", "--K", "40", "--method", "arnoldi",
        "--grid", "1000",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let (header, rows) = table(&text);
    assert_eq!(header, ["section", "index", "omega", "value", "reference", "abs_error"]);
    assert_eq!(rows.iter().filter(|r| r[0] == "basis").count(), 40);
    assert_eq!(rows.iter().filter(|r| r[0] == "error").count(), 1000);
    let reported = text
        .lines()
        .find_map(|l| l.strip_prefix("# max_abs_error="))
        .map(num)
        .unwrap();
    let curve_max = rows
        .iter()
        .filter(|r| r[0] == "error")
        .map(|r| num(&r[5]))
        .fold(0.0, f64::max);
    assert_eq!(reported, curve_max);
    for r in rows.iter().filter(|r| r[0] == "error") {
        let w = num(&r[2]);
        assert!((num(&r[4]) - 1.0 / (1.0 - w)).abs() < 1e-12);
    }
    assert!(reported < 1e-10, "max_abs_error {reported}");
}

#[test]
fn condition_rows_meet_bounds() {
    let out = cli(&["condition", "--scheme", "chebyshev", "--lower", "-0.9", "--upper", "0.9", "--r-list", "5,8,12"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, ["r", "kappa_V", "bound", "kappa_QgramQ"]);
    assert_eq!(rows.len(), 3);
    let mut failures = Vec::new();
    for row in &rows {
        let r: i32 = row[0].parse().unwrap();
        let bound = 2f64.powi(r - 1) * (1.0 / 0.9f64).powi(r);
        assert!((num(&row[2]) - bound).abs() <= 1e-12 * bound);
        let gram = num(&row[3]);
        assert!((1.0..=1.1).contains(&gram), "r={r}: gram {gram}");
        if num(&row[1]) < bound {
            failures.push(format!("r={r}: kappa_V {} < bound {bound}", row[1]));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn filter_eval_matches_closed_form() {
    let out = cli(&["filter-eval", "--filter", "g4", "--grid", "11"]);
    assert!(out.status.success());
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, ["omega", "value"]);
    assert_eq!(rows.len(), 11);
    for row in rows {
        let w = num(&row[0]);
        assert!((num(&row[1]) - (-10.0 * w * w).exp()).abs() < 1e-15);
    }
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let out = cli(&["sample", "--scheme", "chebyshev", "--lower", "-1", "--upper", "1", "--r", "3", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("--bogus"), "{err}");
    assert!(err.contains("sample"), "{err}");
    assert!(err.contains("--scheme"), "{err}");

    assert_eq!(cli(&[]).status.code(), Some(2));
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cli(&["approx", "--filter", "g1", "--r", "x"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one() {
    let out = cli(&["sample", "--scheme", "legendre", "--lower", "1", "--upper", "-1", "--r", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());

    let out = cli(&["approx", "--filter", "g9"]);
    assert_eq!(out.status.code(), Some(1));

    let out = cli(&[
        "evaluate", "--model", "/nonexistent/model", "--edges", "/nonexistent/e", "--features", "/nonexistent/f",
        "--labels", "/nonexistent/l",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_flag_writes_the_same_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cond.csv");
    let args = ["condition", "--scheme", "legendre", "--lower", "1e-5", "--upper", "2", "--r-list", "5,8"];
    let printed = stdout(&cli(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--output", path.to_str().unwrap()]);
    let out = cli(&with_out);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    // headers differ only by the recorded --output value
    let body = |t: &str| t.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&written), body(&printed));
    assert!(written.lines().next().unwrap().ends_with(&format!("--output {}", path.display())));
}

#[test]
fn synth_is_reproducible_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    synth(&a, "5");
    synth(&b, "5");
    for ext in ["edges", "features", "labels"] {
        let read = |p: &Path| std::fs::read(p.with_extension(ext)).unwrap();
        assert_eq!(read(&a), read(&b), "{ext} differs");
    }
    let ds = load_dataset(&a.with_extension("edges"), &a.with_extension("features"), &a.with_extension("labels"))
        .unwrap();
    assert_eq!(ds.data.graph.node_count(), 80);
    assert_eq!(ds.data.features.cols(), 6);
    assert_eq!(ds.data.num_classes(), 2);

    let direct = sbm_generate(&SbmConfig {
        block_sizes: vec![40, 40],
        p_in: 0.15,
        p_out: 0.01,
        feature_dim: 6,
        feature_shift: 1.5,
        seed: 5,
    })
    .unwrap();
    assert_eq!(ds.data, direct);
}

#[test]
fn saved_datasets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = sbm_generate(&SbmConfig {
        block_sizes: vec![5, 7, 3],
        p_in: 0.6,
        p_out: 0.1,
        feature_dim: 4,
        feature_shift: 2.0,
        seed: 3,
    })
    .unwrap();
    let [e, f, l] = save_dataset(&dir.path().join("tiny"), &data).unwrap();
    let back = load_dataset(&e, &f, &l).unwrap();
    assert_eq!(back.name, "tiny");
    assert_eq!(back.data, data);

    let odd = DenseMatrix::from_vec(1, 3, vec![1e-310, f64::MAX, -0.0]).unwrap();
    assert_eq!(parse_features(&write_features(&odd)).unwrap(), odd);
}

#[test]
fn evaluate_reproduces_the_training_metric() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sbm");
    synth(&prefix, "21");
    let data = |ext: &str| prefix.with_extension(ext).to_str().unwrap().to_string();
    let model = dir.path().join("model.txt");
    for (filter, mode, learn) in [("g1", "recurrence", "true"), ("g5", "monomial", "false"), ("g0", "recurrence", "false")] {
        let out = cli(&[
            "train", "--edges", &data("edges"), "--features", &data("features"), "--labels", &data("labels"),
            "--filter", filter, "--mode", mode, "--learn-gamma", learn, "--epochs", "60", "--patience", "20",
            "--hidden", "16", "--seed", "4", "--model-out", model.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let (header, rows) = table(&stdout(&out));
        assert_eq!(header, ["epoch", "train_loss", "val_accuracy"]);
        assert!(!rows.is_empty() && rows.len() <= 60);
        let trained = stderr(&out);
        assert!(trained.starts_with(&format!("summary dataset=sbm filter={filter} scheme=chebyshev K=10 mode={mode} seed=4 test_")));

        let out = cli(&[
            "evaluate", "--model", model.to_str().unwrap(), "--edges", &data("edges"), "--features",
            &data("features"), "--labels", &data("labels"),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(stderr(&out), trained);
        let (header, rows) = table(&stdout(&out));
        assert_eq!(header, ["dataset", "filter", "scheme", "K", "mode", "seed", "mask", "accuracy", "auroc"]);
        assert_eq!(rows.len(), 1);
        let metric = trained.trim().rsplit('=').next().unwrap();
        assert!(rows[0][7] == metric || rows[0][8] == metric);
    }
}

#[test]
fn self_loops_are_dropped_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("loops");
    synth(&prefix, "8");
    let edges = prefix.with_extension("edges");
    let mut text = std::fs::read_to_string(&edges).unwrap();
    text.push_str("3 3\n# trailing comment\n7 7\n");
    std::fs::write(&edges, text).unwrap();
    let data = |ext: &str| prefix.with_extension(ext).to_str().unwrap().to_string();
    let out = cli(&[
        "train", "--edges", &data("edges"), "--features", &data("features"), "--labels", &data("labels"),
        "--filter", "g2", "--epochs", "3", "--hidden", "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "# ignored_self_loops=2"), "{text}");
    table(&text);
}

#[test]
fn closed_stdout_is_not_an_error() {
    use std::io::Read;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_arnoldi-gcn"))
        .args(["filter-eval", "--filter", "g6", "--grid", "200000"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut first = [0u8; 16];
    child.stdout.take().unwrap().read_exact(&mut first).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}
