//! End-to-end subcommand tests against the built binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vle-miner"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/cohort40")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "args {args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing {}: {e}", dir.join(name).display()))
}

#[test]
fn help_exits_zero_and_documents_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let flags: &[(&str, &[&str])] = &[
        ("ingest-check", &["--clicks", "--assessments", "--config", "--tma", "--out"]),
        ("features", &["--clicks", "--assessments", "--out"]),
        ("bayes", &["--weeks", "--alpha", "--min-group", "--not-submitted-only"]),
        ("guha", &["--weeks", "--quantifier", "--max-length", "--bins"]),
        ("markov", &["--weeks", "--space", "--split-outcome", "--min-edge-prob"]),
        ("scenarios", &["--weeks", "--scenario-catalog"]),
        ("render-dot", &["--transitions", "--min-edge-prob", "--out"]),
        ("generate", &["--spec", "--seed", "--n", "--out"]),
    ];
    for (sub, expected_flags) in flags {
        assert!(text.contains(sub), "--help must list {sub}");
        let sub_help = run(&[sub, "--help"]);
        assert!(sub_help.status.success(), "{sub} --help exits 0");
        let help_text = String::from_utf8_lossy(&sub_help.stdout);
        for flag in *expected_flags {
            assert!(help_text.contains(flag), "{sub} --help must document {flag}");
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run(&["scenarios", "--weeks", "zero-to-four"]).status.code(),
        Some(2),
        "bad week grammar is a usage error"
    );
    assert_eq!(
        run(&["guha", "--quantifier", "magic:1:2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["markov", "--space", "grid:3"]).status.code(),
        Some(2)
    );
}

#[test]
fn data_errors_exit_one_with_line_numbered_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad_clicks.csv");
    fs::write(
        &bad,
        "id_student,date,activity_type,sum_click\ns1,0,forum,1\ns1,0,chat,1\n",
    )
    .unwrap();
    let out = run(&[
        "ingest-check",
        "--clicks",
        bad.to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("UnknownContentType"), "stderr: {stderr}");
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    assert!(stderr.contains("chat"), "stderr: {stderr}");
}

#[test]
fn ingest_check_reports_counts_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_ok(&[
        "ingest-check",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("students: 40"));
    let report = read(&out_dir, "validation_report.txt");
    assert!(report.contains("students: 40"));
    let manifest = read(&out_dir, "run_manifest.json");
    assert!(manifest.contains("\"subcommand\": \"ingest-check\""));
}

#[test]
fn features_matrix_covers_all_students() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "features",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = read(&out_dir, "features.csv");
    assert_eq!(csv.lines().count(), 41, "header + 40 students");
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("id_student,w0_total,w0_forum"));
    assert!(header.ends_with(",outcome"));
    let a1 = csv.lines().find(|l| l.starts_with("a1,")).unwrap();
    assert!(a1.starts_with("a1,5,5,"), "merged week-0 forum clicks: {a1}");
    assert!(a1.ends_with(",NotSubmitted"));
}

#[test]
fn scenarios_report_has_twelve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "scenarios",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = read(&out_dir, "scenario_report.csv");
    assert_eq!(csv.lines().count(), 13, "header + 12 scenarios");
    assert!(read(&out_dir, "scenario_catalog.txt").lines().count() == 12);
}

#[test]
fn scenarios_accepts_custom_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.txt");
    fs::write(
        &catalog,
        "quiet start | w0=Z w1=A w2=A w3=A w4=A | exists_zero=-\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "scenarios",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--scenario-catalog",
        catalog.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = read(&out_dir, "scenario_report.csv");
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("quiet start,"));
}

#[test]
fn bayes_outputs_model_table_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "bayes",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let model = read(&out_dir, "bayes_model.txt");
    assert!(model.starts_with("prior_fail="));
    assert!(model.contains("flag_id,p_given_fail,p_given_pass"));
    assert!(model.contains("w0_active,"));
    let scores = read(&out_dir, "scores.csv");
    assert_eq!(scores.lines().count(), 41);
    for line in scores.lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
    let table = read(&out_dir, "type_success.csv");
    assert_eq!(table.lines().count(), 12, "header + 11 content types");
}

#[test]
fn guha_outputs_are_deterministic_and_mirror_json() {
    let dir = tempfile::tempdir().unwrap();
    let args_for = |out: &Path| {
        vec![
            "guha".to_string(),
            "--clicks".into(),
            fixture("clicks.csv").to_str().unwrap().into(),
            "--assessments".into(),
            fixture("assessments.csv").to_str().unwrap().into(),
            "--weeks".into(),
            "0-4".into(),
            "--quantifier".into(),
            "fi:0.8:3".into(),
            "--max-length".into(),
            "2".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let out1 = dir.path().join("o1");
    let out2 = dir.path().join("o2");
    run_ok(&args_for(&out1).iter().map(String::as_str).collect::<Vec<_>>());
    run_ok(&args_for(&out2).iter().map(String::as_str).collect::<Vec<_>>());
    let csv1 = read(&out1, "hypotheses.csv");
    assert_eq!(csv1, read(&out2, "hypotheses.csv"));
    assert!(csv1.lines().count() > 1, "fixture yields rules");

    let json: serde_json::Value =
        serde_json::from_str(&read(&out1, "hypotheses.json")).unwrap();
    assert_eq!(
        json["hypotheses"].as_array().unwrap().len(),
        csv1.lines().count() - 1
    );
    assert_eq!(json["cohort_size"], 40);

    // fitted binnings are exported in the plain-text wire form
    let binnings = read(&out1, "binnings.txt");
    for line in binnings.lines() {
        let (attr, text) = line.split_once('=').expect("attr=binning lines");
        assert!(attr.ends_with("_total"), "binned attribute id: {attr}");
        vle_core::discretize::Binning::from_text(text).expect("parseable binning");
    }
}

#[test]
fn markov_split_outcome_writes_both_class_models() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "markov",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-4",
        "--space",
        "intensity:30",
        "--split-outcome",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    for name in [
        "transitions.csv",
        "transitions.dot",
        "transitions_NotSubmitted.csv",
        "transitions_NotSubmitted.dot",
        "transitions_Passed.csv",
        "transitions_Passed.dot",
    ] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let dot = read(&out_dir, "transitions.dot");
    assert!(dot.starts_with("digraph transitions {"));
}

#[test]
fn markov_type_space_resolves_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "markov",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-4",
        "--space",
        "types:forum,quiz",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let csv = read(&out_dir, "transitions.csv");
    assert!(csv.contains("forum"), "type states in output: {csv}");

    // unknown type is a data error
    let out = run(&[
        "markov",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--space",
        "types:telepathy",
        "--out",
        dir.path().join("out2").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnknownContentType"));
}

#[test]
fn render_dot_round_trips_markov_output() {
    let dir = tempfile::tempdir().unwrap();
    let markov_out = dir.path().join("markov");
    run_ok(&[
        "markov",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-4",
        "--out",
        markov_out.to_str().unwrap(),
    ]);
    let render_out = dir.path().join("render");
    run_ok(&[
        "render-dot",
        "--transitions",
        markov_out.join("transitions.csv").to_str().unwrap(),
        "--out",
        render_out.to_str().unwrap(),
    ]);
    let direct = read(&markov_out, "transitions.dot");
    let rendered = read(&render_out, "transitions.dot");
    assert_eq!(direct, rendered, "re-render must match the original graph");
}

#[test]
fn generate_then_scenarios_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gen_out = dir.path().join("gen");
    run_ok(&[
        "generate",
        "--spec",
        "default",
        "--seed",
        "7",
        "--n",
        "400",
        "--out",
        gen_out.to_str().unwrap(),
    ]);
    for name in ["clicks.csv", "assessments.csv", "run_manifest.json"] {
        assert!(gen_out.join(name).exists(), "missing {name}");
    }
    for name in [
        "spec.json",
        "transitions_step30.csv",
        "flag_conditionals.csv",
        "outcome_rates.csv",
        "students.csv",
    ] {
        assert!(
            gen_out.join("ground_truth").join(name).exists(),
            "missing ground_truth/{name}"
        );
    }

    let sc_out = dir.path().join("sc");
    run_ok(&[
        "scenarios",
        "--clicks",
        gen_out.join("clicks.csv").to_str().unwrap(),
        "--assessments",
        gen_out.join("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-4",
        "--out",
        sc_out.to_str().unwrap(),
    ]);
    let report = read(&sc_out, "scenario_report.csv");
    assert_eq!(report.lines().count(), 13, "12 catalog rows");
}

#[test]
fn generated_spec_file_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    run_ok(&[
        "generate", "--seed", "11", "--n", "120", "--out",
        first.to_str().unwrap(),
    ]);
    // feeding the emitted spec back reproduces the dataset byte for byte
    let second = dir.path().join("second");
    run_ok(&[
        "generate",
        "--spec",
        first.join("ground_truth/spec.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(read(&first, "clicks.csv"), read(&second, "clicks.csv"));
    assert_eq!(
        read(&first, "assessments.csv"),
        read(&second, "assessments.csv")
    );
}

#[test]
fn week_range_beyond_config_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "scenarios",
        "--clicks",
        fixture("clicks.csv").to_str().unwrap(),
        "--assessments",
        fixture("assessments.csv").to_str().unwrap(),
        "--weeks",
        "0-9",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("WeekOutOfRange"));
}
