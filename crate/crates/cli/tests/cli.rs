//! Drives the compiled binary end to end: ingestion through evaluation,
//! artifact formats, exit codes, and rerun determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_marketsieve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn write(path: &Path, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

/// Ingests a small single-annotator training forum into `dir/<forum>.corpus`.
fn ingest_forum(dir: &Path, forum: &str, posts: &[(&str, &str)]) -> PathBuf {
    let anno = dir.join(format!("{forum}-anno"));
    for (post_id, text) in posts {
        write(&anno.join(format!("{post_id}.txt")), text);
    }
    let corpus = dir.join(format!("{forum}.corpus"));
    run_ok(&[
        "ingest",
        "--forum",
        forum,
        "--out",
        corpus.to_str().unwrap(),
        &format!("a0={}", anno.display()),
    ]);
    corpus
}

const TRAIN_POSTS: [(&str, &str); 6] = [
    ("t1", "selling {zqbot} now\ncheap and fast"),
    ("t2", "fresh {zqbot} stock\nhit me up"),
    ("t3", "my {zqrat} is stable\ncontact below"),
    ("t4", "quality {zqrat} here\nescrow accepted"),
    ("t5", "get {zqcvv} today\nbulk discounts"),
    ("t6", "nothing for sale\njust vouching"),
];

#[test]
fn ingest_merges_annotators_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    // two annotators agree on p1, disagree on p2; a third file is raw
    for (annotator, p2) in [("a0", "fresh {zqrat} stock"), ("a1", "fresh zqrat stock")] {
        write(
            &dir.path().join(annotator).join("p1.txt"),
            "selling {zqbot} now\ncontact me",
        );
        write(&dir.path().join(annotator).join("p2.txt"), p2);
    }
    write(&dir.path().join("raw").join("p3.txt"), "hello forum\nnew here");

    let corpus = dir.path().join("out.corpus");
    let raw = dir.path().join("raw");
    let args = [
        "ingest",
        "--forum",
        "darkode",
        "--out",
        corpus.to_str().unwrap(),
        "--raw",
        raw.to_str().unwrap(),
        &format!("a0={}", dir.path().join("a0").display()),
        &format!("a1={}", dir.path().join("a1").display()),
    ];
    let stdout = run_ok(&args);
    assert!(stdout.contains("posts           3"), "{stdout}");
    assert!(stdout.contains("layers          4"), "{stdout}");
    assert!(stdout.contains("config_sha256: "), "{stdout}");

    let first = fs::read(&corpus).unwrap();
    run_ok(&args);
    assert_eq!(first, fs::read(&corpus).unwrap(), "rerun must be byte-identical");

    // agreement over the two-annotator posts
    let agree_out = run_ok(&["agree", "--corpus", corpus.to_str().unwrap()]);
    assert!(agree_out.contains("darkode"), "{agree_out}");
    assert!(agree_out.contains("kappa"), "{agree_out}");
}

#[test]
fn train_predict_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest_forum(dir.path(), "darkode", &TRAIN_POSTS);
    let model = dir.path().join("m.model");
    let preds = dir.path().join("p.preds");
    let report = dir.path().join("eval.report");

    run_ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--mode",
        "token",
        "--l1-strength",
        "0",
        "--model-out",
        model.to_str().unwrap(),
    ]);
    assert!(fs::read_to_string(&model).unwrap().starts_with("marketsieve-model v1"));

    run_ok(&[
        "predict",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert!(fs::read_to_string(&preds)
        .unwrap()
        .starts_with("marketsieve-predictions v1"));

    let stdout = run_ok(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--preds",
        preds.to_str().unwrap(),
        "--train-corpus",
        corpus.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    // in-sample on separable data: all three 100s
    assert!(stdout.contains("100.00"), "{stdout}");
    assert!(stdout.contains("oov"), "{stdout}");

    let report_text = fs::read_to_string(&report).unwrap();
    assert!(report_text.starts_with("marketsieve-report v1"));
    let json_line = report_text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("report carries a machine record");
    let record: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(record["command"], "eval");
    assert_eq!(record["data"]["report"]["token"]["f1"], 1.0);
    assert!(record["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn post_level_mode_round_trips_too() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest_forum(dir.path(), "darkode", &TRAIN_POSTS);
    let model = dir.path().join("post.model");
    let preds = dir.path().join("post.preds");

    run_ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--mode",
        "post_token",
        "--l1-strength",
        "0",
        "--model-out",
        model.to_str().unwrap(),
    ]);
    run_ok(&[
        "predict",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    let stdout = run_ok(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--preds",
        preds.to_str().unwrap(),
    ]);
    // the post-level pick is right on every gold post of this toy corpus
    let acc_line = stdout
        .lines()
        .find(|l| l.starts_with("system"))
        .expect("table row");
    assert!(acc_line.trim_end().ends_with("100.00"), "{stdout}");
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();

    // unbalanced brace -> input error (1), diagnostic names file and line
    write(&dir.path().join("bad").join("x.txt"), "selling {zqbot now");
    let corpus = dir.path().join("never.corpus");
    let out = run(&[
        "ingest",
        "--forum",
        "f",
        "--out",
        corpus.to_str().unwrap(),
        &format!("a0={}", dir.path().join("bad").display()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("x.txt"), "{stderr}");

    // np mode without parses -> config error (2)
    let good = ingest_forum(dir.path(), "darkode", &TRAIN_POSTS);
    let out = run(&[
        "train",
        "--corpus",
        good.to_str().unwrap(),
        "--mode",
        "np",
        "--model-out",
        dir.path().join("m").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // prediction file not covering the corpus -> config error (2)
    let preds = dir.path().join("short.preds");
    fs::write(&preds, "marketsieve-predictions v1\n{\"forum\":\"darkode\",\"post_id\":\"t1\",\"tokens\":[]}\n").unwrap();
    let out = run(&[
        "eval",
        "--corpus",
        good.to_str().unwrap(),
        "--preds",
        preds.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // corrupt model file -> input error (1)
    let broken = dir.path().join("broken.model");
    fs::write(&broken, "not a model\n").unwrap();
    let out = run(&[
        "predict",
        "--corpus",
        good.to_str().unwrap(),
        "--model",
        broken.to_str().unwrap(),
        "--out",
        dir.path().join("p").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // unknown flag -> clap usage error (2)
    let out = run(&["train", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cluster_and_gazetteer_emit_their_formats() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest_forum(dir.path(), "darkode", &TRAIN_POSTS);

    let clusters = dir.path().join("clusters.txt");
    let args = [
        "cluster",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        clusters.to_str().unwrap(),
        "--num-clusters",
        "3",
        "--min-count",
        "1",
    ];
    run_ok(&args);
    let text = fs::read_to_string(&clusters).unwrap();
    assert!(!text.is_empty());
    for line in text.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 3, "bitstring<TAB>word<TAB>count: {line}");
        assert!(cols[0].chars().all(|c| c == '0' || c == '1'), "{line}");
        assert!(cols[2].parse::<u64>().is_ok(), "{line}");
    }
    let first = fs::read(&clusters).unwrap();
    run_ok(&args);
    assert_eq!(first, fs::read(&clusters).unwrap());

    let gaz = dir.path().join("gaz.txt");
    run_ok(&[
        "gazetteer",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        gaz.to_str().unwrap(),
        "--min-count",
        "2",
    ]);
    let text = fs::read_to_string(&gaz).unwrap();
    assert!(text.starts_with("marketsieve-gazetteer"), "{text}");
    // zqbot and zqrat are annotated twice each; zqcvv only once
    assert!(text.contains("zqbot"), "{text}");
    assert!(text.contains("zqrat"), "{text}");
    assert!(!text.contains("zqcvv"), "{text}");
}

#[test]
fn significance_of_a_system_against_itself_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest_forum(dir.path(), "darkode", &TRAIN_POSTS);
    let model = dir.path().join("m.model");
    let preds = dir.path().join("p.preds");
    run_ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--mode",
        "token",
        "--model-out",
        model.to_str().unwrap(),
    ]);
    run_ok(&[
        "predict",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    let stdout = run_ok(&[
        "significance",
        "--corpus",
        corpus.to_str().unwrap(),
        "--a",
        preds.to_str().unwrap(),
        "--b",
        preds.to_str().unwrap(),
        "--resamples",
        "500",
    ]);
    assert!(stdout.contains("p_value         1.0000"), "{stdout}");
}

#[test]
fn xdomain_matrix_marks_missing_resources() {
    let dir = tempfile::tempdir().unwrap();
    let alpha_train = ingest_forum(dir.path(), "alpha", &TRAIN_POSTS);
    let alpha_dev = ingest_forum(
        dir.path(),
        "alphadev",
        &[("d1", "selling {zqbot} again"), ("d2", "my {zqrat} rocks")],
    );
    // beta has a dev corpus but no training annotations
    let beta_dev = ingest_forum(
        dir.path(),
        "betadev",
        &[("b1", "get {zqbot} here"), ("b2", "selling {zqcvv} cheap")],
    );

    let config = dir.path().join("exp.conf");
    write(
        &config,
        &format!(
            "[experiment]\nmode = token\nseed = 7\nl1_strength = 0\n\n\
             [forum alpha]\ntrain = {}\ndev = {}\n\n\
             [forum beta]\ndev = {}\n\n\
             [xdomain]\ntrain = alpha\neval = alpha, beta\n",
            alpha_train.display(),
            alpha_dev.display(),
            beta_dev.display()
        ),
    );
    let report = dir.path().join("xdomain.report");
    let stdout = run_ok(&[
        "xdomain",
        "--config",
        config.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    for variant in ["dict", "binary", "binary+gaz", "post", "post+gaz"] {
        assert!(stdout.contains(variant), "missing {variant} row:\n{stdout}");
    }
    // beta has no training annotations: its gazetteer cells are "-"
    let gaz_row = stdout
        .lines()
        .find(|l| l.starts_with("binary+gaz"))
        .expect("binary+gaz row");
    assert!(gaz_row.trim_end().ends_with("-"), "{gaz_row}");
    // no cluster file configured: brown rows are "-" everywhere
    let brown_row = stdout
        .lines()
        .find(|l| l.starts_with("binary+brown"))
        .expect("binary+brown row");
    assert!(brown_row.contains('-'), "{brown_row}");

    // same seed, same config: byte-identical report
    let first = fs::read(&report).unwrap();
    run_ok(&[
        "xdomain",
        "--config",
        config.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(first, fs::read(&report).unwrap());
}

#[test]
fn curve_reports_both_regimes_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let alpha_train = ingest_forum(dir.path(), "alpha", &TRAIN_POSTS);
    let gamma_train = ingest_forum(
        dir.path(),
        "gamma",
        &[
            ("g1", "need {spamtool} asap"),
            ("g2", "selling {spamtool} list"),
            ("g3", "my {zqbot} works"),
        ],
    );
    let gamma_dev = ingest_forum(
        dir.path(),
        "gammadev",
        &[("gd1", "get {spamtool} now"), ("gd2", "fresh {zqbot} stock")],
    );

    let config = dir.path().join("exp.conf");
    write(
        &config,
        &format!(
            "[experiment]\nmode = token\nseed = 7\nl1_strength = 0\n\n\
             [forum alpha]\ntrain = {}\n\n\
             [forum gamma]\ntrain = {}\ndev = {}\n\n\
             [curve]\nsource = alpha\ntarget = gamma\nsizes = 0, 2\n",
            alpha_train.display(),
            gamma_train.display(),
            gamma_dev.display()
        ),
    );
    let stdout = run_ok(&["curve", "--config", config.to_str().unwrap()]);
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with('0') || l.starts_with('2'))
        .collect();
    assert_eq!(rows.len(), 2, "{stdout}");
    // size 0 trains source-only: both regimes are the same system
    let zero: Vec<&str> = rows[0].split_whitespace().collect();
    assert_eq!(zero[1], zero[2], "{stdout}");

    // asking for more target posts than exist is a config error
    let out = run(&["curve", "--config", config.to_str().unwrap(), "--sizes", "50"]);
    assert_eq!(out.status.code(), Some(2));
}
