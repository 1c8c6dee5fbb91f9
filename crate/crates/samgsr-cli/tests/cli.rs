//! CLI behavior: validation order, exit codes, machine-readable errors,
//! repeat-run determinism, and the model round trip.

use std::fs;
use std::path::Path;
use std::process::Command;

use samgsr::report::RunReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_samgsr"))
}

fn fixtures(dir: &Path) {
    let genes: Vec<String> = (0..12).map(|i| format!("G{i:02}")).collect();
    let samples: Vec<String> = (0..12).map(|i| format!("s{i:02}")).collect();
    let mut expr = String::from("gene");
    for s in &samples {
        expr.push('\t');
        expr.push_str(s);
    }
    expr.push('\n');
    let mut x: u64 = 13;
    let mut next = || {
        // small deterministic LCG noise
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 33) as f64 / (1u64 << 31) as f64) - 0.5
    };
    for (gi, g) in genes.iter().enumerate() {
        expr.push_str(g);
        for si in 0..12 {
            let mut v = next();
            if gi == 0 && si < 6 {
                v += 3.0;
            }
            expr.push_str(&format!("\t{v:.6}"));
        }
        expr.push('\n');
    }
    fs::write(dir.join("expr.tsv"), expr).unwrap();
    let mut labels = String::new();
    for (i, s) in samples.iter().enumerate() {
        labels.push_str(&format!("{s}\t{}\n", if i < 6 { "case" } else { "control" }));
    }
    fs::write(dir.join("labels.tsv"), labels).unwrap();
    fs::write(
        dir.join("sets.gmt"),
        format!("pathA\tna\t{}\npathB\tna\t{}\n", genes[..6].join("\t"), genes[6..].join("\t")),
    )
    .unwrap();
    let mut ppi = String::new();
    for i in 0..12 {
        ppi.push_str(&format!("{}\t{}\n", genes[i], genes[(i + 1) % 12]));
    }
    fs::write(dir.join("ppi.tsv"), ppi).unwrap();
}

#[test]
fn weighted_without_ppi_fails_before_touching_files() {
    let dir = tempfile::tempdir().unwrap();
    // deliberately nonexistent paths: the flag check must fire first
    let out = bin()
        .args([
            "reduce",
            "--expression",
            "missing.tsv",
            "--labels",
            "missing.tsv",
            "--gmt",
            "missing.gmt",
            "--weighted",
            "--positive-class",
            "case",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let record: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(record["error"]["kind"], "config");
    assert!(record["error"]["message"].as_str().unwrap().contains("--ppi"));
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_file_yields_io_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "screen",
            "--expression",
            "definitely-missing.tsv",
            "--labels",
            "also-missing.tsv",
            "--gmt",
            "nope.gmt",
            "--positive-class",
            "case",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let record: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(record["error"]["kind"], "io");
}

fn strip_timestamp(path: &Path) -> String {
    let mut report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    report["timestamp"] = serde_json::Value::String(String::new());
    serde_json::to_string(&report).unwrap()
}

#[test]
fn repeated_simulate_runs_are_identical_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).display().to_string();
    for run in ["one", "two"] {
        let out = bin()
            .args([
                "simulate",
                "--replicates",
                "1",
                "--seed",
                "7",
                "--n-genes",
                "40",
                "--n-train",
                "24",
                "--n-test",
                "16",
                "--set-sizes",
                "10,14",
                "--planted",
                "g0001=0.37:12:1,g0002=-0.86:3:0",
                "--grid",
                "0.4",
                "--k",
                "3",
                "--b",
                "60",
                "--alpha",
                "0.5",
                "--out",
                &p(run),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        strip_timestamp(&dir.path().join("one/report.json")),
        strip_timestamp(&dir.path().join("two/report.json"))
    );
}

#[test]
fn reduce_then_evaluate_round_trips_the_model() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |s: &str| dir.path().join(s).display().to_string();
    let out = bin()
        .args([
            "reduce",
            "--expression",
            &p("expr.tsv"),
            "--labels",
            &p("labels.tsv"),
            "--gmt",
            &p("sets.gmt"),
            "--positive-class",
            "case",
            "--alpha",
            "0.5",
            "--b",
            "120",
            "--seed",
            "3",
            "--c-star",
            "0.5",
            "--out",
            &p("sel"),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // lossless report round trip
    let text = fs::read_to_string(dir.path().join("sel/report.json")).unwrap();
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(report.to_json(), text);
    let model = report.model.clone().expect("reduce fits a model");
    assert!(!model.genes.is_empty());

    let out = bin()
        .args([
            "evaluate",
            "--report",
            &p("sel/report.json"),
            "--expression",
            &p("expr.tsv"),
            "--labels",
            &p("labels.tsv"),
            "--out",
            &p("eval"),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eval_report =
        RunReport::from_json(&fs::read_to_string(dir.path().join("eval/report.json")).unwrap())
            .unwrap();
    let evals = eval_report.evals.expect("evaluate writes metrics");
    assert_eq!(evals.len(), 1);
    assert!(evals[0].eval.error_rate <= 0.5);
    // the model embedded in the evaluate report equals the saved one
    assert_eq!(eval_report.model.unwrap(), model);
}

#[test]
fn stability_of_identical_runs_is_one() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |s: &str| dir.path().join(s).display().to_string();
    for name in ["a", "b"] {
        let out = bin()
            .args([
                "reduce",
                "--expression",
                &p("expr.tsv"),
                "--labels",
                &p("labels.tsv"),
                "--gmt",
                &p("sets.gmt"),
                "--positive-class",
                "case",
                "--alpha",
                "0.5",
                "--b",
                "120",
                "--seed",
                "3",
                "--c-star",
                "0.5",
                "--out",
                &p(name),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let out = bin()
        .args([
            "stability",
            "--reports",
            &p("a/report.json"),
            &p("b/report.json"),
            "--out",
            &p("stab"),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report =
        RunReport::from_json(&fs::read_to_string(dir.path().join("stab/report.json")).unwrap())
            .unwrap();
    let stability = report.stability.unwrap();
    assert_eq!(stability.rand_gene, 1.0);
    assert_eq!(stability.rand_pathway, 1.0);
    assert_eq!(stability.k, 2);
}

#[test]
fn two_binary_models_compose_into_four_class_metrics() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |s: &str| dir.path().join(s).display().to_string();
    // second binary task over the same samples: stage labels
    let mut stage = String::new();
    for i in 0..12 {
        // alternate within each subtype group so each composite class is
        // populated and every training class keeps >= 2 samples
        stage.push_str(&format!("s{i:02}\t{}\n", if i % 2 == 0 { "early" } else { "late" }));
    }
    fs::write(dir.path().join("stage_labels.tsv"), stage).unwrap();
    // four-class truth named as the composite classes
    let mut truth = String::new();
    for i in 0..12 {
        let subtype = if i < 6 { "case" } else { "control" };
        let stage = if i % 2 == 0 { "early" } else { "late" };
        truth.push_str(&format!("s{i:02}\t{subtype}-{stage}\n"));
    }
    fs::write(dir.path().join("four_class.tsv"), truth).unwrap();

    for (labels, positive, out) in [
        ("labels.tsv", "case", "m_subtype"),
        ("stage_labels.tsv", "early", "m_stage"),
    ] {
        let run = bin()
            .args([
                "reduce",
                "--expression",
                &p("expr.tsv"),
                "--labels",
                &p(labels),
                "--gmt",
                &p("sets.gmt"),
                "--positive-class",
                positive,
                "--alpha",
                "0.9",
                "--b",
                "120",
                "--seed",
                "3",
                "--c-star",
                "0.5",
                "--out",
                &p(out),
            ])
            .output()
            .unwrap();
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }

    let out = bin()
        .args([
            "evaluate",
            "--report",
            &p("m_subtype/report.json"),
            "--second-report",
            &p("m_stage/report.json"),
            "--expression",
            &p("expr.tsv"),
            "--labels",
            &p("four_class.tsv"),
            "--out",
            &p("composite"),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::from_json(
        &fs::read_to_string(dir.path().join("composite/report.json")).unwrap(),
    )
    .unwrap();
    let evals = report.evals.unwrap();
    assert_eq!(evals[0].name, "composite");
    assert_eq!(evals[0].eval.classes.len(), 4);
    assert!(evals[0].eval.classes.contains(&"case-early".to_string()));
}

#[test]
fn weights_report_lists_every_gene_and_correlation() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |s: &str| dir.path().join(s).display().to_string();
    let out = bin()
        .args([
            "weights",
            "--ppi",
            &p("ppi.tsv"),
            "--gmt",
            &p("sets.gmt"),
            "--out",
            &p("w"),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report =
        RunReport::from_json(&fs::read_to_string(dir.path().join("w/report.json")).unwrap())
            .unwrap();
    let weights = report.weights.unwrap();
    assert_eq!(weights.n_genes, 12);
    assert!(weights.setcount_spearman.is_some());
    // ring graph: every weight is 1 + 2
    assert!(weights.weights.iter().all(|w| w.weight == 3.0));
}
