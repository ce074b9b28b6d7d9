//! End-to-end checks of the binary: file round-trips, whole-pipeline
//! determinism, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spikedepth"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spikedepth_cli_{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn simulate_writes_readable_train_files() {
    let dir = temp_dir("simulate");
    let out = dir.join("hpp.txt");
    let status = bin()
        .args(["simulate", "hpp", "--rate", "10", "--n", "50", "--seed", "1"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let loaded = spikedepth_cli::formats::read_train_file(&out).unwrap();
    assert_eq!(loaded.sample.len(), 50);

    // Same seed, second run: byte-identical file.
    let out2 = dir.join("hpp2.txt");
    bin()
        .args(["simulate", "hpp", "--rate", "10", "--n", "50", "--seed", "1"])
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert_eq!(read(&out), read(&out2));
}

#[test]
fn depth_median_detect_round_trip() {
    let dir = temp_dir("pipeline");
    let trains = dir.join("trains.txt");
    bin()
        .args(["simulate", "hpp", "--rate", "8", "--n", "120", "--seed", "3"])
        .arg("--out")
        .arg(&trains)
        .status()
        .unwrap();

    let scores = dir.join("scores.csv");
    let model = dir.join("model.json");
    let status = bin()
        .args(["depth", "--input"])
        .arg(&trains)
        .args(["--fit", "kernel", "--out"])
        .arg(&scores)
        .arg("--save-model")
        .arg(&model)
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::Reader::from_path(&scores).unwrap();
    let rows: Vec<spikedepth_cli::commands::DepthRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().all(|r| r.total >= 0.0 && r.total <= 1.0));

    // The saved model reloads and reproduces identical scores.
    let scores2 = dir.join("scores2.csv");
    bin()
        .args(["depth", "--input"])
        .arg(&trains)
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&scores2)
        .status()
        .unwrap();
    assert_eq!(read(&scores), read(&scores2));

    let med_json = dir.join("median.json");
    let med_train = dir.join("median.txt");
    let status = bin()
        .args(["median", "--input"])
        .arg(&trains)
        .arg("--out-json")
        .arg(&med_json)
        .arg("--out-train")
        .arg(&med_train)
        .status()
        .unwrap();
    assert!(status.success());
    let med: serde_json::Value = serde_json::from_str(&read(&med_json)).unwrap();
    let k = med["cardinality"].as_u64().unwrap() as usize;
    let reloaded = spikedepth_cli::formats::read_train_file(&med_train).unwrap();
    assert_eq!(reloaded.sample.trains()[0].cardinality(), k);

    let det_csv = dir.join("outliers.csv");
    let det_json = dir.join("outliers.json");
    let status = bin()
        .args(["detect", "--input"])
        .arg(&trains)
        .args(["--delta", "0.01", "--n-mc", "20000", "--out-csv"])
        .arg(&det_csv)
        .arg("--out-json")
        .arg(&det_json)
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::Reader::from_path(&det_csv).unwrap();
    let rows: Vec<spikedepth_core::OutlierRow> =
        reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 120);
}

#[test]
fn classify_reports_error_rate() {
    let dir = temp_dir("classify");
    let a = dir.join("a.txt");
    let b = dir.join("b.txt");
    bin()
        .args(["simulate", "hpp", "--rate", "4", "--n", "80", "--seed", "5", "--label", "slow"])
        .arg("--out")
        .arg(&a)
        .status()
        .unwrap();
    bin()
        .args(["simulate", "hpp", "--rate", "16", "--n", "80", "--seed", "6", "--label", "fast"])
        .arg("--out")
        .arg(&b)
        .status()
        .unwrap();
    // Merge the two labeled files into one training file.
    let merged = dir.join("train.txt");
    let body_a = read(&a);
    let body_b = read(&b);
    let mut merged_text = String::new();
    merged_text.push_str(&body_a);
    for line in body_b.lines().skip(1) {
        merged_text.push_str(line);
        merged_text.push('\n');
    }
    fs::write(&merged, merged_text).unwrap();

    // Test file: the same construction with other seeds.
    let ta = dir.join("ta.txt");
    let tb = dir.join("tb.txt");
    bin()
        .args(["simulate", "hpp", "--rate", "4", "--n", "40", "--seed", "7", "--label", "slow"])
        .arg("--out")
        .arg(&ta)
        .status()
        .unwrap();
    bin()
        .args(["simulate", "hpp", "--rate", "16", "--n", "40", "--seed", "8", "--label", "fast"])
        .arg("--out")
        .arg(&tb)
        .status()
        .unwrap();
    let test = dir.join("test.txt");
    let mut text = read(&ta);
    for line in read(&tb).lines().skip(1) {
        text.push_str(line);
        text.push('\n');
    }
    fs::write(&test, text).unwrap();

    let out_dir = dir.join("result");
    let output = bin()
        .args(["classify", "--train"])
        .arg(&merged)
        .arg("--test")
        .arg(&test)
        .args(["--method", "dd", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("summary.json"))).unwrap();
    let rate = summary["misclassification"].as_f64().unwrap();
    assert!(rate < 0.1, "rate-4 vs rate-16 groups should separate, got {rate}");
    assert!(out_dir.join("decisions.csv").exists());
    assert!(out_dir.join("boundary.csv").exists());
    assert!(out_dir.join("ddpoints.csv").exists());

    // The outlier-removal pre-step reports per-group removal counts and still
    // separates the groups.
    let removed_dir = dir.join("result_removed");
    let output = bin()
        .args(["classify", "--train"])
        .arg(&merged)
        .arg("--test")
        .arg(&test)
        .args([
            "--method",
            "md",
            "--remove-outliers",
            "0.02",
            "--n-mc",
            "10000",
            "--out-dir",
        ])
        .arg(&removed_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(&removed_dir.join("summary.json"))).unwrap();
    assert!(summary["removed"].is_array());
    let rate = summary["misclassification"].as_f64().unwrap();
    assert!(rate < 0.1, "removal run should still separate, got {rate}");
}

#[test]
fn reproduce_is_byte_deterministic() {
    let dir1 = temp_dir("repro1");
    let dir2 = temp_dir("repro2");
    for dir in [&dir1, &dir2] {
        let status = bin()
            .args(["reproduce", "sim1", "--reps", "2", "--seed", "11", "--out"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["sim1_reps.csv", "sim1_summary.csv", "sim1_median_clean.txt"] {
        assert_eq!(
            read(&dir1.join(name)),
            read(&dir2.join(name)),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn validation_failures_exit_with_code_two() {
    let dir = temp_dir("exitcodes");
    // Unknown experiment name.
    let status = bin()
        .args(["reproduce", "sim99", "--out"])
        .arg(dir.join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Malformed train file.
    let bad = dir.join("bad.txt");
    fs::write(&bad, "no header\n0.1 0.2\n").unwrap();
    let status = bin()
        .args(["depth", "--input"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.join("out.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Delta outside (0, 1).
    let good = dir.join("good.txt");
    fs::write(&good, "#domain 0 1\n0.2 0.4\n").unwrap();
    let status = bin()
        .args(["detect", "--input"])
        .arg(&good)
        .args(["--delta", "1.5", "--out-csv"])
        .arg(dir.join("d.csv"))
        .arg("--out-json")
        .arg(dir.join("d.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn tie_perturbation_is_reported() {
    let dir = temp_dir("ties");
    let tied = dir.join("tied.txt");
    fs::write(&tied, "#domain 0 1\n0.2 0.2 0.5\n0.7\n").unwrap();
    let output = bin()
        .args(["depth", "--input"])
        .arg(&tied)
        .arg("--out")
        .arg(dir.join("scores.csv"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("perturbed 1 tied event"),
        "stderr was: {stderr}"
    );
}
