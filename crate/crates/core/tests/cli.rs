use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ouda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ouda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<Option<f64>> {
    v.as_array().unwrap().iter().map(Value::as_f64).collect()
}

#[test]
fn documented_run_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let res = ouda(&[
        "run",
        "--gen",
        "rotating",
        "--variant",
        "gmean_fb",
        "--k",
        "4",
        "--batch",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let trace = read_json(&out);
    let variants = trace["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 1);
    let v = &variants[0];
    assert_eq!(v["name"], "gfk_gmean_fb");
    assert_eq!(v["classifier"], "knn");
    let per_batch = v["per_batch"].as_array().unwrap();
    assert_eq!(per_batch.len(), 60);
    assert_eq!(per_batch.len(), v["running"].as_array().unwrap().len());
    assert!(v["final"].as_f64().is_some());
    assert!(v["seconds_total"].is_null());
    assert_eq!(trace["config"]["k"], 4);
}

#[test]
fn oversized_subspace_is_a_config_error() {
    let res = ouda(&["run", "--gen", "waveform21", "--variant", "gfk", "--k", "20"]);
    assert_eq!(code(&res), 3);
    assert!(stderr(&res).contains("k < d/2"), "{}", stderr(&res));
}

#[test]
fn missing_csv_is_a_data_error() {
    let res = ouda(&["run", "--csv", "/no/such/stream.csv", "--variant", "pca"]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("/no/such/stream.csv"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&ouda(&["run", "--variant", "gfk", "--bogus"])), 1);
    assert_eq!(code(&ouda(&["run", "--variant", "fb_gmean"])), 1);
    assert_eq!(code(&ouda(&["frobnicate"])), 1);
    assert_eq!(code(&ouda(&["--help"])), 0);
}

#[test]
fn ablate_reports_every_variant_per_classifier() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let res = ouda(&[
        "ablate",
        "--classifier",
        "knn,svm",
        "--batches",
        "8",
        "--epochs",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let trace = read_json(&out);
    let pairs: Vec<(String, String)> = trace["variants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| {
            (
                v["name"].as_str().unwrap().to_string(),
                v["classifier"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let mut expected = Vec::new();
    for c in ["knn", "svm"] {
        for v in ["pca", "gfk", "gfk_fb", "gfk_gmean", "gfk_gmean_fb"] {
            expected.push((v.to_string(), c.to_string()));
        }
    }
    assert_eq!(pairs, expected);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("1.json"), dir.path().join("2.json")];
    for p in &paths {
        let res = ouda(&[
            "ablate",
            "--batches",
            "10",
            "--seed",
            "7",
            "--diagnostics",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&res), 0);
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn running_accuracy_is_the_prefix_mean() {
    let res = ouda(&["ablate", "--gen", "waveform21", "--batches", "12", "--batch", "30"]);
    assert_eq!(code(&res), 0);
    let trace: Value = serde_json::from_slice(&res.stdout).unwrap();
    for v in trace["variants"].as_array().unwrap() {
        let per_batch = floats(&v["per_batch"]);
        let running = floats(&v["running"]);
        let (mut sum, mut n) = (0.0, 0.0);
        for (a, r) in per_batch.iter().zip(&running) {
            if let Some(a) = a {
                sum += a;
                n += 1.0;
            }
            assert!((r.unwrap() - sum / n).abs() < 1e-12);
        }
        assert_eq!(v["final"].as_f64(), *running.last().unwrap());
    }
}

#[test]
fn timings_are_opt_in() {
    let res = ouda(&["run", "--variant", "gfk", "--batches", "3", "--timings"]);
    assert_eq!(code(&res), 0);
    let trace: Value = serde_json::from_slice(&res.stdout).unwrap();
    let v = &trace["variants"][0];
    assert!(v["seconds_total"].as_f64().unwrap() >= 0.0);
    for step in ["pca", "mean", "gfk", "predict"] {
        assert!(v["seconds_per_step"][step].as_f64().is_some());
    }
}

#[test]
fn csv_input_is_split_and_batched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let mut text = String::from("a,b,c,d,e,f,label\n");
    for i in 0..130 {
        let y = i % 2;
        let row: Vec<String> = (0..6)
            .map(|j| format!("{:.3}", ((i * 7 + j * 3) % 11) as f64 + 4.0 * y as f64))
            .collect();
        text.push_str(&format!("{},{y}\n", row.join(",")));
    }
    fs::write(&path, text).unwrap();
    let res = ouda(&[
        "run",
        "--csv",
        path.to_str().unwrap(),
        "--header",
        "--variant",
        "gfk_gmean",
        "--k",
        "2",
        "--batch",
        "20",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let trace: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(trace["config"]["data"], "csv");
    assert_eq!(trace["config"]["source_rows"], 26);
    assert_eq!(trace["variants"][0]["per_batch"].as_array().unwrap().len(), 5);
}

#[test]
fn verify_passes_by_default() {
    let res = ouda(&["verify"]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let table = String::from_utf8_lossy(&res.stdout);
    assert!(table.contains("gfk_quadrature_equivalence"));
    assert!(table.contains("icms_two_point_karcher"));
}

#[test]
fn verify_reports_an_injected_fault() {
    let res = ouda(&["verify", "--inject-fault", "--instances", "5"]);
    assert_eq!(code(&res), 4);
    let err = stderr(&res);
    assert!(err.contains("gfk_quadrature_equivalence"), "{err}");
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn verify_honors_instance_count() {
    let res = ouda(&["verify", "--instances", "5", "--seed", "3"]);
    assert_eq!(code(&res), 0);
    let table = String::from_utf8_lossy(&res.stdout);
    let row = table.lines().find(|l| l.contains("geodesic_orthonormality")).unwrap();
    assert!(row.split_whitespace().any(|w| w == "5"), "{row}");
}
