//! End-to-end checks of the binary: exit codes, determinism, and the wire
//! format of the reports.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradedk"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let status = bin()
            .args(["ktheory-roundtrip", "--seed", "7", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let ja = read(&a.join("ktheory-roundtrip.json"));
    let jb = read(&b.join("ktheory-roundtrip.json"));
    assert_eq!(ja, jb);
    assert!(ja.contains("\"pass\": true"));
    assert!(ja.contains("\"rank_vector\"") || ja.contains("roundtrip_exact"));
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let out = dir.path().join("reports");
    let status = bin()
        .args(["tensor-audit", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists(), "no partial outputs on config errors");

    // Structurally valid JSON with an invalid value is also a config error.
    std::fs::write(&cfg, r#"{ "inverse_decay": { "t_grid": [] } }"#).unwrap();
    let status = bin()
        .args(["inverse-decay", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists());

    // Unknown fields are rejected.
    std::fs::write(&cfg, r#"{ "sed": 7 }"#).unwrap();
    let status = bin()
        .args(["tensor-audit", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn zero_generator_norms_match_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "inverse_decay": { "half_dim": 1, "generator": "zero", "t_grid": [1.0, 2.0, 4.0] } }"#,
    )
    .unwrap();
    let out = dir.path().join("reports");
    let status = bin()
        .args(["inverse-decay", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&read(&out.join("inverse-decay.json"))).unwrap();
    let functions = doc["results"]["functions"].as_array().unwrap();
    let lorentzian = functions
        .iter()
        .find(|f| f["function"] == "lorentzian")
        .expect("catalog entry");
    for pair in lorentzian["norm_trace"].as_array().unwrap() {
        let t = pair[0].as_f64().unwrap();
        let norm = pair[1].as_f64().unwrap();
        assert!(
            (norm - 1.0 / (t * t + 1.0)).abs() < 1e-12,
            "t={t}: {norm} vs {}",
            1.0 / (t * t + 1.0)
        );
    }
}

#[test]
fn csv_and_plot_artifacts_are_emitted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let status = bin()
        .args(["inverse-decay", "--format", "csv", "--plot", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&out.join("inverse-decay.csv"));
    assert!(csv.starts_with("series,t,value"));
    let svg = read(&out.join("inverse-decay.svg"));
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-env");
    let status = bin()
        .arg("paper-audit")
        .env("GRADEDK_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out.join("paper-audit.json"));
    assert!(text.contains("cayley-resolvent-normalization"));
    assert!(text.contains("bounded-transform-square-sign"));
}

#[test]
fn quantize_smoke_with_custom_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "quantize_converge": { "n_modes": 32, "theta_count": 128,
             "t_grid": [2.0, 4.0, 8.0], "tail_tol": 1e-3,
             "terminal_threshold": 0.2, "exponent_threshold": -0.6 } }"#,
    )
    .unwrap();
    let out = dir.path().join("reports");
    let status = bin()
        .args(["quantize-converge", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "quantize-converge smoke run failed");
    let doc: serde_json::Value =
        serde_json::from_str(&read(&out.join("quantize-converge.json"))).unwrap();
    assert_eq!(doc["results"]["index_analytic"], 0);
    assert_eq!(doc["results"]["index_symbolic"], 0);
    let cells = doc["results"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for cell in cells {
        assert!(cell["t"].is_array() && cell["error"].is_array());
        assert!(cell["fit_exponent"].is_number());
    }
}
