//! End-to-end tests of the binary surface: output schemas, determinism,
//! exit codes, and file output.

use std::process::Command;

use volterra_cli::run_to_string;

fn volterra() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volterra"))
}

#[test]
fn identical_args_produce_identical_bytes() {
    let args = [
        "volterra",
        "largedev",
        "--density",
        "uniform01",
        "--n",
        "2,4,8",
        "--m",
        "256",
        "--trials",
        "100000",
        "--seed",
        "7",
    ];
    let a = run_to_string(&args).unwrap();
    let b = run_to_string(&args).unwrap();
    assert_eq!(a, b);

    let mut changed = args;
    changed[11] = "8";
    let c = run_to_string(&changed).unwrap();
    assert_ne!(a, c, "a different seed must change the MC columns");
}

#[test]
fn largedev_csv_schema_and_oracle() {
    let out = run_to_string(&[
        "volterra",
        "largedev",
        "--density",
        "uniform01",
        "--n",
        "2,4,8",
        "--m",
        "512",
        "--trials",
        "100000",
        "--seed",
        "7",
    ])
    .unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "n,log_p_grid,log_p_oracle,mc_estimate,mc_stderr,log_p_asym,ratio"
    );
    // Row for n = 4: oracle is log(1/24).
    let row4 = lines.find(|l| l.starts_with("4,")).unwrap();
    let fields: Vec<&str> = row4.split(',').collect();
    assert_eq!(fields.len(), 7);
    let oracle: f64 = fields[2].parse().unwrap();
    assert!((oracle - (1.0f64 / 24.0).ln()).abs() < 1e-12);
}

#[test]
fn largedev_json_mirror_has_version_and_meta() {
    let out = run_to_string(&[
        "volterra",
        "largedev",
        "--density",
        "exponential:rate=1",
        "--n",
        "2,3",
        "--m",
        "256",
        "--trials",
        "10000",
        "--seed",
        "3",
        "--format",
        "json",
    ])
    .unwrap();
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["version"], "1");
    assert_eq!(doc["config"]["subcommand"], "largedev");
    assert_eq!(doc["config"]["density"], "exponential:rate=1");
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["meta"]["grid_m"], 256);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert!(doc["rows"][0]["below_mc_resolution"].is_boolean());
}

#[test]
fn convpow_dumps_the_constant_kernel() {
    let out = run_to_string(&[
        "volterra",
        "convpow",
        "--kernel",
        "powexp:c=1,r=0,mu=0",
        "--n",
        "1",
        "--m",
        "8",
    ])
    .unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "t,mantissa,log_scale");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0], "0.0625,1,0");
    assert_eq!(rows[7], "0.9375,1,0");
}

#[test]
fn norm_json_brackets_the_classical_value() {
    let out = run_to_string(&[
        "volterra",
        "norm",
        "--kernel",
        "powexp:c=1,r=0,mu=0",
        "--n",
        "1",
        "--p",
        "2",
        "--m",
        "512",
    ])
    .unwrap();
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["version"], "1");
    assert_eq!(doc["estimate"]["method"], "svd-p2");
    let lower = doc["estimate"]["log_lower"].as_f64().unwrap().exp();
    let upper = doc["estimate"]["log_upper"].as_f64().unwrap().exp();
    let target = 2.0 / std::f64::consts::PI;
    assert!((lower - target).abs() / target < 1e-3);
    assert!((upper - target).abs() / target < 1e-3);
}

#[test]
fn table_ratio_column_approaches_one() {
    let out = run_to_string(&[
        "volterra",
        "table",
        "--kernel",
        "powexp:c=1,r=0,mu=0",
        "--p",
        "2",
        "--n",
        "2..12",
        "--m",
        "256",
    ])
    .unwrap();
    let ratios: Vec<f64> = out
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 11);
    for pair in ratios.windows(2) {
        assert!(
            (pair[1] - 1.0).abs() < (pair[0] - 1.0).abs(),
            "ratio did not move toward 1: {pair:?}"
        );
    }
}

#[test]
fn equiv_defaults_to_the_tangent_kernel() {
    let out = run_to_string(&[
        "volterra",
        "equiv",
        "--kernel",
        "poly:r=0,f=1,1",
        "--p",
        "1",
        "--n",
        "5,10,20",
        "--m",
        "512",
    ])
    .unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "n,log_norm_a,log_norm_b,log_diff,ratio");
    let ratios: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn extremal_efficiency_is_high() {
    let out = run_to_string(&[
        "volterra",
        "extremal",
        "--kernel",
        "powexp:c=1,r=0,mu=0",
        "--p",
        "2",
        "--n",
        "10,20",
        "--m",
        "256",
    ])
    .unwrap();
    let effs: Vec<f64> = out
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(effs.iter().all(|&e| e > 0.9 && e <= 1.0 + 1e-12), "{effs:?}");
}

#[test]
fn decay_matches_the_closed_form_case() {
    let out = run_to_string(&[
        "volterra",
        "decay",
        "--kernel",
        "powexp:c=1,r=0,mu=0",
        "--p",
        "1",
        "--n",
        "10",
        "--delta",
        "0.5",
        "--m",
        "1024",
    ])
    .unwrap();
    let last = out.lines().last().unwrap();
    let ratio: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    let expected = 2f64.powi(-10);
    assert!((ratio - expected).abs() < 1e-3 * expected);
}

#[test]
fn output_flag_writes_the_file() {
    let dir = std::env::temp_dir().join("volterra-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("convpow.csv");
    let status = volterra()
        .args([
            "convpow",
            "--kernel",
            "powexp:c=1,r=0,mu=0",
            "--n",
            "2",
            "--m",
            "16",
            "--output",
            path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let content = std::fs::read_to_string(&path).unwrap();
    assert!(content.contains("t,mantissa,log_scale"));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn exit_codes_for_usage_errors() {
    // Unknown kernel family.
    let out = volterra()
        .args(["norm", "--kernel", "gauss:s=1", "--n", "1", "--p", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("--kernel"), "stderr: {msg}");

    // Invalid p.
    let out = volterra()
        .args([
            "norm",
            "--kernel",
            "powexp:c=1,r=0,mu=0",
            "--n",
            "1",
            "--p",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--p"));

    // n <= 0.
    let out = volterra()
        .args([
            "table",
            "--kernel",
            "powexp:c=1,r=0,mu=0",
            "--p",
            "2",
            "--n",
            "0..3",
            "--m",
            "64",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));

    // Missing required flag (clap-level error).
    let out = volterra().args(["norm", "--n", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = volterra().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("largedev"));
}

#[test]
fn success_exit_is_zero() {
    let out = volterra()
        .args([
            "norm",
            "--kernel",
            "powexp:c=1,r=0,mu=0",
            "--n",
            "1",
            "--p",
            "1",
            "--m",
            "64",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
