use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_nlgyro");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, seed: u64) -> std::path::PathBuf {
    let path = dir.join("sweep.toml");
    std::fs::write(
        &path,
        format!(
            r#"
probe = "coherent"
n_bar = [4.0, 8.0, 16.0]
fraction = [0.0]
phi = [1e-4, 2e-3]
phi0 = -1.5707963267948966
estimators = ["m", "m2", "fisher", "multiparam"]
seed = {seed}

[noise]
eta = 0.9
thermal_photons = 0.05
mc_samples = 20000
"#
        ),
    )
    .unwrap();
    path
}

fn sweep(dir: &Path, config: &Path, tag: &str, extra: &[&str]) -> (Output, String, serde_json::Value) {
    let csv = dir.join(format!("{tag}.csv"));
    let json = dir.join(format!("{tag}.json"));
    let mut args = vec![
        "sweep",
        config.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    let csv_text = std::fs::read_to_string(&csv).unwrap_or_default();
    let report = std::fs::read_to_string(&json)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or(serde_json::Value::Null);
    (out, csv_text, report)
}

#[test]
fn sweep_is_deterministic_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 5);
    let (a, csv_a, json_a) = sweep(dir.path(), &config, "a", &["--seed", "9"]);
    let (b, csv_b, json_b) = sweep(dir.path(), &config, "b", &["--seed", "9"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success());
    assert_eq!(csv_a, csv_b);
    assert_eq!(csv_a.lines().count(), 1 + 6);
    assert!(csv_a.starts_with(
        "N_bar,fraction,phi,phi0,cutoff1,cutoff2,tail_mass,d2phi_M,d2phi_M2,fisher,qfi,mp_bound_L,mp_bound_NL,analytic_d2phi,flags"
    ));
    assert_eq!(json_a["schema_version"], 1);
    assert_eq!(json_a["config"]["seed"], 9);
    assert_eq!(json_a["noise"], json_b["noise"]);
    assert_eq!(json_a["rows"], json_b["rows"]);
    assert!(json_a["discrepancies"].as_array().is_some_and(|d| !d.is_empty()));
}

#[test]
fn estimate_replays_a_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 0);
    let (_, csv, _) = sweep(dir.path(), &config, "r", &[]);
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    let headers = rows.headers().unwrap().clone();
    let row = rows.records().nth(3).unwrap().unwrap();
    let col = |rec: &csv::StringRecord, h: &csv::StringRecord, name: &str| {
        rec.get(h.iter().position(|x| x == name).unwrap()).unwrap().to_string()
    };
    let out = run(&[
        "estimate",
        "--family",
        "coherent",
        "--n-bar",
        &col(&row, &headers, "N_bar"),
        "--phi",
        &col(&row, &headers, "phi"),
        "--phi0",
        &col(&row, &headers, "phi0"),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut replay = csv::Reader::from_reader(text.as_bytes());
    let rh = replay.headers().unwrap().clone();
    let rrow = replay.records().next().unwrap().unwrap();
    for name in ["cutoff1", "tail_mass", "d2phi_M", "d2phi_M2", "fisher", "qfi", "mp_bound_L", "mp_bound_NL"] {
        assert_eq!(col(&rrow, &rh, name), col(&row, &headers, name), "column {name}");
    }
}

#[test]
fn fit_recovers_scaling_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("qfi.toml");
    std::fs::write(
        &config,
        "probe = \"number\"\nn_bar = [4.0, 8.0, 16.0, 32.0]\nfraction = [0.5]\nphi = [0.0]\nestimators = [\"qfi\"]\n",
    )
    .unwrap();
    let (out, _, _) = sweep(dir.path(), &config, "q", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = run(&["fit", dir.path().join("q.csv").to_str().unwrap(), "--y", "qfi"]);
    let v: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    // twin states: F_Q = 4 N^2 (N^2/2 + N), so the local exponent sits just under 4
    let slope = v["slope"].as_f64().unwrap();
    assert!((3.6..4.0).contains(&slope), "slope {slope}");
}

#[test]
fn reason_codes_give_nonzero_exit() {
    let out = run(&["estimate", "--family", "number", "--n-bar", "4", "--fraction", "0.25", "--phi", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mp_bound=unidentifiable"));
}

#[test]
fn bad_inputs_are_rejected_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "probe = \"coherent\"\nn_bar = [4.0]\nfraction = [0.0]\nphi = [0.0]\nbogus = 1\n").unwrap();
    let out = run(&["sweep", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let good = write_config(dir.path(), 0);
    let out = run(&["sweep", good.to_str().unwrap(), "--csv", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["probe", "--family", "coherent", "--n-bar", "-1"]);
    assert!(!out.status.success());
}

#[test]
fn probe_and_simulate_report_json() {
    let out = run(&["probe", "--family", "squeezed", "--n-bar", "16", "--fraction", "0.25"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["tail_mass"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["real_coefficients"], true);

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("p.csv");
    let out = run(&[
        "simulate",
        "--family",
        "number",
        "--n-bar",
        "1",
        "--phi",
        "0.3",
        "--csv",
        table.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["m"]["mean"].as_f64().unwrap() - 0.6f64.cos()).abs() < 1e-14);
    assert!(std::fs::read_to_string(table).unwrap().starts_with("n1,n2,p"));
}
