use pwstab::report::{run_report, ReportOptions, Status};
use pwstab::sweep::{run_sweep, sweep_table, SweepSpec, Vary};
use pwstab::Config;
use pwstab_core::criteria::JohnsonVerdict;
use pwstab_core::profile::{compute_orbit, compute_period};
use pwstab_core::WaveParams;
use serde_json::Value;
use std::path::Path;
use std::process::Command;

const CNOIDAL: &str = r#"{
    "model": {"family": "KDV", "f": [0, 0, 0, 1]},
    "params": {"mu": 0.01, "lambda": [0], "c": -1},
    "scan": {"nu_steps": 1, "tau_max": 2}
}"#;

const HARMONIC: &str = r#"{
    "model": {"family": "KDV", "f": [0]},
    "params": {"mu": 0.5, "lambda": [0.2], "c": -1.5}
}"#;

const EKL: &str = r#"{
    "model": {"family": "EKL", "F": [0, 0, 0, 1]},
    "params": {"mu": 0.01, "lambda": [0, 0], "c": 1}
}"#;

fn pwstab(dir: &Path, config: &str, args: &[&str]) -> (i32, String, String) {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pwstab"))
        .arg(args[0])
        .arg("--config")
        .arg(&path)
        .args(&args[1..])
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn cnoidal_report_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = pwstab(dir.path(), CNOIDAL, &["report"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["status"], "complete");
    for key in ["theta", "grad", "hess", "k", "M", "P", "C", "S", "coperiodic", "johnson", "modulational", "signatures"] {
        assert!(!r[key].is_null(), "{key}");
    }
    assert_eq!(r["johnson"], "OrbitallyStable");
    assert_eq!(r["modulational"]["speeds"].as_array().unwrap().len(), 3);
    assert_eq!(r["modulational"]["speeds"][0].as_array().unwrap().len(), 2);
    assert_eq!(r["signatures"]["neg_C"], 1);
    assert_eq!(r["spectral"]["negA"], 1);
    assert!(r["cross_identity_residual"].as_f64().unwrap() < 1e-4);
    assert_eq!(r["hess"].as_array().unwrap().len(), 3);
}

#[test]
fn harmonic_report_is_partial_with_degenerate_johnson() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = pwstab(dir.path(), HARMONIC, &["report", "--no-scans"]);
    assert_eq!(code, 2);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["status"], "partial");
    assert_eq!(r["johnson"], "Degenerate");
    assert!(r["coperiodic"].is_string());
    assert!(r["C"].is_null());
    let errors = r["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e["stage"] == "constraints" && e["kind"] == "DegenerateParametrization"));
}

#[test]
fn config_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let two = CNOIDAL.replace("\"lambda\": [0]", "\"lambda\": [0, 1]");
    assert_eq!(pwstab(dir.path(), &two, &["report"]).0, 1);
    assert_eq!(pwstab(dir.path(), "{", &["report"]).0, 1);
    let unknown = CNOIDAL.replace("\"c\": -1", "\"c\": -1, \"nu\": 0");
    assert_eq!(pwstab(dir.path(), &unknown, &["profile"]).0, 1);
}

#[test]
fn report_is_deterministic_up_to_timestamp() {
    let config = Config::from_json(CNOIDAL).unwrap();
    let opts = ReportOptions { scans: false, spectral: true };
    let strip = |r: pwstab::Report| {
        let mut v: Value = serde_json::to_value(&r).unwrap();
        v["provenance"]["timestamp"] = Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(run_report(&config, &opts)), strip(run_report(&config, &opts)));
}

#[test]
fn sweep_over_mu_tracks_period() {
    let config = Config::from_json(CNOIDAL).unwrap();
    let spec = SweepSpec { vary: Vary::Mu, from: 1e-4, to: 0.018, steps: 50 };
    let opts = ReportOptions { scans: false, spectral: false };
    let reports = run_sweep(&config, &spec, &opts, Some(3)).unwrap();
    let table = sweep_table(Vary::Mu, 1, &reports);
    assert_eq!(table.rows.len(), 50);
    let model = config.model();
    let mut last = 0.0;
    for (row, mu) in table.rows.iter().zip(spec.values()) {
        assert_eq!(row[0].parse::<f64>().unwrap(), mu);
        let xi: f64 = row[3].parse().unwrap();
        assert!(xi > last);
        last = xi;
        let orbit = compute_orbit(&model, &WaveParams::new(mu, vec![0.0], -1.0), None, 200).unwrap();
        assert!((xi - compute_period(&orbit).unwrap()).abs() < 1e-12 * xi);
    }
}

#[test]
fn sweep_contains_failures() {
    let config = Config::from_json(CNOIDAL).unwrap();
    // The upper half lies above the saddle level 1/54.
    let spec = SweepSpec { vary: Vary::Mu, from: 0.005, to: 0.03, steps: 6 };
    let opts = ReportOptions { scans: false, spectral: false };
    let reports = run_sweep(&config, &spec, &opts, None).unwrap();
    let table = sweep_table(Vary::Mu, 1, &reports);
    assert_eq!(table.rows.len(), 6);
    let last = table.rows.last().unwrap();
    assert_eq!(last[1], "partial");
    assert!(last[2].contains("NoOrbit"));
    assert!(last[3..].iter().all(|f| f.is_empty()));
    assert_eq!(table.rows[0][1], "complete");

    let harmonic = Config::from_json(HARMONIC).unwrap();
    let spec = SweepSpec { vary: Vary::Mu, from: 0.1, to: 1.0, steps: 4 };
    let reports = run_sweep(&harmonic, &spec, &opts, None).unwrap();
    assert!(reports.iter().all(|(_, r)| r.status == Status::Partial));
    assert!(reports.iter().all(|(_, r)| r.stability.as_ref().unwrap().johnson == JohnsonVerdict::Degenerate));
}

#[test]
fn sweep_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--vary", "mu", "--from", "0.001", "--to", "0.01", "--steps", "1"];
    assert_eq!(pwstab(dir.path(), CNOIDAL, &args).0, 1);
    let args = ["sweep", "--vary", "lambda2", "--from", "0", "--to", "0.01", "--steps", "3"];
    assert_eq!(pwstab(dir.path(), CNOIDAL, &args).0, 1);
    let args = ["sweep", "--vary", "lambda2", "--from", "-0.01", "--to", "0.01", "--steps", "3", "--jobs", "2"];
    let (code, out, _) = pwstab(dir.path(), EKL, &args);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0].split(',').count(), 10 + 8 + 2);
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = pwstab(dir.path(), CNOIDAL, &["profile"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("x,v,vx\n"));
    assert!(!out.contains('\r'));
    assert_eq!(out.lines().count(), 257);
    let first: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "0.0000000000000000e0");

    let (_, out, _) = pwstab(dir.path(), EKL, &["profile"]);
    assert!(out.starts_with("x,v,vx,u\n"));

    let path = dir.path().join("evans.csv");
    let args = ["evans", "--tau-max", "1", "--nu-steps", "2", "--out", path.to_str().unwrap()];
    assert_eq!(pwstab(dir.path(), CNOIDAL, &args).0, 0);
    let evans = std::fs::read_to_string(&path).unwrap();
    assert!(evans.starts_with("tau_re,tau_im,nu,D_re,D_im\n"));
    assert_eq!(evans.lines().count(), 1 + 2 * 200);

    let (code, out, _) = pwstab(dir.path(), CNOIDAL, &["floquet", "--nu-steps", "1", "--tau-max", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "nu,unstable_count,contour_radius");

    let (code, out, _) = pwstab(dir.path(), CNOIDAL, &["simulate", "--tmax", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "t,dist_to_orbit,dH,dQ,dM");
    assert_eq!(out.lines().count(), 1 + 11);
}

#[test]
fn simulate_rejects_ekl() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pwstab(dir.path(), EKL, &["simulate", "--tmax", "0.1"]).0, 2);
}
