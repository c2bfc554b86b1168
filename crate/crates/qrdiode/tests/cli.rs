//! End-to-end checks of the command-line interface: exit codes,
//! stdout shape, and file outputs.

use std::path::Path;
use std::process::Output;

fn qrdiode(args: &[&str], dir: &Path) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_qrdiode"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn steady_prints_observables_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "[model]\nomega_R = 2.0\nn_fock = 10\n[baths]\nT_L = 0.1\n",
    );
    let out = qrdiode(&["steady", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("model      : two_photon_rabi"));
    assert!(text.contains("q_L"));
    assert!(text.contains("R_n"));
}

#[test]
fn collapse_bound_in_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[model]\ng = 0.55\n");
    let out = qrdiode(&["steady", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("spectral-collapse"), "stderr: {err}");
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.toml", "[model]\nomega = 1.0\n");
    let out = qrdiode(&["steady", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qrdiode(&["steady", "--config", "absent.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "[model]\nn_fock = 6\n[output]\ndirectory = \"data\"\n",
    );
    let out = qrdiode(
        &["sweep", "--config", &cfg, "--param", "T_L", "--range", "0.1:0.9:5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("data/sweep_T_L.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "swept_param,T_L,T_R,q_L,q_R,q_f,q_r,R,D_f,D_r,gammaD_f,gammaD_r,R_n,n_fock,residual,error"
    );
    assert_eq!(lines.count(), 5);
    let manifest = std::fs::read_to_string(dir.path().join("data/sweep_T_L_manifest.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(parsed["tool"], "qrdiode");
    assert_eq!(parsed["config"]["model"]["n_fock"], 6);
    assert!(parsed.get("timestamp").is_none());
}

#[test]
fn sweep_rejects_bad_parameter_names_and_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "[model]\nn_fock = 6\n");
    for args in [
        vec!["sweep", "--config", &cfg, "--param", "gamma", "--range", "0.1:0.9:5"],
        vec!["sweep", "--config", &cfg, "--param", "T_L", "--range", "0.9:0.1:5"],
        vec!["sweep", "--config", &cfg, "--param", "T_L", "--range", "0.1:0.9:1"],
    ] {
        let out = qrdiode(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn convergence_prints_ladder_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "[baths]\nT_L = 0.1\n");
    let out = qrdiode(
        &["convergence", "--config", &cfg, "--n-list", "5,10,20"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n_fock"));
    assert!(text.contains("converged at n_fock = 10"), "stdout: {text}");
}

#[test]
fn unconverged_ladder_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "[model]\ng = 0.45\nomega_R = 2.0\n[baths]\nT_L = 0.1\n",
    );
    let out = qrdiode(
        &["convergence", "--config", &cfg, "--n-list", "5,10,20"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("not converged"), "stderr: {err}");
}

#[test]
fn compare_models_writes_all_mechanisms() {
    let dir = tempfile::tempdir().unwrap();
    let out = qrdiode(&["compare-models", "--out", "cmp"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for kind in ["two_photon_rabi", "ising_zz", "asymmetric_zx", "dm"] {
        for panel in ["left", "right"] {
            assert!(
                dir.path().join(format!("cmp/fig10_{panel}_{kind}.csv")).exists(),
                "missing fig10_{panel}_{kind}.csv"
            );
        }
    }
}

#[test]
fn figure_rejects_unknown_id() {
    let dir = tempfile::tempdir().unwrap();
    let out = qrdiode(&["figure", "--id", "fig99", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
