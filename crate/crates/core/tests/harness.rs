use std::path::Path;
use std::process::Command;

use fuchsian_euler::error::Error;
use fuchsian_euler::harness::{RunConfig, CONFIG_VERSION};

const BIN: &str = env!("CARGO_BIN_EXE_fuchsian-euler");

const SMALL_RUN: &str = r#"
version = 1
[eos]
k = 0.2
[grid]
dims = [8, 8, 8]
[integrator]
t_end = 0.5
capture_stride = 2
[integrator.step]
mode = "fixed"
dt = 0.05
[initial]
kind = "random-band"
seed = 11
band = [1.0, 2.0]
amplitude = 1e-3
[energy]
max_order = 1
"#;

fn config_errors(text: &str) -> String {
    match RunConfig::from_toml_str(text).and_then(|c| c.validate().map(|_| c)) {
        Ok(_) => panic!("configuration should be rejected:\n{text}"),
        Err(e) => e.to_string(),
    }
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn minimal_config_round_trips() {
    let cfg = RunConfig::from_toml_str(SMALL_RUN).unwrap();
    cfg.validate().unwrap();
    let dumped = cfg.to_toml_string().unwrap();
    let again = RunConfig::from_toml_str(&dumped).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.hash(), again.hash());
    assert_eq!(again.to_toml_string().unwrap(), dumped);
}

#[test]
fn default_config_is_valid() {
    let cfg = RunConfig::default();
    assert_eq!(cfg.version, CONFIG_VERSION);
    cfg.validate().unwrap();
}

#[test]
fn supercritical_sound_speed_is_rejected() {
    let msg = config_errors("version = 1\n[eos]\nk = 0.5\n");
    assert!(msg.contains("(0, 1/3]"), "{msg}");
}

#[test]
fn critical_sound_speed_is_accepted_with_a_warning() {
    let cfg = RunConfig::from_toml_str("version = 1\n[eos]\nk = 0.3333333333333333\n").unwrap();
    cfg.validate().unwrap();
    assert!(cfg.warnings().iter().any(|w| w.contains("critical")));
}

#[test]
fn random_data_without_seed_is_rejected() {
    let msg = config_errors("version = 1\n[initial]\nkind = \"random-band\"\nband = [1.0, 2.0]\namplitude = 1e-3\n");
    assert!(msg.contains("seed"), "{msg}");
}

#[test]
fn unknown_keys_are_fatal() {
    let err = RunConfig::from_toml_str("version = 1\n[eos]\nk = 0.2\nkapa = 3.0\n").unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("kapa"), "{err}");
}

#[test]
fn version_is_mandatory() {
    let err = RunConfig::from_toml_str("[eos]\nk = 0.2\n").unwrap_err();
    assert!(err.to_string().contains("version"), "{err}");
    let msg = config_errors("version = 99\n");
    assert!(msg.contains("version"), "{msg}");
}

#[test]
fn errors_are_aggregated() {
    let msg = config_errors("version = 1\n[eos]\nk = -1.0\n[transform]\nc2 = 0.0\n[grid]\ndims = [2, 8, 8]\n");
    assert!(msg.contains("(0, 1/3]") && msg.contains("c2") && msg.contains("axis 0"), "{msg}");
}

#[test]
fn zero_run_writes_vanishing_energies_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "version = 1\n[grid]\ndims = [8, 8, 8]\n[integrator]\nt_end = 0.2\n[integrator.step]\nmode = \"fixed\"\ndt = 0.05\n",
    );
    let out = dir.path().join("out");
    let (code, stdout, stderr) =
        run_cli(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "run"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let mut rdr = csv::Reader::from_path(out.join("energies.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "config_hash"));
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for (h, v) in headers.iter().zip(rec.iter()) {
            if h.starts_with('E') && !v.is_empty() {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{h}");
            }
        }
        rows += 1;
    }
    assert_eq!(rows, 5);
    assert!(out.join("run.json").exists() && out.join("final.fez").exists());
}

#[test]
fn outputs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let read = |name: &str| {
        let out = dir.path().join(name);
        let (code, _, err) = run_cli(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "run"]);
        assert!(code == 0 || code == 2, "{err}");
        ["energies.csv", "run.json", "final.fez"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let read = |threads: &str| {
        let out = dir.path().join(format!("t{threads}"));
        run_cli(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--threads", threads, "run"]);
        std::fs::read(out.join("energies.csv")).unwrap()
    };
    assert_eq!(read("1"), read("4"));
}

#[test]
fn energy_report_recomputes_from_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out = dir.path().join("out");
    let (cfg_s, out_s) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    run_cli(&["--config", cfg_s, "--out-dir", out_s, "run"]);
    let ckpt = out.join("final.fez");
    let (code, stdout, stderr) =
        run_cli(&["--config", cfg_s, "--out-dir", out_s, "energy-report", "--checkpoint", ckpt.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("energy_report.json")).unwrap()).unwrap();
    let e0 = report["report"]["orders"][0]["e"].as_f64().unwrap();
    let mut rdr = csv::Reader::from_path(out.join("energies.csv")).unwrap();
    let last = rdr.records().last().unwrap().unwrap();
    let csv_e0: f64 = last[1].parse().unwrap();
    assert!((e0 - csv_e0).abs() <= 1e-12 * csv_e0, "{e0:e} vs {csv_e0:e}");
    assert!(report["provenance"]["config_hash"].is_string());
}

#[test]
fn malformed_config_exits_with_one_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "version = 1\n[eos]\nk = = 0.2\n");
    let (code, _, stderr) = run_cli(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn verify_transform_passes_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vt");
    let (code, stdout, stderr) = run_cli(&["--out-dir", out.to_str().unwrap(), "verify-transform", "--samples", "500"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("verify_transform.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["pass"], true);
    assert_eq!(v["provenance"]["config_version"], CONFIG_VERSION);
}

#[test]
fn sweep_table_lists_every_sound_speed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "version = 1\n[sweep]\nk_values = [0.1, 0.2]\nt_end = 3.0\n");
    let out = dir.path().join("sw");
    let (code, stdout, stderr) =
        run_cli(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "sweep-k"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let rows: Vec<csv::StringRecord> =
        csv::Reader::from_path(out.join("sweep_k.csv")).unwrap().records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "0.1");
    assert_eq!(&rows[1][5], "true");
}

#[test]
fn help_and_version_exit_with_zero() {
    assert_eq!(run_cli(&["--help"]).0, 0);
    let (code, stdout, _) = run_cli(&["--version"]);
    assert_eq!(code, 0);
    assert!(stdout.contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(run_cli(&["no-such-command"]).0, 1);
}
