use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wavesde(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavesde"))
        .args(args)
        .current_dir(cwd)
        .env_remove("WAVESDE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn var_j_report_covers_one_third() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.toml"), "[var_j]\nt = 1.0\nn_paths = 100000\nseed = 2024\n").unwrap();
    let out = wavesde(&["run", "v.toml", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("res/report.csv")).unwrap();
    assert!(report.starts_with("experiment,name,estimate,ci_low,ci_high,threshold,pass,n,seed\n"));
    let row = rows(&report).into_iter().find(|r| r[1] == "var_j(t=1)").unwrap();
    let (est, lo, hi): (f64, f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap(), row[4].parse().unwrap());
    assert!((est - 1.0 / 3.0).abs() < 0.01);
    assert!(lo <= 1.0 / 3.0 && 1.0 / 3.0 <= hi);
    assert_eq!(row[7], "100000");
    assert!(dir.path().join("res/manifest.json").exists());
    assert!(!dir.path().join("res/curves.csv").exists());
}

#[test]
fn blowup_writes_nonincreasing_hit_curve() {
    let dir = tempfile::tempdir().unwrap();
    let config = "[blowup]\nalpha = 1.5\nx0 = 1.0\ny0 = 0.0\nn_paths = 40\nhorizon = 20.0\ncontrol = false\n";
    fs::write(dir.path().join("b.toml"), config).unwrap();
    let out = wavesde(&["run", "b.toml", "--out", "res", "--plots"], dir.path());
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let curves = fs::read_to_string(dir.path().join("res/curves.csv")).unwrap();
    assert!(curves.starts_with("experiment,level,hit_fraction,median_hit_time\n"));
    let fractions: Vec<f64> = rows(&curves).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(fractions.len(), 3);
    assert!(fractions.windows(2).all(|w| w[1] <= w[0]));
    assert!(dir.path().join("res/blowup_hit_curve.svg").exists());
}

#[test]
fn missing_required_key_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b.toml"), "[blowup]\nx0 = 1.0\ny0 = 0.0\n").unwrap();
    let out = wavesde(&["run", "b.toml", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    assert!(!dir.path().join("res").exists());
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[var_j]\nt = 1.0\nnpaths = 10\n").unwrap();
    let out = wavesde(&["run", "c.toml", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("npaths"));
    assert!(!dir.path().join("res").exists());
}

#[test]
fn failed_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // at T = 1 most paths dip below the unit floor on [T/2, T]
    fs::write(dir.path().join("t.toml"), "[transience]\ncheckpoints = [1.0]\nn_paths = 20\n").unwrap();
    let out = wavesde(&["run", "t.toml", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL transience/final_fraction"));
    assert!(dir.path().join("res/report.csv").exists());
}

#[test]
fn out_dir_defaults_to_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.toml"), "[var_j]\nt = 0.5\nn_paths = 200\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wavesde"))
        .args(["run", "v.toml"])
        .current_dir(dir.path())
        .env("WAVESDE_OUT_DIR", "elsewhere")
        .output()
        .unwrap();
    assert!(out.status.code().is_some_and(|c| c <= 1));
    assert!(dir.path().join("elsewhere/report.csv").exists());
}

#[test]
fn manifest_rerun_reproduces_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = "[origin]\nalpha = 0.75\nx0 = 1.0\ny0 = 0.0\nn_paths = 40\nhorizon = 1.0\nseed = 11\n\n\
                  [lemma5]\nbeta = 0.8\nn_paths = 2000\n";
    fs::write(dir.path().join("o.toml"), config).unwrap();
    wavesde(&["run", "o.toml", "--out", "a", "--workers", "1"], dir.path());
    wavesde(&["run", "a/manifest.json", "--out", "b", "--workers", "2"], dir.path());
    let (a, b) = (
        fs::read(dir.path().join("a/report.csv")).unwrap(),
        fs::read(dir.path().join("b/report.csv")).unwrap(),
    );
    assert_eq!(a, b);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["config_text"], config);
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest, wavesde::cli::report::sha256_hex(&a));
}

#[test]
fn list_shows_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavesde(&["list"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for (name, tag) in [
        ("uniqueness", "T1"),
        ("origin", "T2"),
        ("nonuniqueness", "T3"),
        ("blowup", "T4"),
        ("transience", "P1"),
        ("lemma2", "L2"),
        ("lemma4", "L4"),
        ("lemma5", "L5"),
    ] {
        let line = text.lines().find(|l| l.starts_with(&format!("{name} "))).unwrap();
        assert!(line.contains(tag), "{line}");
    }
}

#[test]
fn list_csv_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavesde(&["list", "--csv"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("experiment,certifies,required,optional"));
    let blowup = lines.find(|l| l.starts_with("blowup,")).unwrap();
    assert!(blowup.contains(",alpha x0 y0,"));
    assert_eq!(text.lines().count(), 1 + wavesde::cli::config::REGISTRY.len());
}

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavesde(&["frobnicate"], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn version_prints_crate_version() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavesde(&["version"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("wavesde {}", env!("CARGO_PKG_VERSION")));
}
