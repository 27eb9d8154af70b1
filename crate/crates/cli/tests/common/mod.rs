//! Runs the `riskweave` binary against a scratch directory with the fixture
//! datasets and models built from fixed seeds.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
pub const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn riskweave(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_riskweave"))
        .args(args)
        .current_dir(dir)
        .env_remove("RISKWEAVE_CONFIG")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn ok(dir: &Path, args: &[&str]) -> String {
    let r = riskweave(dir, args);
    assert_eq!(r.code, 0, "riskweave {args:?} failed: {}", r.stderr);
    r.stdout
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(FIXTURES).join(name)
}

/// `data.csv`/`schema.txt`/`model.json` (CHD-like, seed 1, 2279 rows) and
/// `ivf.csv`/`ivf_schema.txt`/`ivf_model.json` (seed 2) plus `fig4.json`.
pub fn scratch() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "chd", "--seed", "1", "--n", "2279", "--out", "data.csv", "--schema-out", "schema.txt"]);
    ok(d, &["train", "--data", "data.csv", "--schema", "schema.txt", "--seed", "1", "--out", "model.json"]);
    ok(d, &["synth", "--kind", "ivf", "--seed", "2", "--n", "3000", "--out", "ivf.csv", "--schema-out", "ivf_schema.txt"]);
    ok(d, &["cycles-fit", "--data", "ivf.csv", "--schema", "ivf_schema.txt", "--out", "ivf_model.json"]);
    std::fs::write(d.join("fig4.json"), riskweave::cycles::FIG4_RECORD).unwrap();
    dir
}

/// Golden file name and the arguments producing it, run inside [`scratch`].
pub fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let patient = fixture("patient.json").display().to_string();
    let elder = fixture("elder.json").display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("predict_patient.txt", s(&["predict", "--model", "model.json", "--input", &patient])),
        ("predict_patient.json", s(&["--json", "predict", "--model", "model.json", "--input", &patient])),
        ("explain_patient.txt", s(&["explain", "--model", "model.json", "--input", &patient])),
        ("explain_elder.txt", s(&["explain", "--model", "model.json", "--input", &elder])),
        ("explain_elder.json", s(&["--json", "explain", "--model", "model.json", "--input", &elder])),
        ("whatif_elder.txt", s(&["whatif", "--model", "model.json", "--input", &elder])),
        ("reliability.csv", s(&["reliability", "--model", "model.json", "--data", "data.csv"])),
        ("evaluate.txt", s(&["evaluate", "--model", "model.json", "--data", "data.csv"])),
        ("coverage.txt", s(&["coverage", "--model", "model.json", "smoking status", "income", "bmi"])),
        ("cycles_fig4.txt", s(&["cycles-predict", "--model", "ivf_model.json", "--input", "fig4.json"])),
        ("cycles_fig4.csv", s(&["cycles-predict", "--model", "ivf_model.json", "--input", "fig4.json", "--csv"])),
    ]
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it instead.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = Path::new(GOLDEN).join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|_| format!("missing golden file {name}"))?;
    if actual == expected {
        Ok(())
    } else {
        Err(format!("{name} differs from its golden file"))
    }
}
