use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use resolvent_spectra::pipeline::{run, sha256_hex, RunConfig, RunManifest, Stage, MANIFEST};

const ISING_ORACLE_ONLY: &str = r#"
schema_version = 1

[model]
kind = "ising"
seed = 1

[model.ising]
n_sites = 6
j_zz = 1.0
h_z = 0.5
g_x = 0.6

[solver]
enabled = false

[ansatz]
classes = []
states = [20, 32]

[outputs]
timings = false
"#;

const ENSEMBLE: &str = r#"
schema_version = 1

[model]
kind = "ensemble"
seed = 11

[model.ensemble]
dim = 100
lo = -1.0
hi = 1.0
dos = "flat"
band = { kind = "gaussian", amplitude = 0.05, width = 1.0 }

[solver.options]
grid_points = 1024
max_iter = 2000

[ansatz]
classes = ["lorentz", "gauss", "lg"]
states = [30, 50, 70]

[oracle]
window_spacings = 5.0

[outputs]
timings = false
"#;

fn listing(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect()
}

fn assert_complete(dir: &Path, m: &RunManifest) {
    let listed: BTreeSet<String> =
        m.artifacts.iter().map(|a| a.path.clone()).chain(std::iter::once(MANIFEST.to_string())).collect();
    assert_eq!(listing(dir), listed);
    for a in &m.artifacts {
        let bytes = fs::read(dir.join(&a.path)).unwrap();
        assert_eq!(bytes.len(), a.bytes, "{}", a.path);
        assert_eq!(sha256_hex(&bytes), a.sha256, "{}", a.path);
    }
}

#[test]
fn oracle_only_ising_run_writes_spectrum_and_overlaps() {
    let cfg = RunConfig::from_toml(ISING_ORACLE_ONLY).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run(&cfg, dir.path(), Stage::Report).unwrap();
    assert_eq!(m.exit_code(), 0, "{:?}", m.failures);
    assert_eq!(m.stages, vec![Stage::Build, Stage::Diagonalize, Stage::Report]);
    for name in ["spectrum.csv", "overlaps_20.csv", "overlaps_32.csv"] {
        assert!(m.artifact(name).is_some(), "{name} missing");
    }
    let spectrum = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 1 + 64);
    let overlaps = fs::read_to_string(dir.path().join("overlaps_20.csv")).unwrap();
    let total: f64 = overlaps.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
    assert_complete(dir.path(), &m);
}

#[test]
fn ensemble_fit_report_ranks_classes_by_l1() {
    let cfg = RunConfig::from_toml(ENSEMBLE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run(&cfg, dir.path(), Stage::Report).unwrap();
    assert_eq!(m.exit_code(), 0, "{:?}", m.failures);
    assert!(m.converged);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit_report.json")).unwrap()).unwrap();
    let states = report.as_array().unwrap();
    assert_eq!(states.len(), 3);
    for s in states {
        let ranking = s["ranking"].as_array().unwrap();
        assert_eq!(ranking.len(), 3);
        let l1: Vec<f64> = ranking.iter().map(|r| r["l1"].as_f64().unwrap()).collect();
        assert!(l1.windows(2).all(|w| w[0] <= w[1]), "{l1:?}");
        assert_eq!(s["target"], "oracle");
        assert_eq!(s["lg_dominates"], true);
    }
    assert!(m.artifact("compare.csv").is_some() && m.artifact("summary.md").is_some());
    assert_complete(dir.path(), &m);
}

#[test]
fn rerun_reproduces_every_byte() {
    let cfg = RunConfig::from_toml(ENSEMBLE).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run(&cfg, a.path(), Stage::Report).unwrap();
    let mb = run(&cfg, b.path(), Stage::Report).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(fs::read(a.path().join(MANIFEST)).unwrap(), fs::read(b.path().join(MANIFEST)).unwrap());
    // a rerun into the same directory replaces the previous outputs
    let again = run(&cfg, a.path(), Stage::Report).unwrap();
    assert_eq!(again, ma);
    assert_complete(a.path(), &again);
    // a different seed changes the model and its hash
    let mut other = cfg.clone();
    other.model.seed = 12;
    let c = tempfile::tempdir().unwrap();
    let mc = run(&other, c.path(), Stage::Build).unwrap();
    assert_ne!(mc.artifact("system.json").unwrap().sha256, ma.artifact("system.json").unwrap().sha256);
}

#[test]
fn stages_stop_at_the_requested_one() {
    let cfg = RunConfig::from_toml(ENSEMBLE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run(&cfg, dir.path(), Stage::Solve).unwrap();
    assert_eq!(m.stages, vec![Stage::Build, Stage::Diagonalize, Stage::Solve]);
    assert!(m.artifact("fit_report.json").is_none());
    assert_complete(dir.path(), &m);
}

#[test]
fn convergence_failure_is_recorded() {
    let cfg = RunConfig::from_toml(&ENSEMBLE.replace("max_iter = 2000", "max_iter = 2")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run(&cfg, dir.path(), Stage::Solve).unwrap();
    assert!(!m.converged);
    assert_eq!(m.exit_code(), 2);
    assert_complete(dir.path(), &m);
}

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_resolvent")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("ising.toml");
    fs::write(&good, ISING_ORACLE_ONLY).unwrap();
    let out = dir.path().join("run");
    let (code, stdout, _) = bin(&["report", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(RunManifest::load(&out).unwrap().failures.is_empty());

    // unknown key: usage error naming the field
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, ISING_ORACLE_ONLY.replace("g_x = 0.6", "g_x = 0.6\ng_y = 1.0")).unwrap();
    let (code, _, stderr) = bin(&["build", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("g_y"), "{stderr}");

    assert_eq!(bin(&["build"]).0, 1);
    assert_eq!(bin(&["frobnicate"]).0, 1);
    assert_eq!(bin(&["selfcheck", "--only", "11"]).0, 1);
    assert_eq!(bin(&["build", "--config", good.to_str().unwrap(), "--threads", "0"]).0, 1);

    // mean field stopped after two sweeps: convergence failure
    let slow = dir.path().join("slow.toml");
    fs::write(&slow, ENSEMBLE.replace("max_iter = 2000", "max_iter = 2")).unwrap();
    let out2 = dir.path().join("slow");
    let (code, _, _) = bin(&["solve", "--config", slow.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert_eq!(code, 2);

    // seed override reaches the manifest
    let out3 = dir.path().join("seeded");
    let (code, _, _) =
        bin(&["build", "--config", good.to_str().unwrap(), "--out", out3.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(code, 0);
    assert_eq!(RunManifest::load(&out3).unwrap().seeds["model"], 99);

    let (code, stdout, _) = bin(&["selfcheck", "--only", "1,9"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2);
}
