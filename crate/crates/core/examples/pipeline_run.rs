//! Full pipeline from a config file into a temporary directory, then the
//! manifest it leaves behind.

use std::path::Path;

use resolvent_spectra::pipeline::{run, RunConfig, Stage};

fn main() -> resolvent_spectra::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/ising.toml");
    let mut cfg = RunConfig::load(&path)?;
    cfg.model.ising.as_mut().unwrap().n_sites = 8;
    cfg.solver.n_shells = Some(32);
    cfg.ansatz.states = vec![128];
    let out = std::env::temp_dir().join(format!("resolvent-example-{}", std::process::id()));
    let m = run(&cfg, &out, Stage::Report)?;
    println!("config {} -> {}", &m.config_hash[..16], out.display());
    for s in &m.timings {
        println!("{:?}: {:.2}s", s.stage, s.seconds);
    }
    for a in &m.artifacts {
        println!("{:<28} {:>9} {}", a.path, a.bytes, &a.sha256[..12]);
    }
    println!("exit code {}", m.exit_code());
    print!("\n{}", std::fs::read_to_string(out.join("summary.md"))?);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}
