use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use resolvent_spectra::pipeline::{self, FailureKind, RunConfig, Stage};
use resolvent_spectra::selfcheck;
use resolvent_spectra::Error;

#[derive(Parser)]
#[command(name = "resolvent", version, about = "Resolvent self-consistency runs and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides outputs.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Model seed; overrides model.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More logging; repeat for debug output.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Build the model and write it out.
    Build,
    /// Build, diagonalize (when enabled) and solve the mean-field equations.
    Solve,
    /// Everything up to the ansatz fits.
    Fit,
    /// Everything up to the oracle versus mean-field comparison.
    Compare,
    /// The full pipeline with a summary.
    Report,
    /// Run the acceptance checks.
    Selfcheck {
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            return usage("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    }

    let stage = match cli.command {
        Command::Selfcheck { only } => {
            let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only };
            if let Some(bad) = ids.iter().find(|i| !(1..=10).contains(*i)) {
                return usage(format!("no criterion {bad}"));
            }
            let mut all = true;
            for id in ids {
                let r = selfcheck::run(id);
                println!("{r}");
                all &= r.passed;
            }
            return ExitCode::from(if all { 0 } else { 2 });
        }
        Command::Build => Stage::Build,
        Command::Solve => Stage::Solve,
        Command::Fit => Stage::Fit,
        Command::Compare => Stage::Compare,
        Command::Report => Stage::Report,
    };

    let Some(path) = cli.config else {
        return usage("--config is required for this subcommand");
    };
    let mut config = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e @ (Error::Io(_) | Error::Schema { .. } | Error::Config(_))) => {
            return usage(format!("{}: {e}", path.display()))
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if let Some(seed) = cli.seed {
        config.model.seed = seed;
    }
    let out = cli.out.unwrap_or_else(|| config.outputs.dir.clone());
    match pipeline::run(&config, &out, stage) {
        Ok(m) => {
            for f in &m.failures {
                eprintln!("error: stage {:?} failed: {}", f.stage, f.message);
            }
            println!(
                "{} artifacts in {} ({} stages, converged: {})",
                m.artifacts.len(),
                out.display(),
                m.stages.len(),
                m.converged
            );
            ExitCode::from(m.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match FailureKind::of(&e) {
                FailureKind::Usage => 1,
                FailureKind::Convergence => 2,
                FailureKind::Internal => 3,
            })
        }
    }
}
