//! Config-driven runs: build, diagonalize, solve, fit, compare, report.
//!
//! Every file a run writes is listed in `manifest.json` with its sha256.
//! With `outputs.timings = false` a rerun of the same config reproduces
//! every byte, manifest included.

mod config;

pub use config::{
    AnsatzClass, AnsatzConfig, DosKind, EnsembleConfig, Format, IsingConfig, ModelConfig, ModelKind, OracleConfig,
    OutputConfig, RunConfig, SolverConfig, SCHEMA_VERSION,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::{fit_all, FitParams, FitReport, FitTarget};
use crate::corrections::{skewness_diagnostic, third_order_from_p, SkewReport};
use crate::error::{Error, Result};
use crate::meanfield::{solve, MeanFieldProblem, MeanFieldSolution};
use crate::model::{build_banded_ensemble, build_ising_chain, CoupledSystem, EnsembleProfile};
use crate::oracle::{
    diagonalize, overlaps, overlaps_csv, resolvent_exact, smooth_distribution, spectrum_csv, spectrum_json,
    SmoothDistribution, Spectrum,
};

pub const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".resolvent.lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Build,
    Diagonalize,
    Solve,
    Fit,
    Compare,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
    pub kind: FailureKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Invalid configuration or arguments.
    Usage,
    /// A solver did not converge.
    Convergence,
    Internal,
}

impl FailureKind {
    pub fn of(e: &Error) -> Self {
        match e {
            Error::Schema { .. } | Error::Config(_) => FailureKind::Usage,
            Error::NoConvergence { .. } => FailureKind::Convergence,
            _ => FailureKind::Internal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub stages: Vec<Stage>,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<StageTiming>,
    pub failures: Vec<StageFailure>,
    /// Every requested solver converged.
    pub converged: bool,
}

impl RunManifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.as_ref().join(MANIFEST))?)?)
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.path == name)
    }
}

impl RunManifest {
    /// Process exit status: 0 success, 1 usage, 2 convergence failure, 3 internal.
    pub fn exit_code(&self) -> i32 {
        if let Some(f) = self.failures.first() {
            return match f.kind {
                FailureKind::Usage => 1,
                FailureKind::Convergence => 2,
                FailureKind::Internal => 3,
            };
        }
        if self.converged {
            0
        } else {
            2
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Exclusive claim on an output directory, released on drop.
struct Lock(PathBuf);

impl Lock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK);
        fs::OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            Error::Config(format!("cannot lock {}: {e} (is another run using this directory?)", dir.display()))
        })?;
        Ok(Self(path))
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Removes the artifacts of a previous run; refuses directories holding anything else.
fn prepare_dir(dir: &Path) -> Result<()> {
    if let Ok(old) = RunManifest::load(dir) {
        for a in &old.artifacts {
            let p = dir.join(&a.path);
            if p.parent() == Some(dir) && p.is_file() {
                fs::remove_file(p)?;
            }
        }
        fs::remove_file(dir.join(MANIFEST))?;
    }
    let foreign: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != LOCK)
        .collect();
    if !foreign.is_empty() {
        return Err(Error::Config(format!(
            "output directory {} holds files not written by a previous run: {}",
            dir.display(),
            foreign.join(", ")
        )));
    }
    Ok(())
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        fs::write(self.dir.join(name), content)?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len(),
        });
        Ok(())
    }
}

/// Builds the configured system.
pub fn build_system(model: &ModelConfig) -> Result<CoupledSystem> {
    match model.kind {
        ModelKind::Ising => {
            let c = model.ising.as_ref().ok_or_else(|| config::schema_error("model.ising", "missing"))?;
            build_ising_chain(c.n_sites, c.j_zz, c.h_z, c.g_x)
        }
        ModelKind::Ensemble => {
            let c = model.ensemble.as_ref().ok_or_else(|| config::schema_error("model.ensemble", "missing"))?;
            let profile = match c.dos {
                DosKind::Flat => EnsembleProfile::flat(c.lo, c.hi, c.dim, c.band.clone(), model.seed)?,
                DosKind::Gaussian => EnsembleProfile::gaussian_dos(
                    0.5 * (c.lo + c.hi),
                    (c.hi - c.lo) / 8.0,
                    4.0,
                    c.dim,
                    c.band.clone(),
                    model.seed,
                )?,
            };
            build_banded_ensemble(c.dim, &profile)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct RankedFit {
    class: AnsatzClass,
    l1: f64,
    params: FitParams,
}

#[derive(Debug, Clone, Serialize)]
struct StateFit {
    index: usize,
    a: f64,
    /// "oracle" (smoothed exact overlaps) or "meanfield".
    target: &'static str,
    target_mass: f64,
    ranking: Vec<RankedFit>,
    lg_dominates: bool,
    skew: Option<SkewReport>,
}

#[derive(Debug, Clone, Serialize)]
struct StateComparison {
    index: usize,
    channel: usize,
    l1_meanfield: f64,
    l1_lorentz: Option<f64>,
    l1_gauss: Option<f64>,
    l1_lg: Option<f64>,
}

#[derive(Default)]
struct State {
    sys: Option<CoupledSystem>,
    spec: Option<Spectrum>,
    smooth: BTreeMap<usize, SmoothDistribution>,
    problem: Option<MeanFieldProblem>,
    solution: Option<MeanFieldSolution>,
    fits: Vec<(StateFit, FitReport)>,
    comparisons: Vec<StateComparison>,
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    out: Writer,
    st: State,
    converged: bool,
}

impl Runner<'_> {
    fn states(&self) -> Vec<usize> {
        let dim = self.st.sys.as_ref().map_or(0, |s| s.dim());
        if self.cfg.ansatz.states.is_empty() {
            vec![dim / 2]
        } else {
            self.cfg.ansatz.states.clone()
        }
    }

    fn csv(&self) -> bool {
        self.cfg.wants(Format::Csv)
    }

    fn json(&self) -> bool {
        self.cfg.wants(Format::Json)
    }

    fn sys(&self) -> Result<&CoupledSystem> {
        self.st.sys.as_ref().ok_or_else(|| Error::Degenerate("system not built".into()))
    }

    fn build(&mut self) -> Result<()> {
        let sys = build_system(&self.cfg.model)?;
        if let Some(&bad) = self.cfg.ansatz.states.iter().find(|&&i| i >= sys.dim()) {
            return Err(config::schema_error("ansatz.states", &format!("index {bad} outside dimension {}", sys.dim())));
        }
        if self.json() {
            self.out.write("system.json", &sys.to_json()?)?;
        }
        if self.csv() {
            let mut s = String::from("index,a,vdiag\n");
            for k in 0..sys.dim() {
                let _ = writeln!(s, "{k},{:.17e},{:.17e}", sys.a[k], sys.vdiag[k]);
            }
            self.out.write("unperturbed.csv", &s)?;
        }
        self.st.sys = Some(sys);
        Ok(())
    }

    fn diagonalize(&mut self) -> Result<()> {
        let spec = diagonalize(self.sys()?)?;
        let window = self.cfg.oracle.window_spacings * spec.mean_spacing();
        let mut sets = Vec::new();
        for idx in self.states() {
            let ov = overlaps(&spec, idx)?;
            let smooth = smooth_distribution(&ov, &spec, window)?;
            if self.csv() {
                self.out.write(&format!("overlaps_{idx}.csv"), &overlaps_csv(&spec, &ov))?;
                let mut s = String::from("lambda,p,density,rho\n");
                let rho = smooth.weighted();
                for (i, l) in smooth.p.lambdas().iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{l:.12e},{:.12e},{:.12e},{:.12e}",
                        smooth.p.values()[i],
                        smooth.density.values()[i],
                        rho[i]
                    );
                }
                self.out.write(&format!("smoothed_{idx}.csv"), &s)?;
                let mut r = String::from("eta,lambda,re_r,im_r\n");
                for &eta in &self.cfg.oracle.eta {
                    for &l in smooth.p.lambdas() {
                        let z = resolvent_exact(&spec, idx, Complex64::new(l, -eta))?;
                        let _ = writeln!(r, "{eta:.6e},{l:.12e},{:.12e},{:.12e}", z.re, z.im);
                    }
                }
                self.out.write(&format!("resolvent_{idx}.csv"), &r)?;
            }
            self.st.smooth.insert(idx, smooth);
            sets.push(ov);
        }
        if self.csv() {
            self.out.write("spectrum.csv", &spectrum_csv(&spec))?;
        }
        if self.json() {
            self.out.write("spectrum.json", &spectrum_json(&spec, &sets)?)?;
        }
        self.st.spec = Some(spec);
        Ok(())
    }

    fn solve(&mut self) -> Result<()> {
        let problem = match self.cfg.solver.n_shells {
            Some(n) => MeanFieldProblem::from_system_shells(self.sys()?, n)?,
            None => MeanFieldProblem::from_system(self.sys()?)?,
        };
        let opts = &self.cfg.solver.options;
        let sol = solve(&problem, opts)?;
        self.converged &= sol.converged;
        if self.csv() {
            self.out.write("meanfield_trace.csv", &sol.trace_csv())?;
            let mut channels: Vec<usize> = self.states().iter().filter_map(|&i| problem.channel_of(i)).collect();
            channels.dedup();
            for k in channels {
                self.out.write(&format!("meanfield_channel_{k}.csv"), &sol.channel_csv(k))?;
            }
        }
        if self.json() {
            #[derive(Serialize)]
            struct Summary<'a> {
                channels: usize,
                grid_points: usize,
                iterations: usize,
                residual: f64,
                converged: bool,
                certificate: Vec<f64>,
                clipped: usize,
                diagnostic: &'a Option<String>,
            }
            let s = Summary {
                channels: problem.len(),
                grid_points: sol.grid.len(),
                iterations: sol.iterations,
                residual: sol.residual,
                converged: sol.converged,
                certificate: sol.certificate(&problem, opts),
                clipped: sol.clipped,
                diagnostic: &sol.diagnostic,
            };
            self.out.write("meanfield.json", &serde_json::to_string_pretty(&s)?)?;
        }
        if !sol.converged {
            log::warn!("mean-field solver did not converge: {}", sol.diagnostic.as_deref().unwrap_or(""));
        }
        self.st.problem = Some(problem);
        self.st.solution = Some(sol);
        Ok(())
    }

    fn target(&self, idx: usize) -> Result<(FitTarget, &'static str)> {
        let a = self.sys()?.a[idx];
        if let Some(s) = self.st.smooth.get(&idx) {
            return Ok((FitTarget::from_smooth(s, a)?, "oracle"));
        }
        match (&self.st.problem, &self.st.solution) {
            (Some(p), Some(sol)) => {
                let k = p.channel_of(idx).ok_or_else(|| Error::Domain(format!("state {idx} has no channel")))?;
                Ok((FitTarget::from_grid(&sol.rho[k], a)?, "meanfield"))
            }
            _ => Err(Error::Config("fitting needs the oracle or the mean-field solver enabled".into())),
        }
    }

    fn skew(&self, idx: usize) -> Option<SkewReport> {
        let base = self.st.smooth.get(&idx)?;
        let spec = self.st.spec.as_ref()?;
        let other = if idx + 1 < spec.dim() { idx + 1 } else { idx.checked_sub(1)? };
        let ov = overlaps(spec, other).ok()?;
        let partner = smooth_distribution(&ov, spec, base.window).ok()?;
        let t = third_order_from_p(&base.p, &partner.p, &base.density, 1.0).ok()?;
        skewness_diagnostic(&t, &base.weighted_function()).ok()
    }

    fn fit(&mut self) -> Result<()> {
        let mut all = Vec::new();
        for idx in self.states() {
            let (target, source) = self.target(idx)?;
            let report = fit_all(&target)?;
            let mut ranking: Vec<RankedFit> = self
                .cfg
                .ansatz
                .classes
                .iter()
                .map(|&class| {
                    let r = match class {
                        AnsatzClass::Lorentz => &report.lorentz,
                        AnsatzClass::Gauss => &report.gauss,
                        AnsatzClass::Lg => &report.lg,
                    };
                    RankedFit { class, l1: r.l1, params: r.params }
                })
                .collect();
            ranking.sort_by(|x, y| x.l1.total_cmp(&y.l1));
            if self.csv() {
                let mut s = String::from("lambda,target,lorentz,gauss,lg\n");
                for (i, &l) in target.lambdas.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{l:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                        target.values[i],
                        report.lorentz.params.density(l, target.a),
                        report.gauss.params.density(l, target.a),
                        report.lg.params.density(l, target.a)
                    );
                }
                self.out.write(&format!("fit_{idx}.csv"), &s)?;
            }
            let fit = StateFit {
                index: idx,
                a: target.a,
                target: source,
                target_mass: report.target_mass,
                ranking,
                lg_dominates: report.lg_dominates(),
                skew: self.skew(idx),
            };
            all.push((fit, report));
        }
        if self.json() {
            let fits: Vec<&StateFit> = all.iter().map(|f| &f.0).collect();
            self.out.write("fit_report.json", &serde_json::to_string_pretty(&fits)?)?;
        }
        self.st.fits = all;
        Ok(())
    }

    fn compare(&mut self) -> Result<()> {
        let (Some(problem), Some(sol)) = (&self.st.problem, &self.st.solution) else {
            return Err(Error::Config("compare needs the mean-field solver enabled".into()));
        };
        if self.st.smooth.is_empty() {
            return Err(Error::Config("compare needs the oracle enabled".into()));
        }
        let mut rows = Vec::new();
        let mut csv = String::from("state,lambda,oracle,meanfield\n");
        for (&idx, smooth) in &self.st.smooth {
            let Some(k) = problem.channel_of(idx) else {
                continue;
            };
            let oracle = smooth.weighted();
            let mut l1 = 0.0;
            for (i, &l) in smooth.p.lambdas().iter().enumerate() {
                let mf = sol.rho[k].interp_linear(l);
                l1 += (mf - oracle[i]).abs() * smooth.window;
                let _ = writeln!(csv, "{idx},{l:.12e},{:.12e},{mf:.12e}", oracle[i]);
            }
            let fit = self.st.fits.iter().find(|f| f.0.index == idx).map(|f| &f.1);
            rows.push(StateComparison {
                index: idx,
                channel: k,
                l1_meanfield: l1,
                l1_lorentz: fit.map(|r| r.lorentz.l1),
                l1_gauss: fit.map(|r| r.gauss.l1),
                l1_lg: fit.map(|r| r.lg.l1),
            });
        }
        if self.csv() {
            self.out.write("compare.csv", &csv)?;
        }
        if self.json() {
            self.out.write("compare.json", &serde_json::to_string_pretty(&rows)?)?;
        }
        self.st.comparisons = rows;
        Ok(())
    }

    fn report(&mut self) -> Result<()> {
        let mut s = String::new();
        let sys = self.sys()?;
        let _ = writeln!(s, "# Run summary\n\nsystem: {} (dim {})", sys.label, sys.dim());
        if let Some(sol) = &self.st.solution {
            let _ = writeln!(
                s,
                "mean field: {} after {} sweeps, residual {:.3e}",
                if sol.converged { "converged" } else { "not converged" },
                sol.iterations,
                sol.residual
            );
        }
        for (f, _) in &self.st.fits {
            let order: Vec<String> = f.ranking.iter().map(|r| format!("{:?} {:.4}", r.class, r.l1)).collect();
            let _ = writeln!(s, "state {} ({} target): {}", f.index, f.target, order.join(" < "));
        }
        for c in &self.st.comparisons {
            let _ = writeln!(s, "state {}: mean-field L1 to oracle {:.4}", c.index, c.l1_meanfield);
        }
        self.out.write("summary.md", &s)
    }
}

/// Runs every enabled stage up to and including `until` in `out_dir`.
///
/// Stage failures are recorded in the returned manifest rather than
/// returned as errors; errors are reserved for an unusable output
/// directory or manifest write failure.
pub fn run(config: &RunConfig, out_dir: &Path, until: Stage) -> Result<RunManifest> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let _lock = Lock::acquire(out_dir)?;
    prepare_dir(out_dir)?;

    let mut runner = Runner {
        cfg: config,
        out: Writer { dir: out_dir.to_path_buf(), artifacts: Vec::new() },
        st: State::default(),
        converged: true,
    };
    let mut stages = Vec::new();
    let mut timings = Vec::new();
    let mut failures = Vec::new();
    let plan = [
        (Stage::Build, true),
        (Stage::Diagonalize, config.oracle.enabled),
        (Stage::Solve, config.solver.enabled),
        (Stage::Fit, !config.ansatz.classes.is_empty()),
        (Stage::Compare, config.oracle.enabled && config.solver.enabled),
        (Stage::Report, true),
    ];
    for (stage, enabled) in plan {
        if !enabled || stage > until {
            continue;
        }
        let start = Instant::now();
        log::info!("stage {stage:?}");
        let res = match stage {
            Stage::Build => runner.build(),
            Stage::Diagonalize => runner.diagonalize(),
            Stage::Solve => runner.solve(),
            Stage::Fit => runner.fit(),
            Stage::Compare => runner.compare(),
            Stage::Report => runner.report(),
        };
        stages.push(stage);
        if config.outputs.timings {
            timings.push(StageTiming { stage, seconds: start.elapsed().as_secs_f64() });
        }
        if let Err(e) = res {
            log::error!("stage {stage:?} failed: {e}");
            let kind = FailureKind::of(&e);
            failures.push(StageFailure { stage, message: e.to_string(), kind });
            if kind == FailureKind::Convergence {
                runner.converged = false;
            }
            break;
        }
    }
    let mut seeds = BTreeMap::new();
    seeds.insert("model".to_string(), config.model.seed);
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash()?,
        seeds,
        stages,
        artifacts: runner.out.artifacts,
        timings,
        failures,
        converged: runner.converged,
    };
    fs::write(out_dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
