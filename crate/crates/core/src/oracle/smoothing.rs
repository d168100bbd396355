use serde::Serialize;

use super::self_energy::coupling_amplitudes;
use super::spectrum::{OverlapSet, Spectrum};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::model::{estimate_entropy, CoupledSystem, EntropyEstimate};

/// Shell-averaged overlap distribution with its density of states.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothDistribution {
    /// p(lambda) at the centers of the non-empty shells.
    pub p: GridFunction,
    /// exp(S(lambda)) on the same grid.
    pub density: GridFunction,
    pub window: f64,
}

impl SmoothDistribution {
    /// sum_k exp(S_k) p_k window: the shell-sum of p_n, exactly 1 for a
    /// normalized overlap set.
    pub fn mass(&self) -> f64 {
        self.weighted().iter().sum::<f64>() * self.window
    }

    /// exp(S) p on the grid.
    pub fn weighted(&self) -> Vec<f64> {
        self.p.values().iter().zip(self.density.values()).map(|(p, d)| p * d).collect()
    }

    pub fn weighted_function(&self) -> GridFunction {
        self.p.with_values(self.weighted()).expect("finite")
    }
}

/// Default window: twenty mean level spacings.
pub fn default_window(spec: &Spectrum) -> f64 {
    20.0 * spec.mean_spacing()
}

fn shell_average(values: &[f64], spec: &Spectrum, est: &EntropyEstimate) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; est.n_shells];
    for (n, &l) in spec.eigenvalues.iter().enumerate() {
        let k = est.shell_of(l).ok_or_else(|| Error::Domain(format!("eigenvalue {l} outside shells")))?;
        sums[k] += values[n];
    }
    Ok(est.shell_index.iter().map(|&k| sums[k] / est.counts[k] as f64).collect())
}

fn as_grid(est: &EntropyEstimate, values: Vec<f64>) -> Result<GridFunction> {
    if est.lambdas.len() < 2 {
        return Err(Error::Size("window leaves fewer than two non-empty shells".into()));
    }
    GridFunction::new(est.lambdas.clone(), values)
}

/// p(lambda) = (sum of p_m in the shell) / (exp(S) window).
pub fn smooth_distribution(ov: &OverlapSet, spec: &Spectrum, window: f64) -> Result<SmoothDistribution> {
    let est = estimate_entropy(&spec.eigenvalues, window)?;
    smooth_with(ov, spec, &est)
}

pub fn smooth_with(ov: &OverlapSet, spec: &Spectrum, est: &EntropyEstimate) -> Result<SmoothDistribution> {
    if ov.p.len() != spec.dim() {
        return Err(Error::Shape("overlap set and spectrum differ in size".into()));
    }
    let p = shell_average(&ov.p, spec, est)?;
    Ok(SmoothDistribution { p: as_grid(est, p)?, density: as_grid(est, est.density())?, window: est.window })
}

/// Shell average of (1/pi) Im G from the coherent amplitudes,
/// |<psi_n|V|phi>|^2 exp(S), on the entropy grid.
pub fn smoothed_im_g(sys: &CoupledSystem, spec: &Spectrum, idx: usize, est: &EntropyEstimate) -> Result<GridFunction> {
    let c = coupling_amplitudes(sys, spec, idx);
    let c2: Vec<f64> = c.iter().map(|x| x * x).collect();
    let avg = shell_average(&c2, spec, est)?;
    let dens = est.density();
    as_grid(est, avg.iter().zip(&dens).map(|(a, d)| a * d).collect())
}
