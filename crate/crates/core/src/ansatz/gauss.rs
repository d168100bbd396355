use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lorentz::{solve_lorentz, LorentzOptions, LorentzSolution};
use super::GaussParams;
use crate::error::{Error, Result};
use crate::meanfield::MeanFieldProblem;
use crate::model::EnsembleProfile;
use crate::optim::nelder_mead_restarts;
use crate::specfun::gauss;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailOptions {
    /// Points per side of the tail grid.
    pub tail_points: usize,
    /// Inner edge of the tail grid in units of the Lorentzian chi.
    pub inner_chi: f64,
    /// Outer edge of the tail grid in units of the initial sigma estimate.
    pub outer_sigma: f64,
    pub damping: f64,
    pub max_iter: usize,
    /// Max change of (ln sigma, delta'/sigma) between sweeps.
    pub tol: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { tail_points: 48, inner_chi: 3.0, outer_sigma: 6.0, damping: 0.5, max_iter: 300, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussSolution {
    pub a: Vec<f64>,
    pub params: Vec<GaussParams>,
    /// Tail grid used for each shell.
    pub tail_grids: Vec<Vec<f64>>,
    /// RMS of ln(LHS / RHS) over the tail grid at the returned parameters.
    pub fit_residual: Vec<f64>,
    /// max(LHS / RHS) / min(LHS / RHS) - 1 over the tail grid.
    pub flatness: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn rhs(problem: &MeanFieldProblem, a: &[f64], params: &[GaussParams], k: usize, lambda: f64) -> f64 {
    problem.channels[k]
        .couplings
        .iter()
        .map(|&(nu, w)| w * gauss(lambda - a[nu] - params[nu].delta_prime, params[nu].sigma))
        .sum()
}

/// Tail self-consistency (lambda - a - V)^2 G(lambda - a - delta'; sigma) = Im G / pi,
/// with Im G / pi = sum W G(lambda - a' - delta'_nu; sigma_nu), fitted in the
/// log least-squares sense on each shell's tail grid.
pub fn solve_gauss_tail_problem(
    problem: &MeanFieldProblem,
    lorentz: &LorentzSolution,
    opts: &TailOptions,
) -> Result<GaussSolution> {
    let n = problem.len();
    let a = lorentz.a.clone();
    let lo = problem.channels.iter().map(|c| c.center).fold(f64::INFINITY, f64::min);
    let hi = problem.channels.iter().map(|c| c.center).fold(f64::NEG_INFINITY, f64::max);
    let peaks: Vec<f64> = (0..n).map(|k| lorentz.peak(k)).collect();

    let mut params: Vec<GaussParams> = (0..n)
        .map(|k| {
            let ch = &problem.channels[k];
            let (mut m0, mut m2) = (0.0, 0.0);
            for &(nu, w) in &ch.couplings {
                m0 += w;
                m2 += w * (peaks[nu] - peaks[k]).powi(2);
            }
            let chi = lorentz.params[k].chi;
            let var = if m0 > 0.0 { m2 / m0 } else { 0.0 } + chi * chi;
            GaussParams { sigma: var.sqrt(), delta_prime: lorentz.params[k].delta }
        })
        .collect();

    let tail_grids: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let c = problem.channels[k].center;
            let inner = opts.inner_chi * lorentz.params[k].chi;
            let outer = opts.outer_sigma * params[k].sigma;
            let mut g = Vec::new();
            for (side, edge) in [(-1.0, c - lo), (1.0, hi - c)] {
                let top = outer.min(edge);
                if top > inner {
                    let m = opts.tail_points;
                    for i in 0..m {
                        g.push(c + side * (inner + (top - inner) * i as f64 / (m - 1) as f64));
                    }
                }
            }
            g.sort_by(f64::total_cmp);
            g
        })
        .collect();
    if let Some(k) = tail_grids.iter().position(|g| g.len() < 4) {
        return Err(Error::Domain(format!(
            "shell {k} has no tail regime between {} chi and the spectral edge",
            opts.inner_chi
        )));
    }

    let fit_one = |k: usize, params: &[GaussParams]| -> Result<(GaussParams, f64)> {
        let c = problem.channels[k].center;
        let grid = &tail_grids[k];
        let y: Vec<f64> = grid
            .iter()
            .map(|&l| rhs(problem, &a, params, k, l).ln() - 2.0 * (l - c).abs().ln() + LN_SQRT_2PI)
            .collect();
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("tail of shell {k} underflows")));
        }
        let s0 = params[k].sigma;
        let cost = |p: &[f64]| {
            let sigma = p[0].exp();
            let m = a[k] + p[1];
            let mut acc = 0.0;
            for (l, yi) in grid.iter().zip(&y) {
                let model = -(l - m).powi(2) / (2.0 * sigma * sigma) - sigma.ln();
                acc += (model - yi).powi(2);
            }
            acc / grid.len() as f64
        };
        let (x, c2) = nelder_mead_restarts(cost, &[s0.ln(), params[k].delta_prime], &[0.2, 0.2 * s0], 2000, 1e-14, 4)?;
        Ok((GaussParams { sigma: x[0].exp(), delta_prime: x[1] }, c2.sqrt()))
    };

    let alpha = opts.damping;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let fits: Vec<(GaussParams, f64)> =
            (0..n).into_par_iter().map(|k| fit_one(k, &params)).collect::<Result<_>>()?;
        residual = 0.0;
        for (k, (f, _)) in fits.iter().enumerate() {
            let p = &mut params[k];
            let dls = f.sigma.ln() - p.sigma.ln();
            let dd = f.delta_prime - p.delta_prime;
            residual = f64::max(residual, dls.abs() + (dd / p.sigma).abs());
            p.sigma = (p.sigma.ln() + alpha * dls).exp();
            p.delta_prime += alpha * dd;
        }
        history.push(residual);
        if residual <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("solve_gauss_tail: residual {residual:e} after {iterations} sweeps");
    }

    let mut fit_residual = Vec::with_capacity(n);
    let mut flatness = Vec::with_capacity(n);
    for k in 0..n {
        let c = problem.channels[k].center;
        let ratios: Vec<f64> = tail_grids[k]
            .iter()
            .map(|&l| {
                let lhs = (l - c).powi(2) * gauss(l - a[k] - params[k].delta_prime, params[k].sigma);
                lhs / rhs(problem, &a, &params, k, l)
            })
            .collect();
        let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        fit_residual.push((logs.iter().map(|v| v * v).sum::<f64>() / logs.len() as f64).sqrt());
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        flatness.push(max / min - 1.0);
    }
    Ok(GaussSolution { a, params, tail_grids, fit_residual, flatness, iterations, residual, converged, history })
}

/// Ensemble entry point: the band profile must decay with the energy
/// difference, otherwise there is no Gaussian tail regime.
pub fn solve_gauss_tail(profile: &EnsembleProfile, n_shells: usize, opts: &TailOptions) -> Result<GaussSolution> {
    if !profile.bandwidth.decays() {
        return Err(Error::Domain("coupling profile does not decay: no tail regime".into()));
    }
    let problem = MeanFieldProblem::from_ensemble(profile, n_shells)?;
    let lorentz = solve_lorentz(&problem, &LorentzOptions::default())?;
    solve_gauss_tail_problem(&problem, &lorentz, opts)
}
