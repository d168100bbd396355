use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LorentzParams;
use crate::error::{Error, Result};
use crate::meanfield::MeanFieldProblem;

/// Where each shell's parameter equations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatchingRule {
    /// The current peak a + delta of the shell's own distribution.
    #[default]
    Peak,
    /// The unshifted energy a + V_d.
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LorentzOptions {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub rule: MatchingRule,
}

impl Default for LorentzOptions {
    fn default() -> Self {
        Self { damping: 0.5, max_iter: 20_000, tol: 1e-12, rule: MatchingRule::Peak }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LorentzSolution {
    /// Bare energy a of each shell (center minus V_d).
    pub a: Vec<f64>,
    pub params: Vec<LorentzParams>,
    pub iterations: usize,
    /// Max over shells of the change in (chi, a + delta) under one more
    /// undamped application of the equations.
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl LorentzSolution {
    pub fn peak(&self, k: usize) -> f64 {
        self.a[k] + self.params[k].delta
    }

    /// Partner list (a, params, W) of shell k for self-energy sums.
    pub fn partners(&self, problem: &MeanFieldProblem, k: usize) -> Vec<(f64, LorentzParams, f64)> {
        problem.channels[k].couplings.iter().map(|&(nu, w)| (self.a[nu], self.params[nu], w)).collect()
    }
}

fn rhs(problem: &MeanFieldProblem, rule: MatchingRule, e: &[f64], chi: &[f64], k: usize) -> Complex64 {
    let lambda = match rule {
        MatchingRule::Peak => e[k],
        MatchingRule::Center => problem.channels[k].center,
    };
    problem.channels[k].couplings.iter().map(|&(nu, w)| w * Complex64::new(lambda - e[nu], -chi[nu]).inv()).sum()
}

/// Fixed point of chi_k = sum W chi'/(dl^2 + chi'^2), delta_k - V_k = sum W dl/(dl^2 + chi'^2)
/// with dl = lambda_k - a_nu - delta_nu.
pub fn solve_lorentz(problem: &MeanFieldProblem, opts: &LorentzOptions) -> Result<LorentzSolution> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Config(format!("damping {} outside (0, 1]", opts.damping)));
    }
    if problem.channels.iter().all(|c| c.couplings.iter().all(|c| c.1 == 0.0)) {
        return Err(Error::Degenerate("zero coupling: chi collapses to 0".into()));
    }
    let n = problem.len();
    let mut e: Vec<f64> = problem.channels.iter().map(|c| c.center).collect();
    let mut chi: Vec<f64> = (0..n).map(|k| problem.golden_rule_width(k)).collect();
    if let Some(k) = chi.iter().position(|c| !(*c > 0.0)) {
        return Err(Error::Degenerate(format!("shell {k} is uncoupled")));
    }
    let scale = chi.iter().cloned().fold(0.0, f64::max);
    let alpha = opts.damping;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let g: Vec<Complex64> = (0..n).map(|k| rhs(problem, opts.rule, &e, &chi, k)).collect();
        residual = 0.0;
        for k in 0..n {
            let e_new = problem.channels[k].center + g[k].re;
            let c_new = g[k].im;
            residual = f64::max(residual, ((e_new - e[k]).abs() + (c_new - chi[k]).abs()) / scale);
            e[k] += alpha * (e_new - e[k]);
            chi[k] += alpha * (c_new - chi[k]);
        }
        history.push(residual);
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iterations, residual });
        }
        if let Some(k) = chi.iter().position(|c| !(*c > 0.0)) {
            return Err(Error::Degenerate(format!("chi of shell {k} collapsed to zero")));
        }
        if residual <= opts.tol {
            converged = true;
            break;
        }
    }
    if let Some(k) = chi.iter().position(|c| *c < 1e-9 * scale) {
        return Err(Error::Degenerate(format!("chi of shell {k} collapsed to {:e}: no continuum", chi[k])));
    }
    if !converged {
        log::warn!("solve_lorentz: residual {residual:e} after {iterations} iterations");
    }
    let a: Vec<f64> = problem.channels.iter().map(|c| c.center - c.vdiag).collect();
    let params = (0..n).map(|k| LorentzParams { chi: chi[k], delta: e[k] - a[k] }).collect();
    Ok(LorentzSolution { a, params, iterations, residual, converged, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_band_gives_sqrt_g() {
        let p = MeanFieldProblem::wide_band(4.0, 0.3).unwrap();
        let s = solve_lorentz(&p, &LorentzOptions::default()).unwrap();
        assert!(s.converged);
        assert!((s.params[0].chi - 2.0).abs() < 1e-10);
        assert!((s.peak(0) - 0.3).abs() < 1e-12);
    }
}
