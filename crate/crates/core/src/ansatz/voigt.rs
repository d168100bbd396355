use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss::GaussSolution;
use super::lorentz::LorentzSolution;
use super::{lg_density, VoigtParams};
use crate::error::{Error, Result};
use crate::meanfield::MeanFieldProblem;
use crate::optim::nelder_mead_restarts;
use crate::specfun::{faddeeva_upper, gauss};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoigtOptions {
    /// Near region |lambda - peak| <= near_fwhm * FWHM of the LG profile (informational).
    pub near_fwhm: f64,
    /// Far region starts at far_fwhm * FWHM from the peak.
    pub far_fwhm: f64,
    /// Far region ends at outer_sigma * sigma (or the spectral edge).
    pub outer_sigma: f64,
    pub far_points: usize,
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Upper bound on sigma in units of the spectral span.
    pub sigma_cap: f64,
}

impl Default for VoigtOptions {
    fn default() -> Self {
        Self {
            near_fwhm: 2.0,
            far_fwhm: 3.0,
            outer_sigma: 6.0,
            far_points: 32,
            damping: 0.5,
            max_iter: 2000,
            tol: 1e-7,
            sigma_cap: 1e3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VoigtSolution {
    pub a: Vec<f64>,
    pub params: Vec<VoigtParams>,
    /// |delta - V + i chi - RHS| at the matching point, per shell.
    pub near_residual: Vec<f64>,
    /// RMS of ln(LHS / RHS) of the far condition, per shell (0 without a far grid).
    pub far_residual: Vec<f64>,
    pub far_grids: Vec<Vec<f64>>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

struct Partner {
    a: f64,
    vp: VoigtParams,
    w: f64,
    wa: Complex64,
}

impl Partner {
    fn new(a: f64, vp: VoigtParams, w: f64) -> Self {
        let s = SQRT_2 * vp.sigma;
        let wa = faddeeva_upper(Complex64::new((vp.delta - vp.delta_prime) / s, vp.chi / s));
        Self { a, vp, w, wa }
    }

    fn self_energy(&self, lambda: f64) -> Complex64 {
        let s = SQRT_2 * self.vp.sigma;
        let wu = faddeeva_upper(Complex64::new((lambda - self.a - self.vp.delta_prime) / s, 0.0));
        let dw = (wu - self.wa) / self.wa.re;
        let inv = Complex64::new(lambda - self.a - self.vp.delta, -self.vp.chi).inv();
        self.w * ((1.0 + dw.re) * inv - Complex64::new((dw * inv).re, 0.0))
    }
}

/// Near-center condition: delta - V + i chi = (lambda - a - V)(1 - G/V_n) + G(lambda) G/V_n
/// at the LG peak, with (delta', sigma) held fixed. One application of the
/// right-hand side: returns the updated (delta, chi) and the residual of the
/// condition at the incoming parameters.
fn near_step(partners: &[Partner], a: f64, vdiag: f64, vp: VoigtParams, chi_max: f64) -> Option<(VoigtParams, f64)> {
    let lm = a + vp.peak_offset();
    let ratio = gauss(lm - a - vp.delta_prime, vp.sigma) / vp.norm();
    let g: Complex64 = partners.iter().map(|p| p.self_energy(lm)).sum();
    let r = (lm - a - vdiag) * (1.0 - ratio) + g * ratio;
    let next = VoigtParams { delta: vdiag + r.re, chi: r.im, ..vp };
    if !(next.chi > 0.0 && next.chi <= chi_max) || !next.delta.is_finite() {
        return None;
    }
    let res = (Complex64::new(vp.delta - vdiag, vp.chi) - r).norm();
    Some((next, res))
}

/// Joint LG solve: the near condition pins (delta, chi) at the peak, the far
/// condition (lambda - a - V)^2 exp(S) p = Im G / pi fixes (delta', sigma) in
/// least squares on the far grid. Shells are updated together from the
/// previous sweep's partner parameters.
pub fn solve_voigt(
    problem: &MeanFieldProblem,
    lorentz: &LorentzSolution,
    tail: &GaussSolution,
    opts: &VoigtOptions,
) -> Result<VoigtSolution> {
    let n = problem.len();
    if lorentz.params.len() != n || tail.params.len() != n {
        return Err(Error::Shape("initial parameters do not match the shells".into()));
    }
    let a = lorentz.a.clone();
    let lo = problem.channels.iter().map(|c| c.center).fold(f64::INFINITY, f64::min);
    let hi = problem.channels.iter().map(|c| c.center).fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let sigma_cap = opts.sigma_cap * span;
    let mut params: Vec<VoigtParams> = (0..n)
        .map(|k| {
            VoigtParams::new(
                lorentz.params[k].delta,
                tail.params[k].delta_prime,
                lorentz.params[k].chi,
                tail.params[k].sigma.min(sigma_cap),
            )
        })
        .collect::<Result<_>>()?;

    let far_grids: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let peak = a[k] + params[k].peak_offset();
            let inner = opts.far_fwhm * params[k].fwhm();
            let outer = opts.outer_sigma * params[k].sigma;
            let mut g = Vec::new();
            for (side, edge) in [(-1.0, peak - lo), (1.0, hi - peak)] {
                let top = outer.min(edge);
                if top > inner {
                    let m = opts.far_points;
                    for i in 0..m {
                        g.push(peak + side * (inner + (top - inner) * i as f64 / (m - 1) as f64));
                    }
                }
            }
            g.sort_by(f64::total_cmp);
            g
        })
        .collect();

    let update = |k: usize, params: &[VoigtParams]| -> Result<(VoigtParams, f64, f64)> {
        let ch = &problem.channels[k];
        let partners: Vec<Partner> = ch.couplings.iter().map(|&(nu, w)| Partner::new(a[nu], params[nu], w)).collect();
        let grid = &far_grids[k];
        let target: Vec<f64> = grid
            .iter()
            .map(|&l| ch.couplings.iter().map(|&(nu, w)| w * lg_density(l, a[nu], &params[nu])).sum::<f64>().ln())
            .collect();
        let start = params[k];
        let far_cost = |vp: &VoigtParams| -> f64 {
            if grid.is_empty() {
                return 0.0;
            }
            let mut acc = 0.0;
            for (l, t) in grid.iter().zip(&target) {
                let lhs = (l - ch.center).powi(2) * lg_density(*l, a[k], vp);
                acc += (lhs.ln() - t).powi(2);
            }
            acc / grid.len() as f64
        };
        // far condition for (delta', sigma) at fixed (delta, chi), then the
        // near condition for (delta, chi) at the new (delta', sigma)
        let mut tail = start;
        if !grid.is_empty() {
            let cost = |x: &[f64]| {
                let sigma = x[0].exp();
                if !(sigma <= sigma_cap) {
                    return f64::INFINITY;
                }
                let vp = VoigtParams { delta_prime: x[1], sigma, ..start };
                if vp.validate().is_err() {
                    return f64::INFINITY;
                }
                let c = far_cost(&vp);
                if c.is_finite() {
                    c
                } else {
                    f64::INFINITY
                }
            };
            let (x, _) = nelder_mead_restarts(
                cost,
                &[start.sigma.ln(), start.delta_prime],
                &[0.1, 0.1 * start.sigma.min(span)],
                600,
                1e-14,
                2,
            )?;
            if cost(&x).is_finite() {
                tail = VoigtParams { delta_prime: x[1], sigma: x[0].exp(), ..start };
            }
        }
        Ok(match near_step(&partners, a[k], ch.vdiag, tail, sigma_cap) {
            Some((vp, near)) if vp.validate().is_ok() => (vp, near, far_cost(&tail).sqrt()),
            _ => {
                log::warn!("solve_voigt: near condition of shell {k} has no solution; keeping its parameters");
                (start, f64::INFINITY, far_cost(&start).sqrt())
            }
        })
    };

    let alpha = opts.damping;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut near_residual = vec![0.0; n];
    let mut far_residual = vec![0.0; n];
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let out: Vec<(VoigtParams, f64, f64)> =
            (0..n).into_par_iter().map(|k| update(k, &params)).collect::<Result<_>>()?;
        residual = 0.0;
        for (k, (vp, near, far)) in out.into_iter().enumerate() {
            let p = &mut params[k];
            let scale = p.chi;
            residual = f64::max(
                residual,
                ((vp.delta - p.delta).abs() + (vp.chi - p.chi).abs() + (vp.delta_prime - p.delta_prime).abs()) / scale
                    + (vp.sigma.ln() - p.sigma.ln()).abs(),
            );
            p.delta += alpha * (vp.delta - p.delta);
            p.chi += alpha * (vp.chi - p.chi);
            p.delta_prime += alpha * (vp.delta_prime - p.delta_prime);
            p.sigma = (p.sigma.ln() + alpha * (vp.sigma.ln() - p.sigma.ln())).exp();
            near_residual[k] = near;
            far_residual[k] = far;
        }
        history.push(residual);
        log::debug!("solve_voigt sweep {it}: residual {residual:e}");
        if residual <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("solve_voigt: residual {residual:e} after {iterations} sweeps");
    }
    Ok(VoigtSolution { a, params, near_residual, far_residual, far_grids, iterations, residual, converged, history })
}
