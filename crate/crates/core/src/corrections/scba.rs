use std::f64::consts::PI;

use serde::Serialize;

use super::third_order_from_p;
use crate::ansatz::{eff_spectral_function, EffectiveSelfEnergy};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::optim::nelder_mead_restarts;
use crate::specfun::{hilbert_on_grid, lorentzian};

/// Outcome of the constant self-energy (SCBA) analysis.
#[derive(Debug, Clone, Serialize)]
pub struct ScbaReport {
    pub g: f64,
    pub gamma_width: Option<f64>,
    pub delta_shift: f64,
    pub consistent: bool,
    pub degenerate: bool,
    pub reason: String,
}

/// Sigma = -i Gamma + Delta with Sigma = g R(omega_0): Delta = 0, Gamma = sqrt(g).
pub fn scba_constant(g: f64) -> Result<ScbaReport> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!("coupling strength g = {g} must be >= 0")));
    }
    let degenerate = g == 0.0;
    let reason = if degenerate {
        "g = 0: the width vanishes and the spectral function is a delta peak".to_string()
    } else {
        format!("Lorentzian closes: Delta = 0, Gamma^2 = g = {g}")
    };
    Ok(ScbaReport { g, gamma_width: Some(g.sqrt()), delta_shift: 0.0, consistent: true, degenerate, reason })
}

/// Constant self-energy with a third-order term of strength `gamma`.
///
/// Matching the imaginary parts at the peak forces Gamma^2 = -g, which has
/// no real root. `delta_shift` is the peak-evaluated third-order shift
/// -gamma / (pi^4 Gamma^2) with Gamma^2 = g substituted.
pub fn scba_with_third(g: f64, gamma: f64) -> Result<ScbaReport> {
    if gamma == 0.0 {
        return scba_constant(g);
    }
    if !(g >= 0.0) || !g.is_finite() || !gamma.is_finite() {
        return Err(Error::Domain(format!("invalid SCBA parameters g = {g}, gamma = {gamma}")));
    }
    let delta_shift = if g > 0.0 { -gamma / (PI.powi(4) * g) } else { f64::NEG_INFINITY * gamma.signum() };
    Ok(ScbaReport {
        g,
        gamma_width: None,
        delta_shift,
        consistent: false,
        degenerate: g == 0.0,
        reason: format!(
            "Gamma^2 = -g = {} has no real solution; third-order shift Delta = -gamma/(pi^4 Gamma^2) = {delta_shift:e} at Gamma^2 = g",
            -g
        ),
    })
}

/// Single state at `eps0` with self-energy g R(omega) plus the homogeneous
/// third-order term of strength `gamma`, on a fixed grid.
#[derive(Debug, Clone, Serialize)]
pub struct ToyModel {
    pub g: f64,
    pub gamma: f64,
    pub eps0: f64,
    pub grid: Vec<f64>,
}

impl ToyModel {
    pub fn new(g: f64, gamma: f64, eps0: f64, grid: Vec<f64>) -> Result<Self> {
        if !(g > 0.0) || !gamma.is_finite() || !eps0.is_finite() {
            return Err(Error::Domain(format!("toy model needs g > 0: g = {g}, gamma = {gamma}")));
        }
        GridFunction::new(grid.clone(), vec![0.0; grid.len()])?;
        Ok(Self { g, gamma, eps0, grid })
    }

    /// F(rho) = (1/pi) Im / ((omega - eps0 - Re)^2 + Im^2) with the self-energy built from rho.
    pub fn map(&self, rho: &GridFunction) -> Result<GridFunction> {
        let h = hilbert_on_grid(rho);
        let one = rho.with_values(vec![1.0; rho.len()])?;
        let third = third_order_from_p(rho, rho, &one, self.gamma)?;
        let v = (0..rho.len())
            .map(|i| {
                let im = (self.g * PI * rho.values()[i] + third.im3[i]).max(0.0);
                let re = self.g * PI * h.values()[i] + third.re3[i];
                let x = self.grid[i] - self.eps0 - re;
                let d = x * x + im * im;
                if d > 0.0 {
                    im / (PI * d)
                } else {
                    0.0
                }
            })
            .collect();
        rho.with_values(v)
    }

    /// L1 size of F(rho) - rho.
    pub fn residual(&self, rho: &GridFunction) -> f64 {
        match self.map(rho) {
            Ok(f) => f.l1_distance(rho).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }

    fn curve(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::from_fn(self.grid.clone(), f)
    }
}

/// Best constant and frequency-dependent self-energies for a toy model.
#[derive(Debug, Clone, Serialize)]
pub struct RemedyReport {
    pub constant_residual: f64,
    /// (Delta, Gamma).
    pub constant_params: (f64, f64),
    pub effective_residual: f64,
    pub effective_params: EffectiveSelfEnergy,
}

impl RemedyReport {
    pub fn remedy_helps(&self) -> bool {
        self.effective_residual < self.constant_residual
    }
}

/// Minimizes the self-consistency residual over constant self-energies
/// (Lorentzians) and over the Faddeeva window form, the latter started
/// from the best Lorentzian with a wide window.
pub fn remedy_comparison(toy: &ToyModel) -> Result<RemedyReport> {
    let span = toy.grid[toy.grid.len() - 1] - toy.grid[0];
    let lor = |p: &[f64]| -> f64 {
        let (d, w) = (p[0], p[1].exp());
        match toy.curve(|l| lorentzian(l - toy.eps0 - d, w).unwrap_or(f64::NAN)) {
            Ok(r) => toy.residual(&r),
            Err(_) => f64::INFINITY,
        }
    };
    let g0 = toy.g.sqrt();
    let (pc, rc) = nelder_mead_restarts(lor, &[0.0, g0.ln()], &[0.2 * g0, 0.3], 2000, 1e-12, 3)?;
    let (dc, wc) = (pc[0], pc[1].exp());

    let make = |p: &[f64]| EffectiveSelfEnergy::new(p[0], p[1].exp(), p[2].exp(), toy.eps0 + p[3]);
    let eff = |p: &[f64]| -> f64 {
        let Ok(e) = make(p) else { return f64::INFINITY };
        match toy.curve(|l| eff_spectral_function(l, toy.eps0, &e)) {
            Ok(r) => toy.residual(&r),
            Err(_) => f64::INFINITY,
        }
    };
    let x0 = [dc, wc.ln(), span.ln(), dc];
    let (pe, re) = nelder_mead_restarts(eff, &x0, &[0.1 * wc, 0.2, 1.0, 0.1 * wc], 4000, 1e-12, 3)?;
    let (pe, re) = if re <= rc { (pe, re) } else { (x0.to_vec(), eff(&x0)) };
    Ok(RemedyReport {
        constant_residual: rc,
        constant_params: (dc, wc),
        effective_residual: re,
        effective_params: make(&pe)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform;

    #[test]
    fn constant_closes() {
        let r = scba_constant(4.0).unwrap();
        assert!(r.consistent && r.gamma_width == Some(2.0) && r.delta_shift == 0.0);
        let z = scba_constant(0.0).unwrap();
        assert!(z.consistent && z.degenerate);
    }

    #[test]
    fn third_order_breaks_it() {
        let r = scba_with_third(2.0, 0.5).unwrap();
        assert!(!r.consistent && r.gamma_width.is_none());
        assert!((r.delta_shift + 0.5 / (PI.powi(4) * 2.0)).abs() < 1e-15);
        assert!(scba_with_third(2.0, 0.0).unwrap().consistent);
    }

    #[test]
    fn remedy_beats_constant() {
        let toy = ToyModel::new(1.0, 0.2, 0.0, uniform(-12.0, 12.0, 801)).unwrap();
        let r = remedy_comparison(&toy).unwrap();
        assert!(r.remedy_helps(), "{r:?}");
    }
}
