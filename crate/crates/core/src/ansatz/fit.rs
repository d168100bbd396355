use serde::Serialize;

use super::{gauss_density, lg_density, lorentz_density, GaussParams, LorentzParams, VoigtParams};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::optim::nelder_mead_restarts;
use crate::oracle::SmoothDistribution;

/// A weighted distribution exp(S) p sampled on a grid, with quadrature weights.
#[derive(Debug, Clone, Serialize)]
pub struct FitTarget {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Bare energy the fitted shifts are measured from.
    pub a: f64,
}

impl FitTarget {
    pub fn new(lambdas: Vec<f64>, values: Vec<f64>, weights: Vec<f64>, a: f64) -> Result<Self> {
        if lambdas.len() != values.len() || lambdas.len() != weights.len() {
            return Err(Error::Shape("fit target arrays differ in length".into()));
        }
        if lambdas.len() < 4 {
            return Err(Error::Size("fit target needs at least 4 points".into()));
        }
        if values.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite fit target".into()));
        }
        Ok(Self { lambdas, values, weights, a })
    }

    /// Shell-averaged oracle distribution; each shell carries weight `window`.
    pub fn from_smooth(s: &SmoothDistribution, a: f64) -> Result<Self> {
        let n = s.p.len();
        Self::new(s.p.lambdas().to_vec(), s.weighted(), vec![s.window; n], a)
    }

    /// A density on a grid with trapezoid weights.
    pub fn from_grid(f: &GridFunction, a: f64) -> Result<Self> {
        let x = f.lambdas();
        let n = x.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (x[i + 1] - x[i]);
            w[i] += h;
            w[i + 1] += h;
        }
        Self::new(x.to_vec(), f.values().to_vec(), w, a)
    }

    /// Weighted L1 distance to a model density.
    pub fn l1(&self, model: impl Fn(f64) -> f64) -> f64 {
        self.lambdas
            .iter()
            .zip(self.values.iter().zip(&self.weights))
            .map(|(&l, (v, w))| w * (model(l) - v).abs())
            .sum()
    }

    fn mass(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    fn moments(&self) -> (f64, f64) {
        let m0 = self.mass();
        let m1: f64 = self.lambdas.iter().zip(self.values.iter().zip(&self.weights)).map(|(l, (v, w))| l * v * w).sum();
        let mean = m1 / m0;
        let m2: f64 = self
            .lambdas
            .iter()
            .zip(self.values.iter().zip(&self.weights))
            .map(|(l, (v, w))| (l - mean).powi(2) * v * w)
            .sum();
        (mean, (m2 / m0).sqrt())
    }

    fn peak_and_hwhm(&self) -> (f64, f64) {
        let (ip, vmax) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let half = 0.5 * vmax;
        let x = &self.lambdas;
        let right = (ip..x.len()).find(|&i| self.values[i] < half).map_or(x[x.len() - 1], |i| x[i]);
        let left = (0..=ip).rev().find(|&i| self.values[i] < half).map_or(x[0], |i| x[i]);
        let step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        (x[ip], (0.5 * (right - left)).max(0.5 * step))
    }

    fn span(&self) -> f64 {
        self.lambdas[self.lambdas.len() - 1] - self.lambdas[0]
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitParams {
    Lorentz(LorentzParams),
    Gauss(GaussParams),
    Lg(VoigtParams),
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: FitParams,
    pub l1: f64,
}

/// Best Lorentzian L(lambda - a - delta; chi) in weighted L1.
pub fn fit_lorentz(t: &FitTarget) -> Result<FitResult> {
    let (peak, hw) = t.peak_and_hwhm();
    let cost = |p: &[f64]| t.l1(|l| crate::specfun::lorentz(l - p[0], p[1].exp()));
    let (x, c) = nelder_mead_restarts(cost, &[peak, hw.ln()], &[0.5 * hw, 0.3], 2000, 1e-13, 4)?;
    Ok(FitResult { params: FitParams::Lorentz(LorentzParams::new(x[1].exp(), x[0] - t.a)?), l1: c })
}

/// Best Gaussian G(lambda - a - delta'; sigma) in weighted L1.
pub fn fit_gauss(t: &FitTarget) -> Result<FitResult> {
    let (mean, sd) = t.moments();
    let (peak, hw) = t.peak_and_hwhm();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (c0, s0) in [(mean, sd), (peak, hw / 1.1774)] {
        let cost = |p: &[f64]| t.l1(|l| crate::specfun::gauss(l - p[0], p[1].exp()));
        let r = nelder_mead_restarts(cost, &[c0, s0.ln()], &[0.5 * s0, 0.3], 2000, 1e-13, 4)?;
        if best.as_ref().is_none_or(|b| r.1 < b.1) {
            best = Some(r);
        }
    }
    let (x, c) = best.expect("two starts");
    Ok(FitResult { params: FitParams::Gauss(GaussParams::new(x[1].exp(), x[0] - t.a)?), l1: c })
}

/// Best LG profile in weighted L1, started from the pure Lorentzian and
/// Gaussian fits (embedded as sigma -> infinity and chi -> infinity) and
/// from their combination.
pub fn fit_lg(t: &FitTarget, lorentz: &FitResult, gauss: &FitResult) -> Result<FitResult> {
    let (FitParams::Lorentz(lp), FitParams::Gauss(gp)) = (lorentz.params, gauss.params) else {
        return Err(Error::Config("fit_lg needs a Lorentzian and a Gaussian fit".into()));
    };
    let big = 1e8 * t.span().max(lp.chi).max(gp.sigma);
    let model = |p: &[f64]| -> Option<VoigtParams> {
        let vp = VoigtParams { delta: p[0], delta_prime: p[1], chi: p[2].exp(), sigma: p[3].exp() };
        vp.validate().ok().map(|_| vp)
    };
    let cost = |p: &[f64]| match model(p) {
        Some(vp) => t.l1(|l| lg_density(l, t.a, &vp)),
        None => f64::INFINITY,
    };
    let starts = [
        [lp.delta, gp.delta_prime, lp.chi.ln(), gp.sigma.ln()],
        [lp.delta, lp.delta, lp.chi.ln(), big.ln()],
        [gp.delta_prime, gp.delta_prime, big.ln(), gp.sigma.ln()],
    ];
    let scale = lp.chi.min(gp.sigma);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let r = nelder_mead_restarts(cost, &s, &[0.5 * scale, 0.5 * scale, 0.4, 0.4], 4000, 1e-13, 4)?;
        if best.as_ref().is_none_or(|b| r.1 < b.1) {
            best = Some(r);
        }
    }
    let (x, c) = best.expect("three starts");
    let vp = model(&x).ok_or_else(|| Error::Domain("LG fit left the valid region".into()))?;
    Ok(FitResult { params: FitParams::Lg(vp), l1: c })
}

/// Fit report comparing the three ansatz classes on one target.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub a: f64,
    pub target_mass: f64,
    pub lorentz: FitResult,
    pub gauss: FitResult,
    pub lg: FitResult,
    /// L1 of an externally supplied curve (e.g. a mean-field solution).
    pub reference_l1: Option<f64>,
}

impl FitReport {
    /// The hybrid does not lose to either of its limits. The pure forms are
    /// limit points of the family and are reached only up to rounding.
    pub fn lg_dominates(&self) -> bool {
        self.lg.l1 <= self.lorentz.l1.min(self.gauss.l1) * (1.0 + 1e-9)
    }
}

pub fn fit_all(t: &FitTarget) -> Result<FitReport> {
    let lorentz = fit_lorentz(t)?;
    let gauss = fit_gauss(t)?;
    let lg = fit_lg(t, &lorentz, &gauss)?;
    Ok(FitReport { a: t.a, target_mass: t.mass(), lorentz, gauss, lg, reference_l1: None })
}

impl FitParams {
    /// exp(S) p of the fitted model.
    pub fn density(&self, lambda: f64, a: f64) -> f64 {
        match self {
            FitParams::Lorentz(p) => lorentz_density(lambda, a, p),
            FitParams::Gauss(p) => gauss_density(lambda, a, p),
            FitParams::Lg(p) => lg_density(lambda, a, p),
        }
    }
}
