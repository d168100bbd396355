use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use super::{lg_density, EffectiveSelfEnergy, VoigtParams, Window};
use crate::error::{Error, Result};
use crate::grid::{uniform, GridFunction};
use crate::specfun::{faddeeva_upper, hilbert_on_grid};

/// Result of matching an effective self-energy to an LG profile.
#[derive(Debug, Clone, Serialize)]
pub struct PeakMatch {
    pub effective: EffectiveSelfEnergy,
    /// Peak of the LG profile (absolute energy).
    pub lambda_peak: f64,
    /// exp(S) p of the LG profile at its peak.
    pub height: f64,
    /// Relative size of the derivative condition at the peak.
    pub position_residual: f64,
    /// |height_eff / height - 1|.
    pub height_residual: f64,
    /// (epsilon_eff, chi_eff) from the leading-order peak formulas.
    pub leading_order: (f64, f64),
    /// |delta - delta'| <= chi.
    pub in_regime: bool,
}

/// Window f = w(-u) and its lambda-derivative at `lambda`, as (alpha + i beta, alpha' + i beta').
fn window_with_slope(lambda: f64, center: f64, sigma: f64) -> (Complex64, Complex64) {
    let du = 1.0 / (SQRT_2 * sigma);
    let u = (lambda - center) * du;
    let f = faddeeva_upper(Complex64::new(u, 0.0)).conj();
    // w'(z) = -2 z w(z) + 2i/sqrt(pi), evaluated at z = -u
    let slope = -du * (2.0 * u * f + Complex64::new(0.0, FRAC_2_SQRT_PI));
    (f, slope)
}

/// Fits (epsilon_eff, chi_eff) so that (1/pi) Im 1/(lambda - eps - i chi w(-(lambda - eps_G)/(sqrt 2 sigma)))
/// has the same peak position and height as the LG profile with parameters `vp`
/// around bare energy `a`. The window keeps the LG sigma and Gaussian center.
///
/// At the LG peak lambda_p the window values are fixed, so with
/// X = lambda_p - eps + chi beta the stationarity condition is a quadratic in X
/// and the height condition a scalar equation in chi.
pub fn match_effective(vp: &VoigtParams, a: f64) -> Result<PeakMatch> {
    vp.validate()?;
    let eps_g = a + vp.delta_prime;
    let eps_l = a + vp.delta;
    let in_regime = (vp.delta - vp.delta_prime).abs() <= vp.chi;
    if !in_regime {
        log::warn!(
            "match_effective: |delta - delta'| = {} exceeds chi = {}; peak formulas are outside their regime",
            (vp.delta - vp.delta_prime).abs(),
            vp.chi
        );
    }
    let lp = a + vp.peak_offset();
    let h = lg_density(lp, a, vp);
    let (f, fp) = window_with_slope(lp, eps_g, vp.sigma);
    let (al, be, alp, bep) = (f.re, f.im, fp.re, fp.im);

    let x_of = |chi: f64| -> f64 {
        let qa = alp;
        let qb = -2.0 * al * (1.0 + chi * bep);
        let qc = -chi * chi * al * al * alp;
        if qa == 0.0 {
            return if qb != 0.0 { -qc / qb } else { 0.0 };
        }
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let q = -0.5 * (qb + qb.signum() * disc);
        if q == 0.0 {
            return 0.0;
        }
        let (r1, r2) = (q / qa, qc / q);
        if r1.abs() < r2.abs() {
            r1
        } else {
            r2
        }
    };
    let height_of = |chi: f64| {
        let x = x_of(chi);
        chi * al / (PI * (x * x + chi * chi * al * al))
    };

    let chi0 = 1.0 / (PI * h * al);
    let g = |c: f64| height_of(c) / h - 1.0;
    let (mut lo, mut hi) = (chi0 * 0.5, chi0 * 2.0);
    let mut tries = 0;
    while g(lo) < 0.0 || g(hi) > 0.0 {
        lo *= 0.5;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoConvergence { iterations: tries, residual: g(chi0).abs() });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let chi_eff = 0.5 * (lo + hi);
    let x = x_of(chi_eff);
    let eps = lp + chi_eff * be - x;

    // residuals of the two conditions at the solution
    let xp = 1.0 + chi_eff * bep;
    let n = chi_eff * al;
    let np = chi_eff * alp;
    let q = x * x + chi_eff * chi_eff * al * al;
    let qp = 2.0 * x * xp + 2.0 * chi_eff * chi_eff * al * alp;
    let position_residual = (np * q - n * qp).abs() / (np.abs() * q + n * qp.abs() + n * q / vp.sigma);
    let height_residual = g(chi_eff).abs();

    // leading-order closed forms
    let lp0 = (2.0 * vp.sigma.powi(2) * eps_l + vp.chi.powi(2) * eps_g) / (2.0 * vp.sigma.powi(2) + vp.chi.powi(2));
    let u0 = (lp0 - eps_g) / (SQRT_2 * vp.sigma);
    let chi_lo = (u0 * u0).exp() / (PI * lg_density(lp0, a, vp));
    let k = 2.0 * chi_lo / ((2.0 * PI).sqrt() * vp.sigma);
    let eps_lo = lp0 * (1.0 - k) + eps_g * k;

    let effective = EffectiveSelfEnergy::new(eps - a, chi_eff, vp.sigma, eps_g)?;
    Ok(PeakMatch {
        effective,
        lambda_peak: lp,
        height: h,
        position_residual,
        height_residual,
        leading_order: (eps_lo, chi_lo),
        in_regime,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowDeviation {
    pub window: Window,
    /// Constant removed from Re f before the transform (its edge value).
    pub edge_constant: f64,
    pub max_deviation: f64,
}

/// -Im f = H(Re f) checked per window and for the window sum.
#[derive(Debug, Clone, Serialize)]
pub struct CausalityReport {
    pub windows: Vec<WindowDeviation>,
    /// Deviation for the sum of all windows.
    pub max_deviation: f64,
    pub points: usize,
}

impl CausalityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.windows.iter().all(|w| w.max_deviation <= tol)
    }
}

fn deviation(grid: &[f64], re: Vec<f64>, im: &[f64]) -> Result<(f64, f64)> {
    let c = 0.5 * (re[0] + re[re.len() - 1]);
    let g = GridFunction::new(grid.to_vec(), re.iter().map(|v| v - c).collect())?;
    let h = hilbert_on_grid(&g);
    let dev = h.values().iter().zip(im).map(|(hv, iv)| (hv + iv).abs()).fold(0.0, f64::max);
    Ok((c, dev))
}

/// Kramers-Kronig closure of the window functions on `grid`.
///
/// The edge value of Re f is treated as the subtraction constant: it is
/// removed before the principal-value transform, so a constant window
/// passes trivially.
pub fn causality_check(e: &EffectiveSelfEnergy, grid: &[f64]) -> Result<CausalityReport> {
    e.validate()?;
    if grid.len() < 8 {
        return Err(Error::Size("causality grid needs at least 8 points".into()));
    }
    let mut windows = Vec::new();
    let mut sum_re = vec![0.0; grid.len()];
    let mut sum_im = vec![0.0; grid.len()];
    for w in e.windows() {
        let f: Vec<Complex64> = grid.iter().map(|&l| w.shape(l)).collect();
        let re: Vec<f64> = f.iter().map(|v| v.re).collect();
        let im: Vec<f64> = f.iter().map(|v| v.im).collect();
        for i in 0..grid.len() {
            sum_re[i] += re[i];
            sum_im[i] += im[i];
        }
        let (edge_constant, max_deviation) = deviation(grid, re, &im)?;
        windows.push(WindowDeviation { window: w, edge_constant, max_deviation });
    }
    let (_, max_deviation) = deviation(grid, sum_re, &sum_im)?;
    Ok(CausalityReport { windows, max_deviation, points: grid.len() })
}

/// Uniform grid covering every window out to `widths` sigmas.
pub fn causality_grid(e: &EffectiveSelfEnergy, widths: f64, n: usize) -> Vec<f64> {
    let ws = e.windows();
    let lo = ws.iter().map(|w| w.center - widths * w.sigma).fold(f64::INFINITY, f64::min);
    let hi = ws.iter().map(|w| w.center + widths * w.sigma).fold(f64::NEG_INFINITY, f64::max);
    uniform(lo, hi, n)
}
