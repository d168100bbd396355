//! Parameterized ansatz family for the overlap distribution.
//!
//! All evaluators return either p(lambda) (divided by exp(S)) or the
//! weighted density exp(S) p, which integrates to one. Energies are
//! absolute; `a` is the bare energy of the basis state or shell and shifts
//! such as `delta` are measured from it.

mod effective;
mod fit;
mod gauss;
mod lorentz;
mod voigt;

pub use effective::{causality_check, causality_grid, match_effective, CausalityReport, PeakMatch, WindowDeviation};
pub use fit::{fit_all, fit_gauss, fit_lg, fit_lorentz, FitParams, FitReport, FitResult, FitTarget};
pub use gauss::{solve_gauss_tail, solve_gauss_tail_problem, GaussSolution, TailOptions};
pub use lorentz::{solve_lorentz, LorentzOptions, LorentzSolution, MatchingRule};
pub use voigt::{solve_voigt, VoigtOptions, VoigtSolution};

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{faddeeva_upper, gauss, lorentz, voigt, ProfileParams};

/// Lorentzian bulk parameters: width chi and shift delta (peak at a + delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    pub chi: f64,
    pub delta: f64,
}

/// Gaussian tail parameters: width sigma and shift delta_prime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussParams {
    pub sigma: f64,
    pub delta_prime: f64,
}

/// Lorentzian-Gaussian product parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtParams {
    pub delta: f64,
    pub delta_prime: f64,
    pub chi: f64,
    pub sigma: f64,
}

impl LorentzParams {
    pub fn new(chi: f64, delta: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) || !delta.is_finite() {
            return Err(Error::Domain(format!("invalid Lorentzian parameters chi={chi}, delta={delta}")));
        }
        Ok(Self { chi, delta })
    }
}

impl GaussParams {
    pub fn new(sigma: f64, delta_prime: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !delta_prime.is_finite() {
            return Err(Error::Domain(format!("invalid Gaussian parameters sigma={sigma}, delta'={delta_prime}")));
        }
        Ok(Self { sigma, delta_prime })
    }
}

impl VoigtParams {
    pub fn new(delta: f64, delta_prime: f64, chi: f64, sigma: f64) -> Result<Self> {
        let p = Self { delta, delta_prime, chi, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ProfileParams::new(self.sigma, self.chi)?;
        if !self.delta.is_finite() || !self.delta_prime.is_finite() {
            return Err(Error::Domain("non-finite Voigt shifts".into()));
        }
        if !(self.norm() > 0.0) {
            return Err(Error::Domain(format!("normalization V(delta - delta') vanishes for {self:?}")));
        }
        Ok(())
    }

    pub fn profile(&self) -> ProfileParams {
        ProfileParams { sigma: self.sigma, chi: self.chi }
    }

    /// V(delta - delta'; sigma, chi).
    pub fn norm(&self) -> f64 {
        voigt(self.delta - self.delta_prime, &self.profile())
    }

    /// Full width at half maximum of the LG profile G(x - delta') L(x - delta).
    pub fn fwhm(&self) -> f64 {
        let f = |x: f64| gauss(x - self.delta_prime, self.sigma) * lorentz(x - self.delta, self.chi);
        let x0 = self.peak_offset();
        let half = 0.5 * f(x0);
        let step = self.chi.min(self.sigma);
        let edge = |side: f64| {
            let (mut lo, mut hi) = (0.0, step);
            while f(x0 + side * hi) > half && hi < 1e6 * step {
                lo = hi;
                hi *= 2.0;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(x0 + side * mid) > half {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        edge(-1.0) + edge(1.0)
    }

    /// Exact maximum of G(x - delta') L(x - delta), relative to a.
    ///
    /// The stationarity condition is the cubic
    /// 2 sigma^2 (x - delta) + (x - delta') ((x - delta)^2 + chi^2) = 0,
    /// which changes sign between the two centers.
    pub fn peak_offset(&self) -> f64 {
        let (dl, dg, s2, c2) = (self.delta, self.delta_prime, self.sigma * self.sigma, self.chi * self.chi);
        let g = |x: f64| 2.0 * s2 * (x - dl) + (x - dg) * ((x - dl).powi(2) + c2);
        let (mut lo, mut hi) = if dl <= dg { (dl, dg) } else { (dg, dl) };
        if hi - lo == 0.0 {
            return dl;
        }
        let up = g(hi) > g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (g(mid) > 0.0) == up {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Lorentzian density L(lambda - a - delta; chi), integrates to one.
pub fn lorentz_density(lambda: f64, a: f64, p: &LorentzParams) -> f64 {
    lorentz(lambda - a - p.delta, p.chi)
}

/// Gaussian density G(lambda - a - delta'; sigma), integrates to one.
pub fn gauss_density(lambda: f64, a: f64, p: &GaussParams) -> f64 {
    gauss(lambda - a - p.delta_prime, p.sigma)
}

/// exp(S) p for the LG ansatz: G(lambda - a - delta') L(lambda - a - delta) / V.
pub fn lg_density(lambda: f64, a: f64, vp: &VoigtParams) -> f64 {
    let x = lambda - a;
    gauss(x - vp.delta_prime, vp.sigma) * lorentz(x - vp.delta, vp.chi) / vp.norm()
}

/// p(lambda) for the LG ansatz given the entropy S(lambda).
pub fn eval_lg(lambda: f64, a: f64, vp: &VoigtParams, entropy_at: f64) -> f64 {
    lg_density(lambda, a, vp) * (-entropy_at).exp()
}

/// One partner in a self-energy sum: bare energy, ansatz and |V|^2 weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgPartner {
    pub a: f64,
    pub params: VoigtParams,
    pub weight: f64,
}

/// Contribution of one LG partner, Re G + i Im G at real lambda.
///
/// Uses delta w = [w(u) - w(A)] / Re w(A) with u = (lambda - a - delta')/(sqrt 2 sigma)
/// and A = (delta - delta' + i chi)/(sqrt 2 sigma):
/// G = W [ (1 + Re dw) / (dl - i chi) - Re(dw / (dl - i chi)) ].
pub fn lg_partner_self_energy(lambda: f64, partner: &LgPartner) -> Complex64 {
    let vp = &partner.params;
    let s = SQRT_2 * vp.sigma;
    let dl = lambda - partner.a - vp.delta;
    let wa = faddeeva_upper(Complex64::new((vp.delta - vp.delta_prime) / s, vp.chi / s));
    let wu = faddeeva_upper(Complex64::new((lambda - partner.a - vp.delta_prime) / s, 0.0));
    let dw = (wu - wa) / wa.re;
    let inv = Complex64::new(dl, -vp.chi).inv();
    partner.weight * ((1.0 + dw.re) * inv - Complex64::new((dw * inv).re, 0.0))
}

/// Mean-field self-energy of LG partners, Re G + i Im G (Im G >= 0),
/// evaluated with Faddeeva differences only.
pub fn lg_self_energy_rhs(lambda: f64, partners: &[LgPartner]) -> Complex64 {
    partners.iter().map(|p| lg_partner_self_energy(lambda, p)).sum()
}

/// Lorentzian partners: sum W / (dl - i chi).
pub fn lorentz_self_energy_rhs(lambda: f64, partners: &[(f64, LorentzParams, f64)]) -> Complex64 {
    partners.iter().map(|(a, p, w)| *w * Complex64::new(lambda - a - p.delta, -p.chi).inv()).sum()
}

/// One Faddeeva window i chi w(-(lambda - center)/(sqrt 2 sigma)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub chi: f64,
    pub sigma: f64,
    pub center: f64,
}

impl Window {
    /// f(lambda) = w(-(lambda - center)/(sqrt 2 sigma)); Re f >= 0.
    pub fn shape(&self, lambda: f64) -> Complex64 {
        let u = (lambda - self.center) / (SQRT_2 * self.sigma);
        // w(-x) = conj(w(x)) on the real axis
        faddeeva_upper(Complex64::new(u, 0.0)).conj()
    }

    pub fn value(&self, lambda: f64) -> Complex64 {
        Complex64::new(0.0, self.chi) * self.shape(lambda)
    }
}

/// Effective self-energy G = delta_eff - vdiag + i chi_eff w(...) (+ second window).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSelfEnergy {
    pub delta_eff: f64,
    pub chi_eff: f64,
    pub sigma: f64,
    /// Absolute window center, a + delta'.
    pub center: f64,
    pub vdiag: f64,
    pub second: Option<Window>,
}

impl EffectiveSelfEnergy {
    pub fn new(delta_eff: f64, chi_eff: f64, sigma: f64, center: f64) -> Result<Self> {
        let e = Self { delta_eff, chi_eff, sigma, center, vdiag: 0.0, second: None };
        e.validate()?;
        Ok(e)
    }

    pub fn with_second(mut self, w: Window) -> Result<Self> {
        self.second = Some(w);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |c: f64, s: f64| c > 0.0 && c.is_finite() && s > 0.0;
        if !ok(self.chi_eff, self.sigma) || self.second.is_some_and(|w| !ok(w.chi, w.sigma)) {
            return Err(Error::Domain(format!("effective self-energy needs chi, sigma > 0: {self:?}")));
        }
        Ok(())
    }

    pub fn windows(&self) -> Vec<Window> {
        let mut out = vec![Window { chi: self.chi_eff, sigma: self.sigma, center: self.center }];
        out.extend(self.second);
        out
    }

    /// Sigma(lambda), the frequency-dependent part.
    pub fn sigma_part(&self, lambda: f64) -> Complex64 {
        self.windows().iter().map(|w| w.value(lambda)).sum()
    }
}

/// G(lambda) = delta_eff - vdiag + Sigma(lambda).
pub fn eff_self_energy(lambda: f64, e: &EffectiveSelfEnergy) -> Complex64 {
    Complex64::new(e.delta_eff - e.vdiag, 0.0) + e.sigma_part(lambda)
}

/// exp(S) p = (1/pi) Im 1/(lambda - a - delta_eff - Sigma(lambda)).
pub fn eff_spectral_function(lambda: f64, a: f64, e: &EffectiveSelfEnergy) -> f64 {
    let d = Complex64::new(lambda - a - e.delta_eff, 0.0) - e.sigma_part(lambda);
    d.inv().im / PI
}

/// Writes `shell,a,chi,delta,sigma,delta_prime,residual` rows.
pub fn params_csv(rows: &[(f64, VoigtParams, f64)]) -> String {
    let mut s = String::from("shell,a,chi,delta,sigma,delta_prime,residual\n");
    for (k, (a, p, r)) in rows.iter().enumerate() {
        s.push_str(&format!(
            "{k},{a:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{r:.6e}\n",
            p.chi, p.delta, p.sigma, p.delta_prime
        ));
    }
    s
}
