//! Line shapes: Lorentzian, Gaussian, Voigt and its dispersion partner.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::faddeeva::faddeeva_upper;
use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Gaussian width `sigma` and Lorentzian half-width `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub sigma: f64,
    pub chi: f64,
}

impl ProfileParams {
    pub fn new(sigma: f64, chi: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::Domain(format!("chi must be positive, got {chi}")));
        }
        Ok(Self { sigma, chi })
    }
}

/// L(x; chi) = chi / (pi (chi^2 + x^2)).
pub fn lorentzian(x: f64, chi: f64) -> Result<f64> {
    if !(chi > 0.0) {
        return Err(Error::Domain(format!("chi must be positive, got {chi}")));
    }
    Ok(lorentz(x, chi))
}

/// G(x; sigma) = phi(x / sigma) / sigma with phi the standard normal density.
pub fn gaussian(x: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(gauss(x, sigma))
}

#[inline]
pub(crate) fn lorentz(x: f64, chi: f64) -> f64 {
    chi / (PI * (chi * chi + x * x))
}

#[inline]
pub(crate) fn gauss(x: f64, sigma: f64) -> f64 {
    let u = x / sigma;
    (-0.5 * u * u).exp() / (SQRT_2PI * sigma)
}

/// w((x + i chi) / (sqrt(2) sigma)) / (sqrt(2 pi) sigma) = V + iD.
pub fn voigt_complex(x: f64, p: &ProfileParams) -> Complex64 {
    let s = SQRT_2 * p.sigma;
    faddeeva_upper(Complex64::new(x / s, p.chi / s)) / (SQRT_2PI * p.sigma)
}

/// Voigt profile: convolution of G(.; sigma) and L(.; chi).
pub fn voigt(x: f64, p: &ProfileParams) -> f64 {
    voigt_complex(x, p).re
}

/// Dispersion profile, the Hilbert transform of the Voigt profile.
pub fn dispersion(x: f64, p: &ProfileParams) -> f64 {
    voigt_complex(x, p).im
}

/// D(x; sigma, 0): Hilbert transform of the bare Gaussian.
pub fn gaussian_dispersion(x: f64, sigma: f64) -> f64 {
    let s = SQRT_2 * sigma;
    faddeeva_upper(Complex64::new(x / s, 0.0)).im / (SQRT_2PI * sigma)
}

/// PV integral of G(l - mu1; sigma) L(l - mu2; chi) / (lambda' - l) over l,
/// divided by V(mu2 - mu1; sigma, chi).
pub fn voigt_hilbert_identity(lambda_prime: f64, mu1: f64, mu2: f64, p: &ProfileParams) -> f64 {
    let x0 = mu2 - mu1;
    let xp = lambda_prime - mu1;
    let delta = lambda_prime - mu2;
    let chi = p.chi;
    let w0 = voigt_complex(x0, p);
    let d_prime = gaussian_dispersion(xp, p.sigma);
    (delta + chi * (d_prime - w0.im) / w0.re) / (delta * delta + chi * chi)
}

/// The unnormalized PV integral itself (identity times V).
pub fn voigt_hilbert_integral(lambda_prime: f64, mu1: f64, mu2: f64, p: &ProfileParams) -> f64 {
    let x0 = mu2 - mu1;
    let xp = lambda_prime - mu1;
    let delta = lambda_prime - mu2;
    let chi = p.chi;
    let w0 = voigt_complex(x0, p);
    let d_prime = gaussian_dispersion(xp, p.sigma);
    (delta * w0.re + chi * (d_prime - w0.im)) / (delta * delta + chi * chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((lorentzian(0.0, 1.0).unwrap() - 1.0 / PI).abs() < 1e-16);
        assert!((lorentzian(1.0, 1.0).unwrap() - 0.5 / PI).abs() < 1e-16);
        assert!((gaussian(0.0, 1.0).unwrap() - 1.0 / SQRT_2PI).abs() < 1e-16);
        let s = 0.7;
        assert!((gaussian(s, s).unwrap() - (-0.5f64).exp() / (s * SQRT_2PI)).abs() < 1e-15);
        assert!(lorentzian(0.0, 0.0).is_err());
        assert!(gaussian(0.0, -1.0).is_err());
        assert!(ProfileParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn voigt_limits() {
        let chi = 0.8;
        let narrow = ProfileParams::new(1e-6 * chi, chi).unwrap();
        let l = lorentz(0.0, chi);
        assert!((voigt(0.0, &narrow) - l).abs() / l < 1e-5);

        let sigma = 1.3;
        let sharp = ProfileParams::new(sigma, 1e-8 * sigma).unwrap();
        for &x in &[0.0, 0.4, 1.1, 2.5] {
            let g = gauss(x, sigma);
            assert!((voigt(x, &sharp) - g).abs() / g < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn dispersion_vanishes_at_origin_and_for_wide_gaussians() {
        let p = ProfileParams::new(1.0, 0.3).unwrap();
        assert_eq!(dispersion(0.0, &p), 0.0);
        let wide = ProfileParams::new(1e6, 0.3).unwrap();
        assert!(dispersion(1.0, &wide).abs() < 1e-5);
    }

    #[test]
    fn identity_trivial_cases() {
        let p = ProfileParams::new(1.0, 0.3).unwrap();
        assert_eq!(voigt_hilbert_identity(0.4, 0.4, 0.4, &p), 0.0);
        let wide = ProfileParams::new(1e7, 0.3).unwrap();
        let (lp, mu2) = (0.5, 0.2);
        let d = lp - mu2;
        let want = d / (d * d + 0.09);
        assert!((voigt_hilbert_identity(lp, 0.0, mu2, &wide) - want).abs() < 1e-5);
    }
}
