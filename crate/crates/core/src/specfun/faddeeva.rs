//! Faddeeva function w(z) = exp(-z^2) erfc(-iz).
//!
//! Upper half-plane: Weideman's rational approximation for |z| < 8 and the
//! Laplace continued fraction beyond. Lower half-plane by reflection,
//! w(z) = 2 exp(-z^2) - w(-z).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const WEIDEMAN_N: usize = 40;
const CF_RADIUS: f64 = 8.0;
const CF_TERMS: usize = 40;
/// Largest exponent y^2 - x^2 allowed before exp(-z^2) overflows.
const MAX_EXPONENT: f64 = 700.0;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Weideman {
    l: f64,
    coeffs: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let t = l * (k as f64 * PI / (2 * m) as f64).tan();
                (k as f64, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        // cosine transform of the even sample sequence
        let coeffs = (1..=n)
            .map(|j| {
                let s: f64 = samples.iter().map(|&(k, f)| f * (PI * j as f64 * k / m as f64).cos()).sum();
                s / (2 * m) as f64
            })
            .collect();
        Weideman { l, coeffs }
    })
}

fn w_weideman(z: Complex64) -> Complex64 {
    let t = weideman();
    let iz = Complex64::i() * z;
    let denom = t.l - iz;
    let big_z = (t.l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in t.coeffs.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn w_continued_fraction(z: Complex64) -> Complex64 {
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=CF_TERMS).rev() {
        r = (0.5 * k as f64) / (z - r);
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / (z - r)
}

/// w(z) for Im z >= 0. Never fails.
pub fn faddeeva_upper(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0);
    let mut w = if z.norm() < CF_RADIUS { w_weideman(z) } else { w_continued_fraction(z) };
    if z.im == 0.0 {
        w.re = (-z.re * z.re).exp();
    }
    w
}

/// Faddeeva function on the whole complex plane.
///
/// Fails with a range error when exp(-z^2) would overflow, which only
/// happens deep in the lower half-plane.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.im >= 0.0 {
        return Ok(faddeeva_upper(z));
    }
    let exponent = z.im * z.im - z.re * z.re;
    if exponent > MAX_EXPONENT {
        return Err(Error::Range(format!("w({z}) overflows: exp({exponent:.1})")));
    }
    let e = (-z * z).exp();
    Ok(2.0 * e - faddeeva_upper(-z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_and_imaginary_unit() {
        assert_eq!(faddeeva(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let w = faddeeva(c(0.0, 1.0)).unwrap();
        assert!((w.re - 0.427_583_576_155_807).abs() < 1e-14);
        assert!(w.im.abs() < 1e-15);
    }

    #[test]
    fn real_axis_real_part_is_gaussian() {
        for i in 0..200 {
            let x = -10.0 + 0.1 * i as f64;
            let w = faddeeva(c(x, 0.0)).unwrap();
            assert!((w.re - (-x * x).exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn overflow_is_a_range_error() {
        assert!(matches!(faddeeva(c(1.0, -40.0)), Err(Error::Range(_))));
        assert!(faddeeva(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn branches_agree_at_the_switch_radius() {
        for k in 0..=16 {
            let th = PI * k as f64 / 16.0;
            let z = Complex64::from_polar(CF_RADIUS, th);
            let a = w_weideman(z);
            let b = w_continued_fraction(z);
            assert!((a - b).norm() / b.norm() < 1e-13, "theta {th}");
        }
    }
}
