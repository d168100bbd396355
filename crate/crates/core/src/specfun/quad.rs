//! Adaptive Gauss-Kronrod quadrature and Gauss-Legendre rules.
//!
//! Works pointwise on closures, independently of the grid-based transforms.

use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_INTERVALS: usize = 4000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive G7-K15 on [a, b] to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= tol || pieces.len() >= MAX_INTERVALS {
            let value = pieces.iter().map(|p| p.2).sum();
            return Quadrature { value, error: total_err };
        }
        let worst = pieces.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Integral over the whole real line, mapped through x = c + s t / (1 - t^2).
pub fn integrate_real_line(f: impl Fn(f64) -> f64, center: f64, scale: f64, tol: f64) -> Quadrature {
    let g = |t: f64| {
        let d = 1.0 - t * t;
        let x = center + scale * t / d;
        let jac = scale * (1.0 + t * t) / (d * d);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // split at the center so the densest region sits at a panel edge
    let left = integrate(g, -1.0, 0.0, 0.5 * tol);
    let right = integrate(g, 0.0, 1.0, 0.5 * tol);
    Quadrature { value: left.value + right.value, error: left.error + right.error }
}

/// Integral over [a, inf), mapped through x = a + s u / (1 - u).
pub fn integrate_half_line(f: impl Fn(f64) -> f64, a: f64, scale: f64, tol: f64) -> Quadrature {
    let g = |u: f64| {
        let d = 1.0 - u;
        let x = a + scale * u / d;
        let v = f(x) * scale / (d * d);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// (1/pi) PV of the integral of f(x) / (lambda - x) over the real line, via
/// the symmetric difference (f(lambda - u) - f(lambda + u)) / u on u > 0.
pub fn hilbert_real_line(f: impl Fn(f64) -> f64, lambda: f64, scale: f64, tol: f64) -> f64 {
    let g = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            (f(lambda - u) - f(lambda + u)) / u
        }
    };
    // resolve the core separately; the mapped tail handles the rest
    let core = integrate(g, 0.0, scale, 0.5 * tol);
    let tail = integrate_half_line(g, scale, scale, 0.5 * tol);
    (core.value + tail.value) / PI
}

/// PV of the integral of f(x) / (lambda - x) over [a, b], not divided by pi.
pub fn pv_interval(f: impl Fn(f64) -> f64, lambda: f64, a: f64, b: f64, tol: f64) -> f64 {
    assert!(a < lambda && lambda < b);
    let fl = f(lambda);
    let g = |x: f64| (f(x) - fl) / (lambda - x);
    let left = integrate(g, a, lambda, 0.5 * tol);
    let right = integrate(g, lambda, b, 0.5 * tol);
    left.value + right.value + fl * ((lambda - a) / (b - lambda)).ln()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_gaussians() {
        let q = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-13);
        assert!((q.value - 2.0).abs() < 1e-13);
        let g = integrate_real_line(|x| (-x * x).exp(), 0.0, 1.0, 1e-13);
        assert!((g.value - PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn legendre_rule_is_exact_to_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hilbert_of_lorentzian() {
        let chi = 0.5;
        for &l in &[-1.3, 0.0, 0.2, 2.0] {
            let h = hilbert_real_line(|x| chi / (PI * (chi * chi + x * x)), l, 1.0, 1e-12);
            let want = l / (PI * (l * l + chi * chi));
            assert!((h - want).abs() < 1e-9, "{l}: {h} vs {want}");
        }
    }
}
