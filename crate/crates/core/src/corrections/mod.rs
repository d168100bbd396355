//! Third-order cross terms, parity diagnostics and the constant
//! self-energy analysis of the wide-band toy model.
//!
//! Sign conventions. With rho = exp(S) p and R(lambda - i0) = pi H[rho] + i pi rho,
//! `third_order_from_p` returns the hierarchy's difference form
//!
//! Im3 / pi^2 = W [rho_a H rho_b - rho_b H rho_a],
//! Re3 / pi^2 = W [H rho_a H rho_b - rho_a rho_b / pi^2],
//!
//! and `multiresolvent_im(a, b)` = pi^2 [rho_b H rho_a - rho_a H rho_b] = -Im3 / W.
//! The boundary value of the plain product R_a R_b is different: its
//! imaginary part is the sum pi^2 [rho_a H rho_b + rho_b H rho_a]. That
//! product is returned by `resolvent_product_boundary` and is the quantity
//! that agrees with exact resolvents.

mod scba;

pub use scba::{remedy_comparison, scba_constant, scba_with_third, RemedyReport, ScbaReport, ToyModel};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, GridFunction};
use crate::specfun::hilbert_on_grid;

use std::f64::consts::PI;

/// Third-order self-energy on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ThirdOrderTrace {
    pub lambdas: Vec<f64>,
    pub im3: Vec<f64>,
    pub re3: Vec<f64>,
    /// Aggregated V V V prefactor.
    pub coupling_weight: f64,
}

fn weighted(p: &GridFunction, density: &GridFunction) -> Result<GridFunction> {
    p.ensure_same_grid(density)?;
    p.with_values(p.values().iter().zip(density.values()).map(|(a, b)| a * b).collect())
}

/// Third-order term from two smoothed distributions (difference form,
/// second-order pole contribution omitted).
pub fn third_order_from_p(
    p_a: &GridFunction,
    p_b: &GridFunction,
    density: &GridFunction,
    weight: f64,
) -> Result<ThirdOrderTrace> {
    let ra = weighted(p_a, density)?;
    let rb = weighted(p_b, density)?;
    let ha = hilbert_on_grid(&ra);
    let hb = hilbert_on_grid(&rb);
    let pi2 = PI * PI;
    let n = ra.len();
    let (a, b, ha, hb) = (ra.values(), rb.values(), ha.values(), hb.values());
    let im3 = (0..n).map(|i| pi2 * weight * (a[i] * hb[i] - b[i] * ha[i])).collect();
    let re3 = (0..n).map(|i| weight * (pi2 * ha[i] * hb[i] - a[i] * b[i])).collect();
    Ok(ThirdOrderTrace { lambdas: ra.lambdas().to_vec(), im3, re3, coupling_weight: weight })
}

/// pi^2 [rho_b H rho_a - rho_a H rho_b], the hierarchy's imaginary part of R_a R_b.
pub fn multiresolvent_im(p_a: &GridFunction, p_b: &GridFunction, density: &GridFunction) -> Result<GridFunction> {
    let t = third_order_from_p(p_a, p_b, density, 1.0)?;
    GridFunction::new(t.lambdas, t.im3.iter().map(|v| -v).collect())
}

/// R_a(lambda - i0) R_b(lambda - i0) from the boundary values
/// R = pi H[rho] + i pi rho.
pub fn resolvent_product_boundary(
    p_a: &GridFunction,
    p_b: &GridFunction,
    density: &GridFunction,
) -> Result<Vec<Complex64>> {
    let ra = weighted(p_a, density)?;
    let rb = weighted(p_b, density)?;
    let ha = hilbert_on_grid(&ra);
    let hb = hilbert_on_grid(&rb);
    Ok((0..ra.len())
        .map(|i| {
            let za = PI * Complex64::new(ha.values()[i], ra.values()[i]);
            let zb = PI * Complex64::new(hb.values()[i], rb.values()[i]);
            za * zb
        })
        .collect())
}

/// Odd/even split and sign structure of a third-order trace about a peak.
#[derive(Debug, Clone, Serialize)]
pub struct SkewReport {
    pub center: f64,
    pub im3_odd_norm: f64,
    pub im3_even_norm: f64,
    pub re3_odd_norm: f64,
    pub re3_even_norm: f64,
    /// Sign of the first odd moment of Im3 about the center (0 when Im3 vanishes).
    pub skew_direction: i8,
    pub im3_sign_changes: usize,
    /// Im3 changes sign at least three times.
    pub branch_splitting: bool,
}

/// L2 norms of the odd and even parts of `y` about `center`, using the
/// grid points whose mirror image lies inside the grid.
pub fn parity_norms(lambdas: &[f64], y: &[f64], center: f64) -> Result<(f64, f64)> {
    let f = GridFunction::new(lambdas.to_vec(), y.to_vec())?;
    let (lo, hi) = (f.lo(), f.hi());
    let mut xs = Vec::new();
    let mut odd = Vec::new();
    let mut even = Vec::new();
    for &l in lambdas {
        let m = 2.0 * center - l;
        if m < lo || m > hi {
            continue;
        }
        let (u, v) = (f.interp_cubic(l), f.interp_cubic(m));
        xs.push(l);
        odd.push((0.5 * (u - v)).powi(2));
        even.push((0.5 * (u + v)).powi(2));
    }
    if xs.len() < 2 {
        return Err(Error::Domain(format!("center {center} leaves no mirrored points")));
    }
    Ok((trapezoid(&xs, &odd).sqrt(), trapezoid(&xs, &even).sqrt()))
}

/// Parity decomposition about the peak of `base` (any positive curve on the trace grid).
pub fn skewness_diagnostic(trace: &ThirdOrderTrace, base: &GridFunction) -> Result<SkewReport> {
    if base.lambdas() != trace.lambdas.as_slice() {
        return Err(Error::Shape("base distribution is not on the trace grid".into()));
    }
    let (ip, _) = base.argmax();
    let center = base.lambdas()[ip];
    let (io, ie) = parity_norms(&trace.lambdas, &trace.im3, center)?;
    let (ro, re) = parity_norms(&trace.lambdas, &trace.re3, center)?;
    let moment: Vec<f64> = trace.lambdas.iter().zip(&trace.im3).map(|(l, v)| (l - center) * v).collect();
    let m1 = trapezoid(&trace.lambdas, &moment);
    let scale = trace.im3.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let skew_direction = if scale == 0.0 || m1 == 0.0 { 0 } else { m1.signum() as i8 };
    let floor = 1e-9 * scale;
    let mut last = 0.0;
    let mut changes = 0;
    for &v in &trace.im3 {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            changes += 1;
        }
        last = v.signum();
    }
    Ok(SkewReport {
        center,
        im3_odd_norm: io,
        im3_even_norm: ie,
        re3_odd_norm: ro,
        re3_even_norm: re,
        skew_direction,
        im3_sign_changes: changes,
        branch_splitting: changes >= 3,
    })
}

/// exp(S) p rebuilt from a self-energy plus the third-order trace:
/// (1/pi) Im / ((lambda - e - Re)^2 + Im^2), with Im clipped at zero.
pub fn corrected_spectral_function(
    center: f64,
    im_g: &GridFunction,
    re_g: &GridFunction,
    trace: &ThirdOrderTrace,
) -> Result<GridFunction> {
    im_g.ensure_same_grid(re_g)?;
    if im_g.lambdas() != trace.lambdas.as_slice() {
        return Err(Error::Shape("trace is not on the self-energy grid".into()));
    }
    let v = (0..im_g.len())
        .map(|i| {
            let im = (im_g.values()[i] + trace.im3[i]).max(0.0);
            let x = im_g.lambdas()[i] - center - re_g.values()[i] - trace.re3[i];
            let d = x * x + im * im;
            if d == 0.0 {
                0.0
            } else {
                im / (PI * d)
            }
        })
        .collect();
    im_g.with_values(v)
}
