//! Exact self-energy of one basis state.
//!
//! With |v> = V|phi> (no |phi> component) and Q the projector off |phi>,
//! the self-energy closing R = 1 / (z - a - V_d - G) is the Feshbach form
//! G = <v| (z - QHQ)^-1 |v>. It is evaluated from the full spectrum through
//! G = m / R with m = <v| (z - H)^-1 |phi>, and split into the diagonal
//! (OD) and cross (CC) parts of the projected resolvent.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::Spectrum;
use crate::error::{Error, Result};
use crate::model::{CoupledSystem, EntropyEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergySample {
    pub z: Complex64,
    pub total: Complex64,
    pub od: Complex64,
    pub cc: Complex64,
    pub third: Complex64,
    /// <v| (z - H)^-1 |v>, which has residue |<psi_n|v>|^2 at each lambda_n.
    pub sandwich: Complex64,
    pub resolvent: Complex64,
}

/// Indices coupled to `idx`, with the couplings V_{nu, idx}.
fn neighbours(sys: &CoupledSystem, idx: usize) -> Vec<(usize, f64)> {
    (0..sys.dim())
        .filter_map(|nu| {
            let v = sys.vcoupling[(nu, idx)];
            (v != 0.0).then_some((nu, v))
        })
        .collect()
}

/// <psi_n| V |phi_idx> for every n.
pub fn coupling_amplitudes(sys: &CoupledSystem, spec: &Spectrum, idx: usize) -> Vec<f64> {
    let nb = neighbours(sys, idx);
    let u = &spec.eigenvectors;
    (0..spec.dim()).map(|n| nb.iter().map(|&(nu, v)| u[(nu, n)] * v).sum()).collect()
}

fn check(sys: &CoupledSystem, spec: &Spectrum, idx: usize, z: Complex64) -> Result<()> {
    if sys.dim() != spec.dim() {
        return Err(Error::Shape("system and spectrum dimensions differ".into()));
    }
    if idx >= sys.dim() {
        return Err(Error::Domain(format!("basis index {idx} out of range")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite z = {z}")));
    }
    spec.check_pole(z)
}

pub fn self_energy_exact(sys: &CoupledSystem, spec: &Spectrum, idx: usize, z: Complex64) -> Result<SelfEnergySample> {
    check(sys, spec, idx, z)?;
    let u = &spec.eigenvectors;
    let d: Vec<Complex64> = spec.eigenvalues.iter().map(|l| 1.0 / (z - l)).collect();
    let c = coupling_amplitudes(sys, spec, idx);
    let mut r = Complex64::new(0.0, 0.0);
    let mut m = Complex64::new(0.0, 0.0);
    let mut k = Complex64::new(0.0, 0.0);
    for n in 0..spec.dim() {
        let un = u[(idx, n)];
        r += un * un * d[n];
        m += c[n] * un * d[n];
        k += c[n] * c[n] * d[n];
    }
    if r == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("resolvent vanishes".into()));
    }
    let total = if k == Complex64::new(0.0, 0.0) { k } else { m / r };

    let nb = neighbours(sys, idx);
    // diagonal resolvents G_nu,nu and mixed G_nu,idx of the full H
    let diag: Vec<(Complex64, Complex64)> = nb
        .par_iter()
        .map(|&(nu, _)| {
            let mut gnn = Complex64::new(0.0, 0.0);
            let mut gnm = Complex64::new(0.0, 0.0);
            for n in 0..spec.dim() {
                let a = u[(nu, n)];
                gnn += a * a * d[n];
                gnm += a * u[(idx, n)] * d[n];
            }
            (gnn, gnm)
        })
        .collect();
    let od: Complex64 = nb.iter().zip(&diag).map(|(&(_, v), &(gnn, gnm))| v * v * (gnn - gnm * gnm / r)).sum();

    let third: Complex64 = nb
        .par_iter()
        .zip(&diag)
        .map(|(&(xi, vx), &(rx, _))| {
            let inner: Complex64 =
                nb.iter().zip(&diag).map(|(&(nu, vn), &(rn, _))| sys.vcoupling[(xi, nu)] * vn * rn).sum();
            vx * rx * inner
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();

    Ok(SelfEnergySample { z, total, od, cc: total - od, third, sandwich: k, resolvent: r })
}

/// Cross term as the explicit double sum over distinct coupled pairs of
/// projected resolvent elements.
pub fn cc_direct(sys: &CoupledSystem, spec: &Spectrum, idx: usize, z: Complex64) -> Result<Complex64> {
    check(sys, spec, idx, z)?;
    let nb = neighbours(sys, idx);
    let g = |i: usize, j: usize| spec.resolvent_element(i, j, z);
    let r = g(idx, idx);
    let to_idx: Vec<Complex64> = nb.iter().map(|&(nu, _)| g(nu, idx)).collect();
    let s: Complex64 = (0..nb.len())
        .into_par_iter()
        .map(|a| {
            let (nu, vn) = nb[a];
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..nb.len() {
                if a == b {
                    continue;
                }
                let (xi, vx) = nb[b];
                acc += vn * vx * (g(nu, xi) - to_idx[a] * to_idx[b] / r);
            }
            acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(s)
}

/// (1/pi) Im G at lambda_n from the coherent amplitude:
/// |<psi_n| V |phi_idx>|^2 exp(S(lambda_n)).
pub fn im_g_coherent(
    sys: &CoupledSystem,
    spec: &Spectrum,
    idx: usize,
    n: usize,
    entropy: &EntropyEstimate,
) -> Result<f64> {
    if n >= spec.dim() || idx >= sys.dim() {
        return Err(Error::Domain(format!("index out of range (idx {idx}, n {n})")));
    }
    let u = &spec.eigenvectors;
    let c: f64 = (0..sys.dim()).map(|nu| sys.vcoupling[(nu, idx)] * u[(nu, n)]).sum();
    Ok(c * c * entropy.density_at(spec.eigenvalues[n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::diagonalize;
    use nalgebra::DMatrix;

    #[test]
    fn uncoupled_has_zero_self_energy() {
        let sys = CoupledSystem::new(vec![0.0, 1.0, 2.0], vec![0.1; 3], DMatrix::zeros(3, 3), "u").unwrap();
        let spec = diagonalize(&sys).unwrap();
        let s = self_energy_exact(&sys, &spec, 1, Complex64::new(0.5, -0.1)).unwrap();
        assert_eq!(s.total, Complex64::new(0.0, 0.0));
        assert_eq!(s.od, Complex64::new(0.0, 0.0));
        assert_eq!(s.third, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn two_level_closed_form() {
        let v = 0.3;
        let sys =
            CoupledSystem::new(vec![0.0, 0.5], vec![0.0; 2], DMatrix::from_row_slice(2, 2, &[0.0, v, v, 0.0]), "2")
                .unwrap();
        let spec = diagonalize(&sys).unwrap();
        let z = Complex64::new(0.2, -0.05);
        let s = self_energy_exact(&sys, &spec, 0, z).unwrap();
        let want = v * v / (z - 0.5);
        assert!((s.total - want).norm() < 1e-14);
        assert!(s.cc.norm() < 1e-14);
        assert!((s.resolvent * (z - s.total) - 1.0).norm() < 1e-13);
    }
}
