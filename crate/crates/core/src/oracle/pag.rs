//! Reconstruction of overlaps from the exact self-energy.
//!
//! p_n is recovered as the integral over the level's bin (midpoint to
//! midpoint, outer bins unbounded) of (1/pi) Im 1/(x - a - V_d - G(x - i eta)).
//! The bin width plays the role of 1/exp(S(lambda_n)). Exactly degenerate
//! levels share one bin and are compared as a cluster.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::self_energy::self_energy_exact;
use super::spectrum::Spectrum;
use crate::error::Result;
use crate::model::CoupledSystem;
use crate::specfun::quad::gauss_legendre;

#[derive(Debug, Clone, Serialize)]
pub struct PagLevel {
    pub eta: f64,
    /// max over clusters of |p_reconstructed - p_exact|.
    pub max_deviation: f64,
    pub reconstructed: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PagReport {
    pub basis_index: usize,
    /// First index of each cluster of degenerate eigenvalues.
    pub cluster_starts: Vec<usize>,
    pub exact: Vec<f64>,
    pub levels: Vec<PagLevel>,
    /// Deviation strictly decreased at every halving of eta.
    pub monotone: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct PagOptions {
    /// eta of the first level, as a fraction of the spectral span.
    pub eta_fraction: f64,
    pub halvings: usize,
    pub panels: usize,
    pub nodes: usize,
}

impl Default for PagOptions {
    fn default() -> Self {
        Self { eta_fraction: 1e-6, halvings: 3, panels: 8, nodes: 24 }
    }
}

fn clusters(eigs: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=eigs.len() {
        if k == eigs.len() || eigs[k] - eigs[k - 1] > tol {
            out.push((start, k));
            start = k;
        }
    }
    out
}

pub fn verify_pag(sys: &CoupledSystem, spec: &Spectrum, idx: usize) -> Result<PagReport> {
    verify_pag_with(sys, spec, idx, PagOptions::default())
}

pub fn verify_pag_with(sys: &CoupledSystem, spec: &Spectrum, idx: usize, opts: PagOptions) -> Result<PagReport> {
    let eigs = &spec.eigenvalues;
    let span = spec.span().max(1e-300);
    let groups = clusters(eigs, 1e-10 * span.max(1.0));
    let u = &spec.eigenvectors;
    let exact: Vec<f64> = groups.iter().map(|&(s, e)| (s..e).map(|n| u[(idx, n)] * u[(idx, n)]).sum()).collect();
    let e0 = sys.diagonal_energy(idx);
    let (gx, gw) = gauss_legendre(opts.nodes);
    let mut levels = Vec::new();
    for h in 0..=opts.halvings {
        let eta = opts.eta_fraction * span / (1u64 << h) as f64;
        let rec: Vec<f64> = groups
            .par_iter()
            .enumerate()
            .map(|(g, &(s, e))| -> Result<f64> {
                let center = 0.5 * (eigs[s] + eigs[e - 1]);
                let lo = if g == 0 { f64::NEG_INFINITY } else { 0.5 * (eigs[s - 1] + eigs[s]) };
                let hi = if g + 1 == groups.len() { f64::INFINITY } else { 0.5 * (eigs[e - 1] + eigs[e]) };
                let t0 = if lo.is_finite() { ((lo - center) / eta).atan() } else { -FRAC_PI_2 };
                let t1 = if hi.is_finite() { ((hi - center) / eta).atan() } else { FRAC_PI_2 };
                // x = center + eta tan(theta) flattens the level's own peak
                let mut acc = 0.0;
                let width = (t1 - t0) / opts.panels as f64;
                for p in 0..opts.panels {
                    let a = t0 + p as f64 * width;
                    for (x, w) in gx.iter().zip(&gw) {
                        let th = a + 0.5 * width * (x + 1.0);
                        let x_re = center + eta * th.tan();
                        let z = Complex64::new(x_re, -eta);
                        let g = self_energy_exact(sys, spec, idx, z)?.total;
                        let r = 1.0 / (z - e0 - g);
                        let jac = eta / th.cos().powi(2);
                        acc += 0.5 * width * w * r.im * jac;
                    }
                }
                Ok(acc / std::f64::consts::PI)
            })
            .collect::<Result<_>>()?;
        let max_deviation = rec.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        levels.push(PagLevel { eta, max_deviation, reconstructed: rec });
    }
    let monotone = levels.windows(2).all(|w| w[1].max_deviation < w[0].max_deviation);
    Ok(PagReport { basis_index: idx, cluster_starts: groups.iter().map(|g| g.0).collect(), exact, levels, monotone })
}
