#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use resolvent_spectra::model::CoupledSystem;

/// Dense random system: sorted uniform energies on [-1, 1], Gaussian
/// couplings of standard deviation `coupling`, small random diagonal shifts.
pub fn random_system(dim: usize, coupling: f64, seed: u64) -> CoupledSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    a.sort_by(f64::total_cmp);
    let vdiag = (0..dim).map(|_| 0.05 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut v = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let x: f64 = coupling * rng.sample::<f64, _>(StandardNormal);
            v[(i, j)] = x;
            v[(j, i)] = x;
        }
    }
    CoupledSystem::new(a, vdiag, v, format!("random dim={dim} seed={seed}")).unwrap()
}

/// Random points with |Im z| in [0.05, 0.5], real part across the spectrum.
pub fn random_z(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let im: f64 = rng.gen_range(0.05..0.5);
            let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            Complex64::new(rng.gen_range(-1.5..1.5), sign * im)
        })
        .collect()
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
