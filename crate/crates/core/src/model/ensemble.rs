use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CoupledSystem;
use crate::error::{Error, Result};

/// Piecewise-linear table y(x) on sorted knots, clamped outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1D {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Table1D {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Shape("table needs matching x, y with at least two knots".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("table knots must increase".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Domain("table entries must be finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![value, value])
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|v| *v <= t) - 1;
        let s = (t - self.x[k]) / (self.x[k + 1] - self.x[k]);
        self.y[k] + s * (self.y[k + 1] - self.y[k])
    }
}

/// f^2(eps, delta): envelope of the squared coupling, depending on the
/// energy difference `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandProfile {
    Constant { amplitude: f64 },
    Gaussian { amplitude: f64, width: f64 },
    Box { amplitude: f64, half_width: f64 },
    Exponential { amplitude: f64, scale: f64 },
}

impl BandProfile {
    pub fn eval(&self, _eps: f64, delta: f64) -> f64 {
        match *self {
            BandProfile::Constant { amplitude } => amplitude,
            BandProfile::Gaussian { amplitude, width } => amplitude * (-0.5 * (delta / width).powi(2)).exp(),
            BandProfile::Box { amplitude, half_width } => {
                if delta.abs() <= half_width {
                    amplitude
                } else {
                    0.0
                }
            }
            BandProfile::Exponential { amplitude, scale } => amplitude * (-delta.abs() / scale).exp(),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            BandProfile::Constant { amplitude }
            | BandProfile::Gaussian { amplitude, .. }
            | BandProfile::Box { amplitude, .. }
            | BandProfile::Exponential { amplitude, .. } => amplitude,
        }
    }

    /// Whether f^2 decays in |delta|.
    pub fn decays(&self) -> bool {
        !matches!(self, BandProfile::Constant { .. })
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            BandProfile::Constant { amplitude } => amplitude >= 0.0,
            BandProfile::Gaussian { amplitude, width } => amplitude >= 0.0 && width > 0.0,
            BandProfile::Box { amplitude, half_width } => amplitude >= 0.0 && half_width > 0.0,
            BandProfile::Exponential { amplitude, scale } => amplitude >= 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid band profile {self:?}")))
        }
    }
}

/// Log density of states S(eps), coupling envelope f^2 and RNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleProfile {
    pub entropy: Table1D,
    pub bandwidth: BandProfile,
    pub seed: u64,
}

impl EnsembleProfile {
    /// Flat density of `dim` states on [lo, hi].
    pub fn flat(lo: f64, hi: f64, dim: usize, bandwidth: BandProfile, seed: u64) -> Result<Self> {
        let s = (dim as f64 / (hi - lo)).ln();
        Ok(Self { entropy: Table1D::constant(lo, hi, s)?, bandwidth, seed })
    }

    /// Gaussian density of `dim` states with standard deviation `width`,
    /// tabulated on +-`cut` widths.
    pub fn gaussian_dos(
        center: f64,
        width: f64,
        cut: f64,
        dim: usize,
        bandwidth: BandProfile,
        seed: u64,
    ) -> Result<Self> {
        let knots = 401;
        let lo = center - cut * width;
        let hi = center + cut * width;
        let x: Vec<f64> = crate::grid::uniform(lo, hi, knots);
        let norm = dim as f64 / (width * (2.0 * std::f64::consts::PI).sqrt());
        let y = x.iter().map(|e| norm.ln() - 0.5 * ((e - center) / width).powi(2)).collect();
        let mut p = Self { entropy: Table1D::new(x, y)?, bandwidth, seed };
        // rescale so the truncated mass is exactly dim
        let shift = (dim as f64 / p.mass()).ln();
        p.entropy.y.iter_mut().for_each(|v| *v += shift);
        Ok(p)
    }

    pub fn entropy_at(&self, eps: f64) -> f64 {
        self.entropy.eval(eps)
    }

    /// E|V|^2 = exp(-S(eps+)) f^2(eps+, delta).
    pub fn mean_coupling_sq(&self, eps_plus: f64, delta: f64) -> f64 {
        (-self.entropy_at(eps_plus)).exp() * self.bandwidth.eval(eps_plus, delta)
    }

    /// Integral of exp(S) over the table support (exact for piecewise-linear S).
    pub fn mass(&self) -> f64 {
        let t = &self.entropy;
        (0..t.x.len() - 1).map(|k| segment_mass(t.x[k], t.x[k + 1], t.y[k], t.y[k + 1], t.x[k + 1])).sum()
    }

    /// Inverse of the cumulative state count.
    fn inverse_cdf(&self, target: f64) -> f64 {
        let t = &self.entropy;
        let mut acc = 0.0;
        for k in 0..t.x.len() - 1 {
            let (x0, x1, s0, s1) = (t.x[k], t.x[k + 1], t.y[k], t.y[k + 1]);
            let m = segment_mass(x0, x1, s0, s1, x1);
            if acc + m >= target || k == t.x.len() - 2 {
                let r = (target - acc).max(0.0);
                let slope = (s1 - s0) / (x1 - x0);
                let e0 = s0.exp();
                let x = if slope.abs() < 1e-12 {
                    x0 + r / e0
                } else {
                    x0 + (1.0 + slope * r / e0).max(f64::MIN_POSITIVE).ln() / slope
                };
                return x.clamp(x0, x1);
            }
            acc += m;
        }
        unreachable!()
    }
}

fn segment_mass(x0: f64, x1: f64, s0: f64, s1: f64, upto: f64) -> f64 {
    let slope = (s1 - s0) / (x1 - x0);
    let d = upto - x0;
    if slope.abs() < 1e-12 {
        s0.exp() * d
    } else {
        s0.exp() * ((slope * d).exp_m1()) / slope
    }
}

/// Random coupled system with |V_mn|^2 = exp(-S(eps+)) f^2(eps+, delta) R^2,
/// R standard normal, energies stratified-sampled from exp(S).
pub fn build_banded_ensemble(dim: usize, profile: &EnsembleProfile) -> Result<CoupledSystem> {
    if dim < 4 {
        return Err(Error::Size(format!("ensemble dimension {dim} < 4")));
    }
    profile.bandwidth.validate()?;
    let mass = profile.mass();
    if ((mass - dim as f64) / dim as f64).abs() > 0.05 {
        return Err(Error::Config(format!("entropy profile holds {mass:.2} states but dim = {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let mut a: Vec<f64> = (0..dim)
        .map(|k| {
            let u: f64 = rng.gen();
            profile.inverse_cdf(mass * (k as f64 + u) / dim as f64)
        })
        .collect();
    a.sort_by(f64::total_cmp);
    let mut v = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let r: f64 = rng.sample(StandardNormal);
            let var = profile.mean_coupling_sq(0.5 * (a[i] + a[j]), a[i] - a[j]);
            let x = var.sqrt() * r;
            v[(i, j)] = x;
            v[(j, i)] = x;
        }
    }
    let mut sys = CoupledSystem::new(a, vec![0.0; dim], v, format!("banded ensemble dim={dim}"))?;
    sys.seed = Some(profile.seed);
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_envelope_gives_zero_coupling() {
        let p = EnsembleProfile::flat(-1.0, 1.0, 50, BandProfile::Constant { amplitude: 0.0 }, 1).unwrap();
        assert!(build_banded_ensemble(50, &p).unwrap().is_uncoupled());
    }

    #[test]
    fn mass_mismatch_is_a_config_error() {
        let p = EnsembleProfile::flat(-1.0, 1.0, 50, BandProfile::Constant { amplitude: 1.0 }, 1).unwrap();
        assert!(matches!(build_banded_ensemble(80, &p), Err(Error::Config(_))));
    }

    #[test]
    fn gaussian_profile_mass_and_quantiles() {
        let band = BandProfile::Gaussian { amplitude: 1.0, width: 0.5 };
        let p = EnsembleProfile::gaussian_dos(0.0, 1.0, 4.0, 300, band, 3).unwrap();
        assert!((p.mass() - 300.0).abs() < 1e-9);
        assert!(p.inverse_cdf(150.0).abs() < 1e-9);
        let s = build_banded_ensemble(300, &p).unwrap();
        let mean = s.a.iter().sum::<f64>() / 300.0;
        assert!(mean.abs() < 0.05);
    }
}
