use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CoupledSystem, EnsembleProfile};

/// One distribution curve shared by `multiplicity` equivalent states.
#[derive(Debug, Clone, Serialize)]
pub struct Channel {
    /// a + V_d of the represented states.
    pub center: f64,
    /// V_d part of `center`.
    pub vdiag: f64,
    pub multiplicity: f64,
    /// (channel, W): squared couplings summed over the target channel.
    pub couplings: Vec<(usize, f64)>,
    /// Basis indices represented, when built from a concrete system.
    pub members: Vec<usize>,
}

/// A closed set of mean-field equations.
#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldProblem {
    pub channels: Vec<Channel>,
}

impl MeanFieldProblem {
    /// One channel per basis state, W = |V|^2.
    pub fn from_system(sys: &CoupledSystem) -> Result<Self> {
        let n = sys.dim();
        let channels = (0..n)
            .map(|k| Channel {
                center: sys.diagonal_energy(k),
                vdiag: sys.vdiag[k],
                multiplicity: 1.0,
                couplings: (0..n)
                    .filter_map(|j| {
                        let v = sys.vcoupling[(k, j)];
                        (v != 0.0).then_some((j, v * v))
                    })
                    .collect(),
                members: vec![k],
            })
            .collect();
        Self::checked(channels)
    }

    /// States grouped into `n_shells` equal-width shells of unperturbed
    /// energy; each shell shares one curve and W is the member-averaged
    /// total squared coupling into each shell.
    pub fn from_system_shells(sys: &CoupledSystem, n_shells: usize) -> Result<Self> {
        if n_shells == 0 {
            return Err(Error::Config("n_shells must be positive".into()));
        }
        let n = sys.dim();
        let lo = sys.a[0];
        let hi = sys.a[n - 1];
        let width = ((hi - lo) / n_shells as f64).max(f64::MIN_POSITIVE);
        let shell = |e: f64| (((e - lo) / width).floor() as usize).min(n_shells - 1);
        let mut members = vec![Vec::new(); n_shells];
        for k in 0..n {
            members[shell(sys.a[k])].push(k);
        }
        let members: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
        let mut owner = vec![0; n];
        for (s, m) in members.iter().enumerate() {
            for &k in m {
                owner[k] = s;
            }
        }
        let channels = members
            .iter()
            .map(|m| {
                let mut w = vec![0.0; members.len()];
                for &k in m {
                    for j in 0..n {
                        let v = sys.vcoupling[(k, j)];
                        w[owner[j]] += v * v;
                    }
                }
                let size = m.len() as f64;
                Channel {
                    center: m.iter().map(|&k| sys.diagonal_energy(k)).sum::<f64>() / size,
                    vdiag: m.iter().map(|&k| sys.vdiag[k]).sum::<f64>() / size,
                    multiplicity: size,
                    couplings: w.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(t, w)| (t, w / size)).collect(),
                    members: m.clone(),
                }
            })
            .collect();
        Self::checked(channels)
    }

    /// Ensemble-averaged equations: `n_shells` shells over the support of
    /// S, couplings E|V|^2 = exp(-S) f^2 times the number of partners.
    pub fn from_ensemble(profile: &EnsembleProfile, n_shells: usize) -> Result<Self> {
        if n_shells == 0 {
            return Err(Error::Config("n_shells must be positive".into()));
        }
        let lo = profile.entropy.lo();
        let hi = profile.entropy.hi();
        let width = (hi - lo) / n_shells as f64;
        let sub = 64;
        let mut shells = Vec::new();
        for s in 0..n_shells {
            // midpoint rule for the shell's state count and mean energy
            let (mut mass, mut first) = (0.0, 0.0);
            for q in 0..sub {
                let e = lo + width * (s as f64 + (q as f64 + 0.5) / sub as f64);
                let d = profile.entropy_at(e).exp() * width / sub as f64;
                mass += d;
                first += d * e;
            }
            if mass > 0.0 {
                shells.push((first / mass, mass));
            }
        }
        let channels = shells
            .iter()
            .enumerate()
            .map(|(s, &(es, ms))| Channel {
                center: es,
                vdiag: 0.0,
                multiplicity: ms,
                couplings: shells
                    .iter()
                    .enumerate()
                    .filter_map(|(t, &(et, mt))| {
                        let partners = if s == t { (mt - 1.0).max(0.0) } else { mt };
                        let w = partners * profile.mean_coupling_sq(0.5 * (es + et), es - et);
                        (w > 0.0).then_some((t, w))
                    })
                    .collect(),
                members: Vec::new(),
            })
            .collect();
        Self::checked(channels)
    }

    /// A single degenerate channel coupled to itself with total strength g,
    /// so that G = g R.
    pub fn wide_band(g: f64, center: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::Degenerate(format!("wide-band strength g = {g}")));
        }
        Ok(Self {
            channels: vec![Channel {
                center,
                vdiag: 0.0,
                multiplicity: 1.0,
                couplings: vec![(0, g)],
                members: Vec::new(),
            }],
        })
    }

    fn checked(channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Size("no channels".into()));
        }
        if channels.iter().all(|c| c.couplings.is_empty()) {
            return Err(Error::Degenerate("no channel is coupled; use the exact oracle for uncoupled systems".into()));
        }
        if channels.len() < 2 {
            return Err(Error::Size("mean-field equations need at least two channels".into()));
        }
        Ok(Self { channels })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Channel representing basis index `idx`, if any.
    pub fn channel_of(&self, idx: usize) -> Option<usize> {
        self.channels.iter().position(|c| c.members.contains(&idx))
    }

    pub fn total_coupling(&self, k: usize) -> f64 {
        self.channels[k].couplings.iter().map(|c| c.1).sum()
    }

    /// Golden-rule half-width pi (sum W / N) * mean density, capped by the
    /// strong-coupling scale sqrt(sum W).
    pub fn golden_rule_width(&self, k: usize) -> f64 {
        let lo = self.channels.iter().map(|c| c.center).fold(f64::INFINITY, f64::min);
        let hi = self.channels.iter().map(|c| c.center).fold(f64::NEG_INFINITY, f64::max);
        let g = self.total_coupling(k);
        let strong = g.sqrt();
        if hi - lo <= 0.0 {
            return strong;
        }
        let gr = std::f64::consts::PI * g / (hi - lo);
        gr.min(strong)
    }
}
