use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const FORMAT: &str = "resolvent-spectra/coupled-system";
const VERSION: u32 = 1;

/// H = diag(a + vdiag) + V in the unperturbed basis.
///
/// `a` is sorted ascending and `vcoupling` is real symmetric with an
/// identically zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    pub a: Vec<f64>,
    pub vdiag: Vec<f64>,
    pub vcoupling: DMatrix<f64>,
    pub label: String,
    pub seed: Option<u64>,
}

impl CoupledSystem {
    pub fn new(a: Vec<f64>, vdiag: Vec<f64>, vcoupling: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        let sys = Self { a, vdiag, vcoupling, label: label.into(), seed: None };
        sys.validate()?;
        Ok(sys)
    }

    /// Builds from an arbitrary ordering of `a` by permuting into canonical order.
    pub fn from_unsorted(
        a: Vec<f64>,
        vdiag: Vec<f64>,
        vcoupling: DMatrix<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = a.len();
        if vdiag.len() != n || vcoupling.nrows() != n || vcoupling.ncols() != n {
            return Err(Error::Shape(format!("inconsistent sizes for dim {n}")));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(i.cmp(&j)));
        let a2 = perm.iter().map(|&i| a[i]).collect();
        let d2 = perm.iter().map(|&i| vdiag[i]).collect();
        let v2 = DMatrix::from_fn(n, n, |r, c| vcoupling[(perm[r], perm[c])]);
        Self::new(a2, d2, v2, label)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if n == 0 {
            return Err(Error::Size("empty system".into()));
        }
        if self.vdiag.len() != n || self.vcoupling.nrows() != n || self.vcoupling.ncols() != n {
            return Err(Error::Shape(format!(
                "a has {n} entries, vdiag {}, vcoupling {}x{}",
                self.vdiag.len(),
                self.vcoupling.nrows(),
                self.vcoupling.ncols()
            )));
        }
        if self.a.iter().chain(&self.vdiag).chain(self.vcoupling.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite entries in system".into()));
        }
        if self.a.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("unperturbed energies must be sorted ascending".into()));
        }
        let asym = self.hermiticity_defect();
        if asym > 0.0 {
            return Err(Error::NotHermitian(asym));
        }
        if (0..n).any(|i| self.vcoupling[(i, i)] != 0.0) {
            return Err(Error::Domain("coupling diagonal must be zero; use vdiag".into()));
        }
        Ok(())
    }

    /// max |V - V^T|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.vcoupling.nrows();
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                m = m.max((self.vcoupling[(i, j)] - self.vcoupling[(j, i)]).abs());
            }
        }
        m
    }

    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let mut h = self.vcoupling.clone();
        for i in 0..self.dim() {
            h[(i, i)] = self.a[i] + self.vdiag[i];
        }
        h
    }

    /// a_i + vdiag_i.
    pub fn diagonal_energy(&self, i: usize) -> f64 {
        self.a[i] + self.vdiag[i]
    }

    /// Same system with V -> s V (both diagonal and off-diagonal parts).
    pub fn scaled(&self, s: f64) -> CoupledSystem {
        CoupledSystem {
            a: self.a.clone(),
            vdiag: self.vdiag.iter().map(|v| s * v).collect(),
            vcoupling: &self.vcoupling * s,
            label: format!("{} (V x {s})", self.label),
            seed: self.seed,
        }
    }

    pub fn is_uncoupled(&self) -> bool {
        self.vcoupling.iter().all(|v| *v == 0.0)
    }

    fn payload(&self) -> Payload {
        Payload {
            format: FORMAT.into(),
            version: VERSION,
            label: self.label.clone(),
            dim: self.dim(),
            seed: self.seed,
            a: self.a.clone(),
            vdiag: self.vdiag.clone(),
            // row-major
            vcoupling: self.vcoupling.transpose().as_slice().to_vec(),
        }
    }

    /// Hex sha256 of the canonical JSON payload.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.payload()).expect("payload serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = SystemFile { payload: self.payload(), content_hash: self.content_hash() };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text)?;
        let p = file.payload;
        if p.format != FORMAT || p.version != VERSION {
            return Err(Error::Schema {
                path: "format".into(),
                message: format!("unsupported {} v{}", p.format, p.version),
            });
        }
        let n = p.dim;
        if p.vcoupling.len() != n * n {
            return Err(Error::Shape(format!("vcoupling has {} entries, want {}", p.vcoupling.len(), n * n)));
        }
        let v = DMatrix::from_row_slice(n, n, &p.vcoupling);
        let mut sys = Self::new(p.a, p.vdiag, v, p.label)?;
        sys.seed = p.seed;
        let h = sys.content_hash();
        if h != file.content_hash {
            return Err(Error::Schema {
                path: "content_hash".into(),
                message: format!("stored {} but contents hash to {h}", file.content_hash),
            });
        }
        Ok(sys)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Payload {
    format: String,
    version: u32,
    label: String,
    dim: usize,
    seed: Option<u64>,
    a: Vec<f64>,
    vdiag: Vec<f64>,
    vcoupling: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    #[serde(flatten)]
    payload: Payload,
    content_hash: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(v: f64) -> CoupledSystem {
        CoupledSystem::new(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            DMatrix::from_row_slice(2, 2, &[0.0, v, v, 0.0]),
            "two-level",
        )
        .unwrap()
    }

    #[test]
    fn rejects_asymmetric_and_unsorted() {
        let v = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(CoupledSystem::new(vec![0.0, 1.0], vec![0.0; 2], v, "x"), Err(Error::NotHermitian(_))));
        let v = DMatrix::zeros(2, 2);
        assert!(CoupledSystem::new(vec![1.0, 0.0], vec![0.0; 2], v.clone(), "x").is_err());
        let s = CoupledSystem::from_unsorted(vec![1.0, 0.0], vec![0.5, 0.0], v, "x").unwrap();
        assert_eq!(s.a, vec![0.0, 1.0]);
        assert_eq!(s.vdiag, vec![0.0, 0.5]);
    }

    #[test]
    fn json_round_trip_checks_hash() {
        let mut s = two_level(0.3);
        s.seed = Some(9);
        let text = s.to_json().unwrap();
        let back = CoupledSystem::from_json(&text).unwrap();
        assert_eq!(back, s);
        let tampered = text.replace("0.3", "0.4");
        assert!(matches!(CoupledSystem::from_json(&tampered), Err(Error::Schema { .. })));
    }
}
