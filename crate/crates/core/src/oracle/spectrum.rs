use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::CoupledSystem;

pub const MAX_DIM: usize = 1 << 14;

/// Eigenvalues (ascending) and eigenvectors (columns) of H.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Hash of the system this spectrum was computed from.
    pub system_hash: String,
}

/// p_n = |<psi_n|phi_idx>|^2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapSet {
    pub basis_index: usize,
    pub p: Vec<f64>,
}

pub fn diagonalize(sys: &CoupledSystem) -> Result<Spectrum> {
    let n = sys.dim();
    if n > MAX_DIM {
        return Err(Error::Size(format!("dimension {n} exceeds dense limit {MAX_DIM}")));
    }
    sys.validate()?;
    let eig = SymmetricEigen::new(sys.hamiltonian());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum { eigenvalues, eigenvectors, system_hash: sys.content_hash() })
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn span(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    pub fn mean_spacing(&self) -> f64 {
        self.span() / (self.dim().max(2) - 1) as f64
    }

    /// max_n ||H psi_n - lambda_n psi_n||.
    pub fn residual(&self, sys: &CoupledSystem) -> f64 {
        let h = sys.hamiltonian();
        let hu = &h * &self.eigenvectors;
        (0..self.dim())
            .map(|n| (hu.column(n) - self.eigenvectors.column(n) * self.eigenvalues[n]).norm())
            .fold(0.0, f64::max)
    }

    /// max |U^T U - 1|.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let mut m = 0.0_f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                m = m.max((g[(i, j)] - want).abs());
            }
        }
        m
    }

    fn check_index(&self, idx: usize) -> Result<()> {
        if idx >= self.dim() {
            return Err(Error::Domain(format!("basis index {idx} out of range 0..{}", self.dim())));
        }
        Ok(())
    }

    /// Nearest eigenvalue check shared by every evaluator at complex z.
    pub(crate) fn check_pole(&self, z: Complex64) -> Result<()> {
        if z.im != 0.0 {
            return Ok(());
        }
        let k = self.eigenvalues.partition_point(|l| *l < z.re);
        for j in [k.saturating_sub(1), k.min(self.dim() - 1)] {
            let l = self.eigenvalues[j];
            if (z.re - l).abs() <= f64::EPSILON * l.abs().max(1.0) {
                return Err(Error::Pole { z: format!("{z}"), pole: l });
            }
        }
        Ok(())
    }

    /// Squared overlaps of basis state `idx` with every eigenstate.
    pub fn weights(&self, idx: usize) -> Vec<f64> {
        self.eigenvectors.row(idx).iter().map(|u| u * u).collect()
    }

    /// Resolvent matrix element <phi_i| (z - H)^-1 |phi_j>.
    pub fn resolvent_element(&self, i: usize, j: usize, z: Complex64) -> Complex64 {
        let u = &self.eigenvectors;
        (0..self.dim()).map(|n| u[(i, n)] * u[(j, n)] / (z - self.eigenvalues[n])).sum()
    }
}

pub fn overlaps(spec: &Spectrum, idx: usize) -> Result<OverlapSet> {
    spec.check_index(idx)?;
    Ok(OverlapSet { basis_index: idx, p: spec.weights(idx) })
}

/// R(z) = sum_n p_n / (z - lambda_n).
pub fn resolvent_exact(spec: &Spectrum, idx: usize, z: Complex64) -> Result<Complex64> {
    spec.check_index(idx)?;
    spec.check_pole(z)?;
    Ok(spec.resolvent_element(idx, idx, z))
}
