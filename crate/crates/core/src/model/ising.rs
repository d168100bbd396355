use nalgebra::DMatrix;

use super::CoupledSystem;
use crate::error::{Error, Result};

pub const MAX_SITES: usize = 14;

/// Open Ising chain, H0 = J sum z_i z_{i+1} + h sum z_i (diagonal),
/// V = g sum x_i (single spin flips).
///
/// Basis state `b` has spin +1 on site i when bit i of `b` is clear. States
/// are then sorted by unperturbed energy, ties broken by `b`.
pub fn build_ising_chain(n_sites: usize, j_zz: f64, h_z: f64, g_x: f64) -> Result<CoupledSystem> {
    if !(2..=MAX_SITES).contains(&n_sites) {
        return Err(Error::Size(format!("n_sites = {n_sites} outside 2..={MAX_SITES}")));
    }
    let dim = 1usize << n_sites;
    let spin = |b: usize, i: usize| if b >> i & 1 == 0 { 1.0 } else { -1.0 };
    let a: Vec<f64> = (0..dim)
        .map(|b| {
            let zz: f64 = (0..n_sites - 1).map(|i| spin(b, i) * spin(b, i + 1)).sum();
            let z: f64 = (0..n_sites).map(|i| spin(b, i)).sum();
            j_zz * zz + h_z * z
        })
        .collect();
    let mut v = DMatrix::zeros(dim, dim);
    if g_x != 0.0 {
        for b in 0..dim {
            for i in 0..n_sites {
                v[(b, b ^ (1 << i))] = g_x;
            }
        }
    }
    let label = format!("ising n={n_sites} J={j_zz} h={h_z} g={g_x}");
    CoupledSystem::from_unsorted(a, vec![0.0; dim], v, label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_classical() {
        let s = build_ising_chain(2, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(s.a, vec![-1.0, -1.0, 1.0, 1.0]);
        assert!(s.is_uncoupled());
    }

    #[test]
    fn single_flips() {
        let s = build_ising_chain(2, 1.0, 0.0, 1.0).unwrap();
        for r in 0..4 {
            let row: Vec<f64> = (0..4).map(|c| s.vcoupling[(r, c)]).filter(|v| *v != 0.0).collect();
            assert_eq!(row, vec![1.0, 1.0]);
        }
        assert_eq!(s.hermiticity_defect(), 0.0);
    }

    #[test]
    fn size_bounds() {
        assert!(build_ising_chain(1, 1.0, 0.0, 1.0).is_err());
        assert!(build_ising_chain(15, 1.0, 0.0, 1.0).is_err());
    }
}
