//! Mean-field self-consistency on an energy grid.
//!
//! Each channel k (a basis state, or a shell of equivalent states) carries a
//! weighted distribution rho_k = exp(S) p_k. One sweep of the map is
//!
//! Im G_k = pi sum_nu W_k,nu rho_nu,   Re G_k = H[Im G_k],
//! rho_k  = (1/pi) Im G_k / ((lambda - e_k - Re G_k)^2 + (Im G_k)^2),
//!
//! after which rho_k is renormalized to unit mass. The density of states
//! exp(S) never enters the map; it is only needed to report p = rho / exp(S).

mod problem;
mod solver;

pub use problem::{Channel, MeanFieldProblem};
pub use solver::{solve, MeanFieldSolution, SolverOptions};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::specfun::hilbert_on_grid;

/// Im G_idx(lambda) = pi sum_nu |V_idx,nu|^2 p_nu(lambda) exp(S(lambda)).
///
/// `neighbours` pairs a curve index in `p_family` with its squared coupling.
pub fn im_g_from_p(
    p_family: &[GridFunction],
    density: &GridFunction,
    neighbours: &[(usize, f64)],
) -> Result<GridFunction> {
    let n = density.len();
    let mut out = vec![0.0; n];
    for &(nu, w) in neighbours {
        let p = p_family.get(nu).ok_or_else(|| Error::Domain(format!("no distribution for channel {nu}")))?;
        p.ensure_same_grid(density)?;
        for (o, (pv, d)) in out.iter_mut().zip(p.values().iter().zip(density.values())) {
            *o += std::f64::consts::PI * w * pv * d;
        }
    }
    density.with_values(out)
}

/// Re G = H[Im G], the Kramers-Kronig partner on the same grid.
pub fn re_g_from_im(im_g: &GridFunction) -> GridFunction {
    hilbert_on_grid(im_g)
}

/// Clip counter and result of one distribution update.
#[derive(Debug, Clone)]
pub struct PUpdate {
    pub p: GridFunction,
    /// Grid points where Im G was negative and clipped to zero.
    pub clipped: usize,
    /// Integral of exp(S) p before renormalization.
    pub raw_mass: f64,
}

/// p = Im G / (pi exp(S) ((lambda - e - Re G)^2 + (Im G)^2)), with e = a + V_d.
///
/// Points where exp(S) vanishes get p = 0. With `renormalize` the result is
/// scaled to unit integral of exp(S) p.
pub fn p_update(
    im_g: &GridFunction,
    re_g: &GridFunction,
    center: f64,
    density: &GridFunction,
    renormalize: bool,
) -> Result<PUpdate> {
    im_g.ensure_same_grid(re_g)?;
    im_g.ensure_same_grid(density)?;
    if im_g.values().iter().all(|v| *v <= 0.0) {
        return Err(Error::Degenerate("Im G vanishes identically; the state is uncoupled".into()));
    }
    let mut clipped = 0;
    let rho: Vec<f64> = im_g
        .lambdas()
        .iter()
        .zip(im_g.values().iter().zip(re_g.values()))
        .map(|(&l, (&im, &re))| {
            let im = if im < 0.0 {
                clipped += 1;
                0.0
            } else {
                im
            };
            let x = l - center - re;
            let den = x * x + im * im;
            if den == 0.0 {
                0.0
            } else {
                im / (std::f64::consts::PI * den)
            }
        })
        .collect();
    let rho_fn = im_g.with_values(rho)?;
    let raw_mass = rho_fn.integrate();
    let scale = if renormalize && raw_mass > 0.0 { 1.0 / raw_mass } else { 1.0 };
    let p: Vec<f64> =
        rho_fn.values().iter().zip(density.values()).map(|(r, d)| if *d > 0.0 { scale * r / d } else { 0.0 }).collect();
    Ok(PUpdate { p: im_g.with_values(p)?, clipped, raw_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform;
    use crate::specfun::lorentzian;

    #[test]
    fn constant_self_energy_gives_a_lorentzian() {
        let x = uniform(-20.0, 20.0, 2001);
        let chi = 0.5;
        let im = GridFunction::from_fn(x.clone(), |_| chi).unwrap();
        let re = GridFunction::from_fn(x.clone(), |_| 0.0).unwrap();
        let dens = GridFunction::from_fn(x.clone(), |_| 4.0).unwrap();
        let u = p_update(&im, &re, 0.3, &dens, false).unwrap();
        for (l, p) in x.iter().zip(u.p.values()) {
            let want = lorentzian(l - 0.3, chi).unwrap() / 4.0;
            assert!((p - want).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_self_energy_is_degenerate() {
        let x = uniform(-1.0, 1.0, 11);
        let z = GridFunction::from_fn(x, |_| 0.0).unwrap();
        assert!(matches!(p_update(&z, &z, 0.0, &z, true), Err(Error::Degenerate(_))));
    }

    #[test]
    fn one_neighbour_sum() {
        let x = uniform(-5.0, 5.0, 101);
        let dens = GridFunction::from_fn(x.clone(), |_| 2.0).unwrap();
        let p = GridFunction::from_fn(x.clone(), |l| lorentzian(l, 0.7).unwrap() / 2.0).unwrap();
        let zero = GridFunction::from_fn(x.clone(), |_| 0.0).unwrap();
        let g = im_g_from_p(&[zero.clone(), p], &dens, &[(1, 0.09)]).unwrap();
        for (l, v) in x.iter().zip(g.values()) {
            let want = 0.09 * lorentzian(*l, 0.7).unwrap();
            assert!((v / std::f64::consts::PI - want).abs() < 1e-15);
        }
        let none = im_g_from_p(&[zero], &dens, &[]).unwrap();
        assert!(none.values().iter().all(|v| *v == 0.0));
    }
}
