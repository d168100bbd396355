use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use resolvent_spectra::ansatz::{fit_lorentz, FitTarget};
use resolvent_spectra::grid::{symmetric, uniform};
use resolvent_spectra::meanfield::*;
use resolvent_spectra::model::*;
use resolvent_spectra::oracle::*;
use resolvent_spectra::specfun::{gaussian, lorentzian, voigt, voigt_hilbert_identity, ProfileParams};
use resolvent_spectra::{Error, GridFunction};

fn ensemble(dim: usize, seed: u64) -> CoupledSystem {
    let band = BandProfile::Gaussian { amplitude: 0.05, width: 1.0 };
    build_banded_ensemble(dim, &EnsembleProfile::flat(-1.0, 1.0, dim, band, seed).unwrap()).unwrap()
}

fn fine() -> SolverOptions {
    SolverOptions { grid_points: 2048, max_iter: 3000, ..Default::default() }
}

#[test]
fn re_g_of_a_lorentzian() {
    let (v2, l0, chi) = (0.3, 0.4, 0.5);
    let im =
        GridFunction::from_fn(uniform(-100.0, 100.0, 20_001), |l| PI * v2 * lorentzian(l - l0, chi).unwrap()).unwrap();
    let re = re_g_from_im(&im);
    for (i, &l) in im.lambdas().iter().enumerate() {
        if (l - l0).abs() < 3.0 {
            let d = l - l0;
            assert!((re.values()[i] - v2 * d / (d * d + chi * chi)).abs() < 2e-4, "{l}");
        }
    }
}

#[test]
fn re_g_vanishes_at_the_centre_of_an_even_im_g() {
    let im = GridFunction::from_fn(symmetric(0.7, 10.0, 2001), |l| gaussian(l - 0.7, 0.8).unwrap()).unwrap();
    let re = re_g_from_im(&im);
    assert!(re.values()[1000].abs() < 1e-12);
}

#[test]
fn re_g_of_a_voigt_numerator() {
    let p = ProfileParams::new(1.0, 0.3).unwrap();
    let (mu1, mu2) = (0.0, 0.2);
    let v = voigt(mu2 - mu1, &p);
    let im = GridFunction::from_fn(uniform(-50.0, 50.0, 20_001), |l| {
        PI * gaussian(l - mu1, 1.0).unwrap() * lorentzian(l - mu2, 0.3).unwrap()
    })
    .unwrap();
    let re = re_g_from_im(&im);
    for (i, &l) in im.lambdas().iter().enumerate() {
        if l.abs() < 3.0 && i % 10 == 0 {
            let want = v * voigt_hilbert_identity(l, mu1, mu2, &p);
            assert!((re.values()[i] - want).abs() < 1e-4, "{l}: {} vs {want}", re.values()[i]);
        }
    }
}

#[test]
fn p_update_tail_follows_the_golden_rule() {
    let x = uniform(-40.0, 40.0, 8001);
    let eps = 1e-3;
    let im = GridFunction::from_fn(x.clone(), |l| eps * (-0.01 * l * l).exp()).unwrap();
    let re = GridFunction::from_fn(x.clone(), |_| 0.0).unwrap();
    let dens = GridFunction::from_fn(x.clone(), |_| 3.0).unwrap();
    let u = p_update(&im, &re, 0.0, &dens, false).unwrap();
    for (i, &l) in x.iter().enumerate() {
        if l.abs() > 5.0 {
            let tail = im.values()[i] / (PI * 3.0 * l * l);
            assert!((u.p.values()[i] / tail - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn p_update_two_level_closed_form() {
    // partner state at 0.5 with a Lorentzian distribution; the self-energy
    // of state 0 is then v^2 / (lambda - 0.5 - i chi) and rho_0 follows in
    // closed form
    let (v, chi) = (0.3, 0.2);
    let x = uniform(-100.0, 100.0, 40_001);
    let im = GridFunction::from_fn(x.clone(), |l| PI * v * v * lorentzian(l - 0.5, chi).unwrap()).unwrap();
    let re = re_g_from_im(&im);
    let dens = GridFunction::from_fn(x.clone(), |_| 1.0).unwrap();
    let u = p_update(&im, &re, 0.0, &dens, false).unwrap();
    for (i, &l) in x.iter().enumerate() {
        if l.abs() < 2.0 && i % 20 == 0 {
            let g = v * v / Complex64::new(l - 0.5, -chi);
            let want = (1.0 / (Complex64::new(l, 0.0) - g)).im / PI;
            assert!((u.p.values()[i] - want).abs() < 1e-3 * want.max(0.1), "{l}");
        }
    }
}

#[test]
fn uncoupled_system_is_degenerate() {
    let sys = CoupledSystem::new(vec![0.0, 1.0, 2.0], vec![0.0; 3], DMatrix::zeros(3, 3), "u").unwrap();
    assert!(matches!(MeanFieldProblem::from_system(&sys), Err(Error::Degenerate(_))));
}

#[test]
fn converged_solution_is_certified_positive_and_normalized() {
    let sys = ensemble(50, 1);
    let problem = MeanFieldProblem::from_system(&sys).unwrap();
    let opts = fine();
    let sol = solve(&problem, &opts).unwrap();
    assert!(sol.converged && sol.residual <= opts.tol);
    let cert = sol.certificate(&problem, &opts);
    assert!(cert.iter().all(|c| *c <= 2.0 * opts.tol), "{cert:?}");
    for (rho, p) in sol.rho.iter().zip(&sol.p_of) {
        assert!(p.values().iter().all(|v| *v >= 0.0));
        assert!((rho.integrate() - 1.0).abs() <= 1e-6);
    }
    let again = solve(&problem, &opts).unwrap();
    assert_eq!(again.iterations, sol.iterations);
    for (a, b) in again.rho.iter().zip(&sol.rho) {
        assert_eq!(a.values(), b.values());
    }
}

#[test]
fn wide_band_solution_is_a_semicircle() {
    // G = g R closes on the semicircle of radius 2 sqrt(g), half width at
    // half maximum sqrt(3 g)
    for g in [1.0, 4.0] {
        let problem = MeanFieldProblem::wide_band(g, 0.0).unwrap();
        let opts = SolverOptions { grid_points: 4096, max_iter: 2000, grid: Some((-12.0, 12.0)), ..Default::default() };
        let sol = solve(&problem, &opts).unwrap();
        assert!(sol.converged);
        let hwhm = sol.rho[0].hwhm().unwrap();
        assert!((hwhm / (3.0 * g).sqrt() - 1.0).abs() < 0.05, "g = {g}: {hwhm}");
        let r = 2.0 * g.sqrt();
        let semi = sol.rho[0].with_values(
            sol.grid.iter().map(|l| if l.abs() < r { (r * r - l * l).sqrt() / (2.0 * PI * g) } else { 0.0 }).collect(),
        );
        assert!(sol.rho[0].l1_distance(&semi.unwrap()).unwrap() < 0.05);
    }
}

#[test]
fn im_g_matches_the_exact_self_energy() {
    // compare (1/pi) Im G at lambda - i eta, the mean-field curve smoothed
    // by the same Lorentzian; per-realization fluctuations set the scale
    let dim = 50;
    let mut total = 0.0;
    let seeds = 4;
    for seed in 0..seeds {
        let sys = ensemble(dim, seed);
        let spec = diagonalize(&sys).unwrap();
        let problem = MeanFieldProblem::from_system(&sys).unwrap();
        let sol = solve(&problem, &fine()).unwrap();
        let eta = 5.0 * spec.mean_spacing();
        let idx = dim / 2;
        let g = &sol.im_g[idx];
        let h = g.lambdas()[1] - g.lambdas()[0];
        let (mut diff, mut mass) = (0.0, 0.0);
        for l in uniform(-1.2, 1.2, 49) {
            let exact = self_energy_exact(&sys, &spec, idx, Complex64::new(l, -eta)).unwrap().total.im / PI;
            let mf: f64 =
                g.lambdas().iter().zip(g.values()).map(|(x, v)| v / PI * lorentzian(l - x, eta).unwrap() * h).sum();
            diff += (mf - exact).abs();
            mass += exact;
        }
        total += diff / mass;
    }
    let l1 = total / seeds as f64;
    assert!(l1 < 0.2, "relative L1 {l1}");
}

#[test]
#[ignore = "does not hold for this chain: the best Lorentzian fit lies closer to the oracle"]
fn ising_meanfield_beats_the_best_lorentzian() {
    let sys = build_ising_chain(10, 1.0, 0.5, 0.4).unwrap();
    let spec = diagonalize(&sys).unwrap();
    let problem = MeanFieldProblem::from_system(&sys).unwrap();
    let sol = solve(&problem, &fine()).unwrap();
    for idx in [480, 512, 540] {
        let sm = smooth_distribution(&overlaps(&spec, idx).unwrap(), &spec, default_window(&spec)).unwrap();
        let target = FitTarget::from_smooth(&sm, sys.diagonal_energy(idx)).unwrap();
        let k = problem.channel_of(idx).unwrap();
        let mf = target.l1(|l| sol.rho[k].interp_linear(l));
        let lor = fit_lorentz(&target).unwrap().l1;
        assert!(mf < lor, "idx {idx}: mean field {mf} vs Lorentzian {lor}");
    }
}
