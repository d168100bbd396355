//! Damped self-consistent solve of the mean-field equations for a banded
//! ensemble, with the convergence certificate and the wide-band limit.

use resolvent_spectra::meanfield::{solve, MeanFieldProblem, SolverOptions};
use resolvent_spectra::model::{build_banded_ensemble, BandProfile, EnsembleProfile};

fn main() -> resolvent_spectra::Result<()> {
    let band = BandProfile::Gaussian { amplitude: 0.05, width: 1.0 };
    let sys = build_banded_ensemble(80, &EnsembleProfile::flat(-1.0, 1.0, 80, band, 3)?)?;
    let problem = MeanFieldProblem::from_system(&sys)?;
    let opts = SolverOptions { grid_points: 1024, max_iter: 3000, ..Default::default() };
    let sol = solve(&problem, &opts)?;
    println!("converged {} after {} sweeps, residual {:.2e}", sol.converged, sol.iterations, sol.residual);
    let cert = sol.certificate(&problem, &opts);
    println!("worst certificate residual {:.2e}", cert.iter().cloned().fold(0.0, f64::max));
    for k in [10, 40, 70] {
        let rho = &sol.rho[k];
        println!(
            "channel {k}: a = {:+.3}, mass {:.8}, hwhm {:.4}, golden rule {:.4}",
            problem.channels[k].center,
            rho.integrate(),
            rho.hwhm().unwrap_or(f64::NAN),
            problem.golden_rule_width(k)
        );
    }

    let wide = MeanFieldProblem::wide_band(1.0, 0.0)?;
    let opts = SolverOptions { grid_points: 2048, grid: Some((-6.0, 6.0)), ..Default::default() };
    let sol = solve(&wide, &opts)?;
    println!("wide band g = 1: hwhm {:.4} (semicircle sqrt 3 = {:.4})", sol.rho[0].hwhm().unwrap(), 3f64.sqrt());
    Ok(())
}
