//! Lorentzian bulk, Gaussian tail and the joint LG solve on a shell
//! ensemble.

use resolvent_spectra::ansatz::{
    solve_gauss_tail, solve_lorentz, solve_voigt, LorentzOptions, TailOptions, VoigtOptions,
};
use resolvent_spectra::meanfield::MeanFieldProblem;
use resolvent_spectra::model::{BandProfile, EnsembleProfile};

fn main() -> resolvent_spectra::Result<()> {
    let band = BandProfile::Gaussian { amplitude: 0.2, width: 0.5 };
    let profile = EnsembleProfile::flat(-2.0, 2.0, 400, band, 1)?;
    let problem = MeanFieldProblem::from_ensemble(&profile, 15)?;

    let lor = solve_lorentz(&problem, &LorentzOptions::default())?;
    println!("Lorentzian: converged {} in {} sweeps", lor.converged, lor.iterations);
    let tail = solve_gauss_tail(&profile, 15, &TailOptions::default())?;
    println!("Gaussian tail: converged {} in {} sweeps", tail.converged, tail.iterations);
    let lg = solve_voigt(&problem, &lor, &tail, &VoigtOptions::default())?;
    println!("LG: converged {} in {} sweeps\n", lg.converged, lg.iterations);

    // chi >> sigma puts a shell at the Gaussian end of the LG family
    println!("{:>6} {:>9} {:>9} {:>9} {:>9} {:>9}  form", "shell", "a", "chi_L", "sigma_G", "chi_LG", "sigma_LG");
    for k in (0..problem.len()).step_by(2) {
        let vp = &lg.params[k];
        let form = if vp.chi > 100.0 * vp.sigma { "Gaussian limit" } else { "LG" };
        println!(
            "{k:>6} {:>+9.3} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  {form}",
            lor.a[k], lor.params[k].chi, tail.params[k].sigma, vp.chi, vp.sigma
        );
    }
    Ok(())
}
