//! Effective frequency-dependent self-energy matched to an LG profile,
//! with its Kramers-Kronig check.

use resolvent_spectra::ansatz::{
    causality_check, causality_grid, eff_spectral_function, lg_density, match_effective, VoigtParams,
};

fn main() -> resolvent_spectra::Result<()> {
    let vp = VoigtParams::new(0.2, 0.0, 0.3, 1.0)?;
    let m = match_effective(&vp, 0.0)?;
    let e = &m.effective;
    println!("chi_eff {:.6} delta_eff {:.6} (leading order {:?})", e.chi_eff, e.delta_eff, m.leading_order);
    println!("peak at {:.6}, height {:.6}", m.lambda_peak, m.height);
    println!("residuals: position {:.1e}, height {:.1e}", m.position_residual, m.height_residual);

    println!("\n{:>6} {:>10} {:>10}", "l", "LG", "effective");
    for i in -6..=6 {
        let l = m.lambda_peak + 0.5 * i as f64;
        println!("{l:>6.2} {:>10.5} {:>10.5}", lg_density(l, 0.0, &vp), eff_spectral_function(l, 0.0, e));
    }

    let grid = causality_grid(e, 400.0, 40_001);
    let rep = causality_check(e, &grid)?;
    println!("\nKramers-Kronig deviation {:.2e} over {} points", rep.max_deviation, rep.points);
    Ok(())
}
