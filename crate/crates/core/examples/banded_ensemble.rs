//! Seeded banded random ensemble: level density, coupling band and the
//! entropy estimate from the exact spectrum.

use resolvent_spectra::model::{build_banded_ensemble, estimate_entropy, BandProfile, EnsembleProfile};
use resolvent_spectra::oracle::diagonalize;

fn main() -> resolvent_spectra::Result<()> {
    let band = BandProfile::Gaussian { amplitude: 0.05, width: 0.5 };
    let profile = EnsembleProfile::flat(-2.0, 2.0, 300, band, 7)?;
    let sys = build_banded_ensemble(300, &profile)?;
    println!("{}: hash {}", sys.label, &sys.content_hash()[..16]);

    // mean |V|^2 as a function of the energy difference
    for d in [0, 5, 20, 60] {
        let (mut acc, mut n) = (0.0, 0);
        for i in 0..sys.dim() - d {
            if d > 0 {
                acc += sys.vcoupling[(i, i + d)].powi(2);
                n += 1;
            }
        }
        if n > 0 {
            let delta = sys.a[d] - sys.a[0];
            println!("offset {d:>3} (delta ~ {delta:.3}): mean V^2 {:.3e}", acc / n as f64);
        }
    }

    let spec = diagonalize(&sys)?;
    let est = estimate_entropy(&spec.eigenvalues, 0.2)?;
    for (l, s) in est.lambdas.iter().zip(&est.s_of_lambda).step_by(4) {
        println!("S({l:+.2}) = {s:.3}");
    }
    Ok(())
}
