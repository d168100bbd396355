//! Faddeeva function, Voigt and dispersion profiles, and the Hilbert
//! identity for a Gaussian times a Lorentzian.

use num_complex::Complex64;
use resolvent_spectra::specfun::{
    dispersion, faddeeva, voigt, voigt_hilbert_identity, voigt_hilbert_integral, ProfileParams,
};

fn main() -> resolvent_spectra::Result<()> {
    for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.5), Complex64::new(-3.0, -0.2)] {
        println!("w({z}) = {}", faddeeva(z)?);
    }

    let p = ProfileParams::new(1.0, 0.3)?;
    println!("\n{:>6} {:>12} {:>12}", "x", "voigt", "dispersion");
    for i in -4..=4 {
        let x = 0.5 * i as f64;
        println!("{x:>6.2} {:>12.6} {:>12.6}", voigt(x, &p), dispersion(x, &p));
    }

    // PV of G(l - mu1) L(l - mu2) / (l' - l): closed form vs quadrature
    let (mu1, mu2) = (0.0, 0.4);
    println!("\n{:>6} {:>14} {:>14}", "l'", "closed form", "quadrature");
    for lp in [-2.0, -0.5, 0.3, 1.7] {
        let lhs = voigt(mu2 - mu1, &p) * voigt_hilbert_identity(lp, mu1, mu2, &p);
        println!("{lp:>6.2} {lhs:>14.10} {:>14.10}", voigt_hilbert_integral(lp, mu1, mu2, &p));
    }
    Ok(())
}
