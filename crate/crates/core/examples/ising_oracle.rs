//! Exact diagonalization of a transverse-field Ising chain: overlap
//! distribution of one basis state, its smoothed form and the PAG check.

use resolvent_spectra::model::build_ising_chain;
use resolvent_spectra::oracle::{default_window, diagonalize, overlaps, smooth_distribution, verify_pag};

fn main() -> resolvent_spectra::Result<()> {
    let sys = build_ising_chain(8, 1.0, 0.5, 0.6)?;
    let spec = diagonalize(&sys)?;
    println!("dim {} span {:.3} mean spacing {:.4e}", spec.dim(), spec.span(), spec.mean_spacing());
    println!("residual |HU - UE| = {:.2e}", spec.residual(&sys));

    let idx = sys.dim() / 2;
    let ov = overlaps(&spec, idx)?;
    println!("state {idx}: a = {:.4}, sum p = {:.15}", sys.diagonal_energy(idx), ov.p.iter().sum::<f64>());

    let sm = smooth_distribution(&ov, &spec, default_window(&spec))?;
    let w = sm.weighted_function();
    let (i, at) = w.argmax();
    println!("smoothed exp(S) p: peak {:.6} at {at:.6}, mass {:.6}", w.values()[i], w.integrate());

    let pag = verify_pag(&sys, &spec, idx)?;
    for l in &pag.levels {
        println!("eta {:.3e}: max deviation {:.3e}", l.eta, l.max_deviation);
    }
    println!("monotone in eta: {}", pag.monotone);
    Ok(())
}
