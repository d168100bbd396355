//! Exact diagonalization and exact resolvent-level quantities.

mod pag;
mod self_energy;
mod smoothing;
mod spectrum;

pub use pag::{verify_pag, verify_pag_with, PagLevel, PagOptions, PagReport};
pub use self_energy::{cc_direct, coupling_amplitudes, im_g_coherent, self_energy_exact, SelfEnergySample};
pub use smoothing::{default_window, smooth_distribution, smooth_with, smoothed_im_g, SmoothDistribution};
pub use spectrum::{diagonalize, overlaps, resolvent_exact, OverlapSet, Spectrum, MAX_DIM};

use serde::Serialize;

use crate::error::Result;

/// CSV with columns `n,lambda,p`.
pub fn overlaps_csv(spec: &Spectrum, ov: &OverlapSet) -> String {
    let mut s = String::from("n,lambda,p\n");
    for (n, (l, p)) in spec.eigenvalues.iter().zip(&ov.p).enumerate() {
        s.push_str(&format!("{n},{l:.17e},{p:.17e}\n"));
    }
    s
}

/// CSV with columns `n,lambda`.
pub fn spectrum_csv(spec: &Spectrum) -> String {
    let mut s = String::from("n,lambda\n");
    for (n, l) in spec.eigenvalues.iter().enumerate() {
        s.push_str(&format!("{n},{l:.17e}\n"));
    }
    s
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    system_hash: &'a str,
    dim: usize,
    eigenvalues: &'a [f64],
    overlaps: &'a [OverlapSet],
}

/// JSON export of the eigenvalues and selected overlap sets, linked to the
/// system by its content hash.
pub fn spectrum_json(spec: &Spectrum, overlaps: &[OverlapSet]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SpectrumJson {
        system_hash: &spec.system_hash,
        dim: spec.dim(),
        eigenvalues: &spec.eigenvalues,
        overlaps,
    })?)
}
