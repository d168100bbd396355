//! Special functions and principal-value transforms.

mod faddeeva;
mod hilbert;
mod profiles;
pub mod quad;

pub use faddeeva::{faddeeva, faddeeva_upper};
pub use hilbert::{hilbert_on_grid, hilbert_pv, HilbertMatrix, PvEstimate, UniformHilbert, EDGE_TOLERANCE};
pub use profiles::{
    dispersion, gaussian, gaussian_dispersion, lorentzian, voigt, voigt_complex, voigt_hilbert_identity,
    voigt_hilbert_integral, ProfileParams,
};
pub(crate) use profiles::{gauss, lorentz};

/// Complex numbers as used throughout the crate.
pub type ComplexValue = num_complex::Complex64;
