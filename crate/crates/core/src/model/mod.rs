//! Coupled systems: Ising chains, banded random ensembles, and
//! density-of-states estimates.

mod ensemble;
mod entropy;
mod ising;
mod system;

pub use ensemble::{build_banded_ensemble, BandProfile, EnsembleProfile, Table1D};
pub use entropy::{estimate_entropy, EntropyEstimate};
pub use ising::{build_ising_chain, MAX_SITES};
pub use system::CoupledSystem;
