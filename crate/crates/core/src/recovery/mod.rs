//! Recovery sequences: mollify a continuum potential, sample it on the lattice,
//! lift it to spins, and compare lattice energies with the limit energy.

mod build;
mod kernel;
mod mollify;

pub use build::{
    build_recovery, curl_residual, gamma_sweep, lattice_dims, optimal_profile_1d, profile_energy, ProfileEnergy,
    Recovery, RecoveryOptions, SweepRow, SweepSchedule, TestFunction,
};
pub use kernel::{bump, gauss_legendre, integrate, Kernel, KernelShape, DEFAULT_RADIUS};
pub use mollify::{Extension, ExtensionMethod, Mollified, QuadratureRule};
