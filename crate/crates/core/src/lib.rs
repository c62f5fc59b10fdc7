//! Numerical laboratory for the J1–J3 chirality model on the square lattice.
//!
//! The lattice side ([`lattice`], [`chirality`], [`energy`]) is generic over the
//! scalar type; the continuum, recovery and optimization pipelines run in `f64`.

mod dd;
pub mod chirality;
pub mod continuum;
pub mod energy;
pub mod error;
pub mod io;
pub mod lattice;
pub mod optimize;
pub mod recovery;
pub mod scalar;
pub mod sum;
pub mod svg;

pub use chirality::{
    oriented_angle, reconstruct_spin, theta_fields, transform, vorticity, ChiralityPair, ThetaFields,
};
pub use energy::{
    discrete_mm, double_well, energy_e, energy_h, energy_h_1d, mm_decomposition, rho, tilde_w, EnergyReport,
    RhoMethod,
};
pub use error::{Bond, Error, Result};
pub use lattice::{
    discrete_derivative, index_set, AffineInterpolant, Derivative, Domain, ModelParams, ScalarGrid, SpinField,
};
pub use scalar::Real;

pub type ScalarGrid32 = ScalarGrid<f32>;
pub type SpinField32 = SpinField<f32>;
pub type ModelParams32 = ModelParams<f32>;
pub type ChiralityPair32 = ChiralityPair<f32>;
pub type EnergyReport32 = EnergyReport<f32>;
