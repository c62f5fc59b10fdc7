//! Minimization of `H_n` over angle liftings under frozen boundary layers, and an
//! exhaustive oracle for short chains.

mod bc;
mod brute;
mod minimize;
mod objective;

pub use bc::{chain_wall_center, chain_wall_init, chirality_wall_init, BoundaryCondition, Sides, DEPTH};
pub use brute::{brute_force_1d, multistart_chain, single_site_optimum, BruteForce, BUDGET, MAX_FREE_SITES};
pub use minimize::{
    energy_gradient, minimize_chain, minimize_h, minimize_objective, AnnealOptions, IterRow, MinimizeOptions,
    MinimizeOutcome, Minimized, Termination,
};
pub use objective::Objective;
