//! Continuum chirality fields as gradients of piecewise-affine potentials, their
//! jump sets, the rigidity classification and the limit energy.

mod examples;
mod jumps;
mod mesh;

pub use examples::{build_example, ExampleKind, SNAP};
pub use jumps::{
    canonical_triple, candidate_normals, classify_triple, enumerate_admissible, jump_set, limit_energy,
    limit_energy_by_sigma, sigma, total_variations, total_variations_of, JumpClass, JumpSegment, TotalVariations,
    ADMISSIBLE_TRIPLES, LABELS,
};
pub use mesh::{validate_mesh, Label, MeshLocator, MeshPotential, MESH_TOL};
