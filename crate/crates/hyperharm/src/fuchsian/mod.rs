//! Cocompact Fuchsian groups, invariant quadratic differentials and the
//! cohomology maps Φ and Ψ.

pub mod cocycle;
pub mod group;
pub mod phi;
pub mod psi;
pub mod theta;

pub use cocycle::{coboundary, cocycle_space_dims, CohomologyBasis, Cocycle};
pub use group::{commutator_rank, octagon_group, Alphabet, Element, GroupPresentation, Word};
pub use phi::{phi_map, InvariantQd, PhiConfig, PhiResult};
pub use psi::{harmonic_lift, partition_psi, psi_map, roundtrip, PsiConfig, PsiField, PsiResult};
pub use theta::{theta_qd, Seed, ThetaQd};
