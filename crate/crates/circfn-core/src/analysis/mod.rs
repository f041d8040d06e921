//! Profile analysis: critical-circle detection and classification, validity
//! checking, degeneracy removal, even-function factorization, and
//! equivalence of profiles with witness construction.

pub mod critical;
pub mod equivalence;
pub mod interp;
pub mod morsify;
pub mod validity;
pub mod whitney;

pub use critical::{find_critical_points, vanishing_order};
pub use equivalence::{
    equivalent_on, profiles_equivalent, witness_defect, EquivalenceDecision, EquivalenceMode,
    LevelWitness,
};
pub use morsify::morsify;
pub use validity::{validate_profile, ValidityReport};
pub use whitney::{divided_difference, whitney_factor};
