//! Vertical fields on fibered surfaces and the structures they induce:
//! glued nowhere-zero coefficients, their flows, the period-normalized
//! circle action, and conjugation of that action by untwisted chains.

pub mod action;
pub mod conjugate;
pub mod flow;
pub mod tangent;

pub use action::{circle_action, CircleAction, FixedSet};
pub use conjugate::{isotope_conjugator, verify_conjugation, Conjugation, ConjugationIsotopy};
pub use flow::{
    closed_form_band, integrate_flow, measure_prime_period, point_distance, Trajectory,
};
pub use tangent::{
    build_h_field, hamiltonian_field, normalize_period, suggest_radii, FieldCoeff, HFieldData,
    TangentField,
};
