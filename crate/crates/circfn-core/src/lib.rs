//! Normal-form calculus for functions whose only singularities are circles
//! and isolated extrema, on the cylinder, torus, disk and sphere.
//!
//! The crate models such a function as `kappa ∘ f0 ∘ h^{-1}`: a 1-D
//! profile `kappa` composed with the prime function of the surface and a
//! fiber-preserving diffeomorphism chain `h`. On top of the data model it
//! provides critical-circle analysis, combinatorial validity checks,
//! decomposition into elementary pieces, nowhere-zero tangent field
//! construction with induced circle actions, conjugation isotopies,
//! profile extraction, and an independent grid oracle for cross-checking.

pub mod analysis;
pub mod base;
pub mod bump;
pub mod combinatorics;
pub mod corpus;
pub mod diffeo;
pub mod error;
pub mod fields;
pub mod normal_form;
pub mod oracle;
pub mod point;
pub mod profile;
pub mod records;
pub mod segment;
pub mod surface;
pub mod tolerances;

pub use analysis::{
    divided_difference, equivalent_on, find_critical_points, morsify, profiles_equivalent,
    validate_profile, vanishing_order, whitney_factor, witness_defect, EquivalenceDecision,
    EquivalenceMode, LevelWitness, ValidityReport,
};
pub use base::{AffineFrame, BaseSpace, TargetSpace};
pub use bump::{BumpFunction, BumpWindow, Polarity};
pub use combinatorics::{
    check_alternation, check_torus_parity, decompose, euler_audit, validate_membership,
    Decomposition, DecompositionPiece, EulerAudit, MembershipReport, PieceContent, PieceKind,
};
pub use diffeo::{DiffeoChain, ElementaryDiffeo, TauFunction};
pub use error::{Error, Result};
pub use fields::{
    build_h_field, circle_action, hamiltonian_field, integrate_flow, isotope_conjugator,
    measure_prime_period, normalize_period, suggest_radii, verify_conjugation, CircleAction,
    Conjugation, FieldCoeff, FixedSet, TangentField, Trajectory,
};
pub use normal_form::NormalForm;
pub use oracle::{
    audit_normal_form, compare_with_analytic, extract_critical_loci, sample_grid, GridLocus,
    GridSample, OracleComparison,
};
pub use point::{Pole, SurfacePoint};
pub use profile::Profile;
pub use records::{CriticalCircleRecord, ExtremalKind, ExtremumLocation, IsolatedExtremumRecord};
pub use segment::Segment;
pub use surface::{Surface, SurfaceGeometry, SurfaceKind};
