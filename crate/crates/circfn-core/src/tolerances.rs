//! Numeric thresholds shared across the crate.
//!
//! Quantities are declared *nonzero* at `1e-6` and *zero* at `1e-9`, both
//! relative to the coefficient scale of the profile under test; values in
//! between are treated as ill-conditioned and reported as validation
//! failures rather than silently classified.

/// Relative threshold above which a derivative value counts as nonzero.
pub const NONZERO_REL: f64 = 1e-6;

/// Relative threshold below which a derivative value counts as zero.
pub const ZERO_REL: f64 = 1e-9;

/// Root isolation bracket width.
pub const ROOT_TOL: f64 = 1e-12;

/// Points used by derivative sign-change scans.
pub const SCAN_POINTS: usize = 10_000;

/// Fiber-preserving chain round trips must close to this tolerance.
pub const CHAIN_ROUND_TRIP: f64 = 1e-12;

/// Sampled witness identities (equivalence, conjugation) must hold to this.
pub const WITNESS_TOL: f64 = 1e-8;

/// Flow and action bookkeeping (period, composition law).
pub const FLOW_TOL: f64 = 1e-9;

/// Disk/sphere polar charts overlap band coordinates on this collar.
pub const COLLAR: (f64, f64) = (0.05, 0.1);
