//! Numerical tolerances and constants used across the crate.
//!
//! Chosen for double precision at matrix dimensions up to 64; every test
//! bound references these rather than ad-hoc literals.

/// Relative orthonormality tolerance for factorization outputs.
pub const ORTHONORMALITY: f64 = 1e-10;

/// Relative residual tolerance for null-space and inverse identities.
pub const NULL_RESIDUAL: f64 = 1e-10;

/// Rank test: sigma_min must exceed `RANK_RATIO * sigma_max`.
pub const RANK_RATIO: f64 = 1e-8;

/// Relative tolerance on cached vs. recomputed determinants.
pub const DET_RELATIVE: f64 = 1e-8;

/// Relative tolerance on the per-trial transmit power identities.
pub const POWER_IDENTITY: f64 = 1e-8;

/// Relative agreement required between the two covering-ratio routes.
pub const CR_IDENTITY: f64 = 1e-6;

/// Iteration cap for the SVD before reporting non-convergence.
pub const SVD_MAX_ITER: usize = 1000;

/// Real-dimension cap for exact CVP enumeration (covers 20 complex dims).
pub const CVP_ENUM_CAP: usize = 40;

/// Real-dimension cap for SVP enumeration.
pub const SVP_ENUM_CAP: usize = 24;

/// The covering-ratio threshold pi*e of the error-floor guarantee.
pub const PI_E: f64 = std::f64::consts::PI * std::f64::consts::E;
