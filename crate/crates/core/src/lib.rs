//! Physical-layer secrecy via artificial noise in MIMO wiretap channels.
//!
//! The library is organized bottom-up:
//!
//! - [`matcore`]: dense complex linear algebra (SVD, QR, null space,
//!   pseudoinverse, determinants) and the complex-to-real lattice embedding.
//! - [`lattice`]: LLL reduction, Babai's nearest plane, exact sphere-decoder
//!   CVP/SVP, effective radius, covering-radius bounds, plus brute-force
//!   reference oracles for self-testing.
//! - [`wiretap`]: the transmission model — channel and constellation
//!   sampling, SVD and lattice (vector-perturbation) precoding, null-space
//!   noise injection, Bob's receivers and Eve's exact ML receivers.
//! - [`secrecy`]: covering ratio, the Φ noise-power formulas, and the
//!   distributional checks backing them.
//! - [`harness`]: seeded, parallel Monte Carlo campaigns with CSV/JSON
//!   output, exposed through the `ansec` CLI.

pub mod error;
pub mod harness;
pub mod lattice;
pub mod matcore;
pub mod secrecy;
pub mod tol;
pub mod wiretap;

pub use error::{Error, Result};
