//! Exact-arithmetic toolkit connecting two rank-minimization problems:
//! minimizing the download overhead when repairing one failed node of a
//! systematic MDS storage code, and maximizing the total secure degrees of
//! freedom of a multiple-access compound wiretap channel. The two sides are
//! linked by explicit interference-alignment constructions, code/channel
//! mappings, and bound calculators, all verifiable at desk scale.
//!
//! Matrices live over exchangeable scalar domains (prime fields GF(p),
//! arbitrary-precision rationals, tolerance-based floats) so every rank
//! statement can be checked exactly.

pub mod bridge;
pub mod constructions;
pub mod domain;
mod error;
pub mod matrix;
pub mod mds;
pub mod repair;
pub mod sample;
mod search;
pub mod subspace;
pub mod wiretap;

pub use domain::{Scalar, ScalarDomain, DEFAULT_FLOAT_TOLERANCE};
pub use error::{Error, Result};
pub use matrix::Matrix;

/// How a constructed strategy or beamforming set was produced; carried in
/// the JSON artifacts so runs stay reproducible.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<u32>,
}
