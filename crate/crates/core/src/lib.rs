//! Exact finite-support dynamics of bilateral weighted pseudo-shifts on `ℓ^p(ℤ)`.
//!
//! * [`shift`], [`map`], [`weights`], [`vector`], [`scalar`]: operators,
//!   vectors and overflow-free weight products.
//! * [`criterion`]: correction vectors with verified bounds and the
//!   blow-up/collapse witness search.
//! * [`family`]: the invertible translation family with two-level weights,
//!   its explicit inverses and closed-form thresholds.
//! * [`construct`]: greedy assembly of an approximate disjoint hypercyclic
//!   vector with a checkable visit schedule.
//! * [`dynamics`]: joint orbits, return sets and upper Banach density.

pub mod construct;
pub mod criterion;
pub mod dynamics;
pub mod error;
pub mod family;
pub mod map;
pub mod scalar;
pub mod shift;
pub mod vector;
pub mod weights;

pub use error::{Error, Result};
pub use map::{evaluate_map, GeneralMap, InducingMap};
pub use scalar::SignedLogScalar;
pub use shift::PseudoShift;
pub use vector::SupportedVector;
pub use weights::{WeightKind, WeightRule};

/// Relative comparison with an absolute floor of `1e-300`.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    let diff = (a - b).abs();
    diff <= 1e-300 || diff <= rel * a.abs().max(b.abs())
}
