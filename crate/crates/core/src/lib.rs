//! Numerical machinery for dimension-free convex geometry in finite
//! dimensional l_p spaces: moduli of convexity and smoothness, the radius
//! sequences they generate, and search engines that turn the existence
//! arguments behind no-dimensional Helly, colorful/fractional Helly,
//! centerpoint, and greedy Caratheodory statements into checkable runs.
//!
//! Everything is deterministic given a seed; randomized estimators and
//! verifiers derive per-task streams from the caller's seed so results do
//! not depend on thread scheduling.

pub mod caratheodory;
pub mod error;
pub mod geometry;
pub mod helly;
pub mod moduli;
pub mod seeds;
pub mod sequences;
pub mod space;
pub mod verifier;

pub use error::Error;
pub use space::{DualVector, Mode, SpaceSpec, Vector};

/// Default seed used by binaries and tests when the caller supplies none.
pub const DEFAULT_SEED: u64 = 0x6e6f_6469;

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}
