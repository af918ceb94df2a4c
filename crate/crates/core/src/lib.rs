//! Computational laboratory for primes `p` with `‖αp + β‖` small and `p + 2`
//! an almost-prime.
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`]: segmented prime sieve, factor tables and multiplicative functions.
//! - [`modone`]: distance to the nearest integer, continued-fraction convergents
//!   and the smoothing function `χ` with its Fourier coefficients.
//! - [`rosser`]: Rosser–Iwaniec lower/upper weights and the sieve sums built on them.
//! - [`feasibility`]: the exponent region, `Σ₀`, and an exhaustive grid optimiser.
//! - [`chen`]: the Chen-type weights `T_p` and the weighted prime sums `Γ = Φ − κG`.
//! - [`expsum`]: exponential-sum kernels, Heath-Brown's identity and `S(N)`.
//! - [`report`]: bit-stable JSON/CSV emission shared by the CLI and the tests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod chen;
pub mod error;
pub mod expsum;
pub mod feasibility;
pub mod modone;
pub mod parallel;
pub mod quad;
pub mod report;
pub mod rosser;
pub mod sum;

pub use error::{Error, Result};
