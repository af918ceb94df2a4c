//! The circle `ℝ/ℤ`: distance to the nearest integer, `e(y) = exp(2πiy)`,
//! continued-fraction convergents of irrationals and the smoothing function `χ`.

mod dd;
mod irrational;
mod smoothing;

pub use dd::DoubleDouble;
pub use irrational::{Convergent, ConvergentSequence, DecimalApprox, Irrational, QuadraticSurd};
pub use smoothing::SmoothingFunction;

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `‖x‖`, the distance from `x` to the nearest integer.
#[inline]
pub fn dist(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `e(y) = exp(2πiy)`, with `y` reduced modulo 1 first.
#[inline]
pub fn e(y: f64) -> Complex64 {
    let (s, c) = (TAU * frac(y)).sin_cos();
    Complex64::new(c, s)
}
