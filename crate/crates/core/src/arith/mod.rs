//! Arithmetic kernels: prime generation, factor statistics and the classical
//! multiplicative functions `Ω`, `μ`, `φ`, `Λ`.
//!
//! All integers are `u64` and bounded well below `2⁶³`; logarithms are `f64`.

mod factor;
mod sieve;

pub use factor::FactorTable;
pub use sieve::{primes_in, primes_in_segmented, small_primes, PrimeRange, DEFAULT_SEGMENT};

use crate::error::{Error, Result};
use crate::sum::Neumaier;

/// Prime factorisation by trial division, as ascending `(prime, exponent)` pairs.
/// `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `Ω(n)`: number of prime factors counted with multiplicity.
pub fn big_omega(n: u64) -> u32 {
    factorize(n).iter().map(|&(_, e)| e).sum()
}

/// Möbius function.
pub fn moebius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// von Mangoldt function: `log p` if `n = p^k` with `k ≥ 1`, else 0.
pub fn von_mangoldt(n: u64) -> f64 {
    match factorize(n).as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `Σ log p` over the primes of `primes` with `p ≡ a (mod d)`.
pub fn theta_in(primes: &PrimeRange, d: u64, a: u64) -> f64 {
    assert!(d >= 1);
    let a = a % d;
    let mut acc = Neumaier::new();
    for &p in primes.primes() {
        if p % d == a {
            acc.add((p as f64).ln());
        }
    }
    acc.value()
}

/// Chebyshev's `θ(x; d, a) = Σ_{p ≤ x, p ≡ a (d)} log p`.
pub fn chebyshev_theta(x: f64, d: u64, a: u64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "chebyshev_theta needs x >= 2, got {x}"
        )));
    }
    if d == 0 || (d > 1 && a >= d) {
        return Err(Error::invalid(format!(
            "residue {a} is not reduced modulo {d}"
        )));
    }
    let primes = primes_in(0, x.floor() as u64)?;
    Ok(theta_in(&primes, d, a))
}
