use serde::Serialize;

use crate::error::{Error, Result};

/// Default segment length (in integers) of the segmented sieve.
pub const DEFAULT_SEGMENT: usize = 1 << 18;

/// Largest admissible upper end of a sieved range.
pub const MAX_HI: u64 = 1 << 50;
/// Largest admissible width of a sieved range.
pub const MAX_SPAN: u64 = 1 << 32;

/// The primes of the half-open interval `(lo, hi]`, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeRange {
    lo: u64,
    hi: u64,
    primes: Vec<u64>,
}

impl PrimeRange {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.primes
    }
}

/// All primes `≤ limit` by a plain sieve of Eratosthenes.
pub fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `(lo, hi]` using the default segment length.
pub fn primes_in(lo: u64, hi: u64) -> Result<PrimeRange> {
    primes_in_segmented(lo, hi, DEFAULT_SEGMENT)
}

/// Primes in `(lo, hi]` by a segmented sieve with the given segment length.
/// The output does not depend on `segment`.
pub fn primes_in_segmented(lo: u64, hi: u64, segment: usize) -> Result<PrimeRange> {
    if hi <= lo {
        return Err(Error::invalid(format!("empty range ({lo}, {hi}]")));
    }
    if hi > MAX_HI || hi - lo > MAX_SPAN {
        return Err(Error::ResourceLimit(format!(
            "range ({lo}, {hi}] exceeds hi <= 2^50 and width <= 2^32"
        )));
    }
    if segment == 0 {
        return Err(Error::invalid("segment length must be positive"));
    }
    let base = small_primes(hi.isqrt());
    let mut primes = Vec::new();
    let mut mark = vec![false; segment];
    let mut start = lo + 1;
    while start <= hi {
        let end = hi.min(start + segment as u64 - 1);
        let width = (end - start + 1) as usize;
        let mark = &mut mark[..width];
        mark.fill(false);
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut m = first;
            while m <= end {
                mark[(m - start) as usize] = true;
                m += p;
            }
        }
        for (i, &composite) in mark.iter().enumerate() {
            let n = start + i as u64;
            if !composite && n >= 2 {
                primes.push(n);
            }
        }
        start = end + 1;
    }
    Ok(PrimeRange { lo, hi, primes })
}
