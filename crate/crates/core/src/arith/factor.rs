use super::sieve::{small_primes, MAX_HI, MAX_SPAN};
use crate::error::{Error, Result};

/// Per-integer factor statistics over `(lo, hi]`: `Ω(n)`, `μ(n)`, the smallest
/// prime factor and the ascending list of distinct prime factors.
///
/// Built by sieving with the primes up to `√hi`; whatever cofactor survives is a
/// single prime larger than `√hi`.
#[derive(Clone, Debug)]
pub struct FactorTable {
    lo: u64,
    hi: u64,
    omega: Vec<u8>,
    mu: Vec<i8>,
    offsets: Vec<u32>,
    factors: Vec<u64>,
}

impl FactorTable {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        let base = small_primes(hi.isqrt());
        Self::with_base(lo, hi, &base)
    }

    /// Builds the table from a caller-supplied ascending list of primes that must
    /// contain every prime `≤ √hi`.
    pub fn with_base(lo: u64, hi: u64, base: &[u64]) -> Result<Self> {
        if hi <= lo {
            return Err(Error::invalid(format!("empty range ({lo}, {hi}]")));
        }
        if hi > MAX_HI || hi - lo > MAX_SPAN.min(u32::MAX as u64 / 16) {
            return Err(Error::ResourceLimit(format!(
                "factor table ({lo}, {hi}] too large"
            )));
        }
        let root = hi.isqrt();
        if base.last().copied().unwrap_or(1) < root && small_primes(root).len() > base.len() {
            return Err(Error::invalid("base primes do not reach sqrt(hi)"));
        }
        let len = (hi - lo) as usize;
        let mut rem: Vec<u64> = (lo + 1..=hi).collect();
        let mut omega = vec![0u8; len];
        let mut mu = vec![1i8; len];
        // (index, prime) pairs in ascending prime order, bucketed below.
        let mut pairs: Vec<(u32, u64)> = Vec::with_capacity(len * 3);
        for &p in base {
            if p > root {
                break;
            }
            let first = (lo + 1).div_ceil(p) * p;
            let mut m = first;
            while m <= hi {
                let i = (m - lo - 1) as usize;
                let mut e = 0u8;
                while rem[i].is_multiple_of(p) {
                    rem[i] /= p;
                    e += 1;
                }
                omega[i] += e;
                mu[i] = if e > 1 { 0 } else { -mu[i] };
                pairs.push((i as u32, p));
                m += p;
            }
        }
        let mut counts = vec![0u32; len + 1];
        for &(i, _) in &pairs {
            counts[i as usize + 1] += 1;
        }
        for (i, &r) in rem.iter().enumerate() {
            if r > 1 {
                counts[i + 1] += 1;
            }
        }
        for i in 0..len {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut factors = vec![0u64; offsets[len] as usize];
        for &(i, p) in &pairs {
            let slot = &mut fill[i as usize];
            factors[*slot as usize] = p;
            *slot += 1;
        }
        for (i, &r) in rem.iter().enumerate() {
            if r > 1 {
                factors[fill[i] as usize] = r;
                omega[i] += 1;
                mu[i] = -mu[i];
            }
        }
        Ok(Self {
            lo,
            hi,
            omega,
            mu,
            offsets,
            factors,
        })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn contains(&self, n: u64) -> bool {
        n > self.lo && n <= self.hi
    }

    #[inline]
    fn index(&self, n: u64) -> usize {
        assert!(self.contains(n), "{n} outside ({}, {}]", self.lo, self.hi);
        (n - self.lo - 1) as usize
    }

    pub fn big_omega(&self, n: u64) -> u32 {
        self.omega[self.index(n)] as u32
    }

    pub fn moebius(&self, n: u64) -> i8 {
        self.mu[self.index(n)]
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.moebius(n) != 0
    }

    /// Distinct prime factors of `n`, ascending.
    pub fn prime_factors(&self, n: u64) -> &[u64] {
        let i = self.index(n);
        &self.factors[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Smallest prime factor; `1` for `n = 1`.
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.prime_factors(n).first().copied().unwrap_or(1)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.big_omega(n) == 1
    }
}
