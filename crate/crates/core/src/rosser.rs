//! Rosser–Iwaniec linear sieve weights.
//!
//! For squarefree odd `d = p₁⋯p_r` with `p₁ > ⋯ > p_r`, all primes `≤ z`:
//!
//! * lower: `λ⁻(d) = μ(d)` iff `d ≤ D` and `p₁⋯p_{m−1} p_m³ ≤ D` for every even `m ≤ r`;
//! * upper: `λ⁺(d) = μ(d)` iff `d ≤ D` and `p₁⋯p_{m−1} p_m³ ≤ D` for every odd `m ≤ r`;
//!
//! and `0` otherwise. Comparisons against the real level `D` are done exactly
//! against `⌊D⌋` on integers.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::json;

use crate::arith::small_primes;
use crate::error::{Error, Result};
use crate::parallel::map_ordered;
use crate::report::Table;
use crate::sum::Neumaier;

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest sifting limit accepted by [`build_rosser`].
pub const MAX_SIFTING_LIMIT: f64 = 1e6;
/// Largest number of odd sifting primes for the exhaustive check (`2^30` sets `A`).
pub const MAX_EXHAUSTIVE_PRIMES: usize = 30;
const MAX_TABLE: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Lower,
    Upper,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Lower => "lower",
            Sign::Upper => "upper",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RosserWeights {
    sign: Sign,
    level: f64,
    z: f64,
    /// Odd primes `≤ z`, ascending.
    primes: Vec<u64>,
    /// Every `d | P(z)` with `d ≤ D`, mapped to its weight.
    table: BTreeMap<u64, i8>,
}

/// Product of the odd primes `≤ z` together with `Π(z) = ∏ (1 − 1/(p−1))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SievePrimeProduct {
    pub z: f64,
    pub primes: Vec<u64>,
    /// `P(z)`, or `None` when it does not fit in 128 bits.
    pub product: Option<u128>,
    pub pi: f64,
}

fn odd_primes_upto(z: f64) -> Vec<u64> {
    small_primes(z.floor() as u64)
        .into_iter()
        .filter(|&p| p > 2)
        .collect()
}

/// Chain condition for the primes of `d` in descending order.
fn chain_ok(sign: Sign, desc: &[u64], floor_d: u128) -> bool {
    let start = match sign {
        Sign::Lower => 2,
        Sign::Upper => 1,
    };
    let mut prefix: u128 = 1;
    for (i, &p) in desc.iter().enumerate() {
        let m = i + 1;
        if m >= start && (m - start) % 2 == 0 {
            let p = p as u128;
            let lhs = prefix.checked_mul(p * p * p);
            if lhs.is_none_or(|v| v > floor_d) {
                return false;
            }
        }
        prefix = prefix.saturating_mul(p as u128);
    }
    true
}

/// Weight of a squarefree `d` given its distinct primes in descending order.
fn weight_of(sign: Sign, d: u64, desc: &[u64], floor_d: u128) -> i8 {
    if d as u128 > floor_d || !chain_ok(sign, desc, floor_d) {
        return 0;
    }
    if desc.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Builds the weight table of level `level` and sifting limit `z`.
///
/// Level `1` is admitted since `λ(1) = 1` is the only surviving weight there;
/// likewise `z < 3` gives the empty product `P(z) = 1`.
pub fn build_rosser(sign: Sign, level: f64, z: f64) -> Result<RosserWeights> {
    if !(level >= 1.0) || !level.is_finite() {
        return Err(Error::invalid(format!("level D must be >= 1, got {level}")));
    }
    if !(z >= 1.0) {
        return Err(Error::invalid(format!(
            "sifting limit z must be at least 1, got {z}"
        )));
    }
    if z > MAX_SIFTING_LIMIT {
        return Err(Error::SiftingLimitTooLarge(format!(
            "z = {z} exceeds {MAX_SIFTING_LIMIT}"
        )));
    }
    let primes = odd_primes_upto(z);
    let floor_d = level.floor() as u128;
    let mut table = BTreeMap::new();
    // Depth-first over squarefree products, choosing primes in descending order
    // so that the stack holds the factorization already sorted for the chain.
    let mut stack: Vec<u64> = Vec::new();
    fn walk(
        sign: Sign,
        primes: &[u64],
        limit: usize,
        d: u64,
        floor_d: u128,
        stack: &mut Vec<u64>,
        table: &mut BTreeMap<u64, i8>,
    ) -> Result<()> {
        if table.len() >= MAX_TABLE {
            return Err(Error::ResourceLimit(format!(
                "more than {MAX_TABLE} divisors below D"
            )));
        }
        table.insert(d, weight_of(sign, d, stack, floor_d));
        for i in (0..limit).rev() {
            let p = primes[i];
            let next = d as u128 * p as u128;
            if next > floor_d {
                continue;
            }
            stack.push(p);
            walk(sign, primes, i, next as u64, floor_d, stack, table)?;
            stack.pop();
        }
        Ok(())
    }
    walk(
        sign,
        &primes,
        primes.len(),
        1,
        floor_d,
        &mut stack,
        &mut table,
    )?;
    Ok(RosserWeights {
        sign,
        level,
        z,
        primes,
        table,
    })
}

impl RosserWeights {
    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `λ(d)`; zero for any `d` outside the table.
    pub fn weight(&self, d: u64) -> i8 {
        self.table.get(&d).copied().unwrap_or(0)
    }

    /// All `(d, λ(d))` with `d | P(z)`, `d ≤ D`, ascending in `d`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, i8)> + '_ {
        self.table.iter().map(|(&d, &w)| (d, w))
    }

    /// Entries with `λ(d) ≠ 0`.
    pub fn support(&self) -> impl Iterator<Item = (u64, i8)> + '_ {
        self.entries().filter(|&(_, w)| w != 0)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    fn factor(&self, mut d: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for &p in &self.primes {
            if d.is_multiple_of(p) {
                out.push(p);
                d /= p;
            }
            if d == 1 {
                break;
            }
        }
        out
    }

    /// Describes every broken table invariant; empty when the table is sound.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.weight(1) != 1 {
            bad.push(format!("lambda(1) = {}", self.weight(1)));
        }
        let floor_d = self.level.floor() as u64;
        for (d, w) in self.entries() {
            let f = self.factor(d);
            let product: u64 = f.iter().product();
            if product != d {
                bad.push(format!("d = {d} is not a squarefree divisor of P(z)"));
                continue;
            }
            let mu = if f.len().is_multiple_of(2) { 1 } else { -1 };
            if w != 0 && w != mu {
                bad.push(format!("lambda({d}) = {w} is neither 0 nor mu(d) = {mu}"));
            }
            if d > floor_d {
                bad.push(format!("d = {d} exceeds D"));
            }
        }
        bad
    }

    /// `Σ_{d|P(z)} λ(d)/φ(d)`.
    pub fn sieve_sum_phi(&self) -> f64 {
        let mut acc = Neumaier::new();
        for (d, w) in self.support() {
            let phi: f64 = self.factor(d).iter().map(|&p| (p - 1) as f64).product();
            acc.add(w as f64 / phi);
        }
        acc.value()
    }

    /// CSV with columns `d, omega, weight, sign, D, z`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["d", "omega", "weight", "sign", "D", "z"]);
        for (d, w) in self.entries() {
            t.push(vec![
                json!(d),
                json!(self.factor(d).len()),
                json!(w),
                json!(self.sign.to_string()),
                json!(self.level),
                json!(self.z),
            ]);
        }
        t
    }
}

/// `Σ_{d|P(z)} λ(d)/φ(d)`.
pub fn sieve_sum_phi(w: &RosserWeights) -> f64 {
    w.sieve_sum_phi()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalViolation {
    /// The offending `A | P(z)`.
    pub a: u64,
    pub sum: i64,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FundamentalReport {
    pub sign: Sign,
    pub level: f64,
    pub z: f64,
    /// Number of sets `A` examined (`2^k` for `k` odd primes `≤ z`).
    pub checked: u64,
    pub violations: Vec<FundamentalViolation>,
    pub table_violations: Vec<String>,
}

impl FundamentalReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.table_violations.is_empty()
    }
}

/// Verifies `Σ_{d|A} λ⁻(d) ≤ [A = 1]` (lower) or `Σ_{d|A} λ⁺(d) ≥ [A = 1]`
/// (upper) for every `A | P(z)`, plus the table invariants.
pub fn fundamental_check(w: &RosserWeights, workers: usize) -> Result<FundamentalReport> {
    let k = w.primes.len();
    if k > MAX_EXHAUSTIVE_PRIMES {
        return Err(Error::SiftingLimitTooLarge(format!(
            "{k} sifting primes; exhaustive check supports at most {MAX_EXHAUSTIVE_PRIMES}"
        )));
    }
    let index: BTreeMap<u64, usize> = w.primes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let support: Vec<(u64, i64)> = w
        .support()
        .map(|(d, wt)| {
            let mask = w.factor(d).iter().fold(0u64, |m, p| m | 1 << index[p]);
            (mask, wt as i64)
        })
        .collect();
    let total = 1u64 << k;
    let chunks = crate::parallel::chunk_interval(0, total, 1 << 12);
    let sign = w.sign;
    let found = map_ordered(workers, &chunks, |&(lo, hi)| {
        let mut bad = Vec::new();
        for mask in lo..hi {
            let sum: i64 = support
                .iter()
                .filter(|(m, _)| m & !mask == 0)
                .map(|(_, wt)| wt)
                .sum();
            let bound = i64::from(mask == 0);
            let ok = match sign {
                Sign::Lower => sum <= bound,
                Sign::Upper => sum >= bound,
            };
            if !ok {
                let a = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| w.primes[i])
                    .product();
                bad.push(FundamentalViolation { a, sum, bound });
            }
        }
        bad
    });
    Ok(FundamentalReport {
        sign,
        level: w.level,
        z: w.z,
        checked: total,
        violations: found.into_iter().flatten().collect(),
        table_violations: w.invariant_violations(),
    })
}

/// `P(z)` and `Π(z)` for `z > 2`.
pub fn pi_z(z: f64) -> Result<SievePrimeProduct> {
    if !(z > 2.0) || !z.is_finite() {
        return Err(Error::invalid(format!("pi_z needs z > 2, got {z}")));
    }
    let primes = odd_primes_upto(z);
    let product = primes
        .iter()
        .try_fold(1u128, |acc, &p| acc.checked_mul(p as u128));
    let pi = primes
        .iter()
        .fold(1.0f64, |acc, &p| acc * (1.0 - 1.0 / (p - 1) as f64));
    Ok(SievePrimeProduct {
        z,
        primes,
        product,
        pi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainTermReport {
    pub sign: Sign,
    pub s: f64,
    pub z: f64,
    pub level: f64,
    pub sieve_sum: f64,
    pub pi: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    /// Lower: `lhs ≥ rhs − tolerance`; upper: `lhs ≤ rhs + tolerance`.
    pub pass: bool,
}

/// Trend allowance `(log z)^{−1/3}` for the main-term comparison.
pub fn main_term_tolerance(z: f64) -> f64 {
    z.ln().powf(-1.0 / 3.0)
}

/// Compares `Σ λ(d)/φ(d) / Π(z)` with `2e^γ log(s−1)/s` (lower, `2 < s < 4`)
/// or `2e^γ/s` (upper, `1 < s < 3`) at level `D = z^s`.
pub fn main_term_ratio(sign: Sign, s: f64, z: f64) -> Result<MainTermReport> {
    let e_gamma2 = 2.0 * EULER_GAMMA.exp();
    let rhs = match sign {
        Sign::Lower if s > 2.0 && s < 4.0 => e_gamma2 * (s - 1.0).ln() / s,
        Sign::Upper if s > 1.0 && s < 3.0 => e_gamma2 / s,
        _ => {
            return Err(Error::Domain(format!(
                "s = {s} outside the admissible range for {sign} weights"
            )))
        }
    };
    let level = z.powf(s);
    let w = build_rosser(sign, level, z)?;
    let pi = pi_z(z)?.pi;
    let sieve_sum = w.sieve_sum_phi();
    let lhs = sieve_sum / pi;
    let tolerance = main_term_tolerance(z);
    let pass = match sign {
        Sign::Lower => lhs >= rhs - tolerance,
        Sign::Upper => lhs <= rhs + tolerance,
    };
    Ok(MainTermReport {
        sign,
        s,
        z,
        level,
        sieve_sum,
        pi,
        lhs,
        rhs,
        ratio: lhs / rhs,
        tolerance,
        pass,
    })
}
