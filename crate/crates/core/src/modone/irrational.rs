//! Irrational inputs `α` and their continued-fraction convergents.
//!
//! Quadratic surds are expanded exactly through the periodic recurrence on
//! `(P + √D)/Q`. Decimal approximations carry an error radius; their partial
//! quotients are emitted only while both ends of the uncertainty interval agree.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use regex::Regex;
use serde::Serialize;

use super::dd::DoubleDouble;
use crate::error::{Error, Result};

/// `(a + b√d)/c` with `d > 0` not a perfect square and `b, c ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadraticSurd {
    a: i64,
    b: i64,
    d: i64,
    c: i64,
}

/// `mantissa / 10^scale`, known to within `10^-scale`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecimalApprox {
    mantissa: i128,
    scale: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irrational {
    Surd(QuadraticSurd),
    Decimal(DecimalApprox),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub numer: i128,
    pub denom: i128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentSequence {
    partial_quotients: Vec<i128>,
    terms: Vec<Convergent>,
}

impl ConvergentSequence {
    pub fn partial_quotients(&self) -> &[i128] {
        &self.partial_quotients
    }

    pub fn terms(&self) -> &[Convergent] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn denominators(&self) -> impl Iterator<Item = i128> + '_ {
        self.terms.iter().map(|c| c.denom)
    }
}

const MAX_DECIMAL_DIGITS: usize = 31;

fn is_square(n: i128) -> bool {
    n >= 0 && (n as u128).isqrt().pow(2) == n as u128
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn overflow() -> Error {
    Error::Overflow("continued-fraction state exceeds 128-bit range".into())
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or_else(overflow)
}

impl QuadraticSurd {
    pub fn new(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::invalid("surd denominator must be nonzero"));
        }
        if d <= 0 {
            return Err(Error::invalid(format!(
                "surd radicand must be positive, got {d}"
            )));
        }
        if b == 0 || is_square(d as i128) {
            return Err(Error::NotIrrational(format!("({a}+{b}*sqrt({d}))/{c}")));
        }
        Ok(Self { a, b, d, c })
    }

    /// `(P + √disc)/Q` with `Q | disc − P²`.
    fn reduced_state(&self) -> Result<(i128, i128, i128)> {
        let (a, b, c) = if self.b < 0 {
            (-(self.a as i128), -(self.b as i128), -(self.c as i128))
        } else {
            (self.a as i128, self.b as i128, self.c as i128)
        };
        let abs_c = c.abs();
        let p = mul(a, abs_c)?;
        let q = mul(c, abs_c)?;
        let disc = mul(mul(mul(b, b)?, self.d as i128)?, mul(c, c)?)?;
        Ok((p, q, disc))
    }

    fn partial_quotients(&self, count: usize) -> Result<Vec<i128>> {
        let (mut p, mut q, disc) = self.reduced_state()?;
        let s = (disc as u128).isqrt() as i128;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let a = if q > 0 {
                floor_div(add(p, s)?, q)
            } else {
                floor_div(add(add(p, s)?, 1)?, q)
            };
            out.push(a);
            p = mul(a, q)? - p;
            q = (disc - mul(p, p)?) / q;
        }
        Ok(out)
    }

    fn value(&self) -> DoubleDouble {
        let root = DoubleDouble::sqrt_int(self.d as i128);
        (DoubleDouble::from_i128(self.a as i128) + DoubleDouble::from_i128(self.b as i128) * root)
            / DoubleDouble::from_i128(self.c as i128)
    }

    /// Exact comparison of the surd with `num/den`, `den > 0`.
    fn cmp_rational(&self, num: i128, den: i128) -> Option<Ordering> {
        let (p, q, disc) = self.reduced_state().ok()?;
        let (p, q, disc) = (BigInt::from(p), BigInt::from(q), BigInt::from(disc));
        let (num, den) = (BigInt::from(num), BigInt::from(den));
        // α = (p + √disc)/q  vs  num/den  ⇔  √disc·den  vs  r = num·q − p·den (flipped if q < 0)
        let r = &num * &q - &p * &den;
        let root_vs_r = if r.sign() == Sign::Minus {
            Ordering::Greater
        } else {
            (&disc * &den * &den).cmp(&(&r * &r))
        };
        Some(if q.sign() == Sign::Plus {
            root_vs_r
        } else {
            root_vs_r.reverse()
        })
    }
}

impl DecimalApprox {
    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    fn pow10(&self) -> i128 {
        10i128.pow(self.scale)
    }

    /// Error radius `10^-scale`.
    pub fn precision(&self) -> f64 {
        10f64.powi(-(self.scale as i32))
    }

    fn partial_quotients(&self, count: usize) -> Result<Vec<i128>> {
        let den = self.pow10();
        let mut lo = (self.mantissa - 1, den);
        let mut hi = (self.mantissa + 1, den);
        let mut out = Vec::new();
        while out.len() < count {
            let a_lo = floor_div(lo.0, lo.1);
            let a_hi = floor_div(hi.0, hi.1);
            if a_lo != a_hi {
                break;
            }
            out.push(a_lo);
            let r_lo = lo.0 - a_lo * lo.1;
            let r_hi = hi.0 - a_hi * hi.1;
            if r_lo == 0 || r_hi == 0 {
                break;
            }
            lo = (lo.1, r_lo);
            hi = (hi.1, r_hi);
        }
        if out.len() < count {
            return Err(Error::InsufficientPrecision(format!(
                "{} digits certify only {} partial quotients, {} requested",
                self.scale,
                out.len(),
                count
            )));
        }
        Ok(out)
    }

    fn cmp_rational(&self, num: i128, den: i128) -> Option<Ordering> {
        let scale = self.pow10();
        let rhs = num.checked_mul(scale)?;
        let lo = (self.mantissa - 1).checked_mul(den)?;
        let hi = (self.mantissa + 1).checked_mul(den)?;
        if hi <= rhs {
            Some(Ordering::Less)
        } else if lo >= rhs {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl Irrational {
    pub fn surd(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        QuadraticSurd::new(a, b, d, c).map(Irrational::Surd)
    }

    pub fn sqrt(d: i64) -> Result<Self> {
        Self::surd(0, 1, d, 1)
    }

    pub fn golden() -> Self {
        Self::surd(1, 1, 5, 2).expect("golden ratio is a valid surd")
    }

    /// `digits` like `"1.41421356237"`; the error radius is one unit in the
    /// last place.
    pub fn decimal(digits: &str) -> Result<Self> {
        let s = digits.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let all_digits = |t: &str| t.bytes().all(|c| c.is_ascii_digit());
        if int_part.is_empty() && frac_part.is_empty()
            || !all_digits(int_part)
            || !all_digits(frac_part)
        {
            return Err(Error::invalid(format!("malformed decimal '{digits}'")));
        }
        if int_part.len() + frac_part.len() > MAX_DECIMAL_DIGITS || frac_part.len() > 30 {
            return Err(Error::invalid(format!(
                "decimal '{digits}' exceeds {MAX_DECIMAL_DIGITS} digits / 30 decimals"
            )));
        }
        let joined = format!("{int_part}{frac_part}");
        let mut mantissa: i128 = joined.parse().map_err(|_| Error::invalid("bad digits"))?;
        if neg {
            mantissa = -mantissa;
        }
        Ok(Irrational::Decimal(DecimalApprox {
            mantissa,
            scale: frac_part.len() as u32,
        }))
    }

    /// Best double-double value of `α`.
    pub fn value(&self) -> DoubleDouble {
        match self {
            Irrational::Surd(s) => s.value(),
            Irrational::Decimal(d) => {
                DoubleDouble::from_i128(d.mantissa) / DoubleDouble::from_i128(d.pow10())
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64()
    }

    /// Bound on `|α − value()|`.
    pub fn abs_error(&self) -> f64 {
        let v = self.to_f64().abs().max(1.0);
        match self {
            Irrational::Surd(_) => 1e-30 * v,
            Irrational::Decimal(d) => d.precision() + 1e-30 * v,
        }
    }

    /// `frac(α·n)` together with a bound on its absolute error.
    pub fn frac_mul(&self, n: u64) -> (f64, f64) {
        let v = self.value();
        let nf = n as f64;
        let err = nf * self.abs_error() + nf * v.hi.abs() * 1e-31 + 4.0 * f64::EPSILON;
        (v.frac_mul(n), err)
    }

    pub fn partial_quotients(&self, count: usize) -> Result<Vec<i128>> {
        match self {
            Irrational::Surd(s) => s.partial_quotients(count),
            Irrational::Decimal(d) => d.partial_quotients(count),
        }
    }

    /// The first `count` convergents `A_j/Q_j`.
    pub fn convergents(&self, count: usize) -> Result<ConvergentSequence> {
        if count == 0 {
            return Err(Error::invalid("convergent count must be positive"));
        }
        let pq = self.partial_quotients(count)?;
        let (mut a2, mut a1) = (0i128, 1i128);
        let (mut q2, mut q1) = (1i128, 0i128);
        let mut terms = Vec::with_capacity(count);
        for &a in &pq {
            let a0 = add(mul(a, a1)?, a2)?;
            let q0 = add(mul(a, q1)?, q2)?;
            terms.push(Convergent {
                numer: a0,
                denom: q0,
            });
            (a2, a1) = (a1, a0);
            (q2, q1) = (q1, q0);
        }
        Ok(ConvergentSequence {
            partial_quotients: pq,
            terms,
        })
    }

    /// Compares `α` with `num/den`; `None` when it cannot be decided.
    pub fn cmp_rational(&self, num: i128, den: i128) -> Option<Ordering> {
        if den <= 0 {
            return None;
        }
        match self {
            Irrational::Surd(s) => s.cmp_rational(num, den),
            Irrational::Decimal(d) => d.cmp_rational(num, den),
        }
    }

    /// Certifies `|α − a/q| < 1/q²`.
    pub fn certify_approximation(&self, a: i128, q: i128) -> Result<bool> {
        if q <= 0 {
            return Err(Error::invalid("denominator must be positive"));
        }
        let q2 = q.checked_mul(q).ok_or_else(overflow)?;
        let aq = a.checked_mul(q).ok_or_else(overflow)?;
        let undecided =
            || Error::InsufficientPrecision(format!("cannot certify |α − {a}/{q}| < 1/{q}²"));
        let above_lower = self.cmp_rational(aq - 1, q2).ok_or_else(undecided)?;
        let below_upper = self.cmp_rational(aq + 1, q2).ok_or_else(undecided)?;
        Ok(above_lower == Ordering::Greater && below_upper == Ordering::Less)
    }
}

fn surd_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\(\s*([+-]?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*([+-]?\d+)$",
        )
        .expect("static regex")
    })
}

impl FromStr for Irrational {
    type Err = Error;

    /// Accepts `(a+b*sqrt(d))/c`, `dec:<digits>`, and the names `sqrt2`,
    /// `sqrt3`, `golden`. A plain fraction `p/q` is rejected as rational.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "sqrt2" => return Irrational::sqrt(2),
            "sqrt3" => return Irrational::sqrt(3),
            "golden" => return Ok(Irrational::golden()),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("dec:") {
            return Irrational::decimal(rest);
        }
        if let Some(cap) = surd_regex().captures(t) {
            let int = |i: usize| -> Result<i64> {
                cap[i]
                    .parse::<i64>()
                    .map_err(|_| Error::invalid(format!("field out of range in '{t}'")))
            };
            let sign = if &cap[2] == "-" { -1 } else { 1 };
            return Irrational::surd(int(1)?, sign * int(3)?, int(4)?, int(5)?);
        }
        if let Some((p, q)) = t.split_once('/') {
            if p.trim().parse::<i64>().is_ok() && q.trim().parse::<i64>().is_ok() {
                return Err(Error::NotIrrational(t.to_string()));
            }
        }
        if t.parse::<i64>().is_ok() {
            return Err(Error::NotIrrational(t.to_string()));
        }
        Err(Error::invalid(format!("unrecognised irrational '{t}'")))
    }
}

impl fmt::Display for Irrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irrational::Surd(s) => {
                let sign = if s.b < 0 { '-' } else { '+' };
                write!(f, "({}{}{}*sqrt({}))/{}", s.a, sign, s.b.abs(), s.d, s.c)
            }
            Irrational::Decimal(d) => {
                let neg = d.mantissa < 0;
                let digits = d.mantissa.abs().to_string();
                let scale = d.scale as usize;
                let padded = format!("{digits:0>width$}", width = scale + 1);
                let (i, fr) = padded.split_at(padded.len() - scale);
                let sign = if neg { "-" } else { "" };
                if scale == 0 {
                    write!(f, "dec:{sign}{i}")
                } else {
                    write!(f, "dec:{sign}{i}.{fr}")
                }
            }
        }
    }
}

impl Serialize for Irrational {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
