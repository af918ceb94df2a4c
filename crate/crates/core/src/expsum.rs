//! Exponential sums along convergent denominators.
//!
//! Phases `αn` are always reduced modulo 1 through the certified
//! representation of `α` before exponentiation, so products `p·k` far beyond
//! `2^53/|α|` keep full phase accuracy.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::arith::{gcd, moebius, primes_in, von_mangoldt};
use crate::chen::gamma_m_coeffs;
use crate::error::{Error, Result};
use crate::feasibility::{DerivedScales, Params};
use crate::modone::{dist, e, frac, DoubleDouble, Irrational, SmoothingFunction};
use crate::parallel::{chunk_interval, map_ordered};
use crate::report::Table;
use crate::rosser::{build_rosser, Sign};
use crate::sum::{ComplexSum, Neumaier};

/// Largest `N` accepted by [`s_sum`].
pub const MAX_S_SUM_N: f64 = 1e8;
/// Largest relative error tolerated on `‖αm‖` when it decides a min-sum term.
pub const MIN_SUM_REL_ERR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricSum {
    pub value: Complex64,
    pub bound: f64,
}

/// `Σ_{n=0}^{M−1} e(nβ)` with the bound `min(M, 1/(2‖β‖))`.
pub fn geometric_sum(beta: f64, m: u64) -> Result<GeometricSum> {
    if m == 0 {
        return Err(Error::invalid("geometric_sum needs M >= 1"));
    }
    if !beta.is_finite() {
        return Err(Error::invalid(format!("beta = {beta} is not finite")));
    }
    let b = frac(beta);
    let mf = m as f64;
    if b == 0.0 {
        return Ok(GeometricSum {
            value: Complex64::new(mf, 0.0),
            bound: mf,
        });
    }
    // Σ e(nβ) = e((M−1)β/2) · sin(πMβ)/sin(πβ), with both arguments reduced mod 1.
    let half = DoubleDouble::from_f64(b / 2.0);
    let u = half.frac_mul(m);
    let v = half.frac_mul(m - 1);
    let modulus = (2.0 * std::f64::consts::PI * u).sin() / (std::f64::consts::PI * b).sin();
    let value = e(v) * modulus;
    Ok(GeometricSum {
        value,
        bound: mf.min(1.0 / (2.0 * dist(b))),
    })
}

/// A convergent `A/Q` of `α` together with the ranges `X`, `Y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinSumQuery {
    pub alpha: Irrational,
    pub a: i128,
    pub q: i128,
    pub x: f64,
    pub y: f64,
}

impl MinSumQuery {
    pub fn new(alpha: Irrational, a: i128, q: i128, x: f64, y: f64) -> Result<Self> {
        if q < 1 || gcd(a.unsigned_abs() as u64, q as u64) != 1 {
            return Err(Error::invalid(format!(
                "{a}/{q} is not a reduced fraction with Q >= 1"
            )));
        }
        if !alpha.certify_approximation(a, q)? {
            return Err(Error::invalid(format!(
                "|alpha - {a}/{q}| < 1/Q^2 does not hold"
            )));
        }
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid(format!(
                "X and Y must be positive (X={x}, Y={y})"
            )));
        }
        if x > 1e9 {
            return Err(Error::ResourceLimit(format!("X = {x} exceeds 1e9")));
        }
        Ok(Self { alpha, a, q, x, y })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinSumReport {
    #[serde(rename = "Q")]
    pub q: i128,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub exact: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `Σ_{1≤m≤X} min(Y/m, 1/‖αm‖)` and the bound `(Y/Q + X + Q) log(2XQ)`.
pub fn min_sum(query: &MinSumQuery) -> Result<MinSumReport> {
    let mut acc = Neumaier::new();
    let top = query.x.floor() as u64;
    for m in 1..=top {
        let cap = query.y / m as f64;
        let (f, err) = query.alpha.frac_mul(m);
        let d = dist(f);
        if cap <= 1.0 / (d + err) {
            acc.add(cap);
        } else if d > 0.0 && err / d <= MIN_SUM_REL_ERR {
            acc.add(1.0 / d);
        } else {
            return Err(Error::InsufficientPrecision(format!(
                "||alpha*{m}|| = {d:e} with error {err:e} cannot be certified"
            )));
        }
    }
    let exact = acc.value();
    let (x, q) = (query.x, query.q as f64);
    let bound = (query.y / q + x + q) * (2.0 * x * q).ln();
    Ok(MinSumReport {
        q: query.q,
        x,
        y: query.y,
        exact,
        bound,
        ratio: exact / bound,
    })
}

/// CSV rows `Q, X, Y, exact, bound, ratio`.
pub fn min_sum_table(rows: &[MinSumReport]) -> Table {
    let mut t = Table::new(&["Q", "X", "Y", "exact", "bound", "ratio"]);
    for r in rows {
        t.push(vec![
            json!(r.q),
            json!(r.x),
            json!(r.y),
            json!(r.exact),
            json!(r.bound),
            json!(r.ratio),
        ]);
    }
    t
}

/// `u = 2⁻⁷ x^{δ/2}`, `v = 2⁷ x^{1/3}`, `w = x^{1/2−δ/4}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HbParameters {
    pub k: u32,
    pub x: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl HbParameters {
    pub fn from_scale(x: f64, delta: f64, k: u32) -> Result<Self> {
        if k < 2 || !(x > 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!(
                "need k >= 2, x > 1, delta in (0,1) (k={k}, x={x}, delta={delta})"
            )));
        }
        Ok(Self {
            k,
            x,
            u: x.powf(delta / 2.0) / 128.0,
            v: 128.0 * x.cbrt(),
            w: x.powf(0.5 - delta / 4.0),
        })
    }

    pub fn is_ordered(&self) -> bool {
        self.u < self.v && self.v < self.w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HbCheck {
    pub n: u64,
    pub k: u32,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HbSweep {
    pub nmax: u64,
    pub k: u32,
    pub x: f64,
    /// Largest `m` with `m^k ≤ x`.
    pub z_floor: u64,
    pub checked: u64,
    pub max_abs_error: f64,
    pub failures: Vec<u64>,
    pub pass: bool,
}

/// Tolerance for the identity check.
pub const HB_TOLERANCE: f64 = 1e-9;
const MAX_HB_N: u64 = 10_000_000;

/// Dirichlet convolution of sequences indexed `1..=n` (index 0 unused).
fn dirichlet(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len() - 1;
    let mut c = vec![0i64; n + 1];
    for i in 1..=n {
        if a[i] == 0 {
            continue;
        }
        let mut j = 1;
        while i * j <= n {
            c[i * j] += a[i] * b[j];
            j += 1;
        }
    }
    c
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// The coefficient sequence `F = Σ_j (−1)^{j−1} C(k,j) μ_z^{*j} * 1^{*(j−1)}`,
/// so that the right side of the identity is `F * log`.
fn hb_coefficients(nmax: u64, k: u32, z_floor: u64) -> Vec<i64> {
    let n = nmax as usize;
    let mu_z: Vec<i64> = (0..=n)
        .map(|m| {
            if m >= 1 && m as u64 <= z_floor {
                moebius(m as u64) as i64
            } else {
                0
            }
        })
        .collect();
    let one: Vec<i64> = (0..=n).map(|m| i64::from(m >= 1)).collect();
    let mut total = vec![0i64; n + 1];
    let mut mu_pow = mu_z.clone();
    let mut tau = {
        let mut t = vec![0i64; n + 1];
        t[1] = 1;
        t
    };
    for j in 1..=k {
        if j > 1 {
            mu_pow = dirichlet(&mu_pow, &mu_z);
            tau = dirichlet(&tau, &one);
        }
        let term = dirichlet(&mu_pow, &tau);
        let c = binomial(k, j) * if j % 2 == 1 { 1 } else { -1 };
        for (t, v) in total.iter_mut().zip(term) {
            *t += c * v;
        }
    }
    total
}

fn hb_z_floor(k: u32, x: f64) -> u64 {
    let mut m = x.powf(1.0 / k as f64).floor() as u64;
    while ((m + 1) as f64).powi(k as i32) <= x {
        m += 1;
    }
    while m > 0 && (m as f64).powi(k as i32) > x {
        m -= 1;
    }
    m
}

fn hb_validate(nmax: u64, k: u32, x: f64) -> Result<()> {
    if !(2..=6).contains(&k) {
        return Err(Error::invalid(format!("k must be in 2..=6, got {k}")));
    }
    if nmax == 0 || nmax as f64 > x {
        return Err(Error::invalid(format!(
            "need 1 <= n <= x (n={nmax}, x={x})"
        )));
    }
    if nmax > MAX_HB_N {
        return Err(Error::ResourceLimit(format!(
            "n = {nmax} exceeds {MAX_HB_N}"
        )));
    }
    Ok(())
}

fn hb_rhs(coeffs: &[i64], n: u64) -> f64 {
    let mut acc = Neumaier::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let e = n / d;
            acc.add(coeffs[d as usize] as f64 * (e as f64).ln());
            if e != d {
                acc.add(coeffs[e as usize] as f64 * (d as f64).ln());
            }
        }
        d += 1;
    }
    acc.value()
}

/// Checks `Λ(n) = Σ_j (−1)^{j−1} C(k,j) Σ μ(m₁)⋯μ(m_j) log n₁` over
/// `m₁⋯m_j n₁⋯n_j = n`, `m_i ≤ x^{1/k}`.
pub fn hb_identity_check(n: u64, k: u32, x: f64) -> Result<HbCheck> {
    hb_validate(n, k, x)?;
    let coeffs = hb_coefficients(n, k, hb_z_floor(k, x));
    let lhs = von_mangoldt(n);
    let rhs = hb_rhs(&coeffs, n);
    Ok(HbCheck {
        n,
        k,
        x,
        lhs,
        rhs,
        pass: (lhs - rhs).abs() <= HB_TOLERANCE,
    })
}

/// [`hb_identity_check`] for every `n ≤ nmax`.
pub fn hb_identity_sweep(nmax: u64, k: u32, x: f64, workers: usize) -> Result<HbSweep> {
    hb_validate(nmax, k, x)?;
    let z_floor = hb_z_floor(k, x);
    let coeffs = hb_coefficients(nmax, k, z_floor);
    let chunks = chunk_interval(0, nmax, 4096);
    let parts = map_ordered(workers, &chunks, |&(a, b)| {
        let mut worst = 0.0f64;
        let mut bad = Vec::new();
        for n in a + 1..=b {
            let err = (von_mangoldt(n) - hb_rhs(&coeffs, n)).abs();
            worst = worst.max(err);
            if !(err <= HB_TOLERANCE) {
                bad.push(n);
            }
        }
        (worst, bad)
    });
    let mut max_abs_error = 0.0f64;
    let mut failures = Vec::new();
    for (w, bad) in parts {
        max_abs_error = max_abs_error.max(w);
        failures.extend(bad);
    }
    Ok(HbSweep {
        nmax,
        k,
        x,
        z_floor,
        checked: nmax,
        max_abs_error,
        pass: failures.is_empty(),
        failures,
    })
}

/// `N = Q^{2/(1+θ)}`.
pub fn choose_n(q: i128, theta: f64) -> Result<f64> {
    if q < 2 || !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid(format!(
            "need Q >= 2 and theta in (0, 1] (Q={q}, theta={theta})"
        )));
    }
    Ok((q as f64).powf(2.0 / (1.0 + theta)))
}

/// The divisor weights `ξ(d)`.
#[derive(Clone, Debug, PartialEq)]
pub enum XiWeights {
    Custom(BTreeMap<u64, Complex64>),
    /// `ξ(d) = λ*(d) − κγ(d)`, where `λ*` is the lower weight on `d | P(z)` and zero elsewhere.
    Gamma,
}

/// The frequency weights `c(k)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FrequencyWeights {
    /// `c(k) = Δ⁻¹ g(k) e(βk)` for `1 ≤ |k| ≤ H`.
    Smoothing,
    Custom(BTreeMap<i64, Complex64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SSumReport {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "Q")]
    pub q: Option<i128>,
    #[serde(rename = "D")]
    pub level: f64,
    #[serde(rename = "H")]
    pub cutoff: u64,
    #[serde(rename = "S_re")]
    pub s_re: f64,
    #[serde(rename = "S_im")]
    pub s_im: f64,
    #[serde(rename = "abs_S")]
    pub abs_s: f64,
    /// `|S|·log²N / N`.
    pub ratio_target: f64,
}

/// `λ⁻(d) − κγ(d)` for `d ≤ D`.
pub fn gamma_xi(params: &Params, n: f64) -> Result<BTreeMap<u64, Complex64>> {
    let sc = DerivedScales::new(params, n)?;
    let mut xi: BTreeMap<u64, Complex64> = BTreeMap::new();
    for (d, w) in build_rosser(Sign::Lower, sc.level.max(1.0), sc.z)?.support() {
        *xi.entry(d).or_default() += w as f64;
    }
    for (&m, &g) in &gamma_m_coeffs(params, n)?.table {
        *xi.entry(m).or_default() -= params.kappa * g;
    }
    xi.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    Ok(xi)
}

/// `S(N) = Σ_{d≤D} ξ(d) Σ_{1≤|k|≤H} c(k) Σ_{N/2<p≤N, d | p+2} e(αpk) log p`.
#[allow(clippy::too_many_arguments)]
pub fn s_sum(
    n: f64,
    alpha: &Irrational,
    beta: f64,
    params: &Params,
    xi: &XiWeights,
    freqs: &FrequencyWeights,
    q: Option<i128>,
    workers: usize,
) -> Result<SSumReport> {
    if !(n >= 4.0) || !n.is_finite() {
        return Err(Error::invalid(format!("N must be at least 4, got {n}")));
    }
    if n > MAX_S_SUM_N {
        return Err(Error::ResourceLimit(format!(
            "N = {n} exceeds {MAX_S_SUM_N}"
        )));
    }
    let sc = DerivedScales::new(params, n)?;
    let chi = SmoothingFunction::for_scale(n, params.theta)?;
    let cutoff = chi.cutoff();
    let level_floor = sc.level.floor() as u64;
    let xi_map = match xi {
        XiWeights::Custom(m) => m.clone(),
        XiWeights::Gamma => gamma_xi(params, n)?,
    };
    let xi_list: Vec<(u64, Complex64)> = xi_map
        .into_iter()
        .filter(|&(d, v)| d >= 1 && d <= level_floor && v.norm() > 0.0)
        .collect();
    if xi_list
        .iter()
        .any(|(_, v)| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::invalid("xi has non-finite entries"));
    }
    let c_list: Vec<(i64, Complex64)> = match freqs {
        FrequencyWeights::Smoothing => (1..=cutoff as i64)
            .map(|k| Ok((k, chi.c_coeff(k, beta)?)))
            .collect::<Result<_>>()?,
        FrequencyWeights::Custom(m) => m
            .iter()
            .filter(|(&k, _)| k != 0 && k.unsigned_abs() <= cutoff)
            .map(|(&k, &c)| (k, c))
            .collect(),
    };
    let paired = matches!(freqs, FrequencyWeights::Smoothing);
    let lo = (n / 2.0).floor() as u64;
    let hi = n.floor() as u64;
    let chunks = chunk_interval(lo, hi, 1 << 15);
    let parts = map_ordered(workers, &chunks, |&(a, b)| -> Result<Complex64> {
        let primes = primes_in(a, b)?;
        // Weights on m = p + 2 ∈ (a+2, b+2].
        let base = a + 3;
        let mut weight = vec![Complex64::new(0.0, 0.0); (b - a) as usize];
        for &(d, v) in &xi_list {
            let mut m = (a + 2) / d * d + d;
            while m <= b + 2 {
                weight[(m - base) as usize] += v;
                m += d;
            }
        }
        let mut acc = ComplexSum::new();
        for &p in primes.primes() {
            let w = weight[(p + 2 - base) as usize];
            if w.norm() == 0.0 {
                continue;
            }
            let mut inner = ComplexSum::new();
            for &(k, c) in &c_list {
                let (f, _) = alpha.frac_mul(p * k.unsigned_abs());
                let phase = if k > 0 { e(f) } else { e(f).conj() };
                if paired {
                    inner.add(Complex64::new(2.0 * (c * phase).re, 0.0));
                } else {
                    inner.add(c * phase);
                }
            }
            acc.add(w * inner.value() * (p as f64).ln());
        }
        Ok(acc.value())
    });
    let mut total = ComplexSum::new();
    for part in parts {
        total.add(part?);
    }
    let s = total.value();
    Ok(SSumReport {
        n,
        q,
        level: sc.level,
        cutoff,
        s_re: s.re,
        s_im: s.im,
        abs_s: s.norm(),
        ratio_target: s.norm() * n.ln().powi(2) / n,
    })
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Solves `l m ≡ −2 (mod d)`; returns `(residue, modulus)`.
fn solve_one(l: u64, d: u64) -> Option<(i128, i128)> {
    let (l, d) = (l as i128, d as i128);
    let target = (-2i128).rem_euclid(d);
    let (g, x, _) = ext_gcd(l.rem_euclid(d), d);
    if target % g != 0 {
        return None;
    }
    let modulus = d / g;
    Some((
        ((target / g) * x).rem_euclid(modulus.max(1)),
        modulus.max(1),
    ))
}

/// Solves the system `l₁ m + 2 ≡ 0 (mod d₁)`, `l₂ m + 2 ≡ 0 (mod d₂)`.
///
/// Returns `(f, M)` with the solution set `m ≡ f (mod M)`, or `None` when the
/// system is inconsistent. When `gcd(lᵢ, dᵢ) = 1`, `M = [d₁, d₂]`.
pub fn solve_linear_congruences(l1: u64, d1: u64, l2: u64, d2: u64) -> Option<(u64, u64)> {
    if d1 == 0 || d2 == 0 {
        return None;
    }
    let (r1, m1) = solve_one(l1, d1)?;
    let (r2, m2) = solve_one(l2, d2)?;
    let (g, p, _) = ext_gcd(m1, m2);
    if (r2 - r1) % g != 0 {
        return None;
    }
    let lcm = m1 / g * m2;
    let t = ((r2 - r1) / g * p).rem_euclid(m2 / g);
    Some(((r1 + m1 * t).rem_euclid(lcm) as u64, lcm as u64))
}

/// Type-I inner sum `U = e(αkml₀) Σ_{s₀<s≤s₁} e(αkmds)`.
pub fn type_one_inner(
    alpha: &Irrational,
    k: u64,
    m: u64,
    l0: u64,
    d: u64,
    s0: u64,
    s1: u64,
) -> Result<Complex64> {
    if s1 <= s0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let step = alpha.frac_mul(k * m * d).0;
    let g = geometric_sum(step, s1 - s0)?;
    let start = alpha.frac_mul(k * m * l0).0 + frac(step * (s0 + 1) as f64);
    Ok(e(start) * g.value)
}

/// Type-II inner sum `V = Σ_{M'<m≤M₁', lᵢm+2≡0 (dᵢ)} e(αm(k₁l₁ − k₂l₂))` by
/// reduction to a geometric sum along the merged progression.
#[allow(clippy::too_many_arguments)]
pub fn type_two_inner(
    alpha: &Irrational,
    l: (u64, u64),
    d: (u64, u64),
    k: (u64, u64),
    m_lo: u64,
    m_hi: u64,
) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let Some((f, modulus)) = solve_linear_congruences(l.0, d.0, l.1, d.1) else {
        return Ok(zero);
    };
    if m_hi <= m_lo {
        return Ok(zero);
    }
    // First admissible m > m_lo.
    let first = if m_lo < f {
        f
    } else {
        f + ((m_lo - f) / modulus + 1) * modulus
    };
    if first > m_hi {
        return Ok(zero);
    }
    let count = (m_hi - first) / modulus + 1;
    let h = (k.0 * l.0) as i128 - (k.1 * l.1) as i128;
    let phase_of = |m: u64| -> f64 {
        let f = alpha.frac_mul(m * h.unsigned_abs() as u64).0;
        if h >= 0 {
            f
        } else {
            frac(-f)
        }
    };
    let g = geometric_sum(phase_of(modulus), count)?;
    Ok(e(phase_of(first)) * g.value)
}
