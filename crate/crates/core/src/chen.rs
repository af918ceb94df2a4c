//! Chen-type weights and the weighted prime sums.
//!
//! For primes `N/2 < p ≤ N` with `(p+2, P(z)) = 1`:
//!
//! ```text
//! T_p = 1 − κ Σ_{z<q≤y, q|p+2} (1 − log q/log y)
//! Γ   = Σ χ(αp+β) T_p log p = Φ − κG
//! ```
//!
//! Real bounds are compared exactly on integers: `q > z ⇔ q > ⌊z⌋`,
//! `q ≤ y ⇔ q ≤ ⌊y⌋`, `q < y ⇔ q < ⌈y⌉`, `d ≤ D ⇔ d ≤ ⌊D⌋`.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::arith::{factorize, primes_in, small_primes, theta_in, FactorTable};
use crate::error::{Error, Result};
use crate::feasibility::{DerivedScales, Params};
use crate::modone::{dist, frac, Irrational, SmoothingFunction};
use crate::parallel::{chunk_interval, map_ordered};
use crate::report::Table;
use crate::rosser::{build_rosser, Sign};
use crate::sum::Neumaier;

/// Default number of integers per scan chunk.
pub const DEFAULT_CHUNK: u64 = 1 << 16;
/// Largest `N` accepted by the scans.
pub const MAX_N: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiMode {
    Smooth,
    /// `χ ≡ 1`, for cross-checking the sieve logic in isolation.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub workers: usize,
    pub chunk_len: u64,
    pub chi_mode: ChiMode,
    pub keep_records: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            chunk_len: DEFAULT_CHUNK,
            chi_mode: ChiMode::Smooth,
            keep_records: false,
        }
    }
}

/// Integer versions of the real bounds `z`, `y`, `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerBounds {
    pub z_floor: u64,
    pub y_floor: u64,
    pub y_ceil: u64,
    pub level_floor: u64,
}

impl IntegerBounds {
    pub fn new(sc: &DerivedScales) -> Self {
        Self {
            z_floor: sc.z.floor() as u64,
            y_floor: sc.y.floor() as u64,
            y_ceil: sc.y.ceil() as u64,
            level_floor: sc.level.floor() as u64,
        }
    }
}

/// `Σ_{z<q≤y, q|n} (1 − log q/log y)` from the distinct primes of `n`.
fn chen_inner(factors: &[u64], z_floor: u64, y_floor: u64, log_y: f64) -> f64 {
    factors
        .iter()
        .filter(|&&q| q > z_floor && q <= y_floor)
        .map(|&q| 1.0 - (q as f64).ln() / log_y)
        .sum()
}

/// `T_p` from the true factorization of `p + 2`.
pub fn chen_weight(p: u64, z: f64, y: f64, kappa: f64) -> f64 {
    let factors: Vec<u64> = factorize(p + 2).into_iter().map(|(q, _)| q).collect();
    1.0 - kappa * chen_inner(&factors, z.floor() as u64, y.floor() as u64, y.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimeRecord {
    pub p: u64,
    pub t_p: f64,
    pub chi: f64,
    pub omega_p_plus_2: u32,
    pub coprime: bool,
    pub squarefree: bool,
    pub contributes_gamma3: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanCounts {
    /// Primes in `(N/2, N]`.
    pub primes: u64,
    /// … with `(p+2, P(z)) = 1`.
    pub coprime: u64,
    /// … and `T_p > 0`.
    pub positive_weight: u64,
    /// … and `μ²(p+2) = 0`.
    pub non_squarefree: u64,
    /// Terms of `Γ₃`: additionally `μ²(p+2) = 1` and `p ≤ N − 2`.
    pub gamma3_terms: u64,
    /// Primes with `‖αp+β‖ < Δ`.
    pub near: u64,
}

/// The primes `p ∈ (N/2, N]` with `(p+2, P(z)) = 1`, `T_p > 0`,
/// `μ²(p+2) = 1` and `‖αp+β‖ < Δ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub count: u64,
    pub smallest: Option<u64>,
    pub largest: Option<u64>,
    pub max_omega: u32,
    pub omega_histogram: BTreeMap<u32, u64>,
    /// Members with `Ω(p+2)` above the almost-prime order `r`.
    pub violations: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedScan {
    #[serde(rename = "N")]
    pub n: f64,
    pub params: Params,
    pub alpha: String,
    pub beta: f64,
    pub scales: DerivedScales,
    pub bounds: IntegerBounds,
    pub chi_mode: ChiMode,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "Gamma1")]
    pub gamma1: f64,
    #[serde(rename = "Gamma2")]
    pub gamma2: f64,
    #[serde(rename = "Gamma3")]
    pub gamma3: f64,
    /// `|Γ − (Φ − κG)| / max(|Γ|, |Φ|, 1)`.
    pub identity_residual: f64,
    /// `Γ₂ / N^{1−η}`.
    pub gamma2_shape: f64,
    pub r: u32,
    pub counts: ScanCounts,
    pub witnesses: WitnessSummary,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<PrimeRecord>,
}

impl WeightedScan {
    pub fn identity_holds(&self, tol: f64) -> bool {
        self.identity_residual <= tol
    }

    /// CSV columns `p, T_p, chi, omega_p_plus_2, contributes_gamma3`.
    pub fn records_table(&self) -> Table {
        let mut t = Table::new(&["p", "T_p", "chi", "omega_p_plus_2", "contributes_gamma3"]);
        for r in &self.records {
            t.push(vec![
                json!(r.p),
                json!(r.t_p),
                json!(r.chi),
                json!(r.omega_p_plus_2),
                json!(r.contributes_gamma3),
            ]);
        }
        t
    }
}

#[derive(Default)]
struct ChunkAcc {
    gamma: Neumaier,
    phi: Neumaier,
    g: Neumaier,
    gamma1: Neumaier,
    gamma2: Neumaier,
    gamma3: Neumaier,
    counts: ScanCounts,
    witnesses: WitnessSummary,
    records: Vec<PrimeRecord>,
}

struct ScanContext<'a> {
    alpha: &'a Irrational,
    beta: f64,
    kappa: f64,
    delta: f64,
    chi: &'a SmoothingFunction,
    mode: ChiMode,
    bounds: IntegerBounds,
    log_y: f64,
    n_floor: u64,
    r: u32,
    base: &'a [u64],
    keep_records: bool,
}

impl ScanContext<'_> {
    fn run(&self, lo: u64, hi: u64) -> Result<ChunkAcc> {
        let mut acc = ChunkAcc::default();
        let primes = primes_in(lo, hi)?;
        let table = FactorTable::with_base(lo + 2, hi + 2, self.base)?;
        for &p in primes.primes() {
            acc.counts.primes += 1;
            let m = p + 2;
            let factors = table.prime_factors(m);
            let coprime = factors.iter().all(|&q| q > self.bounds.z_floor);
            let squarefree = table.is_squarefree(m);
            let omega = table.big_omega(m);
            let t = frac(self.alpha.frac_mul(p).0 + self.beta);
            let near = dist(t) < self.delta;
            if near {
                acc.counts.near += 1;
            }
            let inner = chen_inner(
                factors,
                self.bounds.z_floor,
                self.bounds.y_floor,
                self.log_y,
            );
            let t_p = 1.0 - self.kappa * inner;
            let mut gamma3 = false;
            if coprime {
                acc.counts.coprime += 1;
                let chi = match self.mode {
                    ChiMode::Smooth => self.chi.eval(t),
                    ChiMode::Constant => 1.0,
                };
                let w = chi * (p as f64).ln();
                acc.phi.add(w);
                acc.g.add(w * inner);
                acc.gamma.add(w * t_p);
                if t_p > 0.0 {
                    acc.counts.positive_weight += 1;
                    acc.gamma1.add(w * t_p);
                    if !squarefree {
                        acc.counts.non_squarefree += 1;
                        acc.gamma2.add(w * t_p);
                    } else {
                        if p + 2 <= self.n_floor {
                            gamma3 = true;
                            acc.counts.gamma3_terms += 1;
                            acc.gamma3.add(w * t_p);
                        }
                        if near {
                            let ws = &mut acc.witnesses;
                            ws.count += 1;
                            ws.smallest.get_or_insert(p);
                            ws.largest = Some(p);
                            ws.max_omega = ws.max_omega.max(omega);
                            *ws.omega_histogram.entry(omega).or_insert(0) += 1;
                            if omega > self.r {
                                ws.violations.push(p);
                            }
                        }
                    }
                }
                if self.keep_records {
                    acc.records.push(PrimeRecord {
                        p,
                        t_p,
                        chi,
                        omega_p_plus_2: omega,
                        coprime,
                        squarefree,
                        contributes_gamma3: gamma3,
                    });
                }
            } else if self.keep_records {
                acc.records.push(PrimeRecord {
                    p,
                    t_p,
                    chi: 0.0,
                    omega_p_plus_2: omega,
                    coprime,
                    squarefree,
                    contributes_gamma3: false,
                });
            }
        }
        Ok(acc)
    }
}

/// Structural checks shared by the scans: fields in range, `κ ≥ 0`, `η < ρ`.
fn validate_scan(n: f64, p: &Params) -> Result<()> {
    let mut bad = Vec::new();
    if !(n >= 1e3) || !(n <= MAX_N) {
        bad.push(format!("N = {n} outside [1e3, {MAX_N:e}]"));
    }
    for (name, v) in [
        ("theta", p.theta),
        ("eta", p.eta),
        ("rho", p.rho),
        ("delta", p.delta),
    ] {
        if !(v > 0.0 && v < 1.0) {
            bad.push(format!("{name} = {v} not in (0, 1)"));
        }
    }
    if !(p.kappa >= 0.0) || !p.kappa.is_finite() {
        bad.push(format!("kappa = {} must be nonnegative", p.kappa));
    }
    if !(p.eta < p.rho) {
        bad.push(format!(
            "need eta < rho so that z < y (eta={}, rho={})",
            p.eta, p.rho
        ));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::InfeasibleParams(bad))
    }
}

fn scan_bounds(n: f64) -> (u64, u64) {
    ((n / 2.0).floor() as u64, n.floor() as u64)
}

/// Computes `Γ`, `Φ`, `G`, `Γ₁`, `Γ₂`, `Γ₃` over the primes in `(N/2, N]`.
pub fn gamma_eval(
    n: f64,
    alpha: &Irrational,
    beta: f64,
    params: &Params,
    opts: &ScanOptions,
) -> Result<WeightedScan> {
    validate_scan(n, params)?;
    let scales = DerivedScales::new(params, n)?;
    let bounds = IntegerBounds::new(&scales);
    let chi = SmoothingFunction::for_scale(n, params.theta)?;
    let (lo, hi) = scan_bounds(n);
    let base = small_primes(((hi + 2) as f64).sqrt() as u64 + 1);
    let r = (1.0 / params.kappa + 1.0 / params.rho)
        .floor()
        .min(u32::MAX as f64) as u32;
    let ctx = ScanContext {
        alpha,
        beta,
        kappa: params.kappa,
        delta: scales.delta,
        chi: &chi,
        mode: opts.chi_mode,
        bounds,
        log_y: scales.y.ln(),
        n_floor: hi,
        r,
        base: &base,
        keep_records: opts.keep_records,
    };
    let chunks = chunk_interval(lo, hi, opts.chunk_len);
    let parts = map_ordered(opts.workers, &chunks, |&(a, b)| ctx.run(a, b));

    let mut sums = [
        Neumaier::new(),
        Neumaier::new(),
        Neumaier::new(),
        Neumaier::new(),
        Neumaier::new(),
        Neumaier::new(),
    ];
    let mut counts = ScanCounts::default();
    let mut witnesses = WitnessSummary::default();
    let mut records = Vec::new();
    for part in parts {
        let part = part?;
        for (s, v) in sums.iter_mut().zip([
            &part.gamma,
            &part.phi,
            &part.g,
            &part.gamma1,
            &part.gamma2,
            &part.gamma3,
        ]) {
            s.add(v.value());
        }
        counts.primes += part.counts.primes;
        counts.coprime += part.counts.coprime;
        counts.positive_weight += part.counts.positive_weight;
        counts.non_squarefree += part.counts.non_squarefree;
        counts.gamma3_terms += part.counts.gamma3_terms;
        counts.near += part.counts.near;
        let w = part.witnesses;
        witnesses.count += w.count;
        if witnesses.smallest.is_none() {
            witnesses.smallest = w.smallest;
        }
        if w.largest.is_some() {
            witnesses.largest = w.largest;
        }
        witnesses.max_omega = witnesses.max_omega.max(w.max_omega);
        for (k, v) in w.omega_histogram {
            *witnesses.omega_histogram.entry(k).or_insert(0) += v;
        }
        witnesses.violations.extend(w.violations);
        records.extend(part.records);
    }
    let [gamma, phi, g, gamma1, gamma2, gamma3] = sums.map(|s| s.value());
    let identity_residual =
        (gamma - (phi - params.kappa * g)).abs() / gamma.abs().max(phi.abs()).max(1.0);
    Ok(WeightedScan {
        n,
        params: *params,
        alpha: alpha.to_string(),
        beta,
        scales,
        bounds,
        chi_mode: opts.chi_mode,
        gamma,
        phi,
        g,
        gamma1,
        gamma2,
        gamma3,
        identity_residual,
        gamma2_shape: gamma2 / n.powf(1.0 - params.eta),
        r,
        counts,
        witnesses,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaViolation {
    pub p: u64,
    pub omega: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaAudit {
    #[serde(rename = "N")]
    pub n: f64,
    pub bound: f64,
    pub r: u32,
    /// Primes `p ∈ (N/2, N−2]` meeting all three conditions.
    pub checked: u64,
    pub max_omega: u32,
    pub histogram: BTreeMap<u32, u64>,
    pub violations: Vec<OmegaViolation>,
}

/// For `p ∈ (N/2, N−2]` with `T_p > 0`, `μ²(p+2) = 1`, `(p+2, P(z)) = 1`,
/// checks `Ω(p+2) ≤ 1/κ + 1/ρ`.
pub fn omega_bound_audit(n: f64, params: &Params, workers: usize) -> Result<OmegaAudit> {
    validate_scan(n, params)?;
    let scales = DerivedScales::new(params, n)?;
    let bounds = IntegerBounds::new(&scales);
    let log_y = scales.y.ln();
    let bound = 1.0 / params.kappa + 1.0 / params.rho;
    let (lo, hi) = scan_bounds(n);
    let hi = hi.saturating_sub(2);
    let base = small_primes(((hi + 4) as f64).sqrt() as u64 + 1);
    let chunks = chunk_interval(lo, hi, DEFAULT_CHUNK);
    let parts = map_ordered(
        workers,
        &chunks,
        |&(a, b)| -> Result<(u64, BTreeMap<u32, u64>, Vec<OmegaViolation>)> {
            let primes = primes_in(a, b)?;
            let table = FactorTable::with_base(a + 2, b + 2, &base)?;
            let mut checked = 0;
            let mut hist = BTreeMap::new();
            let mut bad = Vec::new();
            for &p in primes.primes() {
                let m = p + 2;
                let factors = table.prime_factors(m);
                if !table.is_squarefree(m) || !factors.iter().all(|&q| q > bounds.z_floor) {
                    continue;
                }
                if 1.0 - params.kappa * chen_inner(factors, bounds.z_floor, bounds.y_floor, log_y)
                    <= 0.0
                {
                    continue;
                }
                checked += 1;
                let omega = table.big_omega(m);
                *hist.entry(omega).or_insert(0) += 1;
                if omega as f64 > bound {
                    bad.push(OmegaViolation { p, omega });
                }
            }
            Ok((checked, hist, bad))
        },
    );
    let mut audit = OmegaAudit {
        n,
        bound,
        r: bound.floor() as u32,
        checked: 0,
        max_omega: 0,
        histogram: BTreeMap::new(),
        violations: Vec::new(),
    };
    for part in parts {
        let (checked, hist, bad) = part?;
        audit.checked += checked;
        for (k, v) in hist {
            audit.max_omega = audit.max_omega.max(k);
            *audit.histogram.entry(k).or_insert(0) += v;
        }
        audit.violations.extend(bad);
    }
    Ok(audit)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaCoefficients {
    #[serde(rename = "N")]
    pub n: f64,
    pub level: f64,
    pub z: f64,
    pub y: f64,
    /// Nonzero `γ(m)`, `m ≤ D`.
    pub table: BTreeMap<u64, f64>,
    pub max_abs: f64,
}

impl GammaCoefficients {
    pub fn get(&self, m: u64) -> f64 {
        self.table.get(&m).copied().unwrap_or(0.0)
    }
}

/// `γ(m) = Σ_{z<q<y, d|P(z), qd=m} (1 − log q/log y) λ_q(d)` with `λ_q` the
/// upper weights of level `D/q`.
pub fn gamma_m_coeffs(params: &Params, n: f64) -> Result<GammaCoefficients> {
    let sc = DerivedScales::new(params, n)?;
    if !(sc.z < sc.y) {
        return Err(Error::invalid(format!(
            "need z < y (z={}, y={})",
            sc.z, sc.y
        )));
    }
    let b = IntegerBounds::new(&sc);
    let log_y = sc.y.ln();
    let mut table: BTreeMap<u64, f64> = BTreeMap::new();
    let q_hi = (b.y_ceil - 1).min(b.level_floor);
    if q_hi > b.z_floor {
        for &q in primes_in(b.z_floor, q_hi)?.primes() {
            let w = build_rosser(Sign::Upper, sc.level / q as f64, sc.z)?;
            let factor = 1.0 - (q as f64).ln() / log_y;
            for (d, lam) in w.support() {
                *table.entry(q * d).or_insert(0.0) += factor * lam as f64;
            }
        }
    }
    table.retain(|_, v| *v != 0.0);
    let max_abs = table.values().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(GammaCoefficients {
        n,
        level: sc.level,
        z: sc.z,
        y: sc.y,
        table,
        max_abs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BvAudit {
    #[serde(rename = "N")]
    pub n: f64,
    pub phi2: f64,
    pub phi2_main: f64,
    /// `|Φ₂ − main|·log²N/N`.
    pub phi2_scaled_error: f64,
    pub g2: f64,
    pub g2_main: f64,
    pub g2_scaled_error: f64,
    pub lower_support: usize,
    pub gamma_support: usize,
}

fn euler_phi_squarefree(m: u64) -> f64 {
    factorize(m).iter().map(|&(p, _)| (p - 1) as f64).product()
}

/// Exact `Φ₂`, `G₂` against their main terms `(N/2)Σλ⁻(d)/φ(d)` and `(N/2)Σγ(m)/φ(m)`.
pub fn bv_main_term_audit(n: f64, params: &Params, workers: usize) -> Result<BvAudit> {
    validate_scan(n, params)?;
    let sc = DerivedScales::new(params, n)?;
    let lower = build_rosser(Sign::Lower, sc.level, sc.z)?;
    let gamma = gamma_m_coeffs(params, n)?;
    let (lo, hi) = scan_bounds(n);
    let primes = primes_in(lo, hi)?;
    let residue = |d: u64| (d - 2 % d) % d;

    let lam: Vec<(u64, f64)> = lower.support().map(|(d, w)| (d, w as f64)).collect();
    let gam: Vec<(u64, f64)> = gamma.table.iter().map(|(&m, &v)| (m, v)).collect();
    let weighted = |items: &[(u64, f64)]| -> (f64, f64) {
        let terms = map_ordered(workers, items, |&(d, w)| {
            (
                w * theta_in(&primes, d, residue(d)),
                w / euler_phi_squarefree(d),
            )
        });
        let mut exact = Neumaier::new();
        let mut main = Neumaier::new();
        for (a, b) in terms {
            exact.add(a);
            main.add(b);
        }
        (exact.value(), main.value() * n / 2.0)
    };
    let (phi2, phi2_main) = weighted(&lam);
    let (g2, g2_main) = weighted(&gam);
    let scale = n.ln().powi(2) / n;
    Ok(BvAudit {
        n,
        phi2,
        phi2_main,
        phi2_scaled_error: (phi2 - phi2_main).abs() * scale,
        g2,
        g2_main,
        g2_scaled_error: (g2 - g2_main).abs() * scale,
        lower_support: lam.len(),
        gamma_support: gam.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equidistribution {
    #[serde(rename = "N")]
    pub n: f64,
    pub alpha: String,
    pub beta: f64,
    pub delta: f64,
    pub primes: u64,
    pub hits: u64,
    pub fraction: f64,
    /// Measure of `{t : ‖t‖ < Δ}`, that is `min(2Δ, 1)`.
    pub expected: f64,
    /// `fraction / expected − 1`.
    pub deviation: f64,
}

/// Fraction of primes `p ∈ (N/2, N]` with `‖αp+β‖ < Δ`.
pub fn equidistribution(
    n: f64,
    alpha: &Irrational,
    beta: f64,
    delta: f64,
    workers: usize,
) -> Result<Equidistribution> {
    if !(n >= 4.0) || !(n <= MAX_N) {
        return Err(Error::invalid(format!("N = {n} outside [4, {MAX_N:e}]")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let (lo, hi) = scan_bounds(n);
    let chunks = chunk_interval(lo, hi, DEFAULT_CHUNK);
    let parts = map_ordered(workers, &chunks, |&(a, b)| -> Result<(u64, u64)> {
        let primes = primes_in(a, b)?;
        let hits = primes
            .primes()
            .iter()
            .filter(|&&p| dist(alpha.frac_mul(p).0 + beta) < delta)
            .count();
        Ok((primes.len() as u64, hits as u64))
    });
    let (mut primes, mut hits) = (0, 0);
    for part in parts {
        let (a, b) = part?;
        primes += a;
        hits += b;
    }
    let fraction = if primes == 0 {
        0.0
    } else {
        hits as f64 / primes as f64
    };
    let expected = (2.0 * delta).min(1.0);
    Ok(Equidistribution {
        n,
        alpha: alpha.to_string(),
        beta,
        delta,
        primes,
        hits,
        fraction,
        expected,
        deviation: fraction / expected - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big_omega, moebius};

    fn reference() -> Params {
        Params::reference()
    }

    #[test]
    fn chen_weight_examples() {
        assert_eq!(chen_weight(5, 10.0, 100.0, 1.58), 1.0);
        assert!((chen_weight(41, 10.0, 100.0, 1.0) - 43f64.ln() / 100f64.ln()).abs() < 1e-15);
        assert!((chen_weight(41, 10.0, 100.0, 1.0) - 0.81673).abs() < 1e-5);
        for p in [3u64, 5, 7, 41, 101, 1_000_003] {
            assert_eq!(chen_weight(p, 10.0, 100.0, 0.0), 1.0);
        }
        // q = y is included, q = z is not.
        assert!(chen_weight(11, 3.0, 13.0, 1.0) == 1.0);
        assert!(chen_weight(1, 2.0, 3.0, 1.0) == 1.0);
    }

    #[test]
    fn identity_and_kappa_zero() {
        let a = Irrational::sqrt(2).unwrap();
        let s = gamma_eval(1e5, &a, 0.0, &reference(), &ScanOptions::default()).unwrap();
        assert!(s.gamma.is_finite() && s.phi.is_finite() && s.g.is_finite());
        assert!(s.identity_holds(1e-6));
        assert!((s.gamma - (s.phi - 1.58 * s.g)).abs() <= 1e-6 * s.phi.abs());
        let k0 = Params {
            kappa: 0.0,
            ..reference()
        };
        let s0 = gamma_eval(1e5, &a, 0.0, &k0, &ScanOptions::default()).unwrap();
        assert_eq!(s0.gamma, s0.phi);
        assert!(s.gamma2 >= 0.0 && s.gamma1 >= s.gamma3);
    }

    #[test]
    fn constant_chi_matches_direct_loop() {
        let a = Irrational::golden();
        let p = reference();
        let n = 2e4;
        let opts = ScanOptions {
            chi_mode: ChiMode::Constant,
            chunk_len: 1000,
            ..Default::default()
        };
        let s = gamma_eval(n, &a, 0.3, &p, &opts).unwrap();
        let sc = DerivedScales::new(&p, n).unwrap();
        let mut direct = 0.0;
        for q in primes_in(10_000, 20_000).unwrap().primes() {
            let f = factorize(q + 2);
            if f.iter().all(|&(r, _)| r as f64 > sc.z) {
                direct += chen_weight(*q, sc.z, sc.y, p.kappa) * (*q as f64).ln();
            }
        }
        assert!(
            (s.gamma - direct).abs() < 1e-9 * direct.abs(),
            "{} vs {direct}",
            s.gamma
        );
    }

    #[test]
    fn records_cross_checked_by_independent_filter() {
        let a = Irrational::sqrt(3).unwrap();
        let p = reference();
        let n = 3e4;
        let opts = ScanOptions {
            keep_records: true,
            chunk_len: 777,
            ..Default::default()
        };
        let s = gamma_eval(n, &a, 0.1, &p, &opts).unwrap();
        let sc = DerivedScales::new(&p, n).unwrap();
        assert_eq!(s.records.len() as u64, s.counts.primes);
        for r in &s.records {
            assert!(r.p > 15_000 && r.p <= 30_000);
            let m = r.p + 2;
            let coprime = factorize(m).iter().all(|&(q, _)| q as f64 > sc.z);
            let t = chen_weight(r.p, sc.z, sc.y, p.kappa);
            let expect = r.p <= 29_998 && coprime && t > 0.0 && moebius(m) != 0;
            assert_eq!(r.contributes_gamma3, expect, "p={}", r.p);
            assert_eq!(r.omega_p_plus_2, big_omega(m));
        }
        let csv = s.records_table().to_csv_string().unwrap();
        assert!(csv.starts_with("p,T_p,chi,omega_p_plus_2,contributes_gamma3\n"));
    }

    #[test]
    fn partition_and_workers_do_not_matter() {
        let a = Irrational::sqrt(2).unwrap();
        let p = reference();
        let base = gamma_eval(
            5e4,
            &a,
            0.0,
            &p,
            &ScanOptions {
                chunk_len: 50_000,
                ..Default::default()
            },
        )
        .unwrap();
        for chunk in [997, 4096, 12_345] {
            let s = gamma_eval(
                5e4,
                &a,
                0.0,
                &p,
                &ScanOptions {
                    chunk_len: chunk,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((s.gamma - base.gamma).abs() <= 1e-12 * base.gamma.abs());
            assert_eq!(s.counts, base.counts);
            assert_eq!(s.witnesses, base.witnesses);
        }
        let one = gamma_eval(
            5e4,
            &a,
            0.0,
            &p,
            &ScanOptions {
                chunk_len: 1000,
                workers: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let many = gamma_eval(
            5e4,
            &a,
            0.0,
            &p,
            &ScanOptions {
                chunk_len: 1000,
                workers: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn omega_audit() {
        let a = omega_bound_audit(1e5, &reference(), 2).unwrap();
        assert!(a.violations.is_empty());
        assert!(a.max_omega <= 4 && a.checked > 0);
        assert!((a.bound - 4.98074).abs() < 1e-5);
        let b = Params {
            kappa: 1.0,
            rho: 0.5,
            ..reference()
        };
        let audit = omega_bound_audit(1e5, &b, 1).unwrap();
        assert_eq!(audit.bound, 3.0);
        assert!(audit.violations.is_empty() && audit.max_omega <= 3);
    }

    #[test]
    fn gamma_coefficients() {
        let p = reference();
        let n = 1e6;
        let c = gamma_m_coeffs(&p, n).unwrap();
        assert!(c.max_abs <= 1.0);
        let sc = DerivedScales::new(&p, n).unwrap();
        let b = IntegerBounds::new(&sc);
        for &m in primes_in(b.z_floor, (b.y_ceil - 1).min(b.level_floor))
            .unwrap()
            .primes()
        {
            assert!(
                (c.get(m) - (1.0 - (m as f64).ln() / sc.y.ln())).abs() < 1e-15,
                "m={m}"
            );
        }
        // 2·q has no admissible decomposition (d must be odd).
        assert_eq!(c.get(2 * 7), 0.0);
        assert_eq!(c.get(4), 0.0);
        for &m in c.table.keys() {
            assert!(m as f64 <= sc.level);
        }
    }

    #[test]
    fn bv_audit() {
        // D < 3 leaves d = 1 only: Φ₂ = θ(N) − θ(N/2).
        let tiny = Params {
            theta: 0.01,
            eta: 0.055,
            rho: 0.06,
            delta: 0.07,
            kappa: 1.0,
            n: None,
        };
        let r = bv_main_term_audit(1e6, &tiny, 1).unwrap();
        assert_eq!(r.lower_support, 1);
        let theta = crate::arith::chebyshev_theta(1e6, 1, 0).unwrap()
            - crate::arith::chebyshev_theta(5e5, 1, 0).unwrap();
        assert!((r.phi2 - theta).abs() < 1e-6);
        assert!((r.phi2 / r.phi2_main - 1.0).abs() < 0.01);
        for n in [1e4, 1e5, 1e6] {
            let a = bv_main_term_audit(n, &reference(), 2).unwrap();
            assert!(
                a.phi2 > 0.0 && a.phi2_scaled_error.is_finite() && a.g2_scaled_error.is_finite()
            );
        }
    }

    #[test]
    fn equidistribution_counts() {
        let a = Irrational::sqrt(2).unwrap();
        let r = equidistribution(1e5, &a, 0.0, 0.05, 2).unwrap();
        let mut hits = 0;
        let ps = primes_in(50_000, 100_000).unwrap();
        for &p in ps.primes() {
            let t = (p as f64 * std::f64::consts::SQRT_2).fract();
            if t.min(1.0 - t) < 0.05 {
                hits += 1;
            }
        }
        assert_eq!(r.hits, hits);
        assert_eq!(r.primes, ps.len() as u64);
        assert!(r.deviation.abs() < 0.2);
        let wide = equidistribution(1e5, &a, 0.0, 0.85, 1).unwrap();
        assert_eq!(wide.fraction, 1.0);
        assert_eq!(wide.expected, 1.0);
    }

    #[test]
    fn scan_rejects_bad_params() {
        let a = Irrational::sqrt(2).unwrap();
        let bad = Params {
            rho: 0.05,
            ..reference()
        };
        assert!(matches!(
            gamma_eval(1e4, &a, 0.0, &bad, &ScanOptions::default()),
            Err(Error::InfeasibleParams(_))
        ));
        assert!(gamma_eval(500.0, &a, 0.0, &reference(), &ScanOptions::default()).is_err());
    }
}
