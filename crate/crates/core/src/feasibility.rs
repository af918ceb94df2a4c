//! The parameter region: constraint checking, `Σ₀` in closed form and by
//! quadrature, the finite prime sum `Σ(N)`, the almost-prime order and an
//! exhaustive grid optimizer.
//!
//! All constraints are strict except `θ ≤ 1/100`.

use serde::Serialize;

use crate::arith::primes_in;
use crate::error::{Error, Result};
use crate::parallel::{chunk_interval, map_ordered};
use crate::quad::adaptive_simpson;
use crate::sum::Neumaier;

/// Names of the constraints, in report order.
pub const CONSTRAINT_NAMES: [&str; 9] = [
    "us1a",
    "us1b",
    "us1c",
    "us1d",
    "deltaovereta",
    "etaro",
    "deltaeta",
    "gama8",
    "sigma0_positive",
];

/// Upper cap on `κ` in grid searches.
pub const KAPPA_CAP: f64 = 10.0;
const MAX_GRID_POINTS: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Params {
    pub theta: f64,
    pub eta: f64,
    pub rho: f64,
    pub delta: f64,
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
}

impl Params {
    /// `θ = 0.01, η = 0.08, ρ = 0.23, δ = 0.315, κ = 1.58`.
    pub fn reference() -> Self {
        Self {
            theta: 0.01,
            eta: 0.08,
            rho: 0.23,
            delta: 0.315,
            kappa: 1.58,
            n: None,
        }
    }

    pub fn with_n(mut self, n: f64) -> Self {
        self.n = Some(n);
        self
    }

    /// `s = log D / log z = δ/η`.
    pub fn s(&self) -> f64 {
        self.delta / self.eta
    }

    fn key(&self) -> [f64; 5] {
        [self.theta, self.eta, self.rho, self.delta, self.kappa]
    }

    /// Field-range checks only: `θ, η, ρ, δ ∈ (0, 1)`, `κ > 0`, `N ≥ 10³`.
    pub fn validate_fields(&self) -> Result<()> {
        let mut bad = Vec::new();
        for (name, v) in [
            ("theta", self.theta),
            ("eta", self.eta),
            ("rho", self.rho),
            ("delta", self.delta),
        ] {
            if !(v > 0.0 && v < 1.0) {
                bad.push(format!("{name} = {v} not in (0, 1)"));
            }
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            bad.push(format!("kappa = {} must be positive", self.kappa));
        }
        if let Some(n) = self.n {
            if !(n >= 1e3) || !n.is_finite() {
                bad.push(format!("n = {n} must be at least 1000"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InfeasibleParams(bad))
        }
    }
}

/// `z = N^η`, `y = N^ρ`, `D = N^δ`, `Δ = N^−θ`, `H = Δ⁻¹ log² N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedScales {
    pub n: f64,
    pub z: f64,
    pub y: f64,
    pub level: f64,
    pub delta: f64,
    pub cutoff: f64,
}

impl DerivedScales {
    pub fn new(p: &Params, n: f64) -> Result<Self> {
        if !(n > 1.0) || !n.is_finite() {
            return Err(Error::invalid(format!("N must exceed 1, got {n}")));
        }
        let delta = n.powf(-p.theta);
        let log_n = n.ln();
        Ok(Self {
            n,
            z: n.powf(p.eta),
            y: n.powf(p.rho),
            level: n.powf(p.delta),
            delta,
            cutoff: log_n * log_n / delta,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// Positive when the constraint holds; for chains, the tightest link.
    pub slack: f64,
}

impl ConstraintResult {
    fn less(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs < rhs,
            slack: rhs - lhs,
        }
    }

    fn less_eq(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs <= rhs,
            slack: rhs - lhs,
        }
    }

    /// `a₀ < a₁ < ⋯`, reported at the link with the smallest slack.
    fn chain(name: &str, terms: &[f64]) -> Self {
        let mut best = Self::less(name, terms[0], terms[1]);
        let mut all = best.pass;
        for w in terms.windows(2).skip(1) {
            let link = Self::less(name, w[0], w[1]);
            all &= link.pass;
            if !(link.slack >= best.slack) {
                best = link;
            }
        }
        best.pass = all;
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub params: Params,
    pub constraints: Vec<ConstraintResult>,
    /// `Σ₀`, when `2 < δ/η < 4` and `η < ρ < δ`.
    pub sigma0: Option<f64>,
    pub sigma0_quadrature: Option<f64>,
    pub omega_bound: f64,
    pub r: u32,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn failed(&self) -> Vec<&str> {
        self.constraints
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn constraint(&self, name: &str) -> Option<&ConstraintResult> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

fn sigma0_domain(p: &Params) -> Result<()> {
    let s = p.s();
    if !(s > 2.0 && s < 4.0) {
        return Err(Error::Domain(format!("s = δ/η = {s} not in (2, 4)")));
    }
    if !(p.eta < p.rho && p.rho < p.delta) {
        return Err(Error::Domain(format!(
            "ρ = {} not in (η, δ) = ({}, {})",
            p.rho, p.eta, p.delta
        )));
    }
    Ok(())
}

/// `Σ₀ = log(s−1)/s − κη ∫_η^ρ (1/u − 1/ρ) du/(δ−u)` in closed form.
pub fn sigma0(p: &Params) -> Result<f64> {
    sigma0_domain(p)?;
    let (eta, rho, delta) = (p.eta, p.rho, p.delta);
    let s = p.s();
    let integral = ((rho / (delta - rho)).ln() - (eta / (delta - eta)).ln()) / delta
        - ((delta - eta) / (delta - rho)).ln() / rho;
    Ok((s - 1.0).ln() / s - p.kappa * eta * integral)
}

/// `Σ₀` with the integral evaluated by adaptive Simpson quadrature.
pub fn sigma0_quadrature(p: &Params) -> Result<f64> {
    sigma0_domain(p)?;
    let (eta, rho, delta) = (p.eta, p.rho, p.delta);
    let s = p.s();
    let integral = adaptive_simpson(|u| (1.0 / u - 1.0 / rho) / (delta - u), eta, rho, 1e-12)?;
    Ok((s - 1.0).ln() / s - p.kappa * eta * integral)
}

/// `Σ(N) = log(s−1)/s − κ Σ_{z<q<y} (1 − log q/log y) (q−1)⁻¹ (log(D/q)/log z)⁻¹`.
pub fn sigma_finite(n: f64, p: &Params) -> Result<f64> {
    let sc = DerivedScales::new(p, n)?;
    if !(sc.z > 2.0) {
        return Err(Error::Domain(format!("z = N^η = {} must exceed 2", sc.z)));
    }
    let s = p.s();
    if !(s > 1.0) {
        return Err(Error::Domain(format!("s = {s} must exceed 1")));
    }
    let lo = sc.z.floor() as u64;
    let hi = (sc.y.ceil() as u64).saturating_sub(1);
    let (log_y, log_z, log_d) = (sc.y.ln(), sc.z.ln(), sc.level.ln());
    let mut acc = Neumaier::new();
    if hi > lo {
        for &q in primes_in(lo, hi)?.primes() {
            let lq = (q as f64).ln();
            acc.add((1.0 - lq / log_y) / (q - 1) as f64 * log_z / (log_d - lq));
        }
    }
    Ok((s - 1.0).ln() / s - p.kappa * acc.value())
}

/// `⌊1/κ + 1/ρ⌋`.
pub fn r_value(kappa: f64, rho: f64) -> Result<u32> {
    if !(kappa > 0.0 && rho > 0.0) {
        return Err(Error::invalid(format!(
            "need κ, ρ > 0 (κ={kappa}, ρ={rho})"
        )));
    }
    Ok((1.0 / kappa + 1.0 / rho).floor() as u32)
}

/// Evaluates every named constraint; never fails.
pub fn check_constraints(p: &Params) -> FeasibilityReport {
    let sigma = sigma0(p).ok();
    let sigma_q = sigma0_quadrature(p).ok();
    let omega_bound = 1.0 / p.kappa + 1.0 / p.rho;
    let mut constraints = vec![
        ConstraintResult::chain("us1a", &[0.0, p.theta, p.eta, p.delta / 2.0, 0.25]),
        ConstraintResult::chain("us1b", &[p.eta, p.rho, p.delta]),
        ConstraintResult::less("us1c", 0.0, p.kappa),
        ConstraintResult::less_eq("us1d", p.theta, 0.01),
        ConstraintResult::chain("deltaovereta", &[2.0, p.s(), 4.0]),
        ConstraintResult::less("etaro", p.eta + p.rho, p.delta),
        ConstraintResult::less("deltaeta", p.delta + p.theta, 1.0 / 3.0),
        ConstraintResult::less("gama8", omega_bound, 5.0),
    ];
    let sv = sigma.unwrap_or(f64::NAN);
    constraints.push(ConstraintResult {
        name: "sigma0_positive".into(),
        lhs: sv,
        rhs: 0.0,
        pass: sv > 0.0,
        slack: sv,
    });
    let feasible = constraints.iter().all(|c| c.pass);
    FeasibilityReport {
        params: *p,
        constraints,
        sigma0: sigma,
        sigma0_quadrature: sigma_q,
        omega_bound,
        r: if omega_bound.is_finite() && omega_bound >= 0.0 {
            omega_bound.floor() as u32
        } else {
            0
        },
        feasible,
    }
}

/// Grid values along one parameter axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis(Vec<f64>);

impl Axis {
    /// `lo, lo + step, …` up to `hi` inclusive.
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "bad axis range [{lo}, {hi}] step {step}"
            )));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as u64;
        if n > 1_000_000 {
            return Err(Error::ResourceLimit(format!("axis with {} points", n + 1)));
        }
        Ok(Self(
            (0..=n).map(|i| round12(lo + i as f64 * step)).collect(),
        ))
    }

    /// `center ± k·step` for `|k·step| ≤ half_width`.
    pub fn around(center: f64, half_width: f64, step: f64) -> Result<Self> {
        let k = (half_width / step + 1e-9).floor();
        Self::range(center - k * step, center + k * step, step)
    }

    pub fn fixed(v: f64) -> Self {
        Self(vec![v])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub theta: Axis,
    pub eta: Axis,
    pub rho: Axis,
    pub delta: Axis,
    pub kappa: Axis,
}

impl Grid {
    fn axes(&self) -> [&[f64]; 5] {
        [
            self.theta.values(),
            self.eta.values(),
            self.rho.values(),
            self.delta.values(),
            self.kappa.values(),
        ]
    }

    pub fn len(&self) -> u64 {
        self.axes().iter().map(|a| a.len() as u64).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn point(&self, mut idx: u64) -> Params {
        let axes = self.axes();
        let mut v = [0.0; 5];
        for i in (0..5).rev() {
            let len = axes[i].len() as u64;
            v[i] = axes[i][(idx % len) as usize];
            idx /= len;
        }
        Params {
            theta: v[0],
            eta: v[1],
            rho: v[2],
            delta: v[3],
            kappa: v[4],
            n: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid("grid is empty"));
        }
        if self.len() > MAX_GRID_POINTS {
            return Err(Error::ResourceLimit(format!("{} grid points", self.len())));
        }
        let names = ["theta", "eta", "rho", "delta", "kappa"];
        for (i, axis) in self.axes().iter().enumerate() {
            for &v in axis.iter() {
                let ok = if i == 4 {
                    v > 0.0 && v <= KAPPA_CAP
                } else {
                    v > 0.0 && v < 1.0
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "{} value {v} outside its admissible range",
                        names[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxSigma0Margin,
    MaxTheta,
    MinR,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_sigma0_margin" => Ok(Objective::MaxSigma0Margin),
            "max_theta" => Ok(Objective::MaxTheta),
            "min_r" => Ok(Objective::MinR),
            other => Err(Error::invalid(format!("unknown objective {other:?}"))),
        }
    }
}

impl Objective {
    fn score(self, r: &FeasibilityReport) -> f64 {
        match self {
            Objective::MaxSigma0Margin => r.sigma0.unwrap_or(f64::NAN),
            Objective::MaxTheta => r.params.theta,
            Objective::MinR => -(r.r as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub objective: Objective,
    pub score: f64,
    pub best: FeasibilityReport,
    pub evaluated: u64,
    pub feasible_points: u64,
}

/// `true` when `(sa, a)` beats `(sb, b)`: higher score, then lexicographically smaller parameters.
fn better(sa: f64, a: &Params, sb: f64, b: &Params) -> bool {
    if sa != sb {
        return sa > sb;
    }
    a.key().partial_cmp(&b.key()) == Some(std::cmp::Ordering::Less)
}

/// Exhaustive grid search for the feasible point maximizing `objective`.
pub fn optimize(grid: &Grid, objective: Objective, workers: usize) -> Result<OptimizeResult> {
    grid.validate()?;
    let total = grid.len();
    let chunks = chunk_interval(0, total, 1 << 14);
    let partial = map_ordered(workers, &chunks, |&(lo, hi)| {
        let mut best: Option<(f64, FeasibilityReport)> = None;
        let mut count = 0u64;
        for idx in lo..hi {
            let report = check_constraints(&grid.point(idx));
            if !report.feasible {
                continue;
            }
            count += 1;
            let score = objective.score(&report);
            if best
                .as_ref()
                .is_none_or(|(sb, b)| better(score, &report.params, *sb, &b.params))
            {
                best = Some((score, report));
            }
        }
        (best, count)
    });
    let mut best: Option<(f64, FeasibilityReport)> = None;
    let mut feasible_points = 0;
    for (cand, count) in partial {
        feasible_points += count;
        if let Some((score, report)) = cand {
            if best
                .as_ref()
                .is_none_or(|(sb, b)| better(score, &report.params, *sb, &b.params))
            {
                best = Some((score, report));
            }
        }
    }
    let (score, best) = best.ok_or(Error::EmptyFeasibleRegion)?;
    Ok(OptimizeResult {
        objective,
        score,
        best,
        evaluated: total,
        feasible_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with(f: impl FnOnce(&mut Params)) -> Params {
        let mut p = Params::reference();
        f(&mut p);
        p
    }

    #[test]
    fn reference_point_feasible() {
        let r = check_constraints(&Params::reference());
        assert!(r.feasible, "{:?}", r.failed());
        assert_eq!(r.constraints.len(), 9);
        let names: Vec<_> = r.constraints.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, CONSTRAINT_NAMES);
        let s0 = r.sigma0.unwrap();
        assert!((s0 - 7.1e-4).abs() < 2e-5, "{s0}");
        assert!((s0 - r.sigma0_quadrature.unwrap()).abs() < 1e-9);
        assert_eq!(r.r, 4);
        assert!((r.omega_bound - 4.98074).abs() < 1e-5);
    }

    #[test]
    fn single_parameter_perturbations() {
        let r = check_constraints(&with(|p| p.rho = 0.20));
        assert_eq!(r.failed(), vec!["gama8"]);
        assert!((r.constraint("gama8").unwrap().lhs - 5.6329).abs() < 1e-4);
        // θ = 0.02 also pushes δ + θ = 0.335 past 1/3.
        assert_eq!(
            check_constraints(&with(|p| p.theta = 0.02)).failed(),
            vec!["us1d", "deltaeta"]
        );
        // δ = 0.33 also gives δ/η = 4.125, leaving the Σ₀ domain.
        assert_eq!(
            check_constraints(&with(|p| p.delta = 0.33)).failed(),
            vec!["deltaovereta", "deltaeta", "sigma0_positive"]
        );
        assert_eq!(
            check_constraints(&with(|p| p.eta = 0.16)).failed(),
            vec!["us1a", "deltaovereta", "etaro", "sigma0_positive"]
        );
        let r = check_constraints(&with(|p| p.eta = 0.079));
        assert!(r.constraint("deltaovereta").unwrap().pass);
        assert!((r.params.s() - 3.987).abs() < 1e-3);
    }

    #[test]
    fn boundary_points_are_infeasible() {
        assert!(
            !check_constraints(&with(|p| p.rho = 0.235))
                .constraint("etaro")
                .unwrap()
                .pass
        );
        assert!(
            check_constraints(&with(|p| p.theta = 0.01))
                .constraint("us1d")
                .unwrap()
                .pass
        );
        let r = check_constraints(&Params {
            theta: 0.01,
            eta: 0.1,
            rho: 0.3,
            delta: 0.4,
            kappa: 2.0,
            n: None,
        });
        assert!(!r.constraint("deltaovereta").unwrap().pass);
    }

    #[test]
    fn sigma0_special_values() {
        let k0 = with(|p| p.kappa = 0.0);
        assert!((sigma0(&k0).unwrap() - 2.9375f64.ln() / 3.9375).abs() < 1e-15);
        assert!((sigma0(&k0).unwrap() - 0.273664).abs() < 5e-6);
        let near = with(|p| p.rho = p.eta + 1e-9);
        assert!((sigma0(&near).unwrap() - 2.9375f64.ln() / 3.9375).abs() < 1e-9);
        assert!(matches!(
            sigma0(&with(|p| p.delta = 0.33)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            sigma0(&with(|p| p.rho = 0.05)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn r_values() {
        assert_eq!(r_value(1.58, 0.23).unwrap(), 4);
        assert_eq!(r_value(1.0, 0.5).unwrap(), 3);
        assert_eq!(r_value(2.0, 1.0).unwrap(), 1);
        assert!(r_value(0.0, 1.0).is_err());
    }

    #[test]
    fn derived_scales() {
        let sc = DerivedScales::new(&Params::reference(), 1e6).unwrap();
        assert!((sc.z - 1e6f64.powf(0.08)).abs() < 1e-12);
        assert!((sc.level - 1e6f64.powf(0.315)).abs() < 1e-9);
        assert!((sc.cutoff * sc.delta - 1e6f64.ln().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn sigma_finite_behaviour() {
        let p = Params::reference();
        let k0 = with(|p| p.kappa = 0.0);
        let base = 2.9375f64.ln() / 3.9375;
        assert_eq!(sigma_finite(1e6, &k0).unwrap(), base);
        // At N = 1e3, z ≈ 1.74 is too small.
        assert!(sigma_finite(1e3, &p).is_err());
        // Empty prime range (z, y) when y is barely above z.
        let thin = Params { rho: 0.0801, ..p };
        assert_eq!(sigma_finite(1e6, &thin).unwrap(), base);
        let s0 = sigma0(&p).unwrap();
        let band: Vec<f64> = [1e5, 1e6, 1e7, 1e8]
            .iter()
            .map(|&n| (sigma_finite(n, &p).unwrap() - s0).abs() * n.ln())
            .collect();
        let (lo, hi) = band
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi <= 10.0 * lo, "{band:?}");
    }

    #[test]
    fn optimizer_contains_reference_point() {
        let grid = Grid {
            theta: Axis::fixed(0.01),
            eta: Axis::range(0.07, 0.09, 0.005).unwrap(),
            rho: Axis::range(0.2, 0.25, 0.01).unwrap(),
            delta: Axis::range(0.30, 0.32, 0.005).unwrap(),
            kappa: Axis::range(1.5, 1.7, 0.02).unwrap(),
        };
        assert!(grid.eta.values().contains(&0.08) && grid.delta.values().contains(&0.315));
        let r = optimize(&grid, Objective::MaxSigma0Margin, 1).unwrap();
        assert!(r.best.feasible);
        assert!(r.score >= sigma0(&Params::reference()).unwrap() - 1e-12);
        assert_eq!(r, optimize(&grid, Objective::MaxSigma0Margin, 4).unwrap());
        let t = optimize(&grid, Objective::MinR, 2).unwrap();
        assert!(t.best.r <= 4);
    }

    #[test]
    fn refinement_never_worsens() {
        let p = Params::reference();
        let coarse = optimize(
            &Grid {
                theta: Axis::fixed(0.01),
                eta: Axis::fixed(p.eta),
                rho: Axis::fixed(p.rho),
                delta: Axis::fixed(p.delta),
                kappa: Axis::fixed(p.kappa),
            },
            Objective::MaxSigma0Margin,
            1,
        )
        .unwrap();
        let fine = optimize(
            &Grid {
                theta: Axis::fixed(0.01),
                eta: Axis::around(p.eta, 0.003, 1e-3).unwrap(),
                rho: Axis::around(p.rho, 0.003, 1e-3).unwrap(),
                delta: Axis::around(p.delta, 0.003, 1e-3).unwrap(),
                kappa: Axis::around(p.kappa, 0.003, 1e-3).unwrap(),
            },
            Objective::MaxSigma0Margin,
            2,
        )
        .unwrap();
        assert!(fine.score >= coarse.score);
    }

    #[test]
    fn delta_above_one_third_is_empty() {
        let grid = Grid {
            theta: Axis::range(0.001, 0.01, 0.001).unwrap(),
            eta: Axis::range(0.05, 0.15, 0.01).unwrap(),
            rho: Axis::range(0.1, 0.3, 0.02).unwrap(),
            delta: Axis::range(0.34, 0.45, 0.01).unwrap(),
            kappa: Axis::range(0.5, 3.0, 0.5).unwrap(),
        };
        assert!(matches!(
            optimize(&grid, Objective::MaxTheta, 2),
            Err(Error::EmptyFeasibleRegion)
        ));
        let bad = Grid {
            kappa: Axis::fixed(11.0),
            ..grid.clone()
        };
        assert!(optimize(&bad, Objective::MaxTheta, 1).is_err());
    }

    fn feasible_params() -> impl Strategy<Value = Params> {
        (
            0.001f64..0.01,
            0.05f64..0.11,
            0.0f64..1.0,
            0.0f64..1.0,
            0.2f64..5.0,
        )
            .prop_filter_map("infeasible", |(theta, eta, a, b, kappa)| {
                let delta = (2.05 + 1.9 * a) * eta;
                let rho = eta + b * (delta - eta);
                let p = Params {
                    theta,
                    eta,
                    rho,
                    delta,
                    kappa,
                    n: None,
                };
                sigma0(&p).ok().map(|_| p)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn closed_form_matches_quadrature(p in feasible_params()) {
            let a = sigma0(&p).unwrap();
            let b = sigma0_quadrature(&p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{:?}: {} vs {}", p, a, b);
        }
    }

    proptest! {
        #[test]
        fn sigma0_decreasing_in_kappa(p in feasible_params(), dk in 0.01f64..2.0) {
            let q = Params { kappa: p.kappa + dk, ..p };
            prop_assert!(sigma0(&q).unwrap() < sigma0(&p).unwrap());
        }

        #[test]
        fn feasible_iff_all_pass(p in feasible_params()) {
            let r = check_constraints(&p);
            prop_assert_eq!(r.feasible, r.constraints.iter().all(|c| c.pass));
            prop_assert_eq!(r.r, r_value(p.kappa, p.rho).unwrap());
        }
    }
}
