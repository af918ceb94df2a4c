//! The smoothing function `χ`: the indicator of `[−Δ/2, Δ/2]` convolved `r`
//! times with the uniform density on `[−h, h]`, then made 1-periodic.
//!
//! The `r`-fold convolution of uniform densities is an Irwin–Hall law, so `χ`
//! has an exact piecewise-polynomial form, and its Fourier coefficients are
//!
//! ```text
//! g(k) = sin(πkΔ)/(πk) · (sin(2πkh)/(2πkh))^r,   g(0) = Δ.
//! ```
//!
//! The support is `‖t‖ ≤ Δ/2 + rh ≤ 3Δ/4`, `∫₀¹ χ = Δ` and `0 ≤ χ ≤ 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{dist, e};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothingFunction {
    delta: f64,
    order: u32,
    half_width: f64,
    cutoff: u64,
    #[serde(skip)]
    inv_fact: Vec<f64>,
}

impl SmoothingFunction {
    pub fn new(delta: f64, order: u32, half_width: f64, cutoff: u64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("Δ must lie in (0, 1), got {delta}")));
        }
        if order == 0 || order > 160 {
            return Err(Error::invalid(format!(
                "smoothing order must be in 1..=160, got {order}"
            )));
        }
        if !(half_width > 0.0) || order as f64 * half_width > 0.25 * delta * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "need h > 0 and r·h ≤ Δ/4 (r={order}, h={half_width}, Δ={delta})"
            )));
        }
        if cutoff == 0 {
            return Err(Error::invalid("Fourier cutoff H must be positive"));
        }
        let mut inv_fact = vec![1.0f64; order as usize + 1];
        for i in 1..=order as usize {
            inv_fact[i] = inv_fact[i - 1] / i as f64;
        }
        Ok(Self {
            delta,
            order,
            half_width,
            cutoff,
            inv_fact,
        })
    }

    /// The construction used throughout: `Δ = N^−θ`, `r = ⌈log N⌉`,
    /// `h = Δ/(4r)`, `H = ⌊Δ⁻¹ log² N⌋`.
    pub fn for_scale(n: f64, theta: f64) -> Result<Self> {
        if !(n > 1.0 && n.is_finite()) || !(theta > 0.0) {
            return Err(Error::invalid(format!(
                "need N > 1 and θ > 0 (N={n}, θ={theta})"
            )));
        }
        let delta = n.powf(-theta);
        let log_n = n.ln();
        let order = log_n.ceil().max(1.0) as u32;
        let half_width = delta / (4.0 * order as f64);
        let cutoff = (log_n * log_n / delta).floor().max(1.0) as u64;
        Self::new(delta, order, half_width, cutoff)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// `χ` vanishes for `‖t‖ ≥` this radius.
    pub fn support_radius(&self) -> f64 {
        0.5 * self.delta + self.order as f64 * self.half_width
    }

    /// CDF of the sum of `r` independent uniforms on `[0, 1]`.
    fn irwin_hall_cdf(&self, x: f64) -> f64 {
        let r = self.order;
        let rf = r as f64;
        if x <= 0.0 {
            return 0.0;
        }
        if x >= rf {
            return 1.0;
        }
        if x > 0.5 * rf {
            return 1.0 - self.irwin_hall_cdf(rf - x);
        }
        let mut acc = 0.0;
        for k in 0..=(x.floor() as u32).min(r) {
            let term = (x - k as f64).powi(r as i32)
                * self.inv_fact[k as usize]
                * self.inv_fact[(r - k) as usize];
            if k % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    /// Non-periodic profile: `P(s − Δ/2 ≤ S ≤ s + Δ/2)` for `S` the smoothing sum.
    fn profile(&self, s: f64) -> f64 {
        let rh = self.order as f64 * self.half_width;
        let scale = 0.5 / self.half_width;
        let upper = self.irwin_hall_cdf((s + 0.5 * self.delta + rh) * scale);
        let lower = self.irwin_hall_cdf((s - 0.5 * self.delta + rh) * scale);
        (upper - lower).clamp(0.0, 1.0)
    }

    /// `χ(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let t0 = t - t.round();
        let r = self.support_radius();
        let mut v = 0.0;
        for shift in [-1.0, 0.0, 1.0] {
            let s = t0 + shift;
            if s.abs() < r {
                v += self.profile(s);
            }
        }
        v.min(1.0)
    }

    /// `g(k)`; real because `χ` is even.
    pub fn g(&self, k: i64) -> f64 {
        if k == 0 {
            return self.delta;
        }
        let kf = k as f64;
        let x = 2.0 * PI * kf * self.half_width;
        (PI * kf * self.delta).sin() / (PI * kf) * (x.sin() / x).powi(self.order as i32)
    }

    pub fn fourier_coeff(&self, k: i64) -> Complex64 {
        Complex64::new(self.g(k), 0.0)
    }

    /// `c(k) = Δ⁻¹ g(k) e(βk)` for `k ≠ 0`.
    pub fn c_coeff(&self, k: i64, beta: f64) -> Result<Complex64> {
        if k == 0 {
            return Err(Error::invalid("c(k) is defined for k != 0 only"));
        }
        let phase = e(crate::modone::frac(beta) * k as f64);
        Ok(phase * (self.g(k) / self.delta))
    }

    /// Upper bound for `Σ_{|k| > k0} |g(k)|`, from `|g(k)| ≤ (πk)⁻¹ (2πkh)^−r`
    /// and the integral comparison `Σ_{k>K} k^−(r+1) ≤ K^−r / r`.
    pub fn tail_majorant(&self, k0: u64) -> f64 {
        if k0 == 0 {
            return f64::INFINITY;
        }
        let r = self.order as f64;
        let log = (2.0 / (PI * r)).ln() - r * (2.0 * PI * self.half_width * k0 as f64).ln();
        log.exp()
    }

    /// `Σ_{|k| ≤ k_max} g(k) e(kt)`.
    pub fn truncated_series(&self, t: f64, k_max: u64) -> f64 {
        let mut acc = self.delta;
        for k in 1..=k_max as i64 {
            acc += 2.0 * self.g(k) * (2.0 * PI * k as f64 * t).cos();
        }
        acc
    }

    /// `true` iff `χ(t) > 0 ⟹ ‖t‖ < Δ` on every grid point `j·step` in `[0, 1)`.
    pub fn support_violations(&self, step: f64) -> Vec<f64> {
        let n = (1.0 / step).ceil() as u64;
        (0..n)
            .map(|j| j as f64 * step)
            .filter(|&t| self.eval(t) > 0.0 && dist(t) >= self.delta)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;

    fn narrow() -> SmoothingFunction {
        SmoothingFunction::new(0.2, 5, 0.01, 200).unwrap()
    }

    #[test]
    fn validation() {
        assert!(SmoothingFunction::new(0.0, 3, 0.01, 10).is_err());
        assert!(SmoothingFunction::new(0.2, 0, 0.01, 10).is_err());
        assert!(SmoothingFunction::new(0.2, 5, 0.011, 10).is_err());
        assert!(SmoothingFunction::new(0.2, 5, 0.01, 0).is_err());
        let f = SmoothingFunction::for_scale(1e6, 0.01).unwrap();
        assert_eq!(f.order(), 14);
        assert!((f.delta() - 1e6f64.powf(-0.01)).abs() < 1e-15);
        assert_eq!(f.cutoff(), (1e6f64.ln().powi(2) / f.delta()).floor() as u64);
    }

    #[test]
    fn vanishes_at_distance_delta_and_positive_at_center() {
        let f = narrow();
        for t in [0.2, -0.2, 0.8, 1.2, 0.5] {
            assert_eq!(f.eval(t), 0.0, "t={t}");
        }
        let c = f.eval(0.0);
        assert!(c > 0.0 && c <= 1.0);
        assert_eq!(c, 1.0);
        assert!(f.eval(0.14) > 0.0 && f.eval(0.14) < 1.0);
    }

    #[test]
    fn integral_equals_delta() {
        for f in [narrow(), SmoothingFunction::for_scale(1e3, 0.2).unwrap()] {
            let r = f.support_radius();
            let v = adaptive_simpson(|t| f.eval(t), -r, r, 1e-13).unwrap();
            assert!((v - f.delta()).abs() < 1e-9, "{v} vs {}", f.delta());
        }
    }

    #[test]
    fn fourier_matches_numerical_integration() {
        let f = SmoothingFunction::for_scale(1e3, 0.2).unwrap();
        let r = f.support_radius();
        for k in [0i64, 1, 2, 3, 7, 15, 40, -5] {
            let num = adaptive_simpson(
                |t| f.eval(t) * (2.0 * PI * k as f64 * t).cos(),
                -r,
                r,
                1e-13,
            )
            .unwrap();
            assert!((num - f.g(k)).abs() < 1e-9, "k={k}: {num} vs {}", f.g(k));
        }
        assert_eq!(f.g(0), f.delta());
    }

    #[test]
    fn coefficient_bounds() {
        let f = SmoothingFunction::for_scale(1e6, 0.01).unwrap();
        for k in 1..=2000i64 {
            let g = f.g(k).abs();
            assert!(g <= f.delta());
            assert!(g <= 1.0 / (PI * k as f64) + 1e-18);
            assert_eq!(f.g(-k), f.g(k));
        }
    }

    #[test]
    fn tail_below_inverse_n() {
        let n = 1e6;
        let f = SmoothingFunction::for_scale(n, 0.01).unwrap();
        let majorant = f.tail_majorant(f.cutoff());
        assert!(majorant <= 1.0 / n, "{majorant}");
        // Oracle: explicit sum of |g(k)| far past H plus an integral remainder.
        let h = f.cutoff();
        let mut explicit = 0.0;
        for k in (h + 1)..=(h + 100_000) {
            explicit += 2.0 * f.g(k as i64).abs();
        }
        assert!(explicit <= majorant);
    }

    #[test]
    fn c_coefficients() {
        let f = SmoothingFunction::for_scale(1e5, 0.01).unwrap();
        for k in 1..=f.cutoff() as i64 {
            let c = f.c_coeff(k, 0.0).unwrap();
            assert!((c.re - f.g(k) / f.delta()).abs() < 1e-15 && c.im.abs() < 1e-15);
            assert!((f.c_coeff(-k, 0.0).unwrap() - c.conj()).norm() < 1e-15);
            assert!(f.c_coeff(k, 0.37).unwrap().norm() <= 1.0);
            assert!(f.c_coeff(-k, 0.37).unwrap().norm() <= 1.0);
        }
        assert!(f.c_coeff(0, 0.0).is_err());
    }

    #[test]
    fn support_inside_delta() {
        let f = narrow();
        assert!(f.support_violations(f.delta() / 1000.0).is_empty());
        let g = SmoothingFunction::for_scale(1e6, 0.01).unwrap();
        assert!(g.support_violations(g.delta() / 1000.0).is_empty());
    }

    #[test]
    fn parseval_partial_sums_increase_to_l2_norm() {
        let f = SmoothingFunction::for_scale(1e3, 0.2).unwrap();
        let r = f.support_radius();
        let l2 = adaptive_simpson(|t| f.eval(t).powi(2), -r, r, 1e-13).unwrap();
        let mut partial = f.g(0).powi(2);
        let mut prev = partial;
        for k in 1..=400i64 {
            partial += 2.0 * f.g(k).powi(2);
            assert!(partial >= prev);
            assert!(partial <= l2 + 1e-10);
            prev = partial;
        }
        assert!(l2 - partial < 1e-6);
    }

    #[test]
    fn truncated_series_within_tail() {
        let f = SmoothingFunction::for_scale(1e3, 0.2).unwrap();
        let h = f.cutoff();
        let tail = f.tail_majorant(h);
        for j in 0..500 {
            let t = j as f64 / 500.0;
            assert!(
                (f.truncated_series(t, h) - f.eval(t)).abs() <= tail + 1e-12,
                "t={t}"
            );
        }
    }
}
