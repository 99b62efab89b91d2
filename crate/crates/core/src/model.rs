//! Analytic likelihood/prior geometry for spherically symmetric test models.
//!
//! Every model pairs a radial likelihood with a co-centred spherical Gaussian
//! prior of width `sigma_pi`. Because the likelihood decreases with radius,
//! the prior volume above a likelihood contour is the prior mass inside the
//! matching radius, `X(r) = P(d/2, r² / 2σ²)`, which gives exact maps between
//! radius, log-likelihood and log prior volume.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::numerics::{log_add_exp, log_sum_exp};
use crate::specialfn::{inv_ln_p_unchecked, ln_gamma_unchecked, ln_p_unchecked};

/// Nodes used by the quadrature evidence oracle.
pub const DEFAULT_QUADRATURE_NODES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Unit spherical Gaussian likelihood.
    Gaussian,
    /// Exponential power likelihood `exp(-|θ|^{2b} / 2)`.
    ExpPower,
    /// Unit spherical Cauchy likelihood.
    Cauchy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelRepr {
    family: Family,
    d: usize,
    #[serde(default = "one")]
    b: f64,
    sigma_pi: f64,
}

fn one() -> f64 {
    1.0
}

/// Likelihood family, dimension and prior width, plus cached normalisations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct ModelSpec {
    family: Family,
    d: usize,
    b: f64,
    sigma_pi: f64,
    log_peak: f64,
    half_d: f64,
    ln_gamma_half_d: f64,
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.d == other.d
            && self.b == other.b
            && self.sigma_pi == other.sigma_pi
    }
}

impl TryFrom<ModelRepr> for ModelSpec {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        ModelSpec::new(r.family, r.d, r.b, r.sigma_pi)
    }
}

impl From<ModelSpec> for ModelRepr {
    fn from(m: ModelSpec) -> Self {
        ModelRepr {
            family: m.family,
            d: m.d,
            b: m.b,
            sigma_pi: m.sigma_pi,
        }
    }
}

impl ModelSpec {
    /// `b` is only used by [`Family::ExpPower`]; other families store 1.
    pub fn new(family: Family, d: usize, b: f64, sigma_pi: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::domain("dimension must be >= 1"));
        }
        if !(sigma_pi > 0.0) || !sigma_pi.is_finite() {
            return Err(Error::domain(format!("sigma_pi must be finite and > 0, got {sigma_pi}")));
        }
        let b = match family {
            Family::ExpPower => {
                if !(b > 0.0) || !b.is_finite() {
                    return Err(Error::domain(format!("b must be finite and > 0, got {b}")));
                }
                b
            }
            _ => 1.0,
        };
        let df = d as f64;
        let log_peak = match family {
            Family::Gaussian => -0.5 * df * (2.0 * PI).ln(),
            // Normalisation of exp(-r^{2b}/2) over R^d; reduces to the
            // Gaussian constant at b = 1.
            Family::ExpPower => {
                let k = df / (2.0 * b);
                df.ln() + ln_gamma_unchecked(0.5 * df)
                    - 0.5 * df * PI.ln()
                    - (1.0 + k) * LN_2
                    - ln_gamma_unchecked(1.0 + k)
            }
            Family::Cauchy => {
                let h = 0.5 * (df + 1.0);
                ln_gamma_unchecked(h) - h * PI.ln()
            }
        };
        Ok(Self {
            family,
            d,
            b,
            sigma_pi,
            log_peak,
            half_d: 0.5 * df,
            ln_gamma_half_d: ln_gamma_unchecked(0.5 * df),
        })
    }

    pub fn gaussian(d: usize, sigma_pi: f64) -> Result<Self> {
        Self::new(Family::Gaussian, d, 1.0, sigma_pi)
    }

    pub fn exp_power(d: usize, b: f64, sigma_pi: f64) -> Result<Self> {
        Self::new(Family::ExpPower, d, b, sigma_pi)
    }

    pub fn cauchy(d: usize, sigma_pi: f64) -> Result<Self> {
        Self::new(Family::Cauchy, d, 1.0, sigma_pi)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sigma_pi(&self) -> f64 {
        self.sigma_pi
    }

    /// Log-likelihood at the origin.
    pub fn log_peak(&self) -> f64 {
        self.log_peak
    }

    pub fn log_likelihood_at_radius(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || r.is_nan() {
            return Err(Error::domain(format!("radius must be >= 0, got {r}")));
        }
        Ok(self.log_l_unchecked(r))
    }

    pub(crate) fn log_l_unchecked(&self, r: f64) -> f64 {
        if r == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        match self.family {
            Family::Gaussian => self.log_peak - 0.5 * r * r,
            Family::ExpPower => self.log_peak - 0.5 * r.powf(2.0 * self.b),
            Family::Cauchy => self.log_peak - 0.5 * (self.d as f64 + 1.0) * (r * r).ln_1p(),
        }
    }

    pub fn radius_from_log_likelihood(&self, logl: f64) -> Result<f64> {
        if logl.is_nan() || logl > self.log_peak {
            return Err(Error::domain(format!(
                "log-likelihood {logl} exceeds the peak value {}",
                self.log_peak
            )));
        }
        let drop = self.log_peak - logl;
        Ok(match self.family {
            Family::Gaussian => (2.0 * drop).sqrt(),
            Family::ExpPower => (2.0 * drop).powf(1.0 / (2.0 * self.b)),
            Family::Cauchy => (2.0 * drop / (self.d as f64 + 1.0)).exp_m1().sqrt(),
        })
    }

    /// Log of the prior mass inside radius `r`.
    pub fn log_x_from_radius(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || r.is_nan() {
            return Err(Error::domain(format!("radius must be >= 0, got {r}")));
        }
        Ok(self.log_x_unchecked(r))
    }

    pub(crate) fn log_x_unchecked(&self, r: f64) -> f64 {
        let s = r / self.sigma_pi;
        ln_p_unchecked(self.half_d, 0.5 * s * s, self.ln_gamma_half_d)
    }

    /// Radius enclosing prior mass `exp(logx)`. `logx = 0` maps to infinity.
    pub fn radius_from_log_x(&self, logx: f64) -> Result<f64> {
        if !(logx <= 0.0) {
            return Err(Error::domain(format!("log prior volume must be <= 0, got {logx}")));
        }
        Ok(self.radius_unchecked(logx))
    }

    pub(crate) fn radius_unchecked(&self, logx: f64) -> f64 {
        if logx >= 0.0 {
            return f64::INFINITY;
        }
        let x = inv_ln_p_unchecked(self.half_d, logx, self.ln_gamma_half_d);
        self.sigma_pi * (2.0 * x).sqrt()
    }

    /// `ln L(X)`; strictly increasing as `logx` decreases.
    pub fn log_likelihood_from_log_x(&self, logx: f64) -> Result<f64> {
        let r = self.radius_from_log_x(logx)?;
        Ok(self.log_l_unchecked(r))
    }

    /// Evidence `ln Z`: closed form for the Gaussian family, quadrature
    /// otherwise.
    pub fn analytic_log_evidence(&self) -> f64 {
        match self.family {
            Family::Gaussian => {
                -0.5 * self.d as f64 * (2.0 * PI * (1.0 + self.sigma_pi * self.sigma_pi)).ln()
            }
            _ => self.quadrature_log_evidence(DEFAULT_QUADRATURE_NODES),
        }
    }

    /// Lower end of the log-volume range covered by the quadrature oracles.
    pub fn quadrature_floor(&self) -> f64 {
        -(40.0 * self.d as f64 + 100.0)
    }

    /// `ln ∫_0^1 L(X) dX` by the trapezoid rule on a uniform `ln X` grid
    /// spanning `[quadrature_floor, 0]`.
    pub fn quadrature_log_evidence(&self, nodes: usize) -> f64 {
        self.quadrature_log_mass_below(0.0, nodes)
    }

    /// `ln L(X) + ln X`, the log of the unnormalised posterior mass per unit
    /// `ln X`.
    pub fn log_relative_posterior_mass(&self, logx: f64) -> Result<f64> {
        Ok(self.log_likelihood_from_log_x(logx)? + logx)
    }

    /// `L(X) X`. Underflows to zero outside the posterior bulk.
    pub fn relative_posterior_mass(&self, logx: f64) -> Result<f64> {
        Ok(self.log_relative_posterior_mass(logx)?.exp())
    }

    /// `ln ∫_{-∞}^{logx} L(X') X' d ln X'`.
    pub fn log_posterior_mass_remaining(&self, logx: f64) -> Result<f64> {
        if !(logx <= 0.0) {
            return Err(Error::domain(format!("log prior volume must be <= 0, got {logx}")));
        }
        Ok(self.quadrature_log_mass_below(logx, 200_000))
    }

    pub fn posterior_mass_remaining(&self, logx: f64) -> Result<f64> {
        Ok(self.log_posterior_mass_remaining(logx)?.exp())
    }

    fn quadrature_log_mass_below(&self, upper: f64, nodes: usize) -> f64 {
        let floor = self.quadrature_floor();
        if upper <= floor {
            return f64::NEG_INFINITY;
        }
        let nodes = nodes.max(2);
        let h = (upper - floor) / (nodes - 1) as f64;
        let terms: Vec<f64> = (0..nodes)
            .map(|i| {
                let logx = if i + 1 == nodes { upper } else { floor + i as f64 * h };
                let end = if i == 0 || i + 1 == nodes { 0.5f64.ln() } else { 0.0 };
                self.log_l_unchecked(self.radius_unchecked(logx)) + logx + end
            })
            .collect();
        log_sum_exp(&terms) + h.ln()
    }

    /// Tabulated `ln L(X) X` and its running integral on a uniform grid, for
    /// plot-data emission and allocation checks.
    pub fn posterior_mass_profile(&self, lo: f64, hi: f64, points: usize) -> MassProfile {
        let points = points.max(2);
        let hi = hi.min(0.0);
        let h = (hi - lo) / (points - 1) as f64;
        let log_x: Vec<f64> = (0..points).map(|i| lo + i as f64 * h).collect();
        let log_mass: Vec<f64> = log_x
            .iter()
            .map(|&lx| self.log_l_unchecked(self.radius_unchecked(lx)) + lx)
            .collect();
        // Remaining mass: contribution below `lo` plus a running trapezoid.
        let mut log_remaining = Vec::with_capacity(points);
        let mut acc = self.quadrature_log_mass_below(lo, 20_000);
        log_remaining.push(acc);
        for i in 1..points {
            let seg = log_add_exp(log_mass[i - 1], log_mass[i]) + (0.5 * h).ln();
            acc = log_add_exp(acc, seg);
            log_remaining.push(acc);
        }
        MassProfile {
            log_x,
            log_mass,
            log_remaining,
        }
    }

    /// `ln X` at the maximum of `L(X) X`, by golden-section search.
    pub fn log_x_of_peak_posterior_mass(&self) -> f64 {
        let f = |lx: f64| self.log_l_unchecked(self.radius_unchecked(lx)) + lx;
        // Coarse scan to bracket, then golden-section refinement.
        let floor = self.quadrature_floor();
        let steps = 4000;
        let h = -floor / steps as f64;
        let mut best = (f64::NEG_INFINITY, floor);
        for i in 0..steps {
            let lx = floor + i as f64 * h;
            let v = f(lx);
            if v > best.0 {
                best = (v, lx);
            }
        }
        let (mut a, mut b) = (best.1 - h, (best.1 + h).min(0.0));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while (b - a).abs() > 1e-10 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    }
}

/// Analytic posterior-mass curves over a `ln X` grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassProfile {
    pub log_x: Vec<f64>,
    /// `ln(L(X) X)`.
    pub log_mass: Vec<f64>,
    /// `ln ∫_{-∞}^{X} L(X') X' d ln X'`.
    pub log_remaining: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::{inv_reg_lower_inc_gamma, log_gamma};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g10() -> ModelSpec {
        ModelSpec::gaussian(10, 10.0).unwrap()
    }

    #[test]
    fn log_likelihood_examples() {
        let m = g10();
        let peak = m.log_likelihood_at_radius(0.0).unwrap();
        assert!((peak + 5.0 * (2.0 * PI).ln()).abs() < 1e-12);
        assert!((peak + 9.189_385_3).abs() < 1e-7);
        let at2 = m.log_likelihood_at_radius(2.0).unwrap();
        assert!((at2 - (peak - 2.0)).abs() < 1e-12);

        let c = ModelSpec::cauchy(10, 10.0).unwrap();
        let oracle = log_gamma(5.5).unwrap() - 5.5 * PI.ln();
        let got = c.log_likelihood_at_radius(0.0).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got + 2.338_200_4).abs() < 1e-6);

        assert!(m.log_likelihood_at_radius(-1.0).is_err());
    }

    #[test]
    fn exp_power_reduces_to_gaussian_at_b1() {
        for d in [1, 2, 3, 10, 100, 1000] {
            let e = ModelSpec::exp_power(d, 1.0, 10.0).unwrap();
            let g = ModelSpec::gaussian(d, 10.0).unwrap();
            assert!((e.log_peak() - g.log_peak()).abs() < 1e-9 * (1.0 + g.log_peak().abs()), "d={d}");
        }
    }

    #[test]
    fn exp_power_normalisation_by_radial_quadrature() {
        // ∫ L(θ) dθ = S_{d-1} ∫ r^{d-1} L(r) dr must equal 1.
        for &(d, b) in &[(2usize, 2.0), (3, 0.75), (10, 2.0), (10, 0.75)] {
            let m = ModelSpec::exp_power(d, b, 1.0).unwrap();
            let df = d as f64;
            let ln_surface = LN_2 + 0.5 * df * PI.ln() - log_gamma(0.5 * df).unwrap();
            let n = 400_000;
            let rmax = 60.0f64.powf(1.0 / (2.0 * b)) * 2.0;
            let h = rmax / n as f64;
            let mut s = 0.0;
            for i in 1..n {
                let r = i as f64 * h;
                s += ((df - 1.0) * r.ln() + m.log_likelihood_at_radius(r).unwrap()).exp();
            }
            let total = s * h * ln_surface.exp();
            assert!((total - 1.0).abs() < 1e-6, "d={d} b={b} total={total}");
        }
    }

    #[test]
    fn radius_inversion_examples() {
        let m = g10();
        let peak = m.log_peak();
        assert_eq!(m.radius_from_log_likelihood(peak).unwrap(), 0.0);
        assert!((m.radius_from_log_likelihood(peak - 2.0).unwrap() - 2.0).abs() < 1e-12);
        let e = ModelSpec::exp_power(10, 2.0, 10.0).unwrap();
        let r = e.radius_from_log_likelihood(e.log_peak() - 8.0).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        assert!(m.radius_from_log_likelihood(peak + 1e-9).is_err());
    }

    #[test]
    fn radius_log_likelihood_round_trip() {
        let models = [
            g10(),
            ModelSpec::exp_power(10, 2.0, 10.0).unwrap(),
            ModelSpec::exp_power(10, 0.75, 10.0).unwrap(),
            ModelSpec::cauchy(10, 10.0).unwrap(),
        ];
        for m in &models {
            for &r in &[1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
                let l = m.log_likelihood_at_radius(r).unwrap();
                let back = m.radius_from_log_likelihood(l).unwrap();
                // Relative error of the drop below the peak, amplified by the
                // inversion, bounds what f64 can recover.
                let drop = m.log_peak() - l;
                let tol = 1e-10 + 8.0 * f64::EPSILON * m.log_peak().abs().max(1.0) / drop;
                assert!(((back - r) / r).abs() < tol, "{:?} r={r} back={back}", m.family());
            }
        }
    }

    #[test]
    fn log_x_examples() {
        let m = g10();
        assert_eq!(m.log_x_from_radius(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(m.log_x_from_radius(f64::INFINITY).unwrap(), 0.0);
        assert!(m.log_x_from_radius(1e4).unwrap().abs() < 1e-300);
        // r^2 / (2 σ^2) at the Gamma(5) median.
        let median = inv_reg_lower_inc_gamma(5.0, 0.5).unwrap();
        assert!((median - 4.6709).abs() < 1e-4);
        let lx = m.log_x_from_radius(30.565).unwrap();
        assert!((lx - 0.5f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn log_likelihood_from_log_x_examples() {
        let m = g10();
        assert_eq!(m.log_likelihood_from_log_x(0.0).unwrap(), f64::NEG_INFINITY);
        let l = m.log_likelihood_from_log_x(0.5f64.ln()).unwrap();
        let r = 10.0 * (2.0 * inv_reg_lower_inc_gamma(5.0, 0.5).unwrap()).sqrt();
        assert!((l - m.log_likelihood_at_radius(r).unwrap()).abs() < 1e-6);
        assert!((l - m.log_likelihood_at_radius(30.565).unwrap()).abs() < 2e-2);
        assert!(m.log_likelihood_from_log_x(0.1).is_err());
    }

    #[test]
    fn likelihood_monotone_in_log_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let models = [g10(), ModelSpec::exp_power(10, 0.75, 10.0).unwrap(), ModelSpec::cauchy(10, 10.0).unwrap()];
        for m in &models {
            for _ in 0..10_000 / models.len() {
                let a: f64 = -rng.random_range(1e-6..200.0);
                let b: f64 = -rng.random_range(1e-6..200.0);
                if a == b {
                    continue;
                }
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let (l_lo, l_hi) = (m.log_likelihood_from_log_x(lo).unwrap(), m.log_likelihood_from_log_x(hi).unwrap());
                // Close to the peak the likelihood saturates in f64.
                if l_lo < m.log_peak() - 1e-9 {
                    assert!(l_lo > l_hi, "{:?} lo={lo} hi={hi}", m.family());
                } else {
                    assert!(l_lo >= l_hi);
                }
            }
        }
    }

    #[test]
    fn radius_log_x_round_trip() {
        for d in [1, 2, 3, 10, 100] {
            let m = ModelSpec::gaussian(d, 10.0).unwrap();
            for i in 0..=40 {
                let r = 1e-2 * (4000f64).powf(i as f64 / 40.0);
                let lx = m.log_x_from_radius(r).unwrap();
                if lx >= 0.0 {
                    continue; // mass indistinguishable from 1 in f64
                }
                let back = m.radius_from_log_x(lx).unwrap();
                assert!(((back - r) / r).abs() < 1e-8, "d={d} r={r} back={back}");
            }
        }
    }

    #[test]
    fn evidence_closed_form_values() {
        assert!((g10().analytic_log_evidence() + 32.264_988).abs() < 1e-5);
        let g3 = ModelSpec::gaussian(3, 10.0).unwrap();
        assert!((g3.analytic_log_evidence() + 9.679_496).abs() < 1e-5);
    }

    #[test]
    fn evidence_closed_form_matches_quadrature() {
        for d in [2, 3, 10, 100] {
            let m = ModelSpec::gaussian(d, 10.0).unwrap();
            let q = m.quadrature_log_evidence(DEFAULT_QUADRATURE_NODES);
            assert!((q - m.analytic_log_evidence()).abs() < 1e-6, "d={d} q={q}");
        }
    }

    #[test]
    fn quadrature_converges() {
        for m in [ModelSpec::exp_power(10, 2.0, 10.0).unwrap(), ModelSpec::cauchy(10, 10.0).unwrap()] {
            let a = m.quadrature_log_evidence(1_000_000);
            let b = m.quadrature_log_evidence(4_000_000);
            assert!((a - b).abs() < 1e-7, "{:?} {a} {b}", m.family());
        }
    }

    #[test]
    fn posterior_mass_curves() {
        let m = g10();
        assert_eq!(m.relative_posterior_mass(0.0).unwrap(), 0.0);
        let total = m.posterior_mass_remaining(0.0).unwrap();
        let z = m.analytic_log_evidence().exp();
        assert!((total / z - 1.0).abs() < 1e-6);

        let peak = m.log_x_of_peak_posterior_mass();
        let f = |lx: f64| m.log_relative_posterior_mass(lx).unwrap();
        let h = 1e-4;
        let deriv = (f(peak + h) - f(peak - h)) / (2.0 * h);
        assert!(deriv.abs() < 1e-3, "peak={peak} deriv={deriv}");
        // Roughly -d ln σ_π: the bulk sits that far into the prior.
        assert!((peak + 10.0 * 10f64.ln()).abs() < 5.0);
    }

    #[test]
    fn profile_integrates_to_evidence() {
        let m = g10();
        let p = m.posterior_mass_profile(m.quadrature_floor(), 0.0, 50_001);
        let last = *p.log_remaining.last().unwrap();
        assert!((last - m.analytic_log_evidence()).abs() < 1e-5);
    }

    #[test]
    fn model_spec_serialises_compactly() {
        let m = ModelSpec::exp_power(10, 2.0, 10.0).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"family":"exp_power","d":10,"b":2.0,"sigma_pi":10.0}"#);
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.log_peak(), m.log_peak());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family":"gaussian","d":0,"sigma_pi":1.0}"#).is_err());
    }
}
