//! Special functions and variate generators used by the analytic models and
//! the perfect sampler.
//!
//! The incomplete gamma routines come in two flavours: probability space
//! (`reg_lower_inc_gamma`, `inv_reg_lower_inc_gamma`) and log space
//! (`ln_reg_lower_inc_gamma`, `inv_ln_reg_lower_inc_gamma`). Prior volumes in
//! high dimension sit far below the smallest representable double, so the
//! model code works exclusively with the log-space pair.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::numerics::log1m_exp;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SERIES_EPS: f64 = 1e-17;
const MAX_ITER: usize = 100_000;

/// Natural log of the gamma function for positive finite `x`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

fn check_shape(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("shape must be finite and > 0, got {a}")));
    }
    Ok(())
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_inc_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(ln_reg_lower_inc_gamma(a, x)?.exp())
}

/// `ln P(a, x)`, finite down to the smallest `x` with nonzero P.
///
/// Series expansion below `x = a + 1`, Lentz continued fraction for the
/// upper tail above it.
pub fn ln_reg_lower_inc_gamma(a: f64, x: f64) -> Result<f64> {
    check_shape(a)?;
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x must be >= 0, got {x}")));
    }
    Ok(ln_p_unchecked(a, x, ln_gamma_unchecked(a)))
}

/// `ln P(a, x)` with a precomputed `ln Γ(a)`.
pub(crate) fn ln_p_unchecked(a: f64, x: f64, ln_gamma_a: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    let prefactor = a * x.ln() - x - ln_gamma_a;
    if x < a + 1.0 {
        prefactor + lower_series(a, x).ln()
    } else {
        log1m_exp(prefactor + upper_fraction(a, x).ln())
    }
}

/// Sum of `x^k / (a (a+1) ... (a+k))`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term < sum * SERIES_EPS {
            break;
        }
    }
    sum
}

/// Continued fraction for `Γ(a, x) e^x x^-a`, modified Lentz.
fn upper_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < SERIES_EPS {
            break;
        }
    }
    h
}

/// Inverse of `P(a, ·)` in probability space: returns `x` with `P(a, x) = p`.
pub fn inv_reg_lower_inc_gamma(a: f64, p: f64) -> Result<f64> {
    check_shape(a)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("probability must lie in [0, 1), got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    inv_ln_reg_lower_inc_gamma(a, p.ln())
}

/// Inverse of `ln P(a, ·)`: returns `x` with `ln P(a, x) = ln_p` for `ln_p < 0`.
pub fn inv_ln_reg_lower_inc_gamma(a: f64, ln_p: f64) -> Result<f64> {
    check_shape(a)?;
    if !(ln_p < 0.0) {
        return Err(Error::domain(format!("log probability must be < 0, got {ln_p}")));
    }
    Ok(inv_ln_p_unchecked(a, ln_p, ln_gamma_unchecked(a)))
}

/// Root of `g(y) = ln P(a, e^y) - target` by bracketed Newton iteration in
/// `y = ln x`.
///
/// `g` is increasing and concave in `y` (the log-gamma density is
/// log-concave), so Newton steps land at or left of the root and then climb
/// monotonically. The bracket guards the first step, where the slope can be
/// vanishingly small far out in the upper tail.
pub(crate) fn inv_ln_p_unchecked(a: f64, target: f64, ln_gamma_a: f64) -> f64 {
    if target == f64::NEG_INFINITY {
        return 0.0;
    }
    // d/dy ln P(a, e^y) = e^{a y - e^y} / (Γ(a) P)
    let slope = |y: f64, lnp: f64| (a * y - y.exp() - ln_gamma_a - lnp).exp();

    // Leading-order small-x guess, ln P ≈ a ln x - ln Γ(a + 1), then the
    // median region as a fallback for moderate targets.
    let ln_gamma_a1 = ln_gamma_a + a.ln();
    let mut y = ((target + ln_gamma_a1) / a).min(a.max(1.0).ln() + 1.0);

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for _ in 0..400 {
        let lnp = ln_p_unchecked(a, y.exp(), ln_gamma_a);
        let gy = lnp - target;
        if gy == 0.0 {
            return y.exp();
        }
        if gy < 0.0 {
            lo = lo.max(y);
        } else {
            hi = hi.min(y);
        }
        let d = slope(y, lnp);
        let mut next = y - gy / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0 + (lo.abs() * 0.5),
                (false, true) => hi - 1.0 - (hi.abs() * 0.5),
                (false, false) => y - 1.0,
            };
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
            y = next;
            break;
        }
        y = next;
    }
    y.exp()
}

/// First coordinate of a uniformly distributed direction in `d` dimensions.
///
/// For `d >= 2` the squared coordinate is Beta(1/2, (d-1)/2) distributed; the
/// sign is drawn separately. `d = 1` gives ±1.
#[derive(Debug, Clone)]
pub struct SphereCoordinate {
    beta: Option<Beta<f64>>,
}

impl SphereCoordinate {
    pub fn new(d: usize) -> Result<Self> {
        match d {
            0 => Err(Error::domain("dimension must be >= 1")),
            1 => Ok(Self { beta: None }),
            _ => {
                let beta = Beta::new(0.5, (d as f64 - 1.0) / 2.0)
                    .map_err(|e| Error::domain(e.to_string()))?;
                Ok(Self { beta: Some(beta) })
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        match &self.beta {
            None => sign,
            Some(beta) => sign * beta.sample(rng).sqrt().min(1.0),
        }
    }
}

pub fn sample_beta_first_coordinate<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<f64> {
    Ok(SphereCoordinate::new(d)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `P(a, x)` by composite Simpson quadrature after substituting `u = t^a`,
    /// which removes the endpoint singularity: `∫_0^{x^a} e^{-u^{1/a}} du / Γ(a+1)`.
    /// Simpson's rule on `∫_0^x t^{a-1} e^{-t} dt / Γ(a)`. For `a < 1` the
    /// substitution `u = t^a` removes the singularity at zero.
    fn p_by_quadrature(a: f64, x: f64, gamma_a1: f64) -> f64 {
        let n = 200_000;
        let (upper, f): (f64, Box<dyn Fn(f64) -> f64>) = if a < 1.0 {
            (x.powf(a), Box::new(move |u: f64| (-u.powf(1.0 / a)).exp() / gamma_a1))
        } else {
            let gamma_a = gamma_a1 / a;
            (x, Box::new(move |t: f64| t.powf(a - 1.0) * (-t).exp() / gamma_a))
        };
        let h = upper / n as f64;
        let mut s = f(0.0) + f(upper);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        let half = log_gamma(0.5).unwrap();
        assert!((half - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
        assert!((half - 0.572_364_9).abs() < 1e-7);
        let ten = log_gamma(10.0).unwrap();
        assert!((ten - 362_880f64.ln()).abs() < 1e-12 * 362_880f64.ln());
        assert!((ten - 12.801_827_5).abs() < 1e-7);
    }

    #[test]
    fn log_gamma_rejects_bad_input() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn log_gamma_relative_accuracy_against_factorials_and_stirling() {
        // Integers: exact log-factorials accumulated in f64.
        let mut ln_fact = 0.0f64;
        for n in 2..170u32 {
            ln_fact += (n as f64).ln();
            let got = log_gamma(n as f64 + 1.0).unwrap();
            assert!(((got - ln_fact) / ln_fact).abs() < 1e-12, "n={n}");
        }
        // Large arguments: Stirling series with three correction terms.
        for &x in &[1e3f64, 1e4, 1e5, 1e6] {
            let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
                + 1.0 / (12.0 * x)
                - 1.0 / (360.0 * x.powi(3));
            let got = log_gamma(x).unwrap();
            assert!(((got - stirling) / stirling).abs() < 1e-12, "x={x}");
        }
        // Small arguments: Γ(x) ≈ 1/x - γ for x → 0.
        let x: f64 = 1e-3;
        let approx = (1.0 / x - 0.577_215_664_901_532_9 + 0.989_055_995_327_972_6 * x).ln();
        assert!(((log_gamma(x).unwrap() - approx) / approx).abs() < 1e-9);
    }

    #[test]
    fn log_gamma_recurrence() {
        for i in 1..200 {
            let x = 0.013 * i as f64 + 0.5 * i as f64;
            let lhs = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
            assert!((lhs - x.ln()).abs() < 1e-12 * (1.0 + x.ln().abs() + log_gamma(x).unwrap().abs()));
        }
    }

    #[test]
    fn incomplete_gamma_examples() {
        assert_eq!(reg_lower_inc_gamma(5.0, 0.0).unwrap(), 0.0);
        let erf1 = 0.842_700_792_949_714_9;
        assert!((reg_lower_inc_gamma(0.5, 1.0).unwrap() - erf1).abs() < 1e-10);
        assert!((reg_lower_inc_gamma(5.0, 4.6709).unwrap() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn incomplete_gamma_matches_quadrature_oracle() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        // (a, x, Γ(a+1)) with Γ(a+1) known in closed form.
        let cases = [
            (0.5, 1.0, 0.5 * sqrt_pi),
            (0.5, 3.0, 0.5 * sqrt_pi),
            (1.0, 2.0, 1.0),
            (5.0, 4.6709, 120.0),
            (5.0, 12.0, 120.0),
            (2.0, 0.3, 2.0),
        ];
        for (a, x, g) in cases {
            let oracle = p_by_quadrature(a, x, g);
            let got = reg_lower_inc_gamma(a, x).unwrap();
            assert!((got - oracle).abs() < 1e-10, "a={a} x={x} got={got} oracle={oracle}");
        }
        // Gamma(5, 1) median from the quadrature oracle.
        let oracle = p_by_quadrature(5.0, 4.6709, 120.0);
        assert!((oracle - 0.5).abs() < 1e-4);
    }

    #[test]
    fn incomplete_gamma_domain_errors() {
        assert!(reg_lower_inc_gamma(0.0, 1.0).is_err());
        assert!(reg_lower_inc_gamma(1.0, -1.0).is_err());
        assert!(inv_reg_lower_inc_gamma(1.0, 1.0).is_err());
        assert!(inv_reg_lower_inc_gamma(1.0, -0.1).is_err());
        assert!(inv_ln_reg_lower_inc_gamma(1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inv_reg_lower_inc_gamma(5.0, 0.0).unwrap(), 0.0);
        let x = inv_reg_lower_inc_gamma(0.5, 0.842_700_8).unwrap();
        assert!((x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn inverse_round_trips() {
        for &a in &[0.5, 1.0, 5.0, 500.0] {
            for &x in &[0.1, 1.0, 10.0, a] {
                // Log space covers every pair, including P(500, 0.1) ~ 1e-1100.
                let lnp = ln_reg_lower_inc_gamma(a, x).unwrap();
                let back = inv_ln_reg_lower_inc_gamma(a, lnp).unwrap();
                assert!((back - x).abs() <= 1e-8 * (1.0 + x), "a={a} x={x} back={back}");

                let p = reg_lower_inc_gamma(a, x).unwrap();
                if p > 1e-300 && p < 1.0 {
                    let back = inv_reg_lower_inc_gamma(a, p).unwrap();
                    assert!((back - x).abs() <= 1e-8 * (1.0 + x), "a={a} x={x} back={back}");
                    let again = reg_lower_inc_gamma(a, back).unwrap();
                    assert!((again - p).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn inverse_in_deep_log_space() {
        // High-dimensional prior volumes far below f64's range.
        for &a in &[5.0, 50.0, 500.0] {
            for &lnp in &[-1e-12, -1e-3, -0.7, -5.0, -300.0, -4000.0, -40_000.0] {
                let x = inv_ln_reg_lower_inc_gamma(a, lnp).unwrap();
                if x < 1e-300 {
                    // Below f64's normal range: ln x ≈ (ln p + ln Γ(a+1)) / a.
                    assert!((lnp + log_gamma(a + 1.0).unwrap()) / a < -690.0, "a={a} lnp={lnp}");
                    continue;
                }
                let back = ln_reg_lower_inc_gamma(a, x).unwrap();
                assert!((back - lnp).abs() <= 1e-10 * (1.0 + lnp.abs()), "a={a} lnp={lnp} back={back}");
            }
        }
    }

    #[test]
    fn monotone_in_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let a: f64 = rng.random_range(0.05..600.0);
            let x1: f64 = rng.random_range(0.0..1200.0);
            let x2: f64 = rng.random_range(0.0..1200.0);
            let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
            let plo = reg_lower_inc_gamma(a, lo).unwrap();
            let phi = reg_lower_inc_gamma(a, hi).unwrap();
            assert!(plo <= phi + 1e-15, "a={a} lo={lo} hi={hi}");
            assert!((0.0..=1.0).contains(&plo) && (0.0..=1.0).contains(&phi));
        }
    }

    #[test]
    fn sphere_coordinate_d1_is_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = sample_beta_first_coordinate(1, &mut rng).unwrap();
            assert!(u == 1.0 || u == -1.0);
        }
        assert!(sample_beta_first_coordinate(0, &mut rng).is_err());
    }

    #[test]
    fn sphere_coordinate_moments() {
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // d = 3: first coordinate is uniform on [-1, 1], Var = 1/3.
        let s3 = SphereCoordinate::new(3).unwrap();
        let draws: Vec<f64> = (0..n).map(|_| s3.sample(&mut rng)).collect();
        assert!(draws.iter().all(|u| (-1.0..=1.0).contains(u)));
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 * (1.0 / 3.0 / n as f64).sqrt());
        let var = draws.iter().map(|u| u * u).sum::<f64>() / n as f64;
        // Var(u^2) for U(-1,1) is 1/5 - 1/9.
        assert!((var - 1.0 / 3.0).abs() < 5.0 * ((1.0 / 5.0 - 1.0 / 9.0) / n as f64).sqrt());

        // d = 10: E[u^2] = 1/d.
        let s10 = SphereCoordinate::new(10).unwrap();
        let sq = (0..n).map(|_| s10.sample(&mut rng).powi(2)).sum::<f64>() / n as f64;
        assert!((sq - 0.1).abs() < 0.002);
    }
}
