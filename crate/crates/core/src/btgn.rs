//! The symmetric body-tail generalized normal distribution.
//!
//! Its unnormalized kernel is the upper incomplete gamma function
//! `k(x) = Γ(α/β, |x|^β)`, obtained by integrating the derivative kernel
//! `k'(x) = −β sign(x) |x|^{α−1} e^{−|x|^β}`. The body shape `α` governs the
//! density near the mode and the tail shape `β` governs the decay rate; the
//! normalizing constant is `2Γ((α+1)/β)`. `α = β` gives the generalized
//! normal, `α = β = 2` a normal with scale `1/√2`, `α = β = 1` the Laplace.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun::{self, gamma_sample_unchecked, log_gamma_unchecked, log_reg_gamma_q_unchecked};

/// Probability tolerance for quantile inversion.
pub const QUANTILE_TOL: f64 = 1e-12;
const QUANTILE_MAX_STEPS: usize = 200;

/// Body shape `alpha` and tail shape `beta`, both positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeParams {
    alpha: f64,
    beta: f64,
}

impl ShapeParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return domain(format!("alpha must be finite and > 0, got {alpha}"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return domain(format!("beta must be finite and > 0, got {beta}"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Standard BTGN with its gamma-function constants cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Btgn {
    shape: ShapeParams,
    /// `α/β`, the shape argument of the kernel.
    kernel_shape: f64,
    ln_gamma_kernel: f64,
    /// `(α+1)/β`, the shape argument of the normalizer.
    mass_shape: f64,
    ln_gamma_mass: f64,
}

impl Btgn {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self::from_shape(ShapeParams::new(alpha, beta)?))
    }

    pub fn from_shape(shape: ShapeParams) -> Self {
        let kernel_shape = shape.alpha / shape.beta;
        let mass_shape = (shape.alpha + 1.0) / shape.beta;
        Self {
            shape,
            kernel_shape,
            ln_gamma_kernel: log_gamma_unchecked(kernel_shape),
            mass_shape,
            ln_gamma_mass: log_gamma_unchecked(mass_shape),
        }
    }

    pub fn shape(&self) -> ShapeParams {
        self.shape
    }

    pub fn alpha(&self) -> f64 {
        self.shape.alpha
    }

    pub fn beta(&self) -> f64 {
        self.shape.beta
    }

    /// `ln(2Γ((α+1)/β))`.
    pub fn log_normalizer(&self) -> f64 {
        LN_2 + self.ln_gamma_mass
    }

    /// Derivative kernel `−β sign(x) |x|^{α−1} e^{−|x|^β}`.
    ///
    /// For `α < 1` the origin is a pole and is rejected.
    pub fn derivative_kernel(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return domain(format!("derivative kernel needs a finite x, got {x}"));
        }
        let ShapeParams { alpha, beta } = self.shape;
        if x == 0.0 {
            if alpha < 1.0 {
                return domain("derivative kernel has a pole at x = 0 when alpha < 1");
            }
            return Ok(0.0);
        }
        let ax = x.abs();
        let magnitude = beta * ((alpha - 1.0) * ax.ln() - ax.powf(beta)).exp();
        Ok(-magnitude.copysign(x))
    }

    /// `ln Γ(α/β, |x|^β)`, the log of the unnormalized kernel.
    pub fn log_kernel(&self, x: f64) -> Result<f64> {
        let y = x.abs().powf(self.shape.beta);
        Ok(self.ln_gamma_kernel + log_reg_gamma_q_unchecked(self.kernel_shape, y, self.ln_gamma_kernel)?)
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return domain("density evaluated at NaN");
        }
        if x.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.log_kernel(x)? - self.log_normalizer())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    /// `P(X ≤ −|x|)`, the lower tail mass beyond `|x|`.
    fn tail_mass(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if ax == 0.0 {
            return Ok(0.5);
        }
        if ax.is_infinite() {
            return Ok(0.0);
        }
        let y = ax.powf(self.shape.beta);
        let ln_q_mass = log_reg_gamma_q_unchecked(self.mass_shape, y, self.ln_gamma_mass)?;
        let ln_q_kernel = log_reg_gamma_q_unchecked(self.kernel_shape, y, self.ln_gamma_kernel)?;
        let first = ln_q_mass.exp();
        let second = (ax.ln() + self.ln_gamma_kernel - self.ln_gamma_mass + ln_q_kernel).exp();
        Ok((0.5 * (first - second)).clamp(0.0, 0.5))
    }

    /// Distribution function. For `x ≤ 0`,
    /// `F(x) = [Γ((α+1)/β, |x|^β) − |x| Γ(α/β, |x|^β)] / (2Γ((α+1)/β))`,
    /// and `F(x) = 1 − F(−x)` above zero.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return domain("cdf evaluated at NaN");
        }
        let tail = self.tail_mass(x)?;
        Ok(if x <= 0.0 { tail } else { 1.0 - tail })
    }

    /// Survival function `1 − F(x)`, accurate in the right tail.
    pub fn sf(&self, x: f64) -> Result<f64> {
        self.cdf(-x)
    }

    /// Inverse of [`Btgn::cdf`].
    ///
    /// The lower half is bracketed by doubling away from zero, then refined
    /// by Newton steps on the density with a bisection fallback.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return domain(format!("quantile requires 0 < q < 1, got {q}"));
        }
        if q == 0.5 {
            return Ok(0.0);
        }
        let target = q.min(1.0 - q);
        let z = self.lower_quantile(target)?;
        Ok(if q < 0.5 { z } else { -z })
    }

    fn lower_quantile(&self, target: f64) -> Result<f64> {
        let mut hi = 0.0;
        let mut lo = -1.0;
        let mut f_lo = self.cdf(lo)?;
        let mut expansions = 0;
        while f_lo > target {
            hi = lo;
            lo *= 2.0;
            f_lo = self.cdf(lo)?;
            expansions += 1;
            if expansions > 1100 {
                return Err(Error::NoConvergence {
                    routine: "quantile bracketing",
                    iterations: expansions,
                });
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..QUANTILE_MAX_STEPS {
            let f = self.cdf(x)?;
            let err = f - target;
            if err.abs() <= QUANTILE_TOL {
                return Ok(x);
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let density = self.pdf(x)?;
            let newton = x - err / density;
            x = if density > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return Ok(x);
            }
        }
        // Bracket collapsed to the resolution of the CDF itself.
        if (self.cdf(x)? - target).abs() <= 1e3 * QUANTILE_TOL {
            return Ok(x);
        }
        Err(Error::NoConvergence {
            routine: "quantile refinement",
            iterations: QUANTILE_MAX_STEPS,
        })
    }

    /// `E|X|^r = Γ((α+r+1)/β) / ((r+1) Γ((α+1)/β))` for `r > −1`.
    pub fn abs_moment(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r > -1.0) {
            return domain(format!("absolute moment order must exceed -1, got {r}"));
        }
        if r == 0.0 {
            return Ok(1.0);
        }
        let shape = (self.shape.alpha + r + 1.0) / self.shape.beta;
        Ok((log_gamma_unchecked(shape) - self.ln_gamma_mass).exp() / (r + 1.0))
    }

    pub fn variance(&self) -> f64 {
        // r = 2 is always admissible
        self.abs_moment(2.0).expect("second moment")
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let m2 = self.variance();
        self.abs_moment(4.0).expect("fourth moment") / (m2 * m2) - 3.0
    }

    /// One draw via the scale mixture `X = G^{1/β} · U`, with
    /// `G ~ Gamma((α+1)/β)` and `U ~ Uniform(−1, 1)`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = gamma_sample_unchecked(self.mass_shape, rng);
        let s = g.powf(1.0 / self.shape.beta);
        let u: f64 = rng.random_range(-1.0..1.0);
        s * u
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

/// Closed form of `∫ₓ^∞ t^r Γ(α/β, t^β) dt`:
/// `[Γ((α+r+1)/β, x^β) − x^{r+1} Γ(α/β, x^β)] / (r+1)`.
pub fn lemma2_closed_form(x: f64, r: f64, shape: ShapeParams) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return domain(format!("tail integral needs a finite x >= 0, got {x}"));
    }
    if !(r.is_finite() && r > -1.0) {
        return domain(format!("tail integral needs r > -1, got {r}"));
    }
    let ShapeParams { alpha, beta } = shape;
    let y = x.powf(beta);
    let lead = specfun::upper_gamma((alpha + r + 1.0) / beta, y)?;
    let correction = if x == 0.0 {
        0.0
    } else {
        ((r + 1.0) * x.ln() + specfun::log_upper_gamma(alpha / beta, y)?).exp()
    };
    Ok((lead - correction) / (r + 1.0))
}

/// Numerically checks that `x^k Γ(α/β, x^β) → 0` along `grid`.
///
/// Returns true when the sequence, evaluated in log space, never increases
/// after its maximum and its final value is below `1e-12`.
pub fn tail_limit_check(k: f64, shape: ShapeParams, grid: &[f64]) -> bool {
    if grid.len() < 2 || grid.iter().any(|&x| !(x > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return false;
    }
    let kernel_shape = shape.alpha / shape.beta;
    let values: Option<Vec<f64>> = grid
        .iter()
        .map(|&x| {
            specfun::log_upper_gamma(kernel_shape, x.powf(shape.beta))
                .ok()
                .map(|lg| k * x.ln() + lg)
        })
        .collect();
    let Some(values) = values else {
        return false;
    };
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let eventually_decreasing = values[peak..].windows(2).all(|w| w[1] <= w[0]);
    eventually_decreasing && *values.last().unwrap() < 1e-12f64.ln()
}

/// Location and scale wrapped around a [`ShapeParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocScaleParams {
    mu: f64,
    sigma: f64,
    shape: ShapeParams,
}

impl LocScaleParams {
    pub fn new(mu: f64, sigma: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !mu.is_finite() {
            return domain(format!("mu must be finite, got {mu}"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return domain(format!("sigma must be finite and > 0, got {sigma}"));
        }
        Ok(Self {
            mu,
            sigma,
            shape: ShapeParams::new(alpha, beta)?,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn shape(&self) -> ShapeParams {
        self.shape
    }
}

/// Location-scale BTGN: `f(x) = Γ(α/β, |(x−μ)/σ|^β) / (2σΓ((α+1)/β))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocScaleBtgn {
    mu: f64,
    sigma: f64,
    ln_sigma: f64,
    base: Btgn,
}

impl LocScaleBtgn {
    pub fn new(params: LocScaleParams) -> Self {
        Self {
            mu: params.mu,
            sigma: params.sigma,
            ln_sigma: params.sigma.ln(),
            base: Btgn::from_shape(params.shape),
        }
    }

    pub fn params(&self) -> LocScaleParams {
        LocScaleParams {
            mu: self.mu,
            sigma: self.sigma,
            shape: self.base.shape(),
        }
    }

    pub fn base(&self) -> &Btgn {
        &self.base
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        Ok(self.base.ln_pdf(self.standardize(x))? - self.ln_sigma)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.base.cdf(self.standardize(x))
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        Ok(self.mu + self.sigma * self.base.quantile(q)?)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| self.mu + self.sigma * self.base.sample_one(rng))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn btgn(a: f64, b: f64) -> Btgn {
        Btgn::new(a, b).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(ShapeParams::new(0.0, 1.0).is_err());
        assert!(ShapeParams::new(1.0, -1.0).is_err());
        assert!(ShapeParams::new(f64::NAN, 1.0).is_err());
        assert!(ShapeParams::new(1.0, f64::INFINITY).is_err());
        assert!(LocScaleParams::new(0.0, 0.0, 2.0, 2.0).is_err());
        assert!(LocScaleParams::new(f64::NAN, 1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn derivative_kernel_values() {
        let d = btgn(2.0, 2.0);
        let want = -2.0 * (-1f64).exp();
        assert!((d.derivative_kernel(1.0).unwrap() - want).abs() < 1e-15);
        assert!((d.derivative_kernel(-1.0).unwrap() + want).abs() < 1e-15);
        assert_eq!(d.derivative_kernel(0.0).unwrap(), 0.0);
        assert!(btgn(0.5, 1.0).derivative_kernel(0.0).is_err());
        assert!(btgn(0.5, 1.0).derivative_kernel(0.1).unwrap() < 0.0);
    }

    #[test]
    fn derivative_kernel_matches_kernel_slope() {
        for &(a, b) in &[(2.0, 2.0), (1.5, 0.8), (3.0, 1.0), (0.7, 2.5)] {
            let d = btgn(a, b);
            for &x in &[-2.0, -0.4, 0.3, 1.1, 2.5] {
                let h = 1e-5;
                let k = |t: f64| d.log_kernel(t).unwrap().exp();
                let fd = (k(x + h) - k(x - h)) / (2.0 * h);
                let exact = d.derivative_kernel(x).unwrap();
                assert!((fd - exact).abs() < 1e-7 * (1.0 + exact.abs()), "({a},{b}) x={x}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn pdf_special_values() {
        assert!((btgn(2.0, 2.0).pdf(0.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-14);
        assert!((btgn(1.0, 1.0).pdf(0.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((btgn(2.0, 2.0).pdf(1.0).unwrap() - (-1f64).exp() / PI.sqrt()).abs() < 1e-14);
        assert!((btgn(3.0, 1.0).pdf(0.0).unwrap() - 1.0 / 6.0).abs() < 1e-14);
        // finite at the origin for a small body shape
        assert!(btgn(0.5, 1.0).pdf(0.0).unwrap().is_finite());
    }

    #[test]
    fn ln_pdf_is_finite_in_extreme_tails() {
        let d = btgn(1.2, 0.5);
        assert!(d.ln_pdf(1e6).unwrap().is_finite());
        assert!(btgn(2.0, 2.0).ln_pdf(80.0).unwrap().is_finite());
        assert_eq!(btgn(2.0, 2.0).ln_pdf(f64::INFINITY).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn cdf_values() {
        let d = btgn(2.0, 2.0);
        assert_eq!(d.cdf(0.0).unwrap(), 0.5);
        assert!((d.cdf(-1.0).unwrap() - 0.078_649_603_525_142_565).abs() < 1e-12);
        assert!((d.cdf(1.0).unwrap() - 0.921_350_396_474_857_43).abs() < 1e-12);
        assert_eq!(d.cdf(f64::NEG_INFINITY).unwrap(), 0.0);
        assert_eq!(d.cdf(f64::INFINITY).unwrap(), 1.0);
        assert!(d.cdf(f64::NAN).is_err());
    }

    #[test]
    fn quantile_values() {
        let d = btgn(2.0, 2.0);
        assert_eq!(d.quantile(0.5).unwrap(), 0.0);
        assert!((d.quantile(0.078_649_603_525_142_565).unwrap() + 1.0).abs() < 1e-9);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(f64::NAN).is_err());

        let d = btgn(1.5, 0.8);
        for &x in &[-3.0, -0.5, 0.7, 4.0] {
            let back = d.quantile(d.cdf(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-9, "{x} -> {back}");
        }
        for &q in &[1e-10, 1e-4, 0.3, 0.999] {
            let x = d.quantile(q).unwrap();
            assert!((d.cdf(x).unwrap() - q).abs() <= QUANTILE_TOL);
        }
    }

    #[test]
    fn moments() {
        assert_eq!(btgn(0.7, 2.9).abs_moment(0.0).unwrap(), 1.0);
        assert!((btgn(2.0, 2.0).abs_moment(2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((btgn(1.0, 1.0).abs_moment(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(btgn(1.0, 1.0).abs_moment(-1.0).is_err());
        assert!((btgn(2.0, 2.0).variance() - 0.5).abs() < 1e-14);
        assert!(btgn(2.0, 2.0).excess_kurtosis().abs() < 1e-12);
        assert!((btgn(1.0, 1.0).excess_kurtosis() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lemma2_complete_gamma_reduction() {
        let s = ShapeParams::new(2.0, 2.0).unwrap();
        assert!((lemma2_closed_form(0.0, 0.0, s).unwrap() - 0.886_226_925_452_758).abs() < 1e-14);
        assert!(lemma2_closed_form(-1.0, 0.0, s).is_err());
        assert!(lemma2_closed_form(1.0, -1.0, s).is_err());
    }

    #[test]
    fn tail_limit_examples() {
        let grid = |hi: f64, n: usize| -> Vec<f64> { (1..=n).map(|i| hi * i as f64 / n as f64).collect() };
        assert!(tail_limit_check(3.0, ShapeParams::new(2.0, 2.0).unwrap(), &grid(20.0, 200)));
        assert!(tail_limit_check(0.0, ShapeParams::new(1.0, 1.0).unwrap(), &grid(50.0, 100)));
        // x^{-1} Γ(2, √x) is still ~5e-8 at x = 200, so the heavy tail needs a longer grid.
        let heavy = ShapeParams::new(1.0, 0.5).unwrap();
        assert!(!tail_limit_check(-1.0, heavy, &grid(200.0, 400)));
        assert!(tail_limit_check(-1.0, heavy, &grid(1000.0, 400)));
        assert!(!tail_limit_check(0.0, heavy, &[2.0, 1.0]));
    }

    #[test]
    fn locscale_wrappers() {
        let d = LocScaleBtgn::new(LocScaleParams::new(3.0, 2.0, 2.0, 2.0).unwrap());
        assert!((d.pdf(3.0).unwrap() - 0.5 / PI.sqrt()).abs() < 1e-14);
        assert_eq!(d.cdf(3.0).unwrap(), 0.5);
        let x = d.quantile(0.2).unwrap();
        assert!((d.cdf(x).unwrap() - 0.2).abs() < 1e-12);
    }
}
