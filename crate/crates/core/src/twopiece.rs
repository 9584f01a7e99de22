//! Two-piece skewing of a symmetric base density.
//!
//! Two halves of the base density are glued at the mode `μ`: the left half
//! uses scale `σ/ψ` and the right half scale `σψ`, with the normalizer
//! `2/(ψ + 1/ψ)` keeping the density continuous at `μ`. `ψ > 1` pushes mass
//! to the right; `ψ = 1` recovers the symmetric location-scale law. The left
//! mass is `1/(1+ψ²)`.

use rand::Rng;
use serde::Serialize;

use crate::btgn::{Btgn, LocScaleBtgn, LocScaleParams};
use crate::error::{domain, Result};
use crate::specfun;

/// A standardized symmetric distribution usable as a two-piece base.
pub trait SymmetricBase {
    fn ln_pdf(&self, z: f64) -> Result<f64>;
    fn cdf(&self, z: f64) -> Result<f64>;
    fn quantile(&self, q: f64) -> Result<f64>;
    /// One draw of `|Z|`.
    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

impl SymmetricBase for Btgn {
    fn ln_pdf(&self, z: f64) -> Result<f64> {
        Btgn::ln_pdf(self, z)
    }

    fn cdf(&self, z: f64) -> Result<f64> {
        Btgn::cdf(self, z)
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        Btgn::quantile(self, q)
    }

    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_one(rng).abs()
    }
}

/// Standard normal base, for two-piece normal comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StdNormal;

impl SymmetricBase for StdNormal {
    fn ln_pdf(&self, z: f64) -> Result<f64> {
        Ok(-0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln())
    }

    fn cdf(&self, z: f64) -> Result<f64> {
        Ok(0.5 * specfun::erfc(-z / std::f64::consts::SQRT_2))
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        // N(0,1) is BTGN(2,2) stretched by √2.
        Ok(std::f64::consts::SQRT_2 * Btgn::new(2.0, 2.0)?.quantile(q)?)
    }

    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        z.abs()
    }
}

/// Parameters of the two-piece BTGN: mode, scale, body and tail shape, skewness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPieceParams {
    mu: f64,
    sigma: f64,
    alpha: f64,
    beta: f64,
    psi: f64,
}

impl TwoPieceParams {
    pub fn new(mu: f64, sigma: f64, alpha: f64, beta: f64, psi: f64) -> Result<Self> {
        // Reuse the symmetric validation for μ, σ, α, β.
        LocScaleParams::new(mu, sigma, alpha, beta)?;
        check_psi(psi)?;
        Ok(Self {
            mu,
            sigma,
            alpha,
            beta,
            psi,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// The symmetric location-scale law with the same `μ, σ, α, β`.
    pub fn symmetric(&self) -> LocScaleBtgn {
        LocScaleBtgn::new(LocScaleParams::new(self.mu, self.sigma, self.alpha, self.beta).expect("validated"))
    }
}

/// Two-piece tail adjusted normal: the two-piece BTGN with `α` pinned to 2.
pub fn tptan_params(mu: f64, sigma: f64, beta: f64, psi: f64) -> Result<TwoPieceParams> {
    TwoPieceParams::new(mu, sigma, 2.0, beta, psi)
}

fn check_psi(psi: f64) -> Result<()> {
    if !(psi.is_finite() && psi > 0.0) {
        return domain(format!("psi must be finite and > 0, got {psi}"));
    }
    Ok(())
}

/// A two-piece distribution over any [`SymmetricBase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPiece<B> {
    mu: f64,
    sigma: f64,
    psi: f64,
    base: B,
    ln_weight: f64,
    left_mass: f64,
}

/// The two-piece BTGN (TPBTGN, or TPTAN when `α = 2`).
pub type TwoPieceBtgn = TwoPiece<Btgn>;

impl TwoPiece<Btgn> {
    pub fn btgn(params: TwoPieceParams) -> Self {
        let base = Btgn::new(params.alpha, params.beta).expect("validated shape");
        Self::with_base(params.mu, params.sigma, params.psi, base).expect("validated params")
    }
}

impl<B: SymmetricBase> TwoPiece<B> {
    pub fn with_base(mu: f64, sigma: f64, psi: f64, base: B) -> Result<Self> {
        if !mu.is_finite() {
            return domain(format!("mu must be finite, got {mu}"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return domain(format!("sigma must be finite and > 0, got {sigma}"));
        }
        check_psi(psi)?;
        Ok(Self {
            mu,
            sigma,
            psi,
            base,
            ln_weight: (2.0 / (psi + 1.0 / psi)).ln() - sigma.ln(),
            left_mass: 1.0 / (1.0 + psi * psi),
        })
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// `P(X ≤ μ) = 1/(1+ψ²)`.
    pub fn left_mass(&self) -> f64 {
        self.left_mass
    }

    fn left_scale(&self) -> f64 {
        self.sigma / self.psi
    }

    fn right_scale(&self) -> f64 {
        self.sigma * self.psi
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return domain("density evaluated at NaN");
        }
        let z = if x <= self.mu {
            (self.mu - x) / self.left_scale()
        } else {
            (x - self.mu) / self.right_scale()
        };
        Ok(self.ln_weight + self.base.ln_pdf(z)?)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return domain("cdf evaluated at NaN");
        }
        if x <= self.mu {
            let g = self.base.cdf((x - self.mu) / self.left_scale())?;
            Ok(2.0 * self.left_mass * g)
        } else {
            let g = self.base.cdf((x - self.mu) / self.right_scale())?;
            let right_mass = 1.0 - self.left_mass;
            Ok(self.left_mass + 2.0 * right_mass * (g - 0.5))
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return domain(format!("quantile requires 0 < q < 1, got {q}"));
        }
        if q <= self.left_mass {
            let g = q / (2.0 * self.left_mass);
            if g >= 0.5 {
                return Ok(self.mu);
            }
            Ok(self.mu + self.left_scale() * self.base.quantile(g)?)
        } else {
            let g = 0.5 + (q - self.left_mass) / (2.0 * (1.0 - self.left_mass));
            if g <= 0.5 {
                return Ok(self.mu);
            }
            Ok(self.mu + self.right_scale() * self.base.quantile(g.min(1.0 - f64::EPSILON))?)
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let right: f64 = rng.random();
        let z = self.base.sample_abs(rng);
        if right < 1.0 - self.left_mass {
            self.mu + self.right_scale() * z
        } else {
            self.mu - self.left_scale() * z
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(mu: f64, sigma: f64, a: f64, b: f64, psi: f64) -> TwoPieceBtgn {
        TwoPiece::btgn(TwoPieceParams::new(mu, sigma, a, b, psi).unwrap())
    }

    #[test]
    fn validation() {
        assert!(TwoPieceParams::new(0.0, 1.0, 2.0, 2.0, 0.0).is_err());
        assert!(TwoPieceParams::new(0.0, -1.0, 2.0, 2.0, 1.0).is_err());
        assert!(tptan_params(0.0, 1.0, 1.0, f64::NAN).is_err());
        assert_eq!(tptan_params(0.3, 2.0, 0.9, 1.4).unwrap().alpha(), 2.0);
    }

    #[test]
    fn symmetric_reduction() {
        let p = TwoPieceParams::new(0.5, 1.3, 1.7, 0.9, 1.0).unwrap();
        let two = TwoPiece::btgn(p);
        let sym = p.symmetric();
        for i in -20..=20 {
            let x = 0.5 + 0.37 * i as f64;
            assert!((two.pdf(x).unwrap() - sym.pdf(x).unwrap()).abs() < 1e-15);
            assert!((two.cdf(x).unwrap() - sym.cdf(x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn junction_continuity() {
        let d = tp(1.0, 2.0, 2.0, 1.3, 0.6);
        let left = d.pdf(1.0).unwrap();
        let right = d.pdf(1.0 + 1e-13).unwrap();
        assert!((left - right).abs() < 1e-12);
    }

    #[test]
    fn mass_at_mode() {
        assert_eq!(tp(0.0, 1.0, 2.0, 2.0, 1.0).cdf(0.0).unwrap(), 0.5);
        assert!((tp(0.0, 1.0, 2.0, 2.0, 2.0).cdf(0.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn quantile_roundtrip() {
        let d = tp(-0.4, 0.8, 1.2, 2.5, 1.7);
        for &x in &[-1.5, -0.41, -0.4, 0.2, 2.0, 3.0] {
            let back = d.quantile(d.cdf(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-9, "{x} -> {back}");
        }
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn tptan_with_normal_tails_is_normal() {
        // σ/√2 normal
        let d = TwoPiece::btgn(tptan_params(1.0, 2.0, 2.0, 1.0).unwrap());
        let s = 2.0 / std::f64::consts::SQRT_2;
        for &x in &[-3.0, 0.0, 1.0, 2.5, 5.0] {
            let z = (x - 1.0) / s;
            let normal = (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
            assert!((d.pdf(x).unwrap() - normal).abs() < 1e-13);
        }
    }

    #[test]
    fn two_piece_normal_base() {
        let d = TwoPiece::with_base(0.0, 1.0, 1.0, StdNormal).unwrap();
        assert!((d.cdf(1.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((d.quantile(0.841_344_746_068_542_9).unwrap() - 1.0).abs() < 1e-9);
    }
}
