//! Candidate models behind one fitting contract.
//!
//! A [`Model`] maps a natural-order parameter vector to a [`Density`]. The
//! optimizer works on transformed coordinates derived from each parameter's
//! [`ParamKind`] (identity for locations, log for positive parameters).

use std::f64::consts::{LN_2, PI};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::btgn::{Btgn, LocScaleBtgn, LocScaleParams};
use crate::error::{domain, Result};
use crate::specfun::{self, gamma_sample_unchecked, log_gamma_unchecked};
use crate::twopiece::{tptan_params, TwoPiece, TwoPieceBtgn, TwoPieceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Unconstrained real.
    Location,
    /// Strictly positive; optimized on the log scale.
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
}

const fn loc(name: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Location,
    }
}

const fn pos(name: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Positive,
    }
}

/// A fully parameterized univariate distribution.
pub trait Density: Send + Sync {
    fn ln_pdf(&self, x: f64) -> Result<f64>;

    fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    fn cdf(&self, x: f64) -> Result<f64>;

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64;

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

/// Robust location/scale summary used to seed the optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSummary {
    pub median: f64,
    /// `1.4826 · MAD`, falling back to the standard deviation when the MAD is zero.
    pub scale: f64,
    pub mean_abs_dev: f64,
}

impl DataSummary {
    pub fn new(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return domain("cannot summarize an empty dataset");
        }
        if data.iter().any(|x| !x.is_finite()) {
            return domain("dataset contains non-finite values");
        }
        let median = median(data);
        let deviations: Vec<f64> = data.iter().map(|x| (x - median).abs()).collect();
        let mad = 1.4826 * self::median(&deviations);
        let mean_abs_dev = deviations.iter().sum::<f64>() / data.len() as f64;
        let scale = if mad > 0.0 {
            mad
        } else {
            let n = data.len() as f64;
            let mean = data.iter().sum::<f64>() / n;
            let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        };
        Ok(Self {
            median,
            scale,
            mean_abs_dev: if mean_abs_dev > 0.0 { mean_abs_dev } else { scale },
        })
    }
}

pub(crate) fn median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// The uniform contract shared by every candidate model.
pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;

    /// Free parameters in natural order.
    fn params(&self) -> &'static [ParamSpec];

    fn n_free_params(&self) -> usize {
        self.params().len()
    }

    /// Builds the density for `theta`, validating it.
    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>>;

    /// Moment-based starting point for the optimizer.
    fn initial_guess(&self, summary: &DataSummary) -> Vec<f64>;

    fn log_likelihood(&self, theta: &[f64], data: &[f64]) -> Result<f64> {
        let d = self.density(theta)?;
        data.iter().try_fold(0.0, |acc, &x| Ok(acc + d.ln_pdf(x)?))
    }
}

fn check_len(model: &dyn Model, theta: &[f64]) -> Result<()> {
    if theta.len() != model.n_free_params() {
        return domain(format!(
            "{} expects {} parameters, got {}",
            model.name(),
            model.n_free_params(),
            theta.len()
        ));
    }
    Ok(())
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return domain(format!("{name} must be finite and > 0, got {v}"));
    }
    Ok(())
}

fn check_location(v: f64) -> Result<()> {
    if !v.is_finite() {
        return domain(format!("mu must be finite, got {v}"));
    }
    Ok(())
}

// ---------------------------------------------------------------- normal

#[derive(Debug, Clone, Copy, Default)]
pub struct NormalModel;

struct Normal {
    mu: f64,
    sigma: f64,
    ln_norm: f64,
}

impl Density for Normal {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        let z = (x - self.mu) / self.sigma;
        Ok(-0.5 * z * z - self.ln_norm)
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        Ok(0.5 * specfun::erfc(-(x - self.mu) / (self.sigma * std::f64::consts::SQRT_2)))
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mu + self.sigma * z
    }
}

impl Model for NormalModel {
    fn name(&self) -> &'static str {
        "normal"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 2] = [loc("mu"), pos("sigma")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        check_location(theta[0])?;
        check_scale("sigma", theta[1])?;
        Ok(Box::new(Normal {
            mu: theta[0],
            sigma: theta[1],
            ln_norm: theta[1].ln() + 0.5 * (2.0 * PI).ln(),
        }))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.scale]
    }
}

// --------------------------------------------------------------- laplace

#[derive(Debug, Clone, Copy, Default)]
pub struct LaplaceModel;

struct Laplace {
    mu: f64,
    b: f64,
}

impl Density for Laplace {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        Ok(-(2.0 * self.b).ln() - (x - self.mu).abs() / self.b)
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        let z = (x - self.mu) / self.b;
        Ok(if z <= 0.0 { 0.5 * z.exp() } else { 1.0 - 0.5 * (-z).exp() })
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        let e = -specfun::open_unit(rng).ln();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        self.mu + sign * self.b * e
    }
}

impl Model for LaplaceModel {
    fn name(&self) -> &'static str {
        "laplace"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 2] = [loc("mu"), pos("b")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        check_location(theta[0])?;
        check_scale("b", theta[1])?;
        Ok(Box::new(Laplace {
            mu: theta[0],
            b: theta[1],
        }))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.mean_abs_dev]
    }
}

// ------------------------------------------------------------- student t

#[derive(Debug, Clone, Copy, Default)]
pub struct StudentTModel;

struct StudentT {
    mu: f64,
    sigma: f64,
    nu: f64,
    ln_norm: f64,
}

impl Density for StudentT {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        let z = (x - self.mu) / self.sigma;
        Ok(self.ln_norm - 0.5 * (self.nu + 1.0) * (z * z / self.nu).ln_1p())
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        let z = (x - self.mu) / self.sigma;
        let tail = 0.5 * specfun::reg_inc_beta(0.5 * self.nu, 0.5, self.nu / (self.nu + z * z))?;
        Ok(if z <= 0.0 { tail } else { 1.0 - tail })
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let chi2 = 2.0 * gamma_sample_unchecked(0.5 * self.nu, rng);
        self.mu + self.sigma * z / (chi2 / self.nu).sqrt()
    }
}

impl Model for StudentTModel {
    fn name(&self) -> &'static str {
        "student-t"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 3] = [loc("mu"), pos("sigma"), pos("nu")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        check_location(theta[0])?;
        check_scale("sigma", theta[1])?;
        check_scale("nu", theta[2])?;
        let (sigma, nu) = (theta[1], theta[2]);
        let ln_norm = log_gamma_unchecked(0.5 * (nu + 1.0))
            - log_gamma_unchecked(0.5 * nu)
            - 0.5 * (nu * PI).ln()
            - sigma.ln();
        Ok(Box::new(StudentT {
            mu: theta[0],
            sigma,
            nu,
            ln_norm,
        }))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.scale, 5.0]
    }
}

// --------------------------------------------------- generalized normal

/// Generalized normal: `α e^{−|z|^α} / (2σΓ(1/α))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeneralizedNormalModel;

struct GeneralizedNormal {
    mu: f64,
    sigma: f64,
    alpha: f64,
    ln_norm: f64,
}

impl Density for GeneralizedNormal {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        let z = ((x - self.mu) / self.sigma).abs();
        Ok(self.ln_norm - z.powf(self.alpha))
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        let z = (x - self.mu) / self.sigma;
        let half = 0.5 * specfun::reg_gamma_q(1.0 / self.alpha, z.abs().powf(self.alpha))?;
        Ok(if z <= 0.0 { half } else { 1.0 - half })
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        let g = gamma_sample_unchecked(1.0 / self.alpha, rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        self.mu + sign * self.sigma * g.powf(1.0 / self.alpha)
    }
}

impl Model for GeneralizedNormalModel {
    fn name(&self) -> &'static str {
        "gn"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 3] = [loc("mu"), pos("sigma"), pos("alpha")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        check_location(theta[0])?;
        check_scale("sigma", theta[1])?;
        check_scale("alpha", theta[2])?;
        let (sigma, alpha) = (theta[1], theta[2]);
        Ok(Box::new(GeneralizedNormal {
            mu: theta[0],
            sigma,
            alpha,
            ln_norm: alpha.ln() - LN_2 - sigma.ln() - log_gamma_unchecked(1.0 / alpha),
        }))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.scale, 2.0]
    }
}

// ------------------------------------------------------------------ btgn

/// Symmetric location-scale BTGN with free `μ, σ, α, β`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BtgnModel;

impl Density for LocScaleBtgn {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        LocScaleBtgn::ln_pdf(self, x)
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        LocScaleBtgn::cdf(self, x)
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        let p = self.params();
        p.mu() + p.sigma() * self.base().sample_one(rng)
    }
}

impl Model for BtgnModel {
    fn name(&self) -> &'static str {
        "btgn"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 4] = [loc("mu"), pos("sigma"), pos("alpha"), pos("beta")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        let p = LocScaleParams::new(theta[0], theta[1], theta[2], theta[3])?;
        Ok(Box::new(LocScaleBtgn::new(p)))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.scale, 2.0, 2.0]
    }
}

// ------------------------------------------------------------- two-piece

impl Density for TwoPieceBtgn {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        TwoPiece::ln_pdf(self, x)
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        TwoPiece::cdf(self, x)
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        TwoPiece::sample_one(self, rng)
    }
}

/// Two-piece tail adjusted normal: free `μ, σ, β, ψ` with `α = 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TptanModel;

impl Model for TptanModel {
    fn name(&self) -> &'static str {
        "tptan"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 4] = [loc("mu"), pos("sigma"), pos("beta"), pos("psi")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        let p = tptan_params(theta[0], theta[1], theta[2], theta[3])?;
        Ok(Box::new(TwoPiece::btgn(p)))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.scale, 2.0, 1.0]
    }
}

/// Two-piece BTGN: free `μ, σ, α, β, ψ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TpbtgnModel;

impl Model for TpbtgnModel {
    fn name(&self) -> &'static str {
        "tpbtgn"
    }

    fn params(&self) -> &'static [ParamSpec] {
        const P: [ParamSpec; 5] = [loc("mu"), pos("sigma"), pos("alpha"), pos("beta"), pos("psi")];
        &P
    }

    fn density(&self, theta: &[f64]) -> Result<Box<dyn Density>> {
        check_len(self, theta)?;
        let p = TwoPieceParams::new(theta[0], theta[1], theta[2], theta[3], theta[4])?;
        Ok(Box::new(TwoPiece::btgn(p)))
    }

    fn initial_guess(&self, s: &DataSummary) -> Vec<f64> {
        vec![s.median, s.scale, 2.0, 2.0, 1.0]
    }
}

/// Names accepted by [`model_by_name`].
pub const MODEL_NAMES: [&str; 7] = ["normal", "laplace", "student-t", "gn", "btgn", "tptan", "tpbtgn"];

pub fn model_by_name(name: &str) -> Option<Box<dyn Model>> {
    let m: Box<dyn Model> = match name.to_ascii_lowercase().as_str() {
        "normal" => Box::new(NormalModel),
        "laplace" => Box::new(LaplaceModel),
        "student-t" | "t" => Box::new(StudentTModel),
        "gn" => Box::new(GeneralizedNormalModel),
        "btgn" => Box::new(BtgnModel),
        "tptan" => Box::new(TptanModel),
        "tpbtgn" => Box::new(TpbtgnModel),
        _ => return None,
    };
    Some(m)
}

/// Standard BTGN wrapped as a [`Density`] (for quadrature and plotting).
impl Density for Btgn {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        Btgn::ln_pdf(self, x)
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        Btgn::cdf(self, x)
    }

    fn sample_one(&self, rng: &mut dyn RngCore) -> f64 {
        Btgn::sample_one(self, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn names_resolve() {
        for name in MODEL_NAMES {
            assert_eq!(model_by_name(name).unwrap().name(), name);
        }
        assert!(model_by_name("nig").is_none());
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(TpbtgnModel.n_free_params(), 5);
        assert_eq!(TptanModel.n_free_params(), 4);
        assert_eq!(BtgnModel.n_free_params(), 4);
        assert_eq!(GeneralizedNormalModel.n_free_params(), 3);
        assert_eq!(NormalModel.n_free_params(), 2);
        for name in MODEL_NAMES {
            let m = model_by_name(name).unwrap();
            let s = DataSummary::new(&[0.0, 1.0, 2.0]).unwrap();
            assert_eq!(m.initial_guess(&s).len(), m.n_free_params());
        }
    }

    #[test]
    fn rejects_wrong_length_and_bad_values() {
        assert!(NormalModel.density(&[0.0]).is_err());
        assert!(NormalModel.density(&[0.0, -1.0]).is_err());
        assert!(TpbtgnModel.density(&[0.0, 1.0, 2.0, 2.0, 0.0]).is_err());
        assert!(StudentTModel.density(&[f64::NAN, 1.0, 3.0]).is_err());
    }

    #[test]
    fn gn_special_cases() {
        let d = GeneralizedNormalModel.density(&[0.0, 1.0, 2.0]).unwrap();
        assert!((d.pdf(0.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-14);
        let d = GeneralizedNormalModel.density(&[0.0, 1.0, 1.0]).unwrap();
        for &x in &[-2.0, 0.0, 0.7] {
            assert!((d.pdf(x).unwrap() - 0.5 * (-f64::abs(x)).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn normal_density_at_mode() {
        let d = NormalModel.density(&[1.5, 2.0]).unwrap();
        assert!((d.pdf(1.5).unwrap() - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-15);
        assert!((d.cdf(1.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn student_t_approaches_normal() {
        let t = StudentTModel.density(&[0.0, 1.0, 1e6]).unwrap();
        let n = NormalModel.density(&[0.0, 1.0]).unwrap();
        let gap = (-80..=80)
            .map(|i| {
                let x = i as f64 * 0.1;
                (t.pdf(x).unwrap() - n.pdf(x).unwrap()).abs()
            })
            .fold(0.0, f64::max);
        assert!(gap < 1e-3, "{gap}");
        // t with one degree of freedom is Cauchy
        let c = StudentTModel.density(&[0.0, 1.0, 1.0]).unwrap();
        assert!((c.cdf(1.0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn btgn_loglik_matches_rescaled_normal() {
        let data = [-1.3, 0.2, 0.4, 2.2, -0.05, 3.1];
        let sigma = 1.7;
        let b = BtgnModel.log_likelihood(&[0.3, sigma, 2.0, 2.0], &data).unwrap();
        let n = NormalModel.log_likelihood(&[0.3, sigma / SQRT_2], &data).unwrap();
        assert!((b - n).abs() < 1e-8, "{b} vs {n}");
    }

    #[test]
    fn summary_of_constant_data() {
        let s = DataSummary::new(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.0);
        assert_eq!(s.scale, 1.0);
        assert!(DataSummary::new(&[]).is_err());
        assert!(DataSummary::new(&[1.0, f64::NAN]).is_err());
    }
}
