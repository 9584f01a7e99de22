//! Special functions: log-gamma, regularized incomplete gamma and beta,
//! the error function, and a gamma variate generator.
//!
//! The regularized upper incomplete gamma `Q(s, x) = Γ(s, x) / Γ(s)` is
//! evaluated with the power series for `P = 1 − Q` when `x < s + 1` and with
//! a modified-Lentz continued fraction otherwise. Both branches expose the
//! common prefactor `x^s e^{−x} / Γ(s)` separately so that `ln Q` can be
//! formed without ever materializing an underflowing `Q`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};

/// Iteration cap shared by every series and continued fraction here.
pub const MAX_ITERATIONS: usize = 500;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// Natural logarithm of the gamma function for `s > 0`.
pub fn log_gamma(s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return domain(format!("log_gamma requires a finite s > 0, got {s}"));
    }
    Ok(log_gamma_unchecked(s))
}

pub(crate) fn log_gamma_unchecked(s: f64) -> f64 {
    let mut y = s;
    let t = s + 5.242_187_5;
    let t = (s + 0.5) * t.ln() - t;
    let mut series = 0.999_999_999_999_997_092;
    for c in LANCZOS {
        y += 1.0;
        series += c / y;
    }
    t + (2.506_628_274_631_000_5 * series / s).ln()
}

fn check_gamma_args(s: f64, x: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return domain(format!("incomplete gamma requires a finite s > 0, got {s}"));
    }
    if !(x >= 0.0) || x.is_nan() {
        return domain(format!("incomplete gamma requires x >= 0, got {x}"));
    }
    Ok(())
}

/// `ln(x^s e^{−x} / Γ(s))`, the prefactor shared by both branches.
fn log_prefactor(s: f64, x: f64, lgs: f64) -> f64 {
    s * x.ln() - x - lgs
}

/// Power series for the lower regularized gamma `P(s, x)` divided by the
/// prefactor, i.e. returns `Σ` with `P = exp(log_prefactor) · Σ`.
fn lower_series(s: f64, x: f64) -> Result<f64> {
    let mut ap = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..MAX_ITERATIONS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        routine: "incomplete gamma series",
        iterations: MAX_ITERATIONS,
    })
}

/// Continued fraction for `Q(s, x)` divided by the prefactor.
fn upper_fraction(s: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITERATIONS {
        let an = -(i as f64) * (i as f64 - s);
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
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        routine: "incomplete gamma continued fraction",
        iterations: MAX_ITERATIONS,
    })
}

/// `Q(s, x)` evaluated with the series branch regardless of `x`.
pub(crate) fn reg_gamma_q_series(s: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    let p = (log_prefactor(s, x, log_gamma_unchecked(s))).exp() * lower_series(s, x)?;
    Ok((1.0 - p).clamp(0.0, 1.0))
}

/// `Q(s, x)` evaluated with the continued-fraction branch regardless of `x`.
pub(crate) fn reg_gamma_q_fraction(s: f64, x: f64) -> Result<f64> {
    let q = (log_prefactor(s, x, log_gamma_unchecked(s))).exp() * upper_fraction(s, x)?;
    Ok(q.clamp(0.0, 1.0))
}

/// Regularized upper incomplete gamma `Q(s, x) = Γ(s, x) / Γ(s)`.
pub fn reg_gamma_q(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x < s + 1.0 {
        reg_gamma_q_series(s, x)
    } else {
        reg_gamma_q_fraction(s, x)
    }
}

/// Regularized lower incomplete gamma `P(s, x) = 1 − Q(s, x)`.
pub fn reg_gamma_p(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        let p = log_prefactor(s, x, log_gamma_unchecked(s)).exp() * lower_series(s, x)?;
        Ok(p.clamp(0.0, 1.0))
    } else {
        Ok(1.0 - reg_gamma_q_fraction(s, x)?)
    }
}

/// `ln Q(s, x)`, finite wherever `Q` is representable in log space.
///
/// Above the branch point the continued fraction is combined with the
/// prefactor in log space, so large `x` never underflows.
pub fn log_reg_gamma_q(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    log_reg_gamma_q_unchecked(s, x, log_gamma_unchecked(s))
}

/// As [`log_reg_gamma_q`] with `ln Γ(s)` supplied by the caller.
pub(crate) fn log_reg_gamma_q_unchecked(s: f64, x: f64, lgs: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        let p = log_prefactor(s, x, lgs).exp() * lower_series(s, x)?;
        Ok((-p.min(1.0)).ln_1p())
    } else {
        Ok(log_prefactor(s, x, lgs) + upper_fraction(s, x)?.ln())
    }
}

/// Upper incomplete gamma `Γ(s, x) = ∫ₓ^∞ t^{s−1} e^{−t} dt`.
pub fn upper_gamma(s: f64, x: f64) -> Result<f64> {
    Ok(log_upper_gamma(s, x)?.exp())
}

/// `ln Γ(s, x)`.
pub fn log_upper_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    let lgs = log_gamma_unchecked(s);
    Ok(lgs + log_reg_gamma_q_unchecked(s, x, lgs)?)
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return x;
    }
    // P(1/2, x²) converges for every finite x well inside the iteration cap.
    let p = reg_gamma_p(0.5, x * x).unwrap_or(1.0);
    p.copysign(x)
}

/// Complementary error function `1 − erf(x)`, accurate in the right tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0 - erf(x);
    }
    reg_gamma_q(0.5, x * x).unwrap_or(0.0)
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

fn beta_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITERATIONS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        routine: "incomplete beta continued fraction",
        iterations: MAX_ITERATIONS,
    })
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return domain(format!("incomplete beta requires a, b > 0, got ({a}, {b})"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("incomplete beta requires 0 <= x <= 1, got {x}"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let log_front = a * x.ln() + b * (1.0 - x).ln() - log_beta(a, b)?;
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(log_front.exp() * beta_fraction(a, b, x)? / a)
    } else {
        Ok(1.0 - log_front.exp() * beta_fraction(b, a, 1.0 - x)? / b)
    }
}

/// Draws one Gamma(shape, 1) variate with the Marsaglia–Tsang squeeze method.
///
/// Shapes below one are boosted: a Gamma(shape + 1) draw is multiplied by
/// `U^{1/shape}`.
pub fn gamma_sample<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) {
        return domain(format!("gamma shape must be finite and > 0, got {shape}"));
    }
    Ok(gamma_sample_unchecked(shape, rng))
}

pub(crate) fn gamma_sample_unchecked<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let boosted = gamma_sample_unchecked(shape + 1.0, rng);
        let u: f64 = open_unit(rng);
        return boosted * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = open_unit(rng);
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Reference values computed with mpmath at 30 significant digits.
    const LOG_GAMMA_REF: [(f64, f64); 7] = [
        (0.001, 6.907_178_885_383_853_661_7),
        (0.5, 0.572_364_942_924_700_087_07),
        (1.0, 0.0),
        (5.0, 3.178_053_830_347_945_619_6),
        (7.3, 7.147_892_523_022_248_692_1),
        (100.0, 359.134_205_369_575_398_78),
        (1000.0, 5905.220_423_209_181_211_8),
    ];

    const Q_REF: [(f64, f64, f64); 20] = [
        (0.25, 0.1, 0.391_661_154_271_033_933_02),
        (0.25, 1.0, 0.067_921_132_010_108_806_533),
        (0.25, 5.0, 0.000_492_025_124_446_340_082_94),
        (0.25, 20.0, 5.803_147_475_369_233_487_3e-11),
        (0.5, 0.1, 0.654_720_846_018_577_020_44),
        (0.5, 1.0, 0.157_299_207_050_285_130_66),
        (0.5, 5.0, 0.001_565_402_258_002_549_677_5),
        (0.5, 20.0, 2.539_628_589_470_864_970_7e-10),
        (1.5, 0.1, 0.977_589_297_761_649_397_71),
        (1.5, 1.0, 0.572_406_704_470_879_834),
        (1.5, 5.0, 0.018_566_135_463_043_233_303),
        (1.5, 20.0, 1.065_509_033_425_586_081_5e-8),
        (3.0, 0.1, 0.999_845_346_929_735_328_32),
        (3.0, 1.0, 0.919_698_602_928_605_803_99),
        (3.0, 5.0, 0.124_652_019_483_081_141_29),
        (3.0, 20.0, 4.555_149_505_589_212_799_8e-7),
        (10.0, 0.1, 0.999_999_999_999_999_974_84),
        (10.0, 1.0, 0.999_999_888_574_521_661_28),
        (10.0, 5.0, 0.968_171_942_693_795_188_26),
        (10.0, 20.0, 0.004_995_412_308_307_587_166_2),
    ];

    #[test]
    fn log_gamma_reference_values() {
        for (s, want) in LOG_GAMMA_REF {
            let got = log_gamma(s).unwrap();
            let tol = 1e-13 * want.abs().max(0.1);
            assert!((got - want).abs() <= tol, "lnΓ({s}) = {got}, want {want}");
        }
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_rejects_bad_input() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn reg_gamma_q_reference_values() {
        for (s, x, want) in Q_REF {
            let got = reg_gamma_q(s, x).unwrap();
            assert!((got - want).abs() <= 1e-12, "Q({s},{x}) = {got}, want {want}");
        }
        assert!((reg_gamma_q(1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(reg_gamma_q(2.7, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn reg_gamma_q_rejects_bad_input() {
        assert!(reg_gamma_q(0.0, 1.0).is_err());
        assert!(reg_gamma_q(1.0, -1.0).is_err());
        assert!(reg_gamma_q(1.0, f64::NAN).is_err());
    }

    #[test]
    fn branches_agree_in_overlap_band() {
        for &s in &[0.25, 0.3, 0.5, 1.0, 2.5, 7.0, 25.0, 80.0] {
            for k in 0..=20 {
                let x = s + 2.0 * k as f64 / 20.0;
                let a = reg_gamma_q_series(s, x).unwrap();
                let b = reg_gamma_q_fraction(s, x).unwrap();
                assert!((a - b).abs() < 1e-12, "s={s} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fraction_reports_non_convergence_near_zero() {
        // The continued fraction is never selected this far below s + 1, but
        // when forced it must fail loudly rather than return garbage.
        let err = reg_gamma_q_fraction(0.05, 0.05).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn log_q_stays_finite_far_in_the_tail() {
        let cases = [
            (0.01, 1e4, -10_013.717_815_831_502_205),
            (100.0, 1e4, -9_447.300_560_222_770_135),
            (2.5, 800.0, -790.255_890_865_637_869_25),
            (0.5, 5000.0, -5_004.831_061_513_645_143_3),
        ];
        for (s, x, want) in cases {
            let got = log_reg_gamma_q(s, x).unwrap();
            assert!((got - want).abs() < 1e-9 * want.abs(), "lnQ({s},{x}) = {got}");
        }
        for &s in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            for &x in &[1e-8, 0.5, 3.0, 50.0, 1e3, 1e4] {
                assert!(log_reg_gamma_q(s, x).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn upper_gamma_values() {
        assert!((upper_gamma(1.0, 1.0).unwrap() - 0.367_879_441_171_442_33).abs() < 1e-14);
        assert!((upper_gamma(1.5, 0.0).unwrap() - 0.886_226_925_452_758).abs() < 1e-14);
        assert!((upper_gamma(1.5, 1.0).unwrap() - 0.507_282_233_811_773_309_85).abs() < 1e-13);
    }

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.842_700_792_949_714_869_34).abs() < 1e-12);
        assert!((erf(0.3) - 0.328_626_759_459_127_416_19).abs() < 1e-12);
        assert!((erf(-2.5) + 0.999_593_047_982_555_041_06).abs() < 1e-12);
        for &x in &[6.0, 7.5, 30.0, 1e3] {
            assert!((erf(x) - 1.0).abs() <= 1e-15);
            assert!((erf(-x) + 1.0).abs() <= 1e-15);
        }
        assert!(erf(1e-10) > 0.0);
    }

    #[test]
    fn incomplete_beta_known_values() {
        // I_x(1, 1) = x and I_x(a, 1) = x^a.
        assert!((reg_inc_beta(1.0, 1.0, 0.3).unwrap() - 0.3).abs() < 1e-14);
        assert!((reg_inc_beta(2.5, 1.0, 0.6).unwrap() - 0.6f64.powf(2.5)).abs() < 1e-13);
        // symmetry I_x(a,b) = 1 − I_{1−x}(b,a)
        let a = reg_inc_beta(3.2, 0.7, 0.45).unwrap();
        let b = reg_inc_beta(0.7, 3.2, 0.55).unwrap();
        assert!((a + b - 1.0).abs() < 1e-13);
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn gamma_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| gamma_sample(1.0, &mut rng).unwrap()).collect();
        let (m, _) = mean_var(&draws);
        assert!((m - 1.0).abs() < 3.0 * (1.0 / n as f64).sqrt());

        let draws: Vec<f64> = (0..n).map(|_| gamma_sample(2.5, &mut rng).unwrap()).collect();
        let (m, v) = mean_var(&draws);
        assert!((m - 2.5).abs() < 3.0 * (2.5 / n as f64).sqrt());
        // var of the sample variance for Gamma(k): (2k² + 6k) / n approximately
        let se_v = ((2.0 * 2.5 * 2.5 + 6.0 * 2.5) / n as f64).sqrt() * 1.0;
        assert!((v - 2.5).abs() < 3.0 * se_v.max(0.02), "variance {v}");
    }

    #[test]
    fn gamma_sample_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        for shape in [0.3, 1.0, 4.0] {
            for _ in 0..100 {
                assert_eq!(
                    gamma_sample(shape, &mut a).unwrap().to_bits(),
                    gamma_sample(shape, &mut b).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn gamma_sample_rejects_bad_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(gamma_sample(0.0, &mut rng).is_err());
        assert!(gamma_sample(-2.0, &mut rng).is_err());
    }
}
