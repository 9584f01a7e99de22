//! Reference numerics used to check the `btgn` crate from the outside.
//!
//! Nothing here shares code with the implementation under test: the
//! integrator is a plain adaptive Gauss–Kronrod rule and the goodness-of-fit
//! helpers only need a CDF closure.

pub mod ks;
pub mod quad;

pub use ks::{ks_pvalue, ks_statistic};
pub use quad::{integrate, integrate_lower_tail, integrate_real_line, integrate_upper_tail};

/// Central difference of `f` at `x` with step `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
