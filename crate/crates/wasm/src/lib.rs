//! WebAssembly bindings behind `www/index.html`.
//!
//! Models are addressed by name with parameters in the model's natural
//! order, e.g. `tpbtgn` takes `[mu, sigma, alpha, beta, psi]`.

use btgn::{model_by_name, Btgn, Density};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn density(model: &str, params: &[f64]) -> Result<Box<dyn Density>, String> {
    let m = model_by_name(model).ok_or_else(|| format!("unknown model {model:?}"))?;
    if params.len() != m.n_free_params() {
        return Err(format!(
            "{} takes {} parameters, got {}",
            m.name(),
            m.n_free_params(),
            params.len()
        ));
    }
    m.density(params).map_err(|e| e.to_string())
}

fn grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(from.is_finite() && to.is_finite() && to > from) || points < 2 {
        return Err("need finite from < to and at least two points".into());
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points).map(|i| from + step * i as f64).collect())
}

/// `pdf` then `cdf` values on an even grid, concatenated.
pub fn pdf_cdf(model: &str, params: &[f64], from: f64, to: f64, points: usize) -> Result<Vec<f64>, String> {
    let d = density(model, params)?;
    let xs = grid(from, to, points)?;
    let mut out = Vec::with_capacity(2 * points);
    for &x in &xs {
        out.push(d.pdf(x).map_err(|e| e.to_string())?);
    }
    for &x in &xs {
        out.push(d.cdf(x).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

pub fn kernel_derivative(alpha: f64, beta: f64, from: f64, to: f64, points: usize) -> Result<Vec<f64>, String> {
    let d = Btgn::new(alpha, beta).map_err(|e| e.to_string())?;
    grid(from, to, points)?
        .into_iter()
        .map(|x| d.derivative_kernel(x).map_err(|e| e.to_string()))
        .collect()
}

/// Histogram of `n` draws over `bins` equal cells of `[from, to]`, scaled to
/// a density. Draws outside the range are dropped from the counts but not
/// from the normalization.
pub fn histogram(
    model: &str,
    params: &[f64],
    n: usize,
    seed: u64,
    from: f64,
    to: f64,
    bins: usize,
) -> Result<Vec<f64>, String> {
    if bins == 0 || !(to > from) {
        return Err("need at least one bin and from < to".into());
    }
    let d = density(model, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (to - from) / bins as f64;
    let mut counts = vec![0.0; bins];
    for x in d.sample(n, &mut rng) {
        if x >= from && x < to {
            counts[((x - from) / width) as usize] += 1.0;
        }
    }
    let norm = 1.0 / (n.max(1) as f64 * width);
    Ok(counts.into_iter().map(|c| c * norm).collect())
}

/// `[variance, excess kurtosis, E|X|]` of the standard BTGN.
pub fn btgn_moments(alpha: f64, beta: f64) -> Result<Vec<f64>, String> {
    let d = Btgn::new(alpha, beta).map_err(|e| e.to_string())?;
    Ok(vec![d.variance(), d.excess_kurtosis(), d.abs_moment(1.0).map_err(|e| e.to_string())?])
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pdfCdf)]
pub fn pdf_cdf_js(model: &str, params: &[f64], from: f64, to: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(pdf_cdf(model, params, from, to, points))
}

#[wasm_bindgen(js_name = kernelDerivative)]
pub fn kernel_derivative_js(alpha: f64, beta: f64, from: f64, to: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(kernel_derivative(alpha, beta, from, to, points))
}

#[wasm_bindgen(js_name = histogram)]
pub fn histogram_js(
    model: &str,
    params: &[f64],
    n: usize,
    seed: u32,
    from: f64,
    to: f64,
    bins: usize,
) -> Result<Vec<f64>, JsError> {
    js(histogram(model, params, n, seed as u64, from, to, bins))
}

#[wasm_bindgen(js_name = btgnMoments)]
pub fn btgn_moments_js(alpha: f64, beta: f64) -> Result<Vec<f64>, JsError> {
    js(btgn_moments(alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_special_case() {
        let v = pdf_cdf("btgn", &[0.0, 1.0, 2.0, 2.0], -1.0, 1.0, 3).unwrap();
        assert!((v[1] - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(v[4], 0.5);
        let m = btgn_moments(2.0, 2.0).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-12 && m[1].abs() < 1e-12);
    }

    #[test]
    fn histogram_is_a_density() {
        let h = histogram("tpbtgn", &[0.0, 1.0, 1.5, 1.0, 2.0], 20_000, 1, -15.0, 25.0, 80).unwrap();
        let mass: f64 = h.iter().sum::<f64>() * 0.5;
        assert!((mass - 1.0).abs() < 1e-2, "{mass}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(pdf_cdf("btgn", &[0.0, 1.0], -1.0, 1.0, 3).is_err());
        assert!(pdf_cdf("nope", &[], -1.0, 1.0, 3).is_err());
        assert!(kernel_derivative(-1.0, 1.0, -1.0, 1.0, 3).is_err());
        assert!(histogram("normal", &[0.0, 1.0], 10, 1, 1.0, 0.0, 4).is_err());
    }
}
