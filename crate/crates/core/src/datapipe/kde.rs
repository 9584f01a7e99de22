use std::f64::consts::PI;

use super::{DataError, Result};

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `0.9 · min(sd, IQR/1.34) · n^{−1/5}`. A zero IQR falls
/// back to the standard deviation.
pub fn silverman_bandwidth(data: &[f64]) -> Result<f64> {
    if data.len() < 2 {
        return Err(DataError::Domain("kernel density estimate needs at least two points".into()));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(DataError::Domain("data has zero variance".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * n.powf(-0.2))
}

/// Gaussian kernel density estimate evaluated on `grid`.
pub fn kde(data: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<Vec<(f64, f64)>> {
    let default_h = silverman_bandwidth(data)?;
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(DataError::Domain(format!("bandwidth must be positive, got {h}"))),
        None => default_h,
    };
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(DataError::Domain(format!("grid point {x} is not finite")));
    }
    let norm = 1.0 / (data.len() as f64 * h * (2.0 * PI).sqrt());
    Ok(grid
        .iter()
        .map(|&x| {
            let s: f64 = data
                .iter()
                .map(|&d| {
                    let z = (x - d) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            (x, s * norm)
        })
        .collect())
}
