//! Adaptive 7/15-point Gauss–Kronrod quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
///
/// Subdivision always splits the interval with the largest error estimate, and
/// stops after `MAX_INTERVALS` pieces if `tol` is out of reach.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut err = e;
    while err > tol && pieces.len() < MAX_INTERVALS {
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].3.total_cmp(&pieces[j].3))
            .unwrap();
        let (lo, hi, v, e) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            pieces.push((lo, hi, v, 0.0));
            err -= e;
            continue;
        }
        let (lv, le) = gk15(&f, lo, mid);
        let (rv, re) = gk15(&f, mid, hi);
        pieces.push((lo, mid, lv, le));
        pieces.push((mid, hi, rv, re));
        err += le + re - e;
    }
    pieces.iter().map(|p| p.2).sum()
}

/// Integrates `f` over `[a, ∞)` using the map `x = a + t / (1 − t)`.
pub fn integrate_upper_tail<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        let one_minus = 1.0 - t;
        let x = a + t / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Integrates `f` over `(−∞, b]`.
pub fn integrate_lower_tail<F: Fn(f64) -> f64>(f: F, b: f64, tol: f64) -> f64 {
    integrate_upper_tail(|y| f(-y), -b, tol)
}

/// Integrates `f` over the whole real line, split at `split`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, split: f64, tol: f64) -> f64 {
    integrate_lower_tail(&f, split, 0.5 * tol) + integrate_upper_tail(&f, split, 0.5 * tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-14);
        assert!((v - 3.75).abs() < 1e-13);
    }

    #[test]
    fn gaussian_over_real_line() {
        let v = integrate_real_line(|x| (-x * x).exp(), 0.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn slowly_decaying_tail() {
        // ∫_0^∞ e^{−√x} dx = 2
        let v = integrate_upper_tail(|x| (-x.sqrt()).exp(), 0.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }
}
