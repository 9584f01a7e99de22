use btgn::{TwoPiece, TwoPieceParams};
use btgn_oracle::{integrate_real_line, ks_pvalue, ks_statistic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SHAPES: [(f64, f64); 3] = [(2.0, 2.0), (2.0, 0.8), (1.2, 2.5)];
const PSIS: [f64; 3] = [0.5, 1.0, 2.0];

fn tp(mu: f64, sigma: f64, a: f64, b: f64, psi: f64) -> btgn::TwoPieceBtgn {
    TwoPiece::btgn(TwoPieceParams::new(mu, sigma, a, b, psi).unwrap())
}

#[test]
fn normalization() {
    for &(a, b) in &SHAPES {
        for &psi in &PSIS {
            let d = tp(0.3, 1.4, a, b, psi);
            let total = integrate_real_line(|x| d.pdf(x).unwrap(), 0.3, 1e-13);
            assert!((total - 1.0).abs() < 1e-8, "α={a} β={b} ψ={psi}: {total}");
        }
    }
    let d = tp(0.0, 1.0, 2.0, 1.3, 1.7);
    assert!((integrate_real_line(|x| d.pdf(x).unwrap(), 0.0, 1e-13) - 1.0).abs() < 1e-8);
}

#[test]
fn continuity_and_mode_mass() {
    for &(a, b) in &SHAPES {
        for &psi in &[0.5, 0.6, 1.0, 2.0] {
            let d = tp(-1.0, 0.7, a, b, psi);
            let left = d.pdf(-1.0 - 1e-14).unwrap();
            let right = d.pdf(-1.0 + 1e-14).unwrap();
            assert!((left - right).abs() < 1e-12);
            assert!((d.cdf(-1.0).unwrap() - 1.0 / (1.0 + psi * psi)).abs() < 1e-10);
        }
    }
}

#[test]
fn psi_inversion_mirrors() {
    for &(a, b) in &SHAPES {
        for &psi in &[0.5, 1.3, 2.0] {
            let d = tp(0.5, 1.1, a, b, psi);
            let m = tp(0.5, 1.1, a, b, 1.0 / psi);
            for &dist in &[0.0, 0.1, 0.8, 2.0, 4.5] {
                let l = d.pdf(0.5 + dist).unwrap();
                let r = m.pdf(0.5 - dist).unwrap();
                assert!((l - r).abs() < 1e-12, "ψ={psi} d={dist}");
            }
        }
    }
}

#[test]
fn sampler() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = tp(0.0, 1.0, 1.5, 1.0, 2.0);
    let xs = d.sample(100_000, &mut rng);
    let stat = ks_statistic(&xs, |x| d.cdf(x).unwrap());
    assert!(ks_pvalue(stat, xs.len()) > 0.01, "D={stat}");
    let above = xs.iter().filter(|x| **x > 0.0).count() as f64 / xs.len() as f64;
    let se = (0.8 * 0.2 / xs.len() as f64).sqrt();
    assert!((above - 0.8).abs() < 3.0 * se, "{above}");

    let sym = tp(0.0, 1.0, 2.0, 1.0, 1.0);
    let xs = sym.sample(100_000, &mut rng);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let skew = m3 / m2.powf(1.5);
    // Heavy tails inflate the skewness SE well beyond √(6/n); use the exact moments.
    let m6 = xs.iter().map(|x| (x - mean).powi(6)).sum::<f64>() / n;
    let se = (m6 / m2.powi(3) / n).sqrt();
    assert!(skew.abs() < 3.0 * se, "skew={skew} se={se}");
}
