use btgn::inference::neg_log_likelihood;
use btgn::{mle_fit, model_by_name, FitOptions, MODEL_NAMES};
use btgn_oracle::integrate_real_line;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn truth(name: &str) -> Vec<f64> {
    match name {
        "normal" => vec![0.5, 1.5],
        "laplace" => vec![-0.2, 0.8],
        "student-t" => vec![0.0, 1.0, 5.0],
        "gn" => vec![0.0, 1.0, 1.5],
        "btgn" => vec![0.0, 1.0, 2.0, 1.0],
        "tptan" => vec![0.0, 1.0, 1.0, 1.5],
        "tpbtgn" => vec![0.0, 1.0, 1.5, 1.0, 1.5],
        other => panic!("{other}"),
    }
}

#[test]
fn every_model_normalizes() {
    for name in MODEL_NAMES {
        let m = model_by_name(name).unwrap();
        let d = m.density(&truth(name)).unwrap();
        let total = integrate_real_line(|x| d.pdf(x).unwrap(), truth(name)[0], 1e-12);
        assert!((total - 1.0).abs() < 1e-8, "{name}: {total}");
    }
}

#[test]
fn gn_normalizes_over_alpha() {
    let m = model_by_name("gn").unwrap();
    for &a in &[0.7, 1.0, 2.0, 4.0] {
        let d = m.density(&[0.0, 1.0, a]).unwrap();
        let total = integrate_real_line(|x| d.pdf(x).unwrap(), 0.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-8, "α={a}: {total}");
    }
}

#[test]
fn fit_beats_truth() {
    let opts = FitOptions {
        n_restarts: 2,
        ..Default::default()
    };
    for name in MODEL_NAMES {
        let m = model_by_name(name).unwrap();
        let t = truth(name);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = m.density(&t).unwrap().sample(800, &mut rng);
        let fit = mle_fit(m.as_ref(), &data, &opts).unwrap();
        let at_truth = -neg_log_likelihood(m.as_ref(), &t, &data).unwrap();
        assert!(fit.log_likelihood >= at_truth - 1e-6, "{name}: {} < {at_truth}", fit.log_likelihood);
        assert_eq!(fit.n_free_params, t.len());
    }
}
