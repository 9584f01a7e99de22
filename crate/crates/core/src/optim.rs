//! Derivative-free Nelder–Mead simplex minimization.

/// Result of one simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Cap on simplex iterations, summed over polish restarts.
    pub max_iter: usize,
    /// Converged once `max f − min f` over the simplex drops below this.
    pub tol: f64,
    /// Number of times the simplex is rebuilt around the incumbent after
    /// converging, to escape a collapsed simplex.
    pub polish_rounds: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-8,
            polish_rounds: 3,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counter<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` from `x0` with per-coordinate initial simplex offsets `step`.
///
/// Non-finite objective values are treated as `+∞`, so infeasible regions
/// simply repel the simplex.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), step.len(), "step must match the dimension of x0");
    let mut obj = Counter { f, evaluations: 0 };
    let mut best_x = x0.to_vec();
    let mut best_f = obj.eval(x0);
    let mut iterations = 0;
    let mut converged = false;

    for round in 0..=opts.polish_rounds {
        let (x, fx, ok, used) = search(&mut obj, &best_x, best_f, step, opts, opts.max_iter - iterations);
        iterations += used;
        let improvement = best_f - fx;
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        converged = ok;
        if !ok || iterations >= opts.max_iter {
            break;
        }
        // Stop polishing once a rebuilt simplex no longer finds progress.
        if round > 0 && improvement < opts.tol {
            break;
        }
    }

    Minimum {
        x: best_x,
        value: best_f,
        evaluations: obj.evaluations,
        converged,
    }
}

fn search<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counter<F>,
    x0: &[f64],
    f0: f64,
    step: &[f64],
    opts: &SimplexOptions,
    budget: usize,
) -> (Vec<f64>, f64, bool, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = obj.eval(&x);
        simplex.push((x, fx));
    }

    let mut centroid = vec![0.0; n];
    for it in 0..budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread < opts.tol {
            let (x, fx) = simplex.swap_remove(0);
            return (x, fx, true, it);
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = toward(REFLECT);
        let fr = obj.eval(&xr);
        if fr < simplex[0].1 {
            let xe = toward(EXPAND);
            let fe = obj.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = toward(CONTRACT);
            let fc = obj.eval(&xc);
            (xc, fc)
        } else {
            let xc = toward(-CONTRACT);
            let fc = obj.eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            vertex.1 = obj.eval(&vertex.0);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, false, budget)
}
