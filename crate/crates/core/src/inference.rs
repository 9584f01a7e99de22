//! Maximum-likelihood fitting and BIC-approximated Bayes-factor comparison.
//!
//! Bayes factors are reported on the `2 ln BF` scale, approximated by BIC
//! differences, and labelled with the Kass–Raftery evidence categories.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::zoo::{DataSummary, Model, ParamKind};

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_190_707;

/// Knobs for [`mle_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub n_restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-8,
            n_restarts: 5,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model_name: String,
    pub estimates: BTreeMap<String, f64>,
    /// Estimates in the model's natural parameter order.
    pub params: Vec<f64>,
    pub log_likelihood: f64,
    pub n_free_params: usize,
    pub n_obs: usize,
    pub bic: f64,
    pub converged: bool,
    pub n_evaluations: usize,
    pub restarts_used: usize,
    /// Objective evaluations where the likelihood was not representable.
    pub infeasible_evaluations: usize,
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return domain("likelihood needs at least one observation");
    }
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return domain(format!("observation {i} is not finite"));
    }
    Ok(())
}

/// `−Σ ln f(xᵢ)`.
///
/// Returns `+∞` when some observation's log-density is `−∞` or cannot be
/// evaluated; callers treat that as an infeasible point.
pub fn neg_log_likelihood(model: &dyn Model, theta: &[f64], data: &[f64]) -> Result<f64> {
    check_data(data)?;
    let density = model.density(theta)?;
    let mut total = 0.0;
    for &x in data {
        match density.ln_pdf(x) {
            Ok(v) if v.is_finite() => total -= v,
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(total)
}

fn to_free(model: &dyn Model, theta: &[f64]) -> Vec<f64> {
    model
        .params()
        .iter()
        .zip(theta)
        .map(|(p, &v)| match p.kind {
            ParamKind::Location => v,
            ParamKind::Positive => v.ln(),
        })
        .collect()
}

fn from_free(model: &dyn Model, free: &[f64]) -> Vec<f64> {
    model
        .params()
        .iter()
        .zip(free)
        .map(|(p, &v)| match p.kind {
            ParamKind::Location => v,
            ParamKind::Positive => v.exp(),
        })
        .collect()
}

/// Maximum-likelihood fit by multi-start Nelder–Mead on transformed
/// coordinates (log for positive parameters).
///
/// The first start is the model's moment-based guess; the remaining
/// `n_restarts − 1` jitter it with log-normal noise (sd 0.3) on positive
/// parameters and `0.5 · scale · N(0,1)` on locations. The best converged
/// start wins. If no start converges the best point found is still
/// reported, with `converged = false`.
pub fn mle_fit(model: &dyn Model, data: &[f64], options: &FitOptions) -> Result<FitReport> {
    check_data(data)?;
    let k = model.n_free_params();
    if data.len() <= k {
        return domain(format!(
            "{} has {k} free parameters and needs more than {k} observations, got {}",
            model.name(),
            data.len()
        ));
    }
    if options.n_restarts == 0 {
        return domain("at least one optimizer start is required");
    }
    let summary = DataSummary::new(data)?;
    let guess = model.initial_guess(&summary);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut starts = vec![guess.clone()];
    for _ in 1..options.n_restarts {
        let jittered = model
            .params()
            .iter()
            .zip(&guess)
            .map(|(p, &v)| {
                let z: f64 = rng.sample(StandardNormal);
                match p.kind {
                    ParamKind::Location => v + 0.5 * summary.scale * z,
                    ParamKind::Positive => v * (0.3 * z).exp(),
                }
            })
            .collect();
        starts.push(jittered);
    }

    let step: Vec<f64> = model
        .params()
        .iter()
        .map(|p| match p.kind {
            ParamKind::Location => 0.5 * summary.scale,
            ParamKind::Positive => 0.3,
        })
        .collect();
    let simplex = SimplexOptions {
        max_iter: options.max_iter,
        tol: options.tol,
        ..SimplexOptions::default()
    };

    let mut evaluations = 0;
    let mut infeasible = 0;
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in &starts {
        let objective = |u: &[f64]| {
            let theta = from_free(model, u);
            match neg_log_likelihood(model, &theta, data) {
                Ok(v) if v.is_finite() => v,
                _ => {
                    infeasible += 1;
                    f64::INFINITY
                }
            }
        };
        let m = nelder_mead(objective, &to_free(model, start), &step, &simplex);
        evaluations += m.evaluations;
        let better = match &best {
            None => true,
            Some((_, v, ok)) => (m.converged && !ok) || (m.converged == *ok && m.value < *v),
        };
        if better {
            best = Some((m.x, m.value, m.converged));
        }
    }

    let (free, nll, converged) = best.expect("at least one start");
    let params = from_free(model, &free);
    let log_likelihood = -nll;
    let n = data.len();
    Ok(FitReport {
        model_name: model.name().to_string(),
        estimates: model
            .params()
            .iter()
            .zip(&params)
            .map(|(p, &v)| (p.name.to_string(), v))
            .collect(),
        params,
        log_likelihood,
        n_free_params: k,
        n_obs: n,
        bic: if log_likelihood.is_finite() {
            bic(log_likelihood, k, n)?
        } else {
            f64::INFINITY
        },
        converged: converged && log_likelihood.is_finite(),
        n_evaluations: evaluations,
        restarts_used: starts.len(),
        infeasible_evaluations: infeasible,
    })
}

/// Bayesian information criterion `k ln n − 2 ln L`.
pub fn bic(log_likelihood: f64, k: usize, n: usize) -> Result<f64> {
    if k == 0 || n == 0 {
        return domain(format!("BIC needs k >= 1 and n >= 1, got k={k}, n={n}"));
    }
    Ok(k as f64 * (n as f64).ln() - 2.0 * log_likelihood)
}

/// `2 ln BF` in favour of the reference model, approximated by `bic_alt − bic_ref`.
pub fn two_ln_bf(bic_ref: f64, bic_alt: f64) -> f64 {
    bic_alt - bic_ref
}

/// Kass–Raftery evidence strength on the `2 ln BF` scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EvidenceCategory {
    /// `[0, 2)`
    Negligible,
    /// `[2, 6)`
    Positive,
    /// `[6, 10)`
    Strong,
    /// `[10, ∞)`
    VeryStrong,
}

impl EvidenceCategory {
    pub fn label(&self) -> &'static str {
        match self {
            EvidenceCategory::Negligible => "Negligible",
            EvidenceCategory::Positive => "Positive",
            EvidenceCategory::Strong => "Strong",
            EvidenceCategory::VeryStrong => "Very strong",
        }
    }
}

impl fmt::Display for EvidenceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Categorizes the magnitude of a `2 ln BF` value. The sign, which says
/// which model the evidence favours, is reported separately by [`Favors`].
pub fn evidence_category(two_ln_bf: f64) -> EvidenceCategory {
    let v = two_ln_bf.abs();
    if v < 2.0 {
        EvidenceCategory::Negligible
    } else if v < 6.0 {
        EvidenceCategory::Positive
    } else if v < 10.0 {
        EvidenceCategory::Strong
    } else {
        EvidenceCategory::VeryStrong
    }
}

/// Direction of a `2 ln BF` value relative to the reference model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Favors {
    Reference,
    Alternative,
    Neither,
}

impl Favors {
    pub fn of(two_ln_bf: f64) -> Self {
        if two_ln_bf > 0.0 {
            Favors::Reference
        } else if two_ln_bf < 0.0 {
            Favors::Alternative
        } else {
            Favors::Neither
        }
    }
}

/// A comparison row for a model fitted elsewhere (its log-likelihood on the
/// same data and free-parameter count).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalFit {
    pub name: String,
    pub log_likelihood: f64,
    pub n_free_params: usize,
}

impl std::str::FromStr for ExternalFit {
    type Err = crate::Error;

    /// Parses `name:loglik:k`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.rsplitn(3, ':').collect();
        if parts.len() != 3 {
            return domain(format!("external row must be name:loglik:k, got {s:?}"));
        }
        let (k, ll, name) = (parts[0], parts[1], parts[2]);
        let log_likelihood: f64 = ll
            .parse()
            .map_err(|_| crate::Error::Domain(format!("bad log-likelihood {ll:?} in {s:?}")))?;
        let n_free_params: usize = k
            .parse()
            .map_err(|_| crate::Error::Domain(format!("bad parameter count {k:?} in {s:?}")))?;
        if name.is_empty() || !log_likelihood.is_finite() || n_free_params == 0 {
            return domain(format!("invalid external row {s:?}"));
        }
        Ok(Self {
            name: name.to_string(),
            log_likelihood,
            n_free_params,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reference {
    /// The lowest-BIC converged model.
    Best,
    Named(String),
}

impl std::str::FromStr for Reference {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s.eq_ignore_ascii_case("best") {
            Reference::Best
        } else {
            Reference::Named(s.to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model_name: String,
    pub log_likelihood: f64,
    pub n_free_params: usize,
    pub bic: f64,
    pub two_ln_bf: f64,
    pub category: EvidenceCategory,
    pub favors: Favors,
    pub is_reference: bool,
    pub converged: bool,
    pub external: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub reference_model: String,
    pub n_obs: usize,
    pub rows: Vec<ComparisonRow>,
}

/// Fits every model, adds any external rows, and tabulates `2 ln BF` of the
/// reference over each candidate. Rows are sorted by `two_ln_bf`, ties by
/// name. Non-converged fits stay in the table, flagged, but are never
/// chosen as the reference.
pub fn compare_models(
    models: &[&dyn Model],
    data: &[f64],
    reference: &Reference,
    externals: &[ExternalFit],
    options: &FitOptions,
) -> Result<ComparisonTable> {
    check_data(data)?;
    if models.len() + externals.len() < 2 {
        return domain("a comparison needs at least two models");
    }
    let n = data.len();
    let mut rows = Vec::with_capacity(models.len() + externals.len());
    for model in models {
        let fit = mle_fit(*model, data, options)?;
        rows.push(ComparisonRow {
            model_name: fit.model_name.clone(),
            log_likelihood: fit.log_likelihood,
            n_free_params: fit.n_free_params,
            bic: fit.bic,
            two_ln_bf: f64::NAN,
            category: EvidenceCategory::Negligible,
            favors: Favors::Neither,
            is_reference: false,
            converged: fit.converged,
            external: false,
            fit: Some(fit),
        });
    }
    for ext in externals {
        rows.push(ComparisonRow {
            model_name: ext.name.clone(),
            log_likelihood: ext.log_likelihood,
            n_free_params: ext.n_free_params,
            bic: bic(ext.log_likelihood, ext.n_free_params, n)?,
            two_ln_bf: f64::NAN,
            category: EvidenceCategory::Negligible,
            favors: Favors::Neither,
            is_reference: false,
            converged: true,
            external: true,
            fit: None,
        });
    }
    {
        let mut names: Vec<&str> = rows.iter().map(|r| r.model_name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return domain(format!("model {:?} appears more than once", w[0]));
        }
    }

    let ref_idx = match reference {
        Reference::Best => rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.converged && r.bic.is_finite())
            .min_by(|(_, a), (_, b)| a.bic.total_cmp(&b.bic).then_with(|| a.model_name.cmp(&b.model_name)))
            .map(|(i, _)| i)
            .ok_or_else(|| crate::Error::Domain("no model converged; cannot choose a reference".into()))?,
        Reference::Named(name) => {
            let i = rows
                .iter()
                .position(|r| r.model_name.eq_ignore_ascii_case(name))
                .ok_or_else(|| crate::Error::Domain(format!("reference model {name:?} is not in the comparison")))?;
            if !rows[i].converged {
                return domain(format!("reference model {name:?} did not converge"));
            }
            i
        }
    };
    let ref_bic = rows[ref_idx].bic;
    for (i, row) in rows.iter_mut().enumerate() {
        row.is_reference = i == ref_idx;
        row.two_ln_bf = if row.is_reference { 0.0 } else { two_ln_bf(ref_bic, row.bic) };
        row.category = evidence_category(row.two_ln_bf);
        row.favors = Favors::of(row.two_ln_bf);
    }
    let reference_model = rows[ref_idx].model_name.clone();
    rows.sort_by(|a, b| {
        a.two_ln_bf
            .total_cmp(&b.two_ln_bf)
            .then_with(|| a.model_name.cmp(&b.model_name))
    });
    Ok(ComparisonTable {
        reference_model,
        n_obs: n,
        rows,
    })
}

/// Outcome of [`standard_errors`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StandardErrors {
    Available { values: BTreeMap<String, f64> },
    Unavailable { reason: String },
}

/// Asymptotic standard errors from the inverse numeric Hessian of the
/// negative log-likelihood at the optimum, in natural parameter units.
///
/// Central differences use step `1e-4 · scale`, where the scale is the
/// parameter itself for positive parameters and the fitted scale for
/// locations.
pub fn standard_errors(model: &dyn Model, fit: &FitReport, data: &[f64]) -> Result<StandardErrors> {
    if !fit.converged {
        return domain("standard errors need a converged fit");
    }
    if fit.model_name != model.name() || fit.params.len() != model.n_free_params() {
        return domain("fit report does not belong to this model");
    }
    let specs = model.params();
    let theta = &fit.params;
    let location_scale = specs
        .iter()
        .zip(theta)
        .find(|(p, _)| p.kind == ParamKind::Positive)
        .map(|(_, &v)| v)
        .unwrap_or(1.0);
    let h: Vec<f64> = specs
        .iter()
        .zip(theta)
        .map(|(p, &v)| match p.kind {
            ParamKind::Positive => 1e-4 * v,
            ParamKind::Location => 1e-4 * location_scale,
        })
        .collect();
    let k = theta.len();
    let f = |t: &[f64]| neg_log_likelihood(model, t, data);
    let f0 = f(theta)?;
    let shifted = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut t = theta.clone();
        for &(i, d) in moves {
            t[i] += d;
        }
        f(&t)
    };
    let mut hess = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let fp = shifted(&[(i, h[i])])?;
        let fm = shifted(&[(i, -h[i])])?;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let fpp = shifted(&[(i, h[i]), (j, h[j])])?;
            let fpm = shifted(&[(i, h[i]), (j, -h[j])])?;
            let fmp = shifted(&[(i, -h[i]), (j, h[j])])?;
            let fmm = shifted(&[(i, -h[i]), (j, -h[j])])?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Ok(StandardErrors::Unavailable {
            reason: "Hessian has non-finite entries".into(),
        });
    }
    let Some(chol) = hess.cholesky() else {
        return Ok(StandardErrors::Unavailable {
            reason: "Hessian is not positive definite".into(),
        });
    };
    let cov = chol.inverse();
    Ok(StandardErrors::Available {
        values: specs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.to_string(), cov[(i, i)].max(0.0).sqrt()))
            .collect(),
    })
}
