use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use btgn::datapipe::{self, ColumnRef, CsvOptions, FetchRequest, ResponseSchema, Series};
use btgn::inference::{standard_errors, StandardErrors};
use btgn::zoo::ParamKind;
use btgn::{compare_models, mle_fit, model_by_name, Btgn, ExternalFit, FitOptions, Model, Reference};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::args::{
    Cli, Command, CompareArgs, DataArgs, EvalArgs, FetchArgs, FitArgs, FitControl, Format, ParamArgs, PlotArgs,
    SampleArgs, Transform,
};
use crate::output::{config_value, csv_document, emit, json_document, num, parent_dir, resolved};

pub enum Outcome {
    Success,
    /// Output was written but the operation did not fully succeed.
    Incomplete(String),
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = config_value(&cli.command);
    let verbose = cli.verbose;
    match &cli.command {
        Command::Eval(a) => eval(a, &config),
        Command::Fit(a) => fit(a, &config, verbose),
        Command::Compare(a) => compare(a, &config, verbose),
        Command::Sample(a) => sample(a, &config),
        Command::Fetch(a) => fetch(a, &config, verbose),
        Command::Plotdata(a) => plotdata(a, &config, verbose),
    }
}

fn resolve_model(name: &str) -> Box<dyn Model> {
    model_by_name(name).expect("validated by the argument parser")
}

/// Parameter vector for `model`, validated flag by flag.
fn theta_from_flags(model: &dyn Model, params: &ParamArgs) -> Result<Vec<f64>> {
    let theta = model
        .params()
        .iter()
        .map(|spec| {
            let (flag, v) = params.lookup(spec.name);
            match spec.kind {
                ParamKind::Location if !v.is_finite() => bail!("{flag}: {} must be finite, got {v}", spec.name),
                ParamKind::Positive if !(v.is_finite() && v > 0.0) => {
                    bail!("{flag}: {} must be finite and > 0, got {v}", spec.name)
                }
                _ => Ok(v),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    model
        .density(&theta)
        .map_err(|e| anyhow!("invalid parameters for {}: {e}", model.name()))?;
    Ok(theta)
}

fn named(model: &dyn Model, theta: &[f64]) -> BTreeMap<&'static str, f64> {
    model.params().iter().map(|p| p.name).zip(theta.iter().copied()).collect()
}

fn grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) {
        bail!("--from/--to must be finite");
    }
    if points == 0 {
        bail!("--points must be at least 1");
    }
    if points > 1 && !(to > from) {
        bail!("--to must exceed --from");
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { to } else { from + step * i as f64 }).collect())
}

fn load_data(a: &DataArgs, verbose: u8) -> Result<Vec<f64>> {
    if !a.delimiter.is_ascii() {
        bail!("--delimiter must be a single ASCII character");
    }
    let column: ColumnRef = a.column.parse().expect("infallible");
    let opts = CsvOptions {
        has_header: !a.no_header,
        delimiter: a.delimiter as u8,
        skip_invalid: a.skip_invalid,
    };
    let col = datapipe::read_csv_column(&a.data, &column, &opts).with_context(|| format!("reading {}", a.data.display()))?;
    if !col.skipped_lines.is_empty() {
        eprintln!(
            "btgn: warning: skipped {} unparseable row(s) in {}{}",
            col.skipped_lines.len(),
            a.data.display(),
            if verbose > 0 { format!(" at lines {:?}", col.skipped_lines) } else { String::new() }
        );
    }
    let series = match a.transform {
        Some(Transform::Logreturns) => datapipe::log_returns(&col.series)?,
        None => col.series,
    };
    if verbose > 0 {
        eprintln!("btgn: {} observations", series.len());
    }
    Ok(series.values)
}

fn fit_options(c: &FitControl) -> Result<FitOptions> {
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        bail!("--tol must be positive");
    }
    if c.max_iter == 0 {
        bail!("--max-iter must be positive");
    }
    Ok(FitOptions {
        max_iter: c.max_iter,
        tol: c.tol,
        n_restarts: c.restarts,
        seed: c.seed,
    })
}

fn eval(a: &EvalArgs, config: &Value) -> Result<Outcome> {
    let xs = grid(a.from, a.to, a.points)?;
    let format = a.out.format.unwrap_or(Format::Csv);
    let config = &resolved(config, "format", format);

    if a.kernel_derivative {
        if a.model != "btgn" {
            bail!("--kernel-derivative is only defined for --model btgn");
        }
        let (_, alpha) = a.params.lookup("alpha");
        let (_, beta) = a.params.lookup("beta");
        let d = Btgn::new(alpha, beta).map_err(|e| anyhow!("--alpha/--beta: {e}"))?;
        let config = &resolved(config, "resolved_params", BTreeMap::from([("alpha", alpha), ("beta", beta)]));
        let mut rows = Vec::with_capacity(xs.len());
        for &x in &xs {
            let v = d.derivative_kernel(x).map_err(|e| anyhow!("x = {x}: {e}"))?;
            rows.push((x, v));
        }
        let bytes = match format {
            Format::Csv => csv_document(
                config,
                &["x", "derivative_kernel"],
                &rows.iter().map(|(x, v)| vec![num(*x), num(*v)]).collect::<Vec<_>>(),
            )?,
            Format::Json => {
                #[derive(Serialize)]
                struct Row {
                    x: f64,
                    derivative_kernel: f64,
                }
                let body: Vec<Row> = rows.iter().map(|&(x, v)| Row { x, derivative_kernel: v }).collect();
                json_document(config, "grid", &body)?
            }
        };
        emit(a.out.output.as_deref(), &bytes)?;
        return Ok(Outcome::Success);
    }

    let model = resolve_model(&a.model);
    let theta = theta_from_flags(model.as_ref(), &a.params)?;
    let d = model.density(&theta)?;
    let config = &resolved(config, "resolved_params", named(model.as_ref(), &theta));

    #[derive(Serialize)]
    struct Row {
        x: f64,
        pdf: f64,
        cdf: f64,
        log_pdf: f64,
    }
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let log_pdf = d.ln_pdf(x)?;
        rows.push(Row {
            x,
            pdf: log_pdf.exp(),
            cdf: d.cdf(x)?,
            log_pdf,
        });
    }
    let bytes = match format {
        Format::Csv => csv_document(
            config,
            &["x", "pdf", "cdf", "log_pdf"],
            &rows
                .iter()
                .map(|r| vec![num(r.x), num(r.pdf), num(r.cdf), num(r.log_pdf)])
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_document(config, "grid", &rows)?,
    };
    emit(a.out.output.as_deref(), &bytes)?;
    Ok(Outcome::Success)
}

fn fit(a: &FitArgs, config: &Value, verbose: u8) -> Result<Outcome> {
    let model = resolve_model(&a.model);
    let data = load_data(&a.data, verbose)?;
    let opts = fit_options(&a.control)?;
    let report = mle_fit(model.as_ref(), &data, &opts)?;
    let se = if report.converged {
        standard_errors(model.as_ref(), &report, &data)?
    } else {
        StandardErrors::Unavailable {
            reason: "fit did not converge".into(),
        }
    };

    let format = a.out.format.unwrap_or(Format::Json);
    let config = &resolved(config, "format", format);
    let bytes = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                #[serde(flatten)]
                report: &'a btgn::FitReport,
                standard_errors: &'a StandardErrors,
            }
            json_document(
                config,
                "fit",
                &Body {
                    report: &report,
                    standard_errors: &se,
                },
            )?
        }
        Format::Csv => {
            let ses = match &se {
                StandardErrors::Available { values } => Some(values),
                StandardErrors::Unavailable { .. } => None,
            };
            let mut rows: Vec<Vec<String>> = model
                .params()
                .iter()
                .zip(&report.params)
                .map(|(p, v)| {
                    let s = ses.and_then(|m| m.get(p.name)).copied().unwrap_or(f64::NAN);
                    vec![p.name.to_string(), num(*v), num(s)]
                })
                .collect();
            rows.push(vec!["log_likelihood".into(), num(report.log_likelihood), String::new()]);
            rows.push(vec!["bic".into(), num(report.bic), String::new()]);
            rows.push(vec!["converged".into(), report.converged.to_string(), String::new()]);
            csv_document(config, &["quantity", "value", "std_error"], &rows)?
        }
    };
    emit(a.out.output.as_deref(), &bytes)?;
    if report.converged {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Incomplete(format!(
            "{} fit did not converge within {} iterations; partial report written",
            report.model_name, opts.max_iter
        )))
    }
}

fn compare(a: &CompareArgs, config: &Value, verbose: u8) -> Result<Outcome> {
    let models: Vec<Box<dyn Model>> = a.models.iter().map(|m| resolve_model(m)).collect();
    let refs: Vec<&dyn Model> = models.iter().map(|m| m.as_ref()).collect();
    let externals = a
        .external
        .iter()
        .map(|s| s.parse::<ExternalFit>().map_err(|e| anyhow!("--external: {e}")))
        .collect::<Result<Vec<_>>>()?;
    let reference: Reference = a.reference.parse().expect("infallible");
    let data = load_data(&a.data, verbose)?;
    let opts = fit_options(&a.control)?;
    let table = compare_models(&refs, &data, &reference, &externals, &opts)?;

    let format = a.out.format.unwrap_or(Format::Json);
    let config = &resolved(config, "format", format);
    let bytes = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                /// "H0" on the reference row, otherwise the 2 ln BF value as text.
                bayes_factor: String,
                #[serde(flatten)]
                row: &'a btgn::ComparisonRow,
            }
            #[derive(Serialize)]
            struct Table<'a> {
                reference_model: &'a str,
                n_obs: usize,
                rows: Vec<Row<'a>>,
            }
            let body = Table {
                reference_model: &table.reference_model,
                n_obs: table.n_obs,
                rows: table.rows.iter().map(|r| Row { bayes_factor: bf_cell(r), row: r }).collect(),
            };
            json_document(config, "comparison", &body)?
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.model_name.clone(),
                        num(r.log_likelihood),
                        r.n_free_params.to_string(),
                        num(r.bic),
                        bf_cell(r),
                        if r.is_reference { String::new() } else { r.category.label().to_string() },
                        format!("{:?}", r.favors).to_lowercase(),
                        r.converged.to_string(),
                        r.external.to_string(),
                    ]
                })
                .collect();
            csv_document(
                config,
                &[
                    "model",
                    "log_likelihood",
                    "k",
                    "bic",
                    "bayes_factor",
                    "evidence",
                    "favors",
                    "converged",
                    "external",
                ],
                &rows,
            )?
        }
    };
    emit(a.out.output.as_deref(), &bytes)?;
    let failed: Vec<&str> = table
        .rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| r.model_name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Incomplete(format!("fits did not converge: {}", failed.join(", "))))
    }
}

fn bf_cell(r: &btgn::ComparisonRow) -> String {
    if r.is_reference {
        "H0".into()
    } else {
        format!("{:.3}", r.two_ln_bf)
    }
}

fn sample(a: &SampleArgs, config: &Value) -> Result<Outcome> {
    let model = resolve_model(&a.model);
    let theta = theta_from_flags(model.as_ref(), &a.params)?;
    let d = model.density(&theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let xs = d.sample(a.n, &mut rng);
    let format = a.out.format.unwrap_or(Format::Csv);
    let config = &resolved(&resolved(config, "format", format), "resolved_params", named(model.as_ref(), &theta));
    let bytes = match format {
        Format::Csv => csv_document(config, &["x"], &xs.iter().map(|x| vec![num(*x)]).collect::<Vec<_>>())?,
        Format::Json => json_document(config, "sample", &xs)?,
    };
    emit(a.out.output.as_deref(), &bytes)?;
    Ok(Outcome::Success)
}

fn fetch(a: &FetchArgs, config: &Value, verbose: u8) -> Result<Outcome> {
    let cache_dir = match (&a.cache_dir, &a.out.output) {
        (Some(dir), _) => dir.clone(),
        (None, Some(out)) => parent_dir(out).join(".btgn-cache"),
        (None, None) => Path::new(".btgn-cache").to_path_buf(),
    };
    let mut req = FetchRequest::new(&a.asset, &a.metric, &a.start, &a.end);
    req.endpoint = a.endpoint.clone();
    req.cache_dir = Some(cache_dir);
    req.offline = a.offline;
    req.schema = ResponseSchema {
        series: a.series_pointer.clone(),
        time: a.time_pointer.clone(),
        value: a.value_pointer.clone(),
    };
    if verbose > 0 {
        eprintln!("btgn: GET {}", req.url());
    }
    let series = datapipe::fetch_coinmetrics(&req)?;
    let series = match a.transform {
        Some(Transform::Logreturns) => datapipe::log_returns(&series)?,
        None => series,
    };
    let format = a.out.format.unwrap_or(Format::Csv);
    let config = &resolved(config, "format", format);
    let bytes = match format {
        Format::Csv => series_csv(config, &series)?,
        Format::Json => json_document(config, "series", &series)?,
    };
    emit(a.out.output.as_deref(), &bytes)?;
    Ok(Outcome::Success)
}

fn series_csv(config: &Value, s: &Series) -> Result<Vec<u8>> {
    let ts = s.timestamps.as_ref();
    let rows: Vec<Vec<String>> = s
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![ts.map(|t| t[i].clone()).unwrap_or_default(), num(*v)])
        .collect();
    csv_document(config, &["timestamp", &s.label], &rows)
}

fn plotdata(a: &PlotArgs, config: &Value, verbose: u8) -> Result<Outcome> {
    let model = resolve_model(&a.model);
    let data = load_data(&a.data, verbose)?;
    let (theta, converged) = if a.params.any_set() {
        (theta_from_flags(model.as_ref(), &a.params)?, true)
    } else {
        let report = mle_fit(model.as_ref(), &data, &fit_options(&a.control)?)?;
        (report.params, report.converged)
    };
    let d = model.density(&theta)?;

    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.1 * (hi - lo);
    let xs = grid(a.from.unwrap_or(lo - pad), a.to.unwrap_or(hi + pad), a.points)?;
    let est = datapipe::kde(&data, &xs, a.bandwidth)?;

    #[derive(Serialize)]
    struct Row {
        x: f64,
        kde: f64,
        fitted_pdf: f64,
        log_kde: Option<f64>,
        log_fitted: Option<f64>,
    }
    let positive_ln = |v: f64| (v > 0.0).then(|| v.ln());
    let mut rows = Vec::with_capacity(xs.len());
    for &(x, k) in &est {
        let f = d.pdf(x)?;
        rows.push(Row {
            x,
            kde: k,
            fitted_pdf: f,
            log_kde: positive_ln(k),
            log_fitted: positive_ln(f),
        });
    }
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let format = a.out.format.unwrap_or(Format::Csv);
    let config = &resolved(&resolved(config, "format", format), "resolved_params", named(model.as_ref(), &theta));
    let bytes = match format {
        Format::Csv => csv_document(
            config,
            &["x", "kde", "fitted_pdf", "log_kde", "log_fitted"],
            &rows
                .iter()
                .map(|r| vec![num(r.x), num(r.kde), num(r.fitted_pdf), opt(r.log_kde), opt(r.log_fitted)])
                .collect::<Vec<_>>(),
        )?,
        Format::Json => {
            json_document(config, "grid", &rows)?
        }
    };
    emit(a.out.output.as_deref(), &bytes)?;
    if converged {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Incomplete("model fit did not converge; plot written from the partial fit".into()))
    }
}
