//! Data ingestion: CSV columns, log returns, kernel density estimates and a
//! cached client for the coinmetrics community API.

#[cfg(feature = "fetch")]
mod fetch;
mod ingest;
mod kde;

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

#[cfg(feature = "fetch")]
pub use fetch::{fetch_coinmetrics, parse_response, FetchRequest, ResponseSchema, DEFAULT_ENDPOINT};
pub use ingest::{read_csv_column, ColumnRef, CsvColumn, CsvOptions};
pub use kde::{kde, silverman_bandwidth};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("column {0} not found")]
    MissingColumn(String),
    #[error("line {line}: cannot parse {value:?} as a number")]
    Parse { line: u64, value: String },
    #[error("no usable values in {0}")]
    Empty(String),
    #[error("{0}")]
    Domain(String),
    #[error("HTTP status {status} from {url}")]
    Http { status: u16, url: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed JSON response: {0}")]
    Json(String),
    #[error("null value at series offset {offset}")]
    NullValue { offset: usize },
}

pub type Result<T> = std::result::Result<T, DataError>;

/// A labelled series of finite values with optional, strictly increasing
/// timestamps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub timestamps: Option<Vec<String>>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(DataError::Empty(label));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Domain(format!("value {i} of {label} is not finite")));
        }
        Ok(Self {
            label,
            timestamps: None,
            values,
        })
    }

    /// Timestamps must be ISO-8601 style strings so that lexical order is
    /// chronological.
    pub fn with_timestamps(label: impl Into<String>, timestamps: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(label, values)?;
        if timestamps.len() != s.values.len() {
            return Err(DataError::Domain(format!(
                "{} timestamps for {} values",
                timestamps.len(),
                s.values.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            return Err(DataError::Domain(format!(
                "timestamps not strictly increasing at {:?} -> {:?}",
                w[0], w[1]
            )));
        }
        s.timestamps = Some(timestamps);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Two-column CSV (`timestamp,value`), or a single `value` column when
    /// there are no timestamps.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| DataError::Csv(e.to_string());
        match &self.timestamps {
            Some(ts) => {
                w.write_record(["timestamp", self.label.as_str()]).map_err(csv_err)?;
                for (t, v) in ts.iter().zip(&self.values) {
                    w.write_record([t.as_str(), &v.to_string()]).map_err(csv_err)?;
                }
            }
            None => {
                w.write_record([self.label.as_str()]).map_err(csv_err)?;
                for v in &self.values {
                    w.write_record([v.to_string()]).map_err(csv_err)?;
                }
            }
        }
        w.flush().map_err(|e| DataError::Csv(e.to_string()))
    }
}

/// `rₜ = ln(pₜ / pₜ₋₁)`; timestamps move to the later point of each pair.
pub fn log_returns(prices: &Series) -> Result<Series> {
    if prices.len() < 2 {
        return Err(DataError::Domain("log returns need at least two prices".into()));
    }
    if let Some(i) = prices.values.iter().position(|&p| !(p > 0.0)) {
        return Err(DataError::Domain(format!(
            "price at index {i} is not strictly positive ({})",
            prices.values[i]
        )));
    }
    let values: Vec<f64> = prices.values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let label = format!("log_return({})", prices.label);
    match &prices.timestamps {
        Some(ts) => Series::with_timestamps(label, ts[1..].to_vec(), values),
        None => Series::new(label, values),
    }
}

/// Rebuilds a price path from a starting price and log returns.
pub fn prices_from_returns(start: f64, returns: &Series) -> Result<Series> {
    if !(start > 0.0 && start.is_finite()) {
        return Err(DataError::Domain(format!("start price must be positive, got {start}")));
    }
    let mut values = Vec::with_capacity(returns.len() + 1);
    values.push(start);
    let mut log_p = start.ln();
    for r in &returns.values {
        log_p += r;
        values.push(log_p.exp());
    }
    Series::new(format!("price({})", returns.label), values)
}
