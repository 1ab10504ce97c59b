//! CSV and JSON serialization for the CLI.
//!
//! Floats are written with Rust's shortest round-trip formatting, so tables
//! are loss-free and byte-stable across runs. The manifest uses serde_json's
//! default map (sorted keys) for the same reason.

use std::io::{self, Write};
use std::path::Path;

use weibull_tail::amse::AmsePoint;
use weibull_tail::estimators::EstimatePoint;
use weibull_tail::montecarlo::MseRow;

use crate::{AppError, AppResult};

/// One row of a k-indexed squared-error table, simulated or asymptotic.
pub struct ErrorRow {
    pub k: usize,
    pub variant: String,
    pub bias_sq: f64,
    pub variance: f64,
    pub total: f64,
}

impl From<&MseRow> for ErrorRow {
    fn from(r: &MseRow) -> Self {
        ErrorRow {
            k: r.k,
            variant: r.variant.to_string(),
            bias_sq: r.bias_sq,
            variance: r.variance,
            total: r.total,
        }
    }
}

impl From<&AmsePoint> for ErrorRow {
    fn from(r: &AmsePoint) -> Self {
        ErrorRow {
            k: r.k,
            variant: r.variant.to_string(),
            bias_sq: r.bias_sq,
            variance: r.variance,
            total: r.total,
        }
    }
}

pub fn open_out(path: Option<&Path>) -> AppResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(io::stdout()),
    })
}

/// Write a squared-error table. When `estimator` is given it is appended as a
/// trailing column tagging the rows (`mse`, `amse`, `quantile_mse`), so tables
/// from different studies can be concatenated.
pub fn write_error_table<W: Write>(
    w: W,
    rows: &[ErrorRow],
    estimator: Option<&str>,
) -> AppResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["k", "variant", "bias_sq", "variance", "total"];
    if estimator.is_some() {
        header.push("estimator");
    }
    csv.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.k.to_string(),
            row.variant.clone(),
            row.bias_sq.to_string(),
            row.variance.to_string(),
            row.total.to_string(),
        ];
        if let Some(tag) = estimator {
            rec.push(tag.to_string());
        }
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

/// Write the per-(k, variant) estimate table, optionally with the
/// extrapolated quantile column.
pub fn write_estimates<W: Write>(
    w: W,
    rows: &[(EstimatePoint, Option<f64>)],
    with_quantile: bool,
) -> AppResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["k", "variant", "t_n", "a_n", "theta_hat"];
    if with_quantile {
        header.push("x_p_hat");
    }
    csv.write_record(&header)?;
    for (p, xp) in rows {
        let mut rec = vec![
            p.k.to_string(),
            p.variant.to_string(),
            p.t_n.to_string(),
            p.a_n.to_string(),
            p.theta_hat.to_string(),
        ];
        if with_quantile {
            rec.push(xp.expect("quantile column requested but not computed").to_string());
        }
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Data(format!("json error: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
