//! Results persistence: the summary-row CSV written by `simulate` and read
//! back by `plot`.
//!
//! Header and row order are bit-stable: rows sorted by
//! (scenario, dropout_target, estimator name), floats rendered with six
//! significant digits, failure markers spelled `undefined` / `empty`, and
//! absent aggregates (all replicates failed) left blank.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dgp::Scenario;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorValue};
use crate::harness::SummaryRow;

pub const RESULTS_HEADER: [&str; 9] =
    ["scenario", "dropout_target", "estimator", "mean", "p2_5", "p97_5", "n_used", "n_failed", "oracle"];

/// Formats a float with six significant digits, fixed notation in the
/// human range and scientific outside it (printf `%.6g` semantics, with
/// trailing zeros trimmed).
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Exact decimal exponent via the scientific rendering.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format always has an exponent");
    let exp: i32 = exp.parse().expect("valid exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        let trimmed = fixed.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

fn format_value(v: &EstimatorValue) -> String {
    match v {
        EstimatorValue::Value(x) => format_sig6(*x),
        EstimatorValue::Undefined => "undefined".to_string(),
        EstimatorValue::Empty => "empty".to_string(),
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_default()
}

/// Writes summary rows to a writer in the stable results format.
pub fn write_results_to<W: Write>(rows: &[SummaryRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", RESULTS_HEADER.join(","))?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.scenario.id(),
            format_sig6(r.dropout_target),
            r.estimator.name(),
            format_opt(r.mean),
            format_opt(r.p2_5),
            format_opt(r.p97_5),
            r.n_used,
            r.n_failed,
            format_value(&r.oracle),
        )?;
    }
    w.flush()
}

/// Writes summary rows to a CSV file.
pub fn write_results(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_to(rows, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Renders the results CSV as bytes (used for determinism checks).
pub fn results_to_bytes(rows: &[SummaryRow]) -> Vec<u8> {
    let mut out = Vec::new();
    write_results_to(rows, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Reads a results CSV back into summary rows (the `plot` input path).
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_results_from(BufReader::new(file), &path.display().to_string())
}

pub fn read_results_from<R: Read>(reader: R, source: &str) -> Result<Vec<SummaryRow>> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Schema { path: source.to_string(), message: e.to_string() })?;
    let found: Vec<&str> = headers.iter().collect();
    if found != RESULTS_HEADER {
        return Err(Error::Schema {
            path: source.to_string(),
            message: format!("expected header `{}`, found `{}`", RESULTS_HEADER.join(","), found.join(",")),
        });
    }
    let row_err = |row: usize, message: String| Error::Row { path: source.to_string(), row, message };

    let mut rows = Vec::new();
    for (i, result) in csv_reader.records().enumerate() {
        let row = i + 1;
        let record = result.map_err(|e| row_err(row, e.to_string()))?;
        let parse_f64 = |column: &str, text: &str| -> Result<f64> {
            text.trim()
                .parse::<f64>()
                .map_err(|_| row_err(row, format!("column `{column}`: `{text}` is not a number")))
        };
        let parse_opt = |column: &str, text: &str| -> Result<Option<f64>> {
            if text.trim().is_empty() { Ok(None) } else { parse_f64(column, text).map(Some) }
        };
        let scenario_id: u8 = record[0]
            .trim()
            .parse()
            .map_err(|_| row_err(row, format!("column `scenario`: `{}` is not an id", &record[0])))?;
        let scenario = Scenario::from_id(scenario_id)
            .map_err(|e| row_err(row, e.to_string()))?;
        let estimator = Estimator::from_name(record[2].trim())
            .map_err(|e| row_err(row, e.to_string()))?;
        let oracle = match record[8].trim() {
            "undefined" => EstimatorValue::Undefined,
            "empty" => EstimatorValue::Empty,
            text => EstimatorValue::Value(parse_f64("oracle", text)?),
        };
        let parse_usize = |column: &str, text: &str| -> Result<usize> {
            text.trim()
                .parse::<usize>()
                .map_err(|_| row_err(row, format!("column `{column}`: `{text}` is not a count")))
        };
        rows.push(SummaryRow {
            scenario,
            dropout_target: parse_f64("dropout_target", &record[1])?,
            estimator,
            mean: parse_opt("mean", &record[3])?,
            p2_5: parse_opt("p2_5", &record[4])?,
            p97_5: parse_opt("p97_5", &record[5])?,
            n_used: parse_usize("n_used", &record[6])?,
            n_failed: parse_usize("n_failed", &record[7])?,
            oracle,
        });
    }
    Ok(rows)
}
