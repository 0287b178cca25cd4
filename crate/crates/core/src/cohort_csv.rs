//! Cohort file ingestion for real-data estimation.
//!
//! The format is CSV with the exact header `id,x,y1,m2,y2`. Binary columns
//! hold `0` or `1`; `y2` is empty exactly when `m2 = 1` (non-completers have
//! no observed post-period outcome). The confounder is not part of the
//! schema — it stands in for whatever is unmeasured in real data, and none of
//! the estimators read it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dgp::IndividualRecord;
use crate::error::{Error, Result};

pub const COHORT_HEADER: [&str; 5] = ["id", "x", "y1", "m2", "y2"];

/// Reads and validates a cohort CSV. Row numbers in errors are 1-based data
/// rows (the header is row 0).
pub fn read_cohort(path: impl AsRef<Path>) -> Result<Vec<IndividualRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_cohort_from(BufReader::new(file), &path.display().to_string())
}

/// Reader-based variant of [`read_cohort`]; `source` names the input in errors.
pub fn read_cohort_from<R: Read>(reader: R, source: &str) -> Result<Vec<IndividualRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(false).from_reader(reader);

    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Schema { path: source.to_string(), message: e.to_string() })?;
    let found: Vec<&str> = headers.iter().collect();
    if found != COHORT_HEADER {
        return Err(Error::Schema {
            path: source.to_string(),
            message: format!(
                "expected header `{}`, found `{}`",
                COHORT_HEADER.join(","),
                found.join(",")
            ),
        });
    }

    let row_err = |row: usize, message: String| Error::Row { path: source.to_string(), row, message };
    let parse_binary = |row: usize, column: &str, text: &str| -> Result<bool> {
        match text.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(row_err(row, format!("column `{column}` must be 0 or 1, found `{other}`"))),
        }
    };

    let mut records = Vec::new();
    for (i, result) in csv_reader.records().enumerate() {
        let row = i + 1;
        let record = result.map_err(|e| row_err(row, e.to_string()))?;
        let x = parse_binary(row, "x", &record[1])?;
        let y1 = parse_binary(row, "y1", &record[2])?;
        let m2 = parse_binary(row, "m2", &record[3])?;
        let y2_text = record[4].trim();
        let y2 = match (m2, y2_text.is_empty()) {
            (true, true) => None,
            (true, false) => {
                return Err(row_err(row, "y2 must be empty when m2 = 1 (non-completer)".into()))
            }
            (false, true) => {
                return Err(row_err(row, "y2 must be present when m2 = 0 (completer)".into()))
            }
            (false, false) => Some(parse_binary(row, "y2", y2_text)?),
        };
        records.push(IndividualRecord { c: false, x, y1, m2, y2 });
    }
    Ok(records)
}

/// Writes a cohort in the ingestion format, synthesizing 1-based ids.
/// The confounder column is intentionally absent; see the module docs.
pub fn write_cohort(records: &[IndividualRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path, e);
    writeln!(w, "{}", COHORT_HEADER.join(",")).map_err(io_err)?;
    for (i, r) in records.iter().enumerate() {
        let y2 = match r.y2 {
            Some(v) => if v { "1" } else { "0" },
            None => "",
        };
        writeln!(w, "{},{},{},{},{}", i + 1, r.x as u8, r.y1 as u8, r.m2 as u8, y2)
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
