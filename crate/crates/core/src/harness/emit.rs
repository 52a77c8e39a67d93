use std::fs;
use std::path::Path;

use super::config::OutputFormat;
use super::records::SummaryTable;
use super::HarnessError;

pub const CSV_HEADER: [&str; 9] = ["experiment", "m", "n", "r", "R", "trials", "seed", "metric", "value"];

/// Summary rows as CSV, or the trial records as a JSON array.
pub fn render(table: &SummaryTable, format: OutputFormat) -> Result<String, HarnessError> {
    if let Some(row) = table.rows.iter().find(|row| !row.value.is_finite()) {
        return Err(HarnessError::NonFinite(row.metric.clone()));
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for row in &table.rows {
                w.serialize(row)?;
            }
            let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&table.records).map_err(|e| HarnessError::Serialize(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes [`render`] to `path`, or to stdout when `path` is `None`.
pub fn emit(table: &SummaryTable, format: OutputFormat, path: Option<&Path>) -> Result<(), HarnessError> {
    let text = render(table, format)?;
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
