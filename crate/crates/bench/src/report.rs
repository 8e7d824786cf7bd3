//! CSV output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::runner::{BenchRecord, SummaryRow};

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Columns `N,run,seed,strategy,cost,expanded_nodes,elapsed_s,deviation,status`.
pub fn write_records<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    write_rows(out, records)
}

/// Columns `N,strategy,runs,runs_ok,mean_cost,mean_expanded_nodes,mean_elapsed_s,mean_deviation`.
pub fn write_summary<W: Write>(out: W, summary: &[SummaryRow]) -> Result<()> {
    write_rows(out, summary)
}

/// `results.csv` becomes `results.summary.csv`.
pub fn summary_path(records: &Path) -> PathBuf {
    let stem = records.file_stem().unwrap_or_default().to_string_lossy();
    records.with_file_name(format!("{stem}.summary.csv"))
}
