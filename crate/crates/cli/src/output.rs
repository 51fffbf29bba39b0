use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliResult;

/// Float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV file `name` under `dir` from string rows.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}
