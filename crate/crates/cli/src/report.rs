use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nmpk::sim::ErrorMetrics;
use serde::Serialize;

use crate::CliError;

/// Summary written as `report.json` next to every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    /// Metrics window; `None` for commands that do not track.
    pub steady_state: Option<[f64; 2]>,
    pub metrics: BTreeMap<String, ErrorMetrics<f64>>,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub details: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            steady_state: None,
            metrics: BTreeMap::new(),
            files: Vec::new(),
            wall_time_s: 0.0,
            details: serde_json::Value::Null,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes a file through a buffered writer and records its path in the report.
pub fn write_file<F>(report: &mut RunReport, path: PathBuf, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    report.files.push(path);
    Ok(())
}

/// CSV with a header row; values use shortest round-trip decimal formatting.
pub fn write_csv(report: &mut RunReport, path: PathBuf, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CliError> {
    write_file(report, path, |w| {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })
}

pub fn write_report(report: &RunReport, dir: &Path) -> Result<PathBuf, CliError> {
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Validation(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}
