//! Tables produced by commands and how they are written.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Number of asserted inequalities.
    pub checks: usize,
    pub failures: usize,
}

impl Table {
    pub fn new<S: ToString>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
            checks: 0,
            failures: 0,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Count an asserted inequality and return its cell text.
    pub fn assert(&mut self, holds: bool) -> String {
        self.checks += 1;
        if !holds {
            self.failures += 1;
        }
        holds.to_string()
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn write_file(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// File name for the `index`-th command of a run.
pub fn command_file(dir: &Path, index: usize, tag: &str) -> PathBuf {
    dir.join(format!("{:02}-{tag}.csv", index + 1))
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: [&str; 6] = ["index", "command", "file", "checks", "failures", "status"];
