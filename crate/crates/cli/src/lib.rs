//! Driver for experiment configurations: runs commands in order and writes one CSV per
//! command plus a summary.

pub mod commands;
pub mod config;
pub mod report;

use std::path::Path;

use thiserror::Error;

use crate::commands::{execute, Context};
use crate::config::ExperimentConfig;
use crate::report::{command_file, Table, SUMMARY_FILE, SUMMARY_HEADER};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub tag: &'static str,
    pub table: Table,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub commands: Vec<CommandOutcome>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.commands.iter().all(|c| c.table.passed())
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() { 0 } else { 1 }
    }

    pub fn summary(&self) -> Table {
        let mut t = Table::new(&SUMMARY_HEADER);
        for (i, c) in self.commands.iter().enumerate() {
            let file = command_file(Path::new(""), i, c.tag);
            t.push(vec![
                (i + 1).to_string(),
                c.tag.to_string(),
                file.display().to_string(),
                c.table.checks.to_string(),
                c.table.failures.to_string(),
                if c.table.passed() { "pass" } else { "fail" }.to_string(),
            ]);
        }
        t
    }
}

/// Validate and execute every command. Nothing is written.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let measures = config.validate()?;
    let ctx = Context { measures: &measures, grid: config.grid, seed: config.seed };
    let mut commands = Vec::with_capacity(config.commands.len());
    for cmd in &config.commands {
        let table = execute(cmd, &ctx)
            .map_err(|e| CliError::Validation(format!("{}: {e}", cmd.tag())))?;
        commands.push(CommandOutcome { tag: cmd.tag(), table });
    }
    Ok(RunOutcome { commands })
}

/// Write every command table and the summary into `dir`, creating it if needed.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (i, c) in outcome.commands.iter().enumerate() {
        c.table.write_file(&command_file(dir, i, c.tag))?;
    }
    outcome.summary().write_file(&dir.join(SUMMARY_FILE))
}
