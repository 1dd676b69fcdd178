//! Experiment configuration documents.

use std::collections::btree_map::{BTreeMap, Entry};
use std::path::{Path, PathBuf};

use rgclt::{bank, GridSpec, Measure, MeasureLiteral};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_STEPS: u32 = 10;
pub const DEFAULT_CLT_MAX: u32 = 64;
pub const DEFAULT_ORACLE_LEVELS: u32 = 6;
pub const DEFAULT_ORACLE_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Named measures; built-in aliases are available without declaring them.
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureLiteral>,
    #[serde(default)]
    pub grid: GridSpec,
    pub commands: Vec<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_path")]
    pub output_path: PathBuf,
}

fn default_output_path() -> PathBuf {
    PathBuf::from("rgclt-out")
}

fn default_s() -> f64 {
    3.0
}

fn default_steps() -> u32 {
    DEFAULT_STEPS
}

fn default_clt_max() -> u32 {
    DEFAULT_CLT_MAX
}

fn default_levels() -> u32 {
    DEFAULT_ORACLE_LEVELS
}

fn default_samples() -> usize {
    DEFAULT_ORACLE_SAMPLES
}

/// One step of an experiment. `measures` lists default to the built-in banks.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Distance {
        a: String,
        b: String,
        #[serde(default = "default_s")]
        s: f64,
    },
    Flow {
        measure: String,
        #[serde(default = "default_steps")]
        steps: u32,
    },
    VerifyContraction {
        measures: Option<Vec<String>>,
    },
    VerifyIdeal {
        measures: Option<Vec<String>>,
    },
    VerifyLyapunov {
        measures: Option<Vec<String>>,
        #[serde(default = "default_steps")]
        steps: u32,
    },
    VerifyCltRate {
        measures: Option<Vec<String>>,
        #[serde(default = "default_clt_max")]
        n_max: u32,
    },
    Oracle {
        measures: Option<Vec<String>>,
        #[serde(default = "default_levels")]
        levels: u32,
        #[serde(default = "default_samples")]
        samples: usize,
        /// Defaults to [`rgclt::oracle::oracle_grid`].
        grid: Option<GridSpec>,
    },
}

impl Command {
    pub fn tag(&self) -> &'static str {
        match self {
            Command::Distance { .. } => "distance",
            Command::Flow { .. } => "flow",
            Command::VerifyContraction { .. } => "verify-contraction",
            Command::VerifyIdeal { .. } => "verify-ideal",
            Command::VerifyLyapunov { .. } => "verify-lyapunov",
            Command::VerifyCltRate { .. } => "verify-clt-rate",
            Command::Oracle { .. } => "oracle",
        }
    }

    /// Measure names the command refers to, with bank defaults filled in.
    pub fn measure_names(&self) -> Vec<String> {
        let or = |m: &Option<Vec<String>>, default: &[&str]| -> Vec<String> {
            m.clone().unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect())
        };
        match self {
            Command::Distance { a, b, .. } => vec![a.clone(), b.clone()],
            Command::Flow { measure, .. } => vec![measure.clone()],
            Command::VerifyContraction { measures } | Command::VerifyIdeal { measures } => {
                or(measures, &bank::Q3_BANK)
            }
            Command::VerifyLyapunov { measures, .. } => or(measures, &bank::Q2_BANK),
            Command::VerifyCltRate { measures, .. } => or(measures, &["rademacher", "skewed"]),
            Command::Oracle { measures, .. } => or(measures, &["gaussian", "rademacher", "skewed"]),
        }
    }

    pub fn set_steps(&mut self, n: u32) {
        if let Command::Flow { steps, .. } | Command::VerifyLyapunov { steps, .. } = self {
            *steps = n;
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Configuration with no declared measures and the given commands.
    pub fn with_commands(commands: Vec<Command>) -> Self {
        ExperimentConfig {
            measures: BTreeMap::new(),
            grid: GridSpec::default(),
            commands,
            seed: 0,
            output_path: default_output_path(),
        }
    }

    /// Check the grid and resolve every referenced measure.
    pub fn validate(&self) -> Result<MeasureTable, CliError> {
        self.grid.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        let mut table = MeasureTable::default();
        for (name, lit) in &self.measures {
            let m = lit.build().map_err(|e| CliError::Validation(format!("measure `{name}`: {e}")))?;
            table.0.insert(name.clone(), m);
        }
        for cmd in &self.commands {
            for name in cmd.measure_names() {
                if let Entry::Vacant(slot) = table.0.entry(name) {
                    let m = bank::alias(slot.key()).map_err(|_| {
                        CliError::Validation(format!(
                            "command `{}` references undeclared measure `{}`",
                            cmd.tag(),
                            slot.key()
                        ))
                    })?;
                    slot.insert(m);
                }
            }
            if let Command::Oracle { grid: Some(g), .. } = cmd {
                g.validate().map_err(|e| CliError::Validation(e.to_string()))?;
            }
        }
        Ok(table)
    }
}

/// Resolved measures by name.
#[derive(Debug, Clone, Default)]
pub struct MeasureTable(BTreeMap<String, Measure>);

impl MeasureTable {
    pub fn get(&self, name: &str) -> &Measure {
        &self.0[name]
    }
}
