use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgclt_cli::config::{Command, ExperimentConfig};
use rgclt_cli::{run, write_outputs, CliError, RunOutcome};

/// Renormalization-group checks of the central limit theorem.
#[derive(Debug, Parser)]
#[command(name = "rgclt", version)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV output; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    xi_max: Option<f64>,
    #[arg(long, global = true)]
    points_per_decade: Option<u32>,
    /// Iterations of T for `flow` and `verify-lyapunov`.
    #[arg(long, global = true)]
    steps: Option<u32>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Args)]
struct MeasureList {
    /// Comma-separated measure names; defaults to the built-in bank.
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// d_s distance between two measures.
    Distance {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 3.0)]
        s: f64,
    },
    /// Distances to the Gaussian along iterates of T.
    Flow {
        #[arg(long)]
        measure: String,
    },
    /// Contraction of T in d₃ over all pairs.
    VerifyContraction(MeasureList),
    /// Ideal-metric inequalities for s = 2, 3.
    VerifyIdeal(MeasureList),
    /// Strict decrease of d₂(·, γ) along trajectories.
    VerifyLyapunov(MeasureList),
    /// d₃ rate of normalized sums for n = 2..=n-max.
    VerifyCltRate {
        #[command(flatten)]
        list: MeasureList,
        #[arg(long, default_value_t = rgclt_cli::config::DEFAULT_CLT_MAX)]
        n_max: u32,
    },
    /// Monte Carlo comparison of pairwise-summed samples with the analytic flow.
    Oracle {
        #[command(flatten)]
        list: MeasureList,
        #[arg(long, default_value_t = rgclt_cli::config::DEFAULT_ORACLE_LEVELS)]
        levels: u32,
        #[arg(long, default_value_t = rgclt_cli::config::DEFAULT_ORACLE_SAMPLES)]
        samples: usize,
    },
    /// Run every command of the configuration (the default with --config).
    Run,
}

impl Sub {
    fn into_command(self, steps: u32) -> Option<Command> {
        Some(match self {
            Sub::Distance { a, b, s } => Command::Distance { a, b, s },
            Sub::Flow { measure } => Command::Flow { measure, steps },
            Sub::VerifyContraction(l) => Command::VerifyContraction { measures: l.measures },
            Sub::VerifyIdeal(l) => Command::VerifyIdeal { measures: l.measures },
            Sub::VerifyLyapunov(l) => Command::VerifyLyapunov { measures: l.measures, steps },
            Sub::VerifyCltRate { list, n_max } => Command::VerifyCltRate { measures: list.measures, n_max },
            Sub::Oracle { list, levels, samples } => {
                Command::Oracle { measures: list.measures, levels, samples, grid: None }
            }
            Sub::Run => return None,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match drive(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("rgclt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn drive(cli: Cli) -> Result<RunOutcome, CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::with_commands(Vec::new()),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(x) = cli.xi_max {
        config.grid.xi_max = x;
    }
    if let Some(p) = cli.points_per_decade {
        config.grid.points_per_decade = p;
    }
    let single = cli
        .command
        .and_then(|sub| sub.into_command(cli.steps.unwrap_or(rgclt_cli::config::DEFAULT_STEPS)));
    match single {
        Some(cmd) => {
            config.commands = vec![cmd];
            let outcome = run(&config)?;
            if let Some(dir) = &cli.out {
                write_outputs(&outcome, dir)?;
            }
            outcome.commands[0].table.write_csv(std::io::stdout().lock())?;
            Ok(outcome)
        }
        None => {
            if cli.config.is_none() {
                return Err(CliError::Validation("nothing to do: pass --config or a subcommand".into()));
            }
            if let Some(steps) = cli.steps {
                config.commands.iter_mut().for_each(|c| c.set_steps(steps));
            }
            let outcome = run(&config)?;
            let dir = cli.out.as_ref().unwrap_or(&config.output_path);
            write_outputs(&outcome, dir)?;
            let mut stdout = std::io::stdout().lock();
            for (i, c) in outcome.commands.iter().enumerate() {
                let status = if c.table.passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    stdout,
                    "[{:02}] {:<20} {:>5} checks {:>3} failed  {status}",
                    i + 1,
                    c.tag,
                    c.table.checks,
                    c.table.failures
                );
            }
            let _ = writeln!(stdout, "outputs in {}", dir.display());
            Ok(outcome)
        }
    }
}
