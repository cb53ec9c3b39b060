//! `qdarwin`: run pointer-extraction and certification experiments from a JSON
//! config and write machine-readable reports.

mod config;
mod error;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, Format};
use error::CliError;
use run::Output;

#[derive(Parser)]
#[command(name = "qdarwin", version, about = "Quantum Darwinism experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of the config's output path or stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Override the optimizer budget (restarts).
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Certify every fragment channel against a shared-pointer approximation.
    VerifyT1,
    /// Same for the joint channels onto t-element groups of fragments.
    VerifyT2,
    /// Worst-case agreement between observers of one group of fragments.
    Agreement,
    /// Discord estimate of the configured bipartite state.
    Discord,
    /// Redistribute the configured state to 1..=broadcast_n recipients.
    Broadcast,
    /// List the model library, or print the configured channel.
    Models,
    /// Run the built-in invariant suites.
    Selftest {
        /// Run only this suite.
        #[arg(long)]
        suite: Option<String>,
        /// Make the named suite fail (harness check).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn load(cli: &Cli, required: bool) -> Result<Option<ExperimentConfig>, CliError> {
    let Some(path) = &cli.config else {
        if required {
            return Err(CliError::Validation {
                field: "config".into(),
                message: "this command needs --config".into(),
            });
        }
        return Ok(None);
    };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(budget) = cli.budget {
        cfg.optimizer_budget = budget;
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn write_output(body: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Validation {
            field: "output.path".into(),
            message: format!("{}: {e}", p.display()),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Numerical(format!("writing the report: {e}")))
        }
    }
}

fn execute(cli: &Cli) -> Result<Option<String>, CliError> {
    let needs_config = !matches!(cli.command, Command::Models | Command::Selftest { .. });
    let cfg = load(cli, needs_config)?;
    let format = match cli.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => cfg.as_ref().map(|c| c.output.format).unwrap_or_default(),
    };
    let out_path = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.output.path.clone()));
    let output: Output = match &cli.command {
        Command::Selftest { suite, inject_fault } => {
            let (summary, output) = run::selftest(suite.clone(), inject_fault.clone())?;
            for s in &summary.suites {
                let passed = s.checks.iter().filter(|c| c.passed).count();
                eprintln!(
                    "{} {:<13} {passed}/{} checks  {:.2}s",
                    if s.passed { "PASS" } else { "FAIL" },
                    s.suite,
                    s.checks.len(),
                    s.seconds
                );
                if let Some(e) = &s.error {
                    eprintln!("     {e}");
                }
                for c in s.checks.iter().filter(|c| !c.passed) {
                    eprintln!("     {}: deviation {:e} exceeds {:e}", c.name, c.deviation, c.tolerance);
                }
            }
            output
        }
        Command::Models => run::models(cfg.as_ref(), format)?,
        cmd => {
            let cfg = cfg.as_ref().expect("config required above");
            match cmd {
                Command::VerifyT1 => run::verify(cfg, None, format)?,
                Command::VerifyT2 => {
                    let t = cfg.t.ok_or_else(|| CliError::Validation {
                        field: "t".into(),
                        message: "verify-t2 needs a group size".into(),
                    })?;
                    run::verify(cfg, Some(t), format)?
                }
                Command::Agreement => run::agreement(cfg, format)?,
                Command::Discord => run::discord_cmd(cfg, format)?,
                Command::Broadcast => run::broadcast(cfg, format)?,
                Command::Models | Command::Selftest { .. } => unreachable!("handled above"),
            }
        }
    };
    write_output(&output.body, out_path.as_deref())?;
    Ok(output.partial)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(reason)) => {
            eprintln!("error: {reason}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
