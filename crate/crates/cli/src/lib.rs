//! Command-line harness for `imcf-core`: configured runs, property suites
//! and parameter sweeps, with JSON reports and CSV series.

pub mod check;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use imcf_core::GridMode;

use crate::check::{run_suite, Suite};
use crate::config::{Config, Overrides};
use crate::error::CliError;
use crate::output::Artifacts;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "imcf", version, about = "Inverse mean curvature flow in hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the configured shape and write report.json and series.csv.
    Run(CommonArgs),
    /// Run a property suite: willmore, beckner, evolution, sphere-oracle or af2.
    Check {
        suite: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate every (n, r0, epsilon) cell of the [sweep] grid into sweep.csv.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; `run` and `sweep` default to `./out`, `check` writes
    /// check.json only when given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub mode: Option<GridMode>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

impl CommonArgs {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            resolution: self.resolution,
            mode: self.mode,
            n: self.n,
            t_end: self.t_end,
            dt: self.dt,
        }
    }

    /// Effective config and the verbatim text it came from.
    fn load(&self) -> Result<(Config, String), CliError> {
        let (mut config, text) = match &self.config {
            Some(path) => Config::load(path)?,
            None => (Config::default(), String::new()),
        };
        config.apply(&self.overrides());
        config.validate()?;
        Ok((config, text))
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run(args) => {
            let (config, text) = args.load()?;
            let out = args.out_dir();
            let report = run::cmd_run(&config, &text, &out)?;
            for c in &report.checks {
                println!("{} {}: {}", status(c.pass), c.name, c.detail);
            }
            println!(
                "{} samples to t = {}, Q = {:.12}, wrote {}",
                report.samples.len(),
                report.samples.last().map_or(0.0, |s| s.t),
                report.samples.last().map_or(f64::NAN, |s| s.q),
                out.display()
            );
            Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Check { suite, common } => {
            let suite: Suite = suite.parse()?;
            let (config, _) = common.load()?;
            let outcomes = run_suite(suite, &config)?;
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            for o in &outcomes {
                println!("{} {}: {}", status(o.pass), o.name, o.detail);
            }
            println!("{} checks, {failed} failed", outcomes.len());
            if let Some(out) = &common.out {
                let mut artifacts = Artifacts::new(out);
                let json = serde_json::json!({ "suite": suite, "checks": outcomes });
                artifacts.add("check.json", serde_json::to_vec_pretty(&json).unwrap_or_default());
                artifacts.commit()?;
            }
            Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Sweep(args) => {
            let (config, _) = args.load()?;
            let out = args.out_dir();
            let rows = sweep::cmd_sweep(&config, &out)?;
            let failed = rows.iter().filter(|(_, r)| !r.ok()).count();
            println!("{} cells, {failed} failed, wrote {}", rows.len(), out.join("sweep.csv").display());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Parses `std::env::args`, runs the command and maps the outcome to an
/// exit code. Errors go to stderr as one JSON object.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(EXIT_ERROR)
        }
    }
}
