mod cache;
mod commands;
mod config;
mod error;
mod figures;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmimo_core::mc_oracle::{InnerSampler, MIN_INNER, MIN_OUTER};
use mmimo_core::InterferenceCase;

use crate::commands::ValidateOpts;
use crate::config::{ConfigArgs, RunConfig};
use crate::error::CliError;
use crate::output::{emit, OutputArgs, VERSION};

/// Spectral efficiency of pilot-reuse massive MIMO on a hexagonal grid.
#[derive(Parser, Debug)]
#[command(name = "mmimo", version = VERSION)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compute and cache the interference moment tables.
    Moments {
        /// Cases to compute; all three by default.
        #[arg(long = "cases", value_delimiter = ',')]
        cases: Option<Vec<InterferenceCase>>,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Optimized operating point per scheme over a grid of M.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Optimized operating point per scheme at one M.
    Optimize {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// SE per cell against K for each scheme and reuse factor.
    SeVsK {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed form against Monte-Carlo, and the UL/DL duality check.
    Validate {
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Channel draws per UE placement.
        #[arg(long, default_value_t = 10_000)]
        inner: usize,
        /// UE placements.
        #[arg(long, default_value_t = 200)]
        outer: usize,
        /// Sample every channel in the network instead of the reduced
        /// conditional sampler (much slower).
        #[arg(long)]
        full: bool,
        /// Skip the duality check.
        #[arg(long)]
        no_duality: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Data series behind one of the figures (3 to 13).
    Reproduce {
        figure: u32,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn command_line() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<(), CliError> {
    let line = command_line();
    match cli.cmd {
        Cmd::Moments { cases, cfg, out } => {
            let c = RunConfig::resolve(&cfg, None)?;
            let cases = cases.unwrap_or_else(|| InterferenceCase::ALL.to_vec());
            emit(&line, &c, &commands::moments(&c, &cases)?, &out)
        }
        Cmd::Sweep { cfg, out } => {
            let c = RunConfig::resolve(&cfg, None)?;
            emit(&line, &c, &commands::sweep_cmd(&c)?, &out)
        }
        Cmd::Optimize { m, cfg, out } => {
            let c = RunConfig::resolve(&cfg, None)?;
            emit(&line, &c, &commands::optimize_cmd(&c, m)?, &out)
        }
        Cmd::SeVsK { m, cfg, out } => {
            let c = RunConfig::resolve(&cfg, None)?;
            emit(&line, &c, &commands::se_vs_k(&c, &[m], false)?, &out)
        }
        Cmd::Validate {
            k,
            inner,
            outer,
            full,
            no_duality,
            cfg,
            out,
        } => {
            if inner < MIN_INNER || outer < MIN_OUTER {
                return Err(CliError::Usage(format!(
                    "need --inner >= {MIN_INNER} and --outer >= {MIN_OUTER}"
                )));
            }
            let c = RunConfig::resolve(&cfg, Some(2))?;
            let sampler = if full {
                InnerSampler::Full
            } else {
                InnerSampler::Conditional
            };
            let opts = ValidateOpts {
                k,
                n_inner: inner,
                n_outer: outer,
                sampler,
                duality: !no_duality,
            };
            let (t, pass) = commands::validate(&c, opts)?;
            emit(&line, &c, &t, &out)?;
            if pass {
                Ok(())
            } else {
                Err(CliError::ValidationFailed(
                    "at least one check is outside its tolerance".into(),
                ))
            }
        }
        Cmd::Reproduce { figure, cfg, out } => {
            let c = RunConfig::resolve(&cfg, figures::default_tiers(figure))?;
            emit(&line, &c, &figures::reproduce(figure, &c)?, &out)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on bad arguments; 2 is reserved for infeasible configs.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
