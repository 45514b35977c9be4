//! `wpc`: sweeps, optimizers, simulation and figure datasets.
//!
//! Exit status: 0 on success, 1 when an optimization is infeasible, 2 on
//! invalid arguments or any other failure.

mod args;
mod commands;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use wpc_core::SystemParams;

use args::{Cli, Command, ConfigFile, Format};
use commands::{emit, Outcome};

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let file = ConfigFile::load(cli.config.as_ref())?;
    let base = SystemParams::default();
    match cli.command {
        Command::DtSweep {
            mut params,
            mut sim,
            mut sweep,
            mut output,
        } => {
            params.merge(&file.params);
            sim.merge(&file.sim);
            sweep.merge(&file.sweep);
            output.merge(&file.output);
            let p = params.apply(base)?;
            let alphas = sweep.points(0.01, 0.99, 0.01)?;
            let t = commands::dt_sweep_table(&p, &alphas, &sim.config()?)?;
            emit(&t, &output, Format::Csv)?;
        }
        Command::DtOptimize {
            mut params,
            mut output,
        } => {
            params.merge(&file.params);
            output.merge(&file.output);
            let t = commands::dt_optimize_table(&params.apply(base)?)?;
            emit(&t, &output, Format::Json)?;
        }
        Command::DfSweep {
            axis,
            mut params,
            mut split,
            mut sim,
            mut sweep,
            mut output,
        } => {
            params.merge(&file.params);
            split.merge(&file.split);
            sim.merge(&file.sim);
            sweep.merge(&file.sweep);
            output.merge(&file.output);
            let p = params.apply(base)?;
            let t = commands::df_sweep_table(&p, axis, &split, &sweep, &sim.config()?)?;
            emit(&t, &output, Format::Csv)?;
        }
        Command::DfOptimize {
            method,
            mut params,
            mut output,
        } => {
            params.merge(&file.params);
            output.merge(&file.output);
            let (t, outcome) = commands::df_optimize_table(&params.apply(base)?, method)?;
            emit(&t, &output, Format::Json)?;
            return Ok(outcome);
        }
        Command::Simulate {
            protocol,
            mut params,
            mut split,
            mut sim,
            mut output,
        } => {
            params.merge(&file.params);
            split.merge(&file.split);
            sim.merge(&file.sim);
            output.merge(&file.output);
            let p = params.apply(base)?;
            let t = commands::simulate_table(&p, protocol, &split, &sim.config()?)?;
            emit(&t, &output, Format::Json)?;
        }
        Command::Reproduce {
            figure,
            mut params,
            mut sim,
            out,
        } => {
            params.merge(&file.params);
            sim.merge(&file.sim);
            let dir = out
                .or(file.output.out.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            for name in figures::reproduce(figure, &params, &sim.config()?, &dir)? {
                eprintln!("wrote {}", dir.join(name).display());
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => {
            eprintln!("infeasible: no split meets both the outage limit and data causality");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
