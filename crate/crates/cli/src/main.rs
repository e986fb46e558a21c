mod args;
mod commands;
mod error;
mod pool;
mod report;
mod selftest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command, PlotKind};
use commands::Output;
use error::{ConfigError, SelftestFailed};
use report::{write_output, Format, Meta};

fn plot_path(cli: &Cli) -> Result<PathBuf> {
    if let Some(p) = &cli.output.plot_output {
        return Ok(p.clone());
    }
    match &cli.output.output {
        Some(p) => Ok(p.with_extension("svg")),
        None => Err(ConfigError("--plot svg needs --plot-output or --output".into()).into()),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let seed = match &cli.command {
        Command::Sample(a) => Some(a.seed),
        Command::Selftest(a) => Some(a.seed),
        _ => None,
    };
    let config = json!({ "output": &cli.output, "run": &cli.command });
    let meta = Meta::new(cli.command.name(), &config, seed, cli.output.stamp);
    if let Command::Sample(a) = &cli.command {
        if cli.output.format == Format::Json {
            return Err(ConfigError("sample writes the ensemble file format; --format json is not available".into()).into());
        }
        if cli.output.plot == PlotKind::Svg {
            return Err(ConfigError("sample has no plot".into()).into());
        }
        let text = commands::sample(a, &meta)?;
        return write_output(cli.output.output.as_deref(), &text);
    }
    let mut failed = 0;
    let Output { report, plot } = match &cli.command {
        Command::Critical => commands::critical()?,
        Command::FreeEnergy(a) => commands::free_energy_table(a)?,
        Command::Partition(a) => commands::partition(a)?,
        Command::Analyze(a) => commands::analyze(a)?,
        Command::Profile(a) => commands::profile(a)?,
        Command::Wulff(a) => commands::wulff(a)?,
        Command::Ipsaw(a) => commands::ipsaw(a)?,
        Command::Selftest(a) => {
            let (report, n) = selftest::run(a)?;
            failed = n;
            report.into()
        }
        Command::Sample(_) => unreachable!("handled above"),
    };
    if cli.output.plot == PlotKind::Svg {
        let path = plot_path(cli)?;
        match plot {
            Some(p) => write_output(Some(&path), &p.render())?,
            None => eprintln!("note: nothing to plot for this input"),
        }
    }
    write_output(cli.output.output.as_deref(), &report.render(&meta, cli.output.format))?;
    if failed > 0 {
        return Err(SelftestFailed(failed).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(h) = error::hint(&e) {
                eprintln!("hint: {h}");
            }
            ExitCode::from(error::exit_code(&e))
        }
    }
}
