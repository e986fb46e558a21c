//! Command-line surface. Every struct here is echoed into output metadata.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipdsaw_core::{Family, SamplerKind};
use serde::Serialize;

use crate::report::Format;

#[derive(Parser, Debug)]
#[command(name = "ipdsaw", version, about = "Numerics for the interacting partially directed self-avoiding walk")]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Also emit a plot.
    #[arg(long, value_enum, default_value_t = PlotKind::None, global = true)]
    pub plot: PlotKind,
    /// Plot path; defaults to the report path with an `.svg` extension.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub plot_output: Option<PathBuf>,
    /// Record wall-clock time in the output (makes it non-reproducible).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub stamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    None,
    Svg,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Critical point and the constants of the transition.
    Critical,
    /// Free energy and excess free energy over a grid of β.
    FreeEnergy(FreeEnergyArgs),
    /// Partition function at one length by every available engine.
    Partition(PartitionArgs),
    /// Draw an ensemble and write it in the ensemble file format.
    Sample(SampleArgs),
    /// Extension, bead and pattern statistics of ensemble files, with
    /// scaling fits across lengths.
    Analyze(AnalyzeArgs),
    /// Mean rescaled profile of one ensemble, against the limit shape when
    /// collapsed.
    Profile(ProfileArgs),
    /// Collapsed-phase limit shape.
    Wulff(WulffArgs),
    /// Exhaustive counts of lattice path families.
    Ipsaw(IpsawArgs),
    /// Exact identities and sampler distribution tests.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Critical => "critical",
            Command::FreeEnergy(_) => "free-energy",
            Command::Partition(_) => "partition",
            Command::Sample(_) => "sample",
            Command::Analyze(_) => "analyze",
            Command::Profile(_) => "profile",
            Command::Wulff(_) => "wulff",
            Command::Ipsaw(_) => "ipsaw",
            Command::Selftest(_) => "selftest",
        }
    }
}

/// Comma-separated values, or `start:stop:count` for an even grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    pub fn parse(s: &str) -> Result<Grid, String> {
        let values = if let [start, stop, count] = s.split(':').collect::<Vec<_>>()[..] {
            let start: f64 = start.trim().parse().map_err(|_| format!("bad grid start {start:?}"))?;
            let stop: f64 = stop.trim().parse().map_err(|_| format!("bad grid stop {stop:?}"))?;
            let count: usize = count.trim().parse().map_err(|_| format!("bad grid count {count:?}"))?;
            match count {
                0 => return Err("grid count must be positive".into()),
                1 => vec![start],
                _ => (0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect(),
            }
        } else if s.contains(':') {
            return Err(format!("expected start:stop:count, got {s:?}"));
        } else {
            s.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad grid value {t:?}")))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Grid(values))
    }

    /// Grid restricted to `(0, ∞)`.
    pub fn parse_positive(s: &str) -> Result<Grid, String> {
        let g = Grid::parse(s)?;
        if let Some(bad) = g.0.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(format!("grid values must be finite and positive, got {bad}"));
        }
        Ok(g)
    }

    /// Grid restricted to `[0, ∞)`.
    pub fn parse_nonnegative(s: &str) -> Result<Grid, String> {
        let g = Grid::parse(s)?;
        if let Some(bad) = g.0.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(format!("grid values must be finite and nonnegative, got {bad}"));
        }
        Ok(g)
    }
}

fn positive_beta(s: &str) -> Result<f64, String> {
    let b: f64 = s.parse().map_err(|_| format!("bad beta {s:?}"))?;
    if b.is_finite() && b > 0.0 {
        Ok(b)
    } else {
        Err(format!("beta must be finite and positive, got {b}"))
    }
}

fn sampler_kind(s: &str) -> Result<SamplerKind, String> {
    s.parse().map_err(|e: ipdsaw_core::Error| e.to_string())
}

fn family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: ipdsaw_core::Error| e.to_string())
}

#[derive(Args, Debug, Serialize)]
pub struct FreeEnergyArgs {
    /// β values in (0, ∞): `0.5,1,2` or `0.1:2:20`.
    #[arg(long, value_parser = Grid::parse_positive)]
    pub beta_grid: Grid,
    /// Add the finite-size estimate log(Z_L / Z_{L-1}) from the stretch DP.
    #[arg(long)]
    pub dp_length: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct PartitionArgs {
    #[arg(long, short = 'L')]
    pub length: usize,
    /// β values in [0, ∞).
    #[arg(long, value_parser = Grid::parse_nonnegative, default_value = "1")]
    pub beta_grid: Grid,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, short = 'L')]
    pub length: usize,
    #[arg(long, value_parser = positive_beta)]
    pub beta: f64,
    /// Number of configurations.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    /// `exact` or `mcmc`.
    #[arg(long, value_parser = sampler_kind, default_value = "exact")]
    pub sampler: SamplerKind,
    /// MCMC proposals discarded before the first kept sample.
    #[arg(long, default_value_t = 100_000)]
    pub burn_in: u64,
    /// MCMC proposals between kept samples.
    #[arg(long, default_value_t = 1_000)]
    pub thin: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    /// Ensemble files; several lengths give scaling fits.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    pub input: PathBuf,
    /// Time exponent; defaults to 1/2 above β_c and 1 below.
    #[arg(long)]
    pub time_exp: Option<f64>,
    /// Space exponent.
    #[arg(long, default_value_t = 0.5)]
    pub space_exp: f64,
    /// Largest rescaled time; defaults to 1.25 a_β above β_c, else 1.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 161)]
    pub grid: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct WulffArgs {
    #[arg(long, value_parser = positive_beta)]
    pub beta: f64,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct IpsawArgs {
    /// `saw`, `psaw`, `ne` or `pd`.
    #[arg(long, value_parser = family)]
    pub family: Family,
    #[arg(long)]
    pub max_length: usize,
    /// β values at which log Z_L and growth estimates are reported.
    #[arg(long, value_parser = Grid::parse_nonnegative, default_value = "0")]
    pub beta_grid: Grid,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Draws per sampler test.
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::parse("0.5, 1,2").unwrap().0, vec![0.5, 1.0, 2.0]);
        assert_eq!(Grid::parse("1:2:3").unwrap().0, vec![1.0, 1.5, 2.0]);
        assert_eq!(Grid::parse("0.7:9:1").unwrap().0, vec![0.7]);
        assert!(Grid::parse("1:2").is_err());
        assert!(Grid::parse("a").is_err());
        assert!(Grid::parse_positive("0,1").is_err());
        assert!(Grid::parse_positive("-1").is_err());
        assert!(Grid::parse_nonnegative("0,1").is_ok());
    }
}
