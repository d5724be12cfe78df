//! `conic`: classification, model metrics, indicial roots, mode spectra,
//! uniformization and the acceptance suite from the command line.
//!
//! Every command prints a JSON result envelope. Exit codes: 0 on success,
//! 2 when a spec is rejected by the uniformization gate, 1 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use conic_core::cli_io::{self, Command, RunConfig, SpecFile, SpectrumGeometry, SweepFile, EXIT_ERROR};
use conic_core::indicial::IndicialOperator;
use conic_core::model_metrics::Chart;

#[derive(Parser, Debug)]
#[command(name = "conic", version, about = "Constant-curvature conic metrics")]
struct Cli {
    /// Seed for the randomized acceptance checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the envelope here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Write tabular output (model, spectrum) here as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Geometry tag, χ and moduli dimensions of a spec file.
    Classify { spec: PathBuf },
    /// Warp function and curvature of a model metric on a radial grid.
    Model {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long = "K", allow_hyphen_values = true, default_value_t = 0.0)]
        curvature: f64,
        #[arg(long, value_enum, default_value_t = ChartArg::Polar)]
        chart: ChartArg,
        #[arg(long, default_value_t = 0.01)]
        r_min: f64,
        #[arg(long, default_value_t = 1.0)]
        r_max: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Indicial roots of an operator inside a window.
    Indicial {
        #[arg(long, value_enum)]
        operator: OperatorArg,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// `LO,HI`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window, default_value = "-3,3")]
        window: (f64, f64),
    },
    /// Lowest Friedrichs eigenvalues of a range of Fourier modes.
    Spectrum {
        #[arg(long, value_enum)]
        geometry: GeometryArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        beta: f64,
        #[arg(long = "K", allow_hyphen_values = true, default_value_t = 1.0)]
        curvature: f64,
        /// `LO..HI`, inclusive.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_modes, default_value = "0..3")]
        modes: (i64, i64),
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Dirichlet radius for cones and cusps.
        #[arg(long, default_value_t = 1.0)]
        r_max: f64,
    },
    /// Solves for the constant-curvature metric of a spec file.
    Uniformize {
        spec: PathBuf,
        /// CSV dump `vertex_id,x,y,z,phi` of the solved field.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Continuation along a path of cone angles from a sweep file.
    Sweep { sweep: PathBuf },
    /// Runs the acceptance criteria, all by default.
    Accept {
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
    /// Executes a full run config file.
    Run { config: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChartArg {
    Polar,
    ConformalFlat,
    Suspension,
    Cusp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OperatorArg {
    Scalar,
    P,
    L,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GeometryArg {
    Cone,
    Football,
    Cusp,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn parse_modes(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn read<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(cli_io::read_json(path)?)
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let command = match &cli.command {
        Cmd::Classify { spec } => Command::Classify { spec: read::<SpecFile>(spec)? },
        Cmd::Model { beta, curvature, chart, r_min, r_max, samples } => Command::Model {
            beta: *beta,
            curvature: *curvature,
            chart: match chart {
                ChartArg::Polar => Chart::Polar,
                ChartArg::ConformalFlat => Chart::ConformalFlat,
                ChartArg::Suspension => Chart::Suspension,
                ChartArg::Cusp => Chart::Cusp,
            },
            r_min: *r_min,
            r_max: *r_max,
            samples: *samples,
        },
        Cmd::Indicial { operator, beta, window } => Command::Indicial {
            operator: match operator {
                OperatorArg::Scalar => IndicialOperator::ScalarLaplacian,
                OperatorArg::P => IndicialOperator::P,
                OperatorArg::L => IndicialOperator::L,
            },
            beta: *beta,
            window: *window,
        },
        Cmd::Spectrum { geometry, beta, curvature, modes, count, grid, r_max } => Command::Spectrum {
            geometry: match geometry {
                GeometryArg::Cone => SpectrumGeometry::Cone,
                GeometryArg::Football => SpectrumGeometry::Football,
                GeometryArg::Cusp => SpectrumGeometry::Cusp,
            },
            beta: *beta,
            curvature: *curvature,
            modes: *modes,
            count: *count,
            grid: *grid,
            r_max: *r_max,
        },
        Cmd::Uniformize { spec, field } => Command::Uniformize { spec: read::<SpecFile>(spec)?, field: field.clone() },
        Cmd::Sweep { sweep } => Command::Sweep { sweep: read::<SweepFile>(sweep)? },
        Cmd::Accept { criteria } => Command::Accept { criteria: criteria.clone() },
        Cmd::Run { config } => return read::<RunConfig>(config),
    };
    Ok(RunConfig { command, seed: cli.seed })
}

fn execute(cli: &Cli) -> Result<i32> {
    let config = config(cli)?;
    let outcome = cli_io::run(&config);
    let text = serde_json::to_string_pretty(&outcome.envelope).context("serializing the envelope")?;
    match &cli.output {
        Some(path) => cli_io::write_atomically(path, &format!("{text}\n"))?,
        None => println!("{text}"),
    }
    match (&cli.csv, &outcome.csv) {
        (Some(path), Some(csv)) => cli_io::write_atomically(path, csv)?,
        (Some(_), None) => bail!("this command has no tabular output"),
        _ => {}
    }
    if let Command::Accept { .. } = config.command {
        if let Some(results) = outcome.envelope.payload.as_array() {
            for r in results {
                let verdict = if r["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                eprintln!("{verdict} [{}] {}: {}", r["id"], r["title"].as_str().unwrap_or(""), r["detail"].as_str().unwrap_or(""));
            }
        }
    } else if outcome.exit_code != 0 {
        if let Some(message) = outcome.envelope.payload.as_object().and_then(|o| o.values().next()).and_then(|v| v.as_str()) {
            eprintln!("conic: {message}");
        }
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("conic: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
