//! `triality`: steady states, curvature maps, cyclic work and chart fields of
//! a driven dissipative qubit, written as CSV/JSON/PNG with a manifest.

mod commands;
mod config;
mod error;
mod output;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};
use error::CliError;
use output::{OutputDir, Timings};

#[derive(Parser)]
#[command(name = "triality", version, about = "Geometric thermodynamics of a driven dissipative qubit")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Steady state, triality coordinates and residuals (ness.json)
    SteadyState(Overrides),
    /// Curvature over an (omega, g) grid (curvature_grid.csv, curvature_grid.png)
    CurvatureMap(Overrides),
    /// Cyclic work around a loop against the enclosed curvature flux (cycle.json)
    Cycle(Overrides),
    /// Regularized curvature on the triality chart (mercator.csv/png, sphere_mesh.txt, extrema.json)
    TrialityMap(Overrides),
}

/// Every flag overrides the config-file key of the same name.
#[derive(Args)]
struct Overrides {
    /// Flat `key = value` config file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// NxM grid
    #[arg(long)]
    grid: Option<String>,
    /// lo,hi bounds of the omega axis (curvature-map)
    #[arg(long, allow_hyphen_values = true)]
    omega_range: Option<String>,
    /// lo,hi bounds of the g axis (curvature-map)
    #[arg(long, allow_hyphen_values = true)]
    g_range: Option<String>,
    /// rect or ellipse
    #[arg(long)]
    path: Option<String>,
    /// omega,g of the loop centre
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Half-widths (rect) or semi-axes (ellipse)
    #[arg(long)]
    size: Option<String>,
    /// ccw or cw
    #[arg(long)]
    orientation: Option<String>,
    /// Line-integral nodes per unit length
    #[arg(long)]
    samples_per_unit: Option<String>,
    /// NxM flux quadrature grid
    #[arg(long)]
    flux_grid: Option<String>,
    /// Output directory [default: out]
    #[arg(long)]
    out: Option<String>,
    /// Worker threads [default: logical processors]
    #[arg(long)]
    threads: Option<String>,
    /// Comma-separated driving periods for the slow-driving study
    #[arg(long)]
    adiabatic: Option<String>,
    /// Use the thermal connection instead of the pointer-basis one
    #[arg(long)]
    gibbs: bool,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let fields = [
            ("omega", &self.omega),
            ("g", &self.g),
            ("gamma1", &self.gamma1),
            ("gamma2", &self.gamma2),
            ("z0", &self.z0),
            ("phi", &self.phi),
            ("beta", &self.beta),
            ("grid", &self.grid),
            ("omega_range", &self.omega_range),
            ("g_range", &self.g_range),
            ("path", &self.path),
            ("center", &self.center),
            ("size", &self.size),
            ("orientation", &self.orientation),
            ("samples_per_unit", &self.samples_per_unit),
            ("flux_grid", &self.flux_grid),
            ("out", &self.out),
            ("threads", &self.threads),
            ("adiabatic", &self.adiabatic),
        ];
        let mut out: Vec<_> = fields.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        if self.gibbs {
            out.push(("gibbs", "true".to_string()));
        }
        out
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (command, overrides) = match &cli.command {
        Sub::SteadyState(o) => (Command::SteadyState, o),
        Sub::CurvatureMap(o) => (Command::CurvatureMap, o),
        Sub::Cycle(o) => (Command::Cycle, o),
        Sub::TrialityMap(o) => (Command::TrialityMap, o),
    };
    let cfg = RunConfig::resolve(command, overrides.config.as_deref(), &overrides.pairs())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {} threads: {e}", cfg.threads)))?;
    let mut timings = Timings::default();
    let mut out = OutputDir::create(&cfg.out)?;
    let summary = pool.install(|| match command {
        Command::SteadyState => commands::steady_state(&cfg, &mut out, &mut timings),
        Command::CurvatureMap => commands::curvature_map(&cfg, &mut out, &mut timings),
        Command::Cycle => commands::cycle(&cfg, &mut out, &mut timings),
        Command::TrialityMap => commands::triality_map(&cfg, &mut out, &mut timings),
    })?;
    let root = out.finish(command.name(), cfg.echo(), &timings)?;
    Ok(format!("{summary}\nwrote {}", root.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
