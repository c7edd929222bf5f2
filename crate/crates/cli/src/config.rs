//! Run configuration: defaults, a flat `key = value` file, then flag
//! overrides, all parsed by the same per-key parsers.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use triality_core::transport::{Orientation, DEFAULT_FLUX_GRID, DEFAULT_SAMPLES_PER_UNIT, MIN_FLUX_GRID};
use triality_core::{BathSpec, Controls};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SteadyState,
    CurvatureMap,
    Cycle,
    TrialityMap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SteadyState => "steady-state",
            Command::CurvatureMap => "curvature-map",
            Command::Cycle => "cycle",
            Command::TrialityMap => "triality-map",
        }
    }

    fn default_grid(self) -> (usize, usize) {
        match self {
            Command::TrialityMap => (128, 64),
            _ => (64, 64),
        }
    }

    fn min_grid(self) -> (usize, usize) {
        match self {
            Command::TrialityMap => triality_core::atlas::MIN_PAINT_GRID,
            _ => (2, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathShape {
    Rect,
    Ellipse,
}

/// Every key accepted in a config file, in echo order.
pub const KEYS: [&str; 20] = [
    "omega",
    "g",
    "gamma1",
    "gamma2",
    "z0",
    "phi",
    "beta",
    "grid",
    "omega_range",
    "g_range",
    "path",
    "center",
    "size",
    "orientation",
    "samples_per_unit",
    "flux_grid",
    "out",
    "threads",
    "adiabatic",
    "gibbs",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub omega: f64,
    pub g: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub z0: f64,
    pub phi: f64,
    pub beta: f64,
    /// `(n_omega, n_g)` for curvature maps, `(n_eta, n_lambda)` for chart maps.
    pub grid: (usize, usize),
    pub omega_range: (f64, f64),
    pub g_range: (f64, f64),
    pub path: PathShape,
    pub center: (f64, f64),
    /// Half-widths of a rectangle or semi-axes of an ellipse.
    pub size: (f64, f64),
    pub orientation: Orientation,
    pub samples_per_unit: f64,
    pub flux_grid: (usize, usize),
    pub out: PathBuf,
    pub threads: usize,
    pub adiabatic: Vec<f64>,
    pub gibbs: bool,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            omega: 1.0,
            g: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            z0: 1.0,
            phi: std::f64::consts::FRAC_PI_2,
            beta: 1.0,
            grid: command.default_grid(),
            omega_range: (0.2, 2.0),
            g_range: (0.2, 2.0),
            path: PathShape::Rect,
            center: (1.0, 1.0),
            size: (0.5, 0.5),
            orientation: Orientation::Ccw,
            samples_per_unit: DEFAULT_SAMPLES_PER_UNIT,
            flux_grid: DEFAULT_FLUX_GRID,
            out: PathBuf::from("out"),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            adiabatic: Vec::new(),
            gibbs: false,
        }
    }

    /// Defaults, then `file` (if any), then `overrides`; validated.
    pub fn resolve(
        command: Command,
        file: Option<&Path>,
        overrides: &[(&str, String)],
    ) -> Result<Self, CliError> {
        let mut cfg = Self::defaults(command);
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
            for (line, key, value) in parse_flat(&text)? {
                cfg.set(&key, &value)
                    .map_err(|e| CliError::Validation(format!("{} line {line}: {e}", path.display())))?;
            }
        }
        for (key, value) in overrides {
            cfg.set(key, value).map_err(|e| CliError::Validation(format!("--{}: {e}", key.replace('_', "-"))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "omega" => self.omega = parse_f64(value)?,
            "g" => self.g = parse_f64(value)?,
            "gamma1" => self.gamma1 = parse_f64(value)?,
            "gamma2" => self.gamma2 = parse_f64(value)?,
            "z0" => self.z0 = parse_f64(value)?,
            "phi" => self.phi = parse_f64(value)?,
            "beta" => self.beta = parse_f64(value)?,
            "grid" => self.grid = parse_grid(value)?,
            "omega_range" => self.omega_range = parse_pair(value)?,
            "g_range" => self.g_range = parse_pair(value)?,
            "path" => {
                self.path = match value {
                    "rect" => PathShape::Rect,
                    "ellipse" => PathShape::Ellipse,
                    _ => return Err(format!("unknown path `{value}` (expected rect or ellipse)")),
                }
            }
            "center" => self.center = parse_pair(value)?,
            "size" => self.size = parse_pair(value)?,
            "orientation" => {
                self.orientation = match value {
                    "ccw" => Orientation::Ccw,
                    "cw" => Orientation::Cw,
                    _ => return Err(format!("unknown orientation `{value}` (expected ccw or cw)")),
                }
            }
            "samples_per_unit" => self.samples_per_unit = parse_f64(value)?,
            "flux_grid" => self.flux_grid = parse_grid(value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = value.parse().map_err(|_| format!("`{value}` is not a thread count"))?,
            "adiabatic" => {
                self.adiabatic = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|t| parse_f64(t.trim())).collect::<Result<_, _>>()?
                }
            }
            "gibbs" => {
                self.gibbs = value.parse().map_err(|_| format!("`{value}` is not true or false"))?;
            }
            _ => return Err(format!("unknown key `{key}` (known: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    pub fn bath(&self) -> BathSpec {
        BathSpec { gamma1: self.gamma1, gamma2: self.gamma2, z0: self.z0 }
    }

    pub fn controls(&self) -> Controls {
        Controls::new(self.omega, self.g)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        self.bath().validate().map_err(|e| CliError::Validation(e.to_string()))?;
        for (name, v) in [("omega", self.omega), ("g", self.g), ("phi", self.phi)] {
            if !v.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return fail("beta >= 0 required".into());
        }
        let min = self.command.min_grid();
        if self.grid.0 < min.0 || self.grid.1 < min.1 {
            return fail(format!("grid must be at least {}x{}", min.0, min.1));
        }
        for (name, (lo, hi)) in [("omega_range", self.omega_range), ("g_range", self.g_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return fail(format!("{name} needs finite lo < hi"));
            }
        }
        if !(self.center.0.is_finite() && self.center.1.is_finite()) {
            return fail("center must be finite".into());
        }
        if !(self.size.0 > 0.0 && self.size.1 > 0.0 && self.size.0.is_finite() && self.size.1.is_finite()) {
            return fail("size components > 0 required".into());
        }
        if !(self.samples_per_unit > 0.0 && self.samples_per_unit.is_finite()) {
            return fail("samples_per_unit > 0 required".into());
        }
        if self.flux_grid.0 < MIN_FLUX_GRID || self.flux_grid.1 < MIN_FLUX_GRID {
            return fail(format!("flux_grid must be at least {MIN_FLUX_GRID}x{MIN_FLUX_GRID}"));
        }
        if self.threads == 0 {
            return fail("threads >= 1 required".into());
        }
        if self.adiabatic.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return fail("adiabatic periods must be > 0".into());
        }
        if self.adiabatic.windows(2).any(|w| w[1] <= w[0]) {
            return fail("adiabatic periods must be strictly ascending".into());
        }
        Ok(())
    }

    /// Fully resolved configuration, keyed as in a config file.
    pub fn echo(&self) -> Value {
        json!({
            "omega": self.omega,
            "g": self.g,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "z0": self.z0,
            "phi": self.phi,
            "beta": self.beta,
            "grid": [self.grid.0, self.grid.1],
            "omega_range": [self.omega_range.0, self.omega_range.1],
            "g_range": [self.g_range.0, self.g_range.1],
            "path": match self.path { PathShape::Rect => "rect", PathShape::Ellipse => "ellipse" },
            "center": [self.center.0, self.center.1],
            "size": [self.size.0, self.size.1],
            "orientation": match self.orientation { Orientation::Ccw => "ccw", Orientation::Cw => "cw" },
            "samples_per_unit": self.samples_per_unit,
            "flux_grid": [self.flux_grid.0, self.flux_grid.1],
            "out": self.out.display().to_string(),
            "threads": self.threads,
            "adiabatic": self.adiabatic,
            "gibbs": self.gibbs,
        })
    }
}

/// `key = value` lines with their 1-based line numbers; `#` starts a
/// comment, blank lines are skipped.
pub fn parse_flat(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!("config line {}: expected `key = value`", n + 1)));
        };
        out.push((n + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("`{s}` is not a pair a,b"))?;
    Ok((parse_f64(a)?, parse_f64(b)?))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("`{s}` is not a grid NxM"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{s}` is not a grid NxM"));
    Ok((n(a)?, n(b)?))
}
