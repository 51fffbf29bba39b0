//! Plain-text `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Missing keys take their
//! defaults; unknown or repeated keys are rejected. Every value is checked
//! when the file is parsed, so a config that parses can be run.

use std::fmt::Write as _;
use std::str::FromStr;

use fsi_robin::{ChannelGeometry, FsiError, PhysicalParams, TimeGrid};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Zero,
    Pulse,
    Smooth,
    Random,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Zero => "zero",
            Mode::Pulse => "pulse",
            Mode::Smooth => "smooth",
            Mode::Random => "random",
        }
    }
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "zero" => Ok(Mode::Zero),
            "pulse" => Ok(Mode::Pulse),
            "smooth" => Ok(Mode::Smooth),
            "random" => Ok(Mode::Random),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: ChannelGeometry,
    pub nx: usize,
    pub ny_f: usize,
    pub ny_s: usize,
    pub params: PhysicalParams,
    pub grid: TimeGrid,
    pub mode: Mode,
    /// number of window counts `N, 2N, 4N, ...` in the convergence study
    pub dt_levels: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: ChannelGeometry::new(1.0, 1.0, 1.0).expect("valid default geometry"),
            nx: 16,
            ny_f: 16,
            ny_s: 16,
            params: PhysicalParams {
                rho_f: 1.0,
                rho_s: 1.0,
                mu: 0.1,
                l1: 1.0,
                l2: 1.0,
                lambda: 1.0,
            },
            grid: TimeGrid::new(0.5, 64, 1).expect("valid default grid"),
            mode: Mode::Smooth,
            dt_levels: 4,
            seed: 0,
        }
    }
}

const KEYS: [&str; 18] = [
    "L", "H_f", "H_s", "nx", "ny_f", "ny_s", "rho_f", "rho_s", "mu", "l1", "l2", "lambda", "T", "N", "m", "mode",
    "dt_levels", "seed",
];

fn bad(key: &str, constraint: &str) -> CliError {
    CliError::Config(format!("{key} must be {constraint}"))
}

fn parse_value<T: FromStr>(key: &str, raw: &str, what: &str) -> CliResult<T> {
    raw.parse().map_err(|_| bad(key, what))
}

fn positive_count(key: &str, raw: &str) -> CliResult<usize> {
    match raw.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(bad(key, "an integer >= 1")),
    }
}

fn from_fsi(e: FsiError) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let d = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        let (mut l, mut h_f, mut h_s) = (d.geometry.length, d.geometry.fluid_height, d.geometry.solid_height);
        let (mut nx, mut ny_f, mut ny_s) = (d.nx, d.ny_f, d.ny_s);
        let mut p = d.params;
        let (mut t, mut n, mut m) = (d.grid.t_final(), d.grid.windows(), d.grid.substeps());
        let (mut mode, mut dt_levels, mut seed) = (d.mode, d.dt_levels, d.seed);

        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = *KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
            if seen.contains(&key) {
                return Err(CliError::Config(format!("key `{key}` given more than once")));
            }
            seen.push(key);
            let real = |k: &str| parse_value::<f64>(k, raw, "a number");
            match key {
                "L" => l = real(key)?,
                "H_f" => h_f = real(key)?,
                "H_s" => h_s = real(key)?,
                "nx" => nx = positive_count(key, raw)?,
                "ny_f" => ny_f = positive_count(key, raw)?,
                "ny_s" => ny_s = positive_count(key, raw)?,
                "rho_f" => p.rho_f = real(key)?,
                "rho_s" => p.rho_s = real(key)?,
                "mu" => p.mu = real(key)?,
                "l1" => p.l1 = real(key)?,
                "l2" => p.l2 = real(key)?,
                "lambda" => p.lambda = real(key)?,
                "T" => t = real(key)?,
                "N" => n = positive_count(key, raw)?,
                "m" => m = positive_count(key, raw)?,
                "mode" => mode = parse_value(key, raw, "one of zero, pulse, smooth, random")?,
                "dt_levels" => match raw.parse::<usize>() {
                    Ok(k) if k >= 2 => dt_levels = k,
                    _ => return Err(bad(key, "an integer >= 2")),
                },
                "seed" => seed = parse_value(key, raw, "a non-negative integer")?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        let geometry = ChannelGeometry::new(l, h_f, h_s).map_err(from_fsi)?;
        p.validate().map_err(from_fsi)?;
        let grid = TimeGrid::new(t, n, m).map_err(from_fsi)?;
        if dt_levels > 16 {
            return Err(bad("dt_levels", "<= 16"));
        }
        Ok(Self {
            geometry,
            nx,
            ny_f,
            ny_s,
            params: p,
            grid,
            mode,
            dt_levels,
            seed,
        })
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn dump(&self) -> String {
        let g = self.geometry;
        let p = self.params;
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("write to string");
        line("L", g.length.to_string());
        line("H_f", g.fluid_height.to_string());
        line("H_s", g.solid_height.to_string());
        line("nx", self.nx.to_string());
        line("ny_f", self.ny_f.to_string());
        line("ny_s", self.ny_s.to_string());
        line("rho_f", p.rho_f.to_string());
        line("rho_s", p.rho_s.to_string());
        line("mu", p.mu.to_string());
        line("l1", p.l1.to_string());
        line("l2", p.l2.to_string());
        line("lambda", p.lambda.to_string());
        line("T", self.grid.t_final().to_string());
        line("N", self.grid.windows().to_string());
        line("m", self.grid.substeps().to_string());
        line("mode", self.mode.name().to_string());
        line("dt_levels", self.dt_levels.to_string());
        line("seed", self.seed.to_string());
        out
    }

    /// Window counts of the convergence study, coarsest first.
    pub fn window_levels(&self) -> Vec<usize> {
        (0..self.dt_levels).map(|k| self.grid.windows() << k).collect()
    }
}
