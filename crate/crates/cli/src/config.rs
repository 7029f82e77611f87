//! Run configuration: defaults, a flat `key = value` file, then flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use isodelta::Grid;
use serde::Serialize;

/// Family parameters of the first figure pair.
pub const FIGURE_ONE_SET: [f64; 4] = [1e-5, 0.10001, 1.10001, 5.10001];
/// Family parameters of the second figure pair (singular members included).
pub const FIGURE_THREE_SET: [f64; 4] = [-1.4, -0.9, -0.6, -0.3];

const DEFAULT_G: f64 = -1.0;
const DEFAULT_GRID: (f64, f64, usize) = (-25.0, 25.0, 5001);
const DEFAULT_K: [f64; 3] = [0.5, 1.0, 2.0];

/// Invalid input: reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Delta coupling (must be negative)
    #[arg(long = "g", allow_negative_numbers = true)]
    pub g: Option<f64>,

    /// Family parameter; repeat for several members
    #[arg(long = "C", allow_negative_numbers = true)]
    pub c: Vec<f64>,

    /// Left end of the grid
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Option<f64>,

    /// Right end of the grid
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Option<f64>,

    /// Number of grid points (the grid must contain x = 0)
    #[arg(long)]
    pub points: Option<usize>,

    /// Scattering wavenumber; repeat for several values
    #[arg(long = "k")]
    pub k: Vec<f64>,

    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Accept parameters with singular members and mark poles as NaN
    #[arg(long)]
    pub allow_singular: bool,

    /// Drop the sqrt(C(C+1)) normalization of the wavefunctions
    #[arg(long)]
    pub unnormalized: bool,

    /// Output file (directory for `figures`); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Flat key = value file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Also write a gnuplot script next to each data file
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub g: f64,
    #[serde(rename = "C")]
    pub c_list: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub k_list: Vec<f64>,
    pub format: Format,
    pub allow_singular: bool,
    pub normalized: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub gnuplot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g: DEFAULT_G,
            c_list: FIGURE_ONE_SET.to_vec(),
            x_min: DEFAULT_GRID.0,
            x_max: DEFAULT_GRID.1,
            n_points: DEFAULT_GRID.2,
            k_list: DEFAULT_K.to_vec(),
            format: Format::Csv,
            allow_singular: false,
            normalized: true,
            out: None,
            gnuplot: false,
        }
    }
}

fn parse_f64(key: &str, s: &str) -> anyhow::Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("config key `{key}`: `{s}` is not a number")))
}

fn parse_list(key: &str, s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(key, t))
        .collect()
}

fn parse_bool(key: &str, s: &str) -> anyhow::Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(usage(format!(
            "config key `{key}`: `{other}` is not a boolean"
        ))),
    }
}

impl RunConfig {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(args: &RunArgs) -> anyhow::Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(args);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Parses `key = value` lines; `#` starts a comment. List keys (`C`,
    /// `k`) take comma- or space-separated values and accumulate over
    /// repeated lines.
    pub fn apply_text(&mut self, text: &str) -> anyhow::Result<()> {
        let mut c_list: Option<Vec<f64>> = None;
        let mut k_list: Option<Vec<f64>> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "g" => self.g = parse_f64(key, value)?,
                "C" => c_list
                    .get_or_insert_with(Vec::new)
                    .extend(parse_list(key, value)?),
                "k" => k_list
                    .get_or_insert_with(Vec::new)
                    .extend(parse_list(key, value)?),
                "xmin" => self.x_min = parse_f64(key, value)?,
                "xmax" => self.x_max = parse_f64(key, value)?,
                "points" => {
                    self.n_points = value.parse().map_err(|_| {
                        usage(format!("config key `points`: `{value}` is not a count"))
                    })?
                }
                "format" => {
                    self.format = Format::from_str(value, false).map_err(|_| {
                        usage(format!("config key `format`: unknown format `{value}`"))
                    })?
                }
                "allow_singular" => self.allow_singular = parse_bool(key, value)?,
                "unnormalized" => self.normalized = !parse_bool(key, value)?,
                "normalized" => self.normalized = parse_bool(key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                "gnuplot" => self.gnuplot = parse_bool(key, value)?,
                other => {
                    return Err(usage(format!(
                        "config line {}: unknown key `{other}`",
                        n + 1
                    )))
                }
            }
        }
        if let Some(c) = c_list {
            self.c_list = c;
        }
        if let Some(k) = k_list {
            self.k_list = k;
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, args: &RunArgs) {
        if let Some(g) = args.g {
            self.g = g;
        }
        if !args.c.is_empty() {
            self.c_list = args.c.clone();
        }
        if let Some(v) = args.xmin {
            self.x_min = v;
        }
        if let Some(v) = args.xmax {
            self.x_max = v;
        }
        if let Some(n) = args.points {
            self.n_points = n;
        }
        if !args.k.is_empty() {
            self.k_list = args.k.clone();
        }
        if let Some(f) = args.format {
            self.format = f;
        }
        self.allow_singular |= args.allow_singular;
        if args.unnormalized {
            self.normalized = false;
        }
        if args.out.is_some() {
            self.out = args.out.clone();
        }
        self.gnuplot |= args.gnuplot;
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.g.is_nan() || self.g >= 0.0 {
            return Err(usage(format!(
                "g must be negative (attractive delta), got {}",
                self.g
            )));
        }
        if self.c_list.is_empty() {
            return Err(usage("at least one C is required"));
        }
        if let Some(c) = self.c_list.iter().find(|c| !c.is_finite()) {
            return Err(usage(format!("C must be finite, got {c}")));
        }
        if let Some(k) = self.k_list.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(usage(format!("k must be positive, got {k}")));
        }
        let grid = self.grid()?;
        if grid.origin_index().is_none() {
            return Err(usage(format!(
                "grid [{}, {}] with {} points has no node at x = 0",
                self.x_min, self.x_max, self.n_points
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        Grid::new(self.x_min, self.x_max, self.n_points).map_err(|e| usage(e.to_string()))
    }
}
