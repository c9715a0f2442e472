//! Run configuration: command-line flags layered over an optional flat key-value file.
//!
//! File grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value
//! ```
//!
//! Keys are the long flag names without the leading dashes (`x-min`, `tol`, ...);
//! `_` and `-` are interchangeable. Blank lines and `#` comments are ignored.
//! Unknown keys and repeated keys are errors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Weight `h(y)` of the Howland system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weight {
    /// h = 0
    Zero,
    /// h = 1
    One,
    /// h = e^{-y}
    Exp,
    /// h = e^{-1/y}
    ExpInv,
}

impl Weight {
    pub fn eval(self, y: f64) -> f64 {
        match self {
            Weight::Zero => 0.0,
            Weight::One => 1.0,
            Weight::Exp => (-y).exp(),
            Weight::ExpInv => (-1.0 / y).exp(),
        }
    }
}

/// Scattering function for `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// phi(t) = e^{-t}
    Exp,
    /// phi(u) = 2 sqrt(s/u) K_1(2 sqrt(s u))
    Bessel,
    /// phi(t) = Ai(t/2)
    Airy,
    /// Howland weight h = e^{-y} at time t
    Howland,
}

/// Every option; `None` means "not given".
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat key = value configuration file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Quadrature size (16..=2000) or sample count.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Howland weight.
    #[arg(long, global = true, value_enum)]
    pub weight: Option<Weight>,
    /// Scattering family for `tau`.
    #[arg(long, global = true, value_enum)]
    pub family: Option<Family>,
    /// Howland time parameter.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Perturbation strength s.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Laguerre exponent alpha.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Potential parameter xi, 0 < xi < 1/2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Determinant size or Laguerre degree.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Grid along x (or z): first point.
    #[arg(long = "x-min", global = true, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    /// Grid along x: last point.
    #[arg(long = "x-max", global = true, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    /// Grid along x: spacing.
    #[arg(long = "x-step", global = true)]
    pub x_step: Option<f64>,
    /// Grid along t: first point.
    #[arg(long = "t-min", global = true, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    /// Grid along t: last point.
    #[arg(long = "t-max", global = true, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Grid along t: spacing.
    #[arg(long = "t-step", global = true)]
    pub t_step: Option<f64>,
    /// Sweep over s: first value.
    #[arg(long = "s-min", global = true)]
    pub s_min: Option<f64>,
    /// Sweep over s: last value.
    #[arg(long = "s-max", global = true)]
    pub s_max: Option<f64>,
    /// Sweep over s: spacing.
    #[arg(long = "s-step", global = true)]
    pub s_step: Option<f64>,
    /// Finite-difference step.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Comma-separated criterion numbers for `verify` (default: all).
    #[arg(long, global = true, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|_| CliError::Usage(format!("config key `{key}`: unknown value `{value}`")))
}

impl Options {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = Some(parse(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(parse_enum(key, value)?),
            "tol" => self.tol = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "weight" => self.weight = Some(parse_enum(key, value)?),
            "family" => self.family = Some(parse_enum(key, value)?),
            "t" => self.t = Some(parse(key, value)?),
            "s" => self.s = Some(parse(key, value)?),
            "alpha" => self.alpha = Some(parse(key, value)?),
            "xi" => self.xi = Some(parse(key, value)?),
            "order" => self.order = Some(parse(key, value)?),
            "x-min" => self.x_min = Some(parse(key, value)?),
            "x-max" => self.x_max = Some(parse(key, value)?),
            "x-step" => self.x_step = Some(parse(key, value)?),
            "t-min" => self.t_min = Some(parse(key, value)?),
            "t-max" => self.t_max = Some(parse(key, value)?),
            "t-step" => self.t_step = Some(parse(key, value)?),
            "s-min" => self.s_min = Some(parse(key, value)?),
            "s-max" => self.s_max = Some(parse(key, value)?),
            "s-step" => self.s_step = Some(parse(key, value)?),
            "step" => self.step = Some(parse(key, value)?),
            "criteria" => {
                self.criteria = Some(
                    value
                        .split(',')
                        .map(|c| parse(key, c.trim()))
                        .collect::<Result<Vec<u8>, _>>()?,
                )
            }
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut opts = Options::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            if !seen.insert(key.clone()) {
                return Err(CliError::Usage(format!("config key `{key}` given twice")));
            }
            opts.set(&key, value.trim())?;
        }
        Ok(opts)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Fills every unset field from `file`.
    pub fn or(self, file: Options) -> Options {
        Options {
            config: self.config,
            n: self.n.or(file.n),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            tol: self.tol.or(file.tol),
            seed: self.seed.or(file.seed),
            weight: self.weight.or(file.weight),
            family: self.family.or(file.family),
            t: self.t.or(file.t),
            s: self.s.or(file.s),
            alpha: self.alpha.or(file.alpha),
            xi: self.xi.or(file.xi),
            order: self.order.or(file.order),
            x_min: self.x_min.or(file.x_min),
            x_max: self.x_max.or(file.x_max),
            x_step: self.x_step.or(file.x_step),
            t_min: self.t_min.or(file.t_min),
            t_max: self.t_max.or(file.t_max),
            t_step: self.t_step.or(file.t_step),
            s_min: self.s_min.or(file.s_min),
            s_max: self.s_max.or(file.s_max),
            s_step: self.s_step.or(file.s_step),
            step: self.step.or(file.step),
            criteria: self.criteria.or(file.criteria),
        }
    }

    /// Flags merged over the config file, then validated.
    pub fn resolve(self) -> Result<Options, CliError> {
        let merged = match &self.config {
            Some(path) => {
                let file = Options::from_file(path)?;
                self.or(file)
            }
            None => self,
        };
        merged.validate()?;
        Ok(merged)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(n) = self.n {
            if !(16..=2000).contains(&n) {
                return Err(CliError::Usage(format!("n = {n} outside 16..=2000")));
            }
        }
        let positive = [
            ("tol", self.tol),
            ("x-step", self.x_step),
            ("t-step", self.t_step),
            ("s-step", self.s_step),
            ("step", self.step),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
                }
            }
        }
        let finite = [
            ("t", self.t),
            ("s", self.s),
            ("alpha", self.alpha),
            ("xi", self.xi),
            ("x-min", self.x_min),
            ("x-max", self.x_max),
            ("t-min", self.t_min),
            ("t-max", self.t_max),
            ("s-min", self.s_min),
            ("s-max", self.s_max),
        ];
        for (name, v) in finite {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(CliError::Usage(format!("{name} must be finite")));
                }
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }
}

/// `lo, lo + step, ..., hi` (inclusive up to rounding).
pub fn axis(name: &str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(hi >= lo) {
        return Err(CliError::Usage(format!("{name}: max {hi} is below min {lo}")));
    }
    let m = ((hi - lo) / step + 1e-9).floor() as usize;
    if m > 100_000 {
        return Err(CliError::Usage(format!("{name}: {m} points is too many")));
    }
    Ok((0..=m).map(|k| lo + step * k as f64).collect())
}
