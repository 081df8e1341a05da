use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use ymconc::concentration::MAX_EMPIRICAL_ORDER;
use ymconc::{LatticeShape, DEFAULT_SEED};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every subcommand. Each overrides the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// TOML file with any of the keys below (D, L, N are accepted as aliases).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lattice dimension D.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Lattice extent L.
    #[arg(long, global = true)]
    pub extent: Option<usize>,
    /// Matrix size N.
    #[arg(long, global = true)]
    pub matrix_size: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Highest moment order.
    #[arg(long, global = true)]
    pub lmax: Option<u32>,
    #[arg(long, global = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_max: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_steps: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(alias = "D")]
    dim: Option<usize>,
    #[serde(alias = "L")]
    extent: Option<usize>,
    #[serde(alias = "N")]
    matrix_size: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    lmax: Option<u32>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    lambda_steps: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    workers: Option<usize>,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Validated settings after merging defaults, the config file, and flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dim: usize,
    pub extent: usize,
    pub matrix_size: usize,
    pub seed: u64,
    pub samples: usize,
    pub lmax: u32,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Overrides) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let config = Self {
            command: command.to_owned(),
            dim: flags.dim.or(file.dim).unwrap_or(2),
            extent: flags.extent.or(file.extent).unwrap_or(3),
            matrix_size: flags.matrix_size.or(file.matrix_size).unwrap_or(8),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            samples: flags.samples.or(file.samples).unwrap_or(50_000),
            lmax: flags.lmax.or(file.lmax).unwrap_or(4),
            lambda_min: flags.lambda_min.or(file.lambda_min).unwrap_or(1.0),
            lambda_max: flags.lambda_max.or(file.lambda_max).unwrap_or(8.0),
            lambda_steps: flags.lambda_steps.or(file.lambda_steps).unwrap_or(15),
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or_default(),
            workers: flags.workers.or(file.workers),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        self.shape()?;
        if self.matrix_size == 0 {
            bail!("matrix size must be at least 1");
        }
        if self.samples == 0 {
            bail!("samples must be at least 1");
        }
        if self.lmax == 0 || self.lmax > MAX_EMPIRICAL_ORDER {
            bail!(
                "lmax must be in 1..={MAX_EMPIRICAL_ORDER}, got {}",
                self.lmax
            );
        }
        if (self.lambda_min.is_nan() || self.lambda_min <= 0.0)
            || !self.lambda_max.is_finite()
            || self.lambda_max < self.lambda_min
        {
            bail!(
                "need 0 < lambda_min ≤ lambda_max, got {} and {}",
                self.lambda_min,
                self.lambda_max
            );
        }
        if self.lambda_steps == 0 {
            bail!("lambda_steps must be at least 1");
        }
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<LatticeShape> {
        Ok(LatticeShape::new(self.dim, self.extent)?)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        if self.lambda_steps == 1 {
            return vec![self.lambda_min];
        }
        let step = (self.lambda_max - self.lambda_min) / (self.lambda_steps - 1) as f64;
        (0..self.lambda_steps)
            .map(|i| {
                if i + 1 == self.lambda_steps {
                    self.lambda_max
                } else {
                    self.lambda_min + i as f64 * step
                }
            })
            .collect()
    }

    /// `key=value` pairs echoed at the top of every output.
    pub fn header(&self) -> Vec<(&'static str, String)> {
        vec![
            ("command", self.command.clone()),
            ("D", self.dim.to_string()),
            ("L", self.extent.to_string()),
            ("N", self.matrix_size.to_string()),
            ("seed", self.seed.to_string()),
            ("samples", self.samples.to_string()),
            ("lmax", self.lmax.to_string()),
            ("lambda_min", self.lambda_min.to_string()),
            ("lambda_max", self.lambda_max.to_string()),
            ("lambda_steps", self.lambda_steps.to_string()),
        ]
    }
}
