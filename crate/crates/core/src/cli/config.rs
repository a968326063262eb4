use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::{parse_rational, ExprError};
use crate::field_tower::{Caps, FieldDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum JobMode {
    Classify,
    Tower,
    Period,
    VerifyAll,
}

/// Inclusive ranges of integer valuations v(a_1), v(a_2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub v1: (i64, i64),
    pub v2: (i64, i64),
}

impl Grid {
    /// "LO:HI,LO:HI"
    pub fn parse(s: &str) -> Result<Grid, ConfigError> {
        let bad = || ConfigError::Grid(s.to_string());
        let range = |r: &str| -> Result<(i64, i64), ConfigError> {
            let (a, b) = r.trim().split_once(':').ok_or_else(bad)?;
            let (a, b): (i64, i64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            if a > b {
                return Err(bad());
            }
            Ok((a, b))
        };
        let (r1, r2) = s.split_once(',').ok_or_else(bad)?;
        Ok(Grid {
            v1: range(r1)?,
            v2: range(r2)?,
        })
    }

    pub fn pairs(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for v1 in self.v1.0..=self.v1.1 {
            for v2 in self.v2.0..=self.v2.1 {
                out.push((v1, v2));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobConfig {
    pub p: u32,
    pub m: u32,
    /// a_1, ..., a_r as rational functions in theta.
    pub coefficients: Vec<String>,
    /// Number of expansion terms per root.
    pub precision: u32,
    /// Tower depth; `None` means n+4 in case B and 6 otherwise.
    pub depth: Option<u32>,
    pub caps: Caps,
    pub mode: JobMode,
    pub grid: Option<Grid>,
    pub sequential: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("reading {0}: {1}")]
    Io(String, String),
    #[error("config file: {0}")]
    Toml(String),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field F_{p}^{m} is too large")]
    FieldTooLarge { p: u32, m: u32 },
    #[error("no coefficients given (rank must be at least 1)")]
    NoCoefficients,
    #[error("a_{0} must be nonzero")]
    LeadingZero(usize),
    #[error("a_{index}: {source}")]
    Expr {
        index: usize,
        #[source]
        source: ExprError,
    },
    #[error("bad grid {0:?}, expected LO:HI,LO:HI")]
    Grid(String),
    #[error("a grid job needs rank 2 (got {0} coefficients)")]
    GridRank(usize),
    #[error("bad value {1:?} for {0}")]
    Env(String, String),
}

#[derive(Parser, Debug, Default, Clone)]
#[command(
    name = "drinfeld",
    version,
    about = "Torsion towers, Newton polygons and periods of Drinfeld modules over F_q((1/theta))"
)]
pub struct Args {
    /// TOML job file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field size q = p^m
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a4: Option<String>,
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long = "max-e")]
    pub max_e: Option<u32>,
    #[arg(long = "max-s")]
    pub max_s: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<JobMode>,
    /// Iterate integer valuations: "V1LO:V1HI,V2LO:V2HI"
    #[arg(long)]
    pub grid: Option<String>,
    /// Write the JSON report here
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Run every stage on one thread
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    q: Option<u64>,
    p: Option<u32>,
    m: Option<u32>,
    a: Option<Vec<String>>,
    precision: Option<u32>,
    depth: Option<u32>,
    max_e: Option<u32>,
    max_s: Option<u32>,
    mode: Option<JobMode>,
    grid: Option<String>,
    sequential: Option<bool>,
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn split_prime_power(q: u64) -> Result<(u32, u32), ConfigError> {
    let p = (2..=q)
        .find(|d| q.is_multiple_of(*d))
        .ok_or(ConfigError::NotPrimePower(q))?;
    let (mut r, mut m) = (q, 0u32);
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    if r != 1 {
        return Err(ConfigError::NotPrimePower(q));
    }
    Ok((p as u32, m))
}

fn env_cap(name: &str) -> Result<Option<u32>, ConfigError> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::Env(name.to_string(), v)),
        Err(_) => Ok(None),
    }
}

impl JobConfig {
    /// Job from TOML text alone.
    pub fn from_toml(text: &str) -> Result<JobConfig, ConfigError> {
        merge(Some(text), &Args::default())
    }
}

/// Flags over file over environment over defaults.
pub fn parse_config(args: &Args) -> Result<JobConfig, ConfigError> {
    let text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?,
        ),
        None => None,
    };
    merge(text.as_deref(), args)
}

fn merge(text: Option<&str>, args: &Args) -> Result<JobConfig, ConfigError> {
    let file: FileConfig = match text {
        Some(t) => toml::from_str(t).map_err(|e| ConfigError::Toml(e.to_string()))?,
        None => FileConfig::default(),
    };
    let (p, m) = match (args.q, args.p, file.q, file.p) {
        (Some(q), ..) => split_prime_power(q)?,
        (None, Some(p), ..) => (p, args.m.unwrap_or(1)),
        (None, None, Some(q), _) => split_prime_power(q)?,
        (None, None, None, Some(p)) => (p, file.m.unwrap_or(1)),
        (None, None, None, None) => (2, 1),
    };
    let m = if args.q.is_none() && args.p.is_none() {
        args.m.unwrap_or(m)
    } else {
        m
    };
    if !is_prime(p as u64) {
        return Err(ConfigError::NotPrime(p));
    }
    if m == 0 || (p as f64).powi(m as i32) > 65536.0 {
        return Err(ConfigError::FieldTooLarge { p, m });
    }
    let mut coefficients = file.a.unwrap_or_default();
    for (i, a) in [&args.a1, &args.a2, &args.a3, &args.a4]
        .into_iter()
        .enumerate()
    {
        if let Some(a) = a {
            if coefficients.len() <= i {
                coefficients.resize(i + 1, "0".to_string());
            }
            coefficients[i] = a.clone();
        }
    }
    let mut caps = Caps::default();
    if let Some(e) = env_cap("DRINFELD_MAX_E")? {
        caps.max_e = e;
    }
    if let Some(s) = env_cap("DRINFELD_MAX_S")? {
        caps.max_s = s;
    }
    caps.max_e = args.max_e.or(file.max_e).unwrap_or(caps.max_e);
    caps.max_s = args.max_s.or(file.max_s).unwrap_or(caps.max_s);
    let grid = match args.grid.as_deref().or(file.grid.as_deref()) {
        Some(g) => Some(Grid::parse(g)?),
        None => None,
    };
    let cfg = JobConfig {
        p,
        m,
        coefficients,
        precision: args.precision.or(file.precision).unwrap_or(64),
        depth: args.depth.or(file.depth),
        caps,
        mode: args.mode.or(file.mode).unwrap_or(JobMode::VerifyAll),
        grid,
        sequential: args.sequential || file.sequential.unwrap_or(false),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &JobConfig) -> Result<(), ConfigError> {
    let field = FieldDescriptor::canonical(cfg.p, cfg.m)
        .map_err(|_| ConfigError::FieldTooLarge { p: cfg.p, m: cfg.m })?;
    if cfg.grid.is_some() {
        return match cfg.coefficients.len() {
            0 | 2 => Ok(()),
            r => Err(ConfigError::GridRank(r)),
        };
    }
    if cfg.coefficients.is_empty() {
        return Err(ConfigError::NoCoefficients);
    }
    for (i, a) in cfg.coefficients.iter().enumerate() {
        let r = parse_rational(a, &field).map_err(|source| ConfigError::Expr {
            index: i + 1,
            source,
        })?;
        if i + 1 == cfg.coefficients.len() && r.is_zero() {
            return Err(ConfigError::LeadingZero(i + 1));
        }
    }
    Ok(())
}
