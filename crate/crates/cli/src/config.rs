//! Flat key=value run configuration. A config file seeds the values and
//! command-line flags win; the resolved snapshot is stored alongside every
//! report so a run can be reproduced from its outputs alone.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use qnrnp_core::pipeline::PipelineConfig;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(ConfigError(format!(
                "unknown format {other:?} (expected csv, json, or text)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Text => "text",
        }
    }
}

/// Resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub epsilon: BigRational,
    pub workers: usize,
    pub block_size: u64,
    pub squarefree_only: bool,
    pub format: OutputFormat,
    pub out_dir: PathBuf,
    pub checkpoint_dir: Option<PathBuf>,
    pub scan_limit: Option<u64>,
    pub max_blocks: Option<u64>,
    pub bound: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon: BigRational::new(BigInt::from(1), BigInt::from(4)),
            workers: 0,
            block_size: 1 << 14,
            squarefree_only: true,
            format: OutputFormat::Text,
            out_dir: PathBuf::from("reports"),
            checkpoint_dir: None,
            scan_limit: None,
            max_blocks: None,
            bound: 1_000_000_000,
        }
    }
}

/// Exact fraction strings like "1/4" (decimal notation is rejected on
/// purpose; this is a proof artifact).
pub fn parse_epsilon(s: &str) -> Result<BigRational, ConfigError> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| ConfigError(format!("epsilon must be a fraction like 1/4, got {s:?}")))?;
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|e| ConfigError(format!("epsilon numerator: {e}")))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|e| ConfigError(format!("epsilon denominator: {e}")))?;
    if den <= BigInt::from(0) {
        return Err(ConfigError("epsilon denominator must be positive".into()));
    }
    let eps = BigRational::new(num, den);
    if !qnrnp_core::criteria::epsilon_in_range(&eps) {
        return Err(ConfigError(format!("epsilon {s} outside (0, 1/2)")));
    }
    Ok(eps)
}

pub fn parse_interval(s: &str) -> Result<(u64, u64), ConfigError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| ConfigError(format!("interval must look like LO:HI, got {s:?}")))?;
    let lo: u64 = lo
        .trim()
        .parse()
        .map_err(|e| ConfigError(format!("interval lower bound: {e}")))?;
    let hi: u64 = hi
        .trim()
        .parse()
        .map_err(|e| ConfigError(format!("interval upper bound: {e}")))?;
    if lo > hi {
        return Err(ConfigError("interval lower bound exceeds upper bound".into()));
    }
    Ok((lo, hi))
}

/// Parse a key=value file; later lines win, blank lines and #-comments skip.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!(
                "{}:{}: expected key=value",
                path.display(),
                lineno + 1
            ))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Apply config-file values (flags are applied afterwards by the caller
    /// and therefore win).
    pub fn apply_file(&mut self, kv: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (k, v) in kv {
            match k.as_str() {
                "epsilon" => self.epsilon = parse_epsilon(v)?,
                "workers" => {
                    self.workers = v
                        .parse()
                        .map_err(|e| ConfigError(format!("workers: {e}")))?
                }
                "block_size" => {
                    self.block_size = v
                        .parse()
                        .map_err(|e| ConfigError(format!("block_size: {e}")))?
                }
                "squarefree_only" => {
                    self.squarefree_only = v
                        .parse()
                        .map_err(|e| ConfigError(format!("squarefree_only: {e}")))?
                }
                "format" => self.format = OutputFormat::parse(v)?,
                "out_dir" => self.out_dir = PathBuf::from(v),
                "checkpoint_dir" => self.checkpoint_dir = Some(PathBuf::from(v)),
                "scan_limit" => {
                    self.scan_limit = Some(
                        v.parse()
                            .map_err(|e| ConfigError(format!("scan_limit: {e}")))?,
                    )
                }
                "max_blocks" => {
                    self.max_blocks = Some(
                        v.parse()
                            .map_err(|e| ConfigError(format!("max_blocks: {e}")))?,
                    )
                }
                "bound" => {
                    self.bound = v.parse().map_err(|e| ConfigError(format!("bound: {e}")))?
                }
                other => return Err(ConfigError(format!("unknown config key {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn pipeline(&self, checkpoint_path: Option<PathBuf>) -> PipelineConfig {
        PipelineConfig {
            epsilon: self.epsilon.clone(),
            workers: self.workers,
            block_size: self.block_size,
            squarefree_only: self.squarefree_only,
            checkpoint_path,
            checkpoint_every: 4,
            scan_limit: self.scan_limit,
            max_blocks_per_run: self.max_blocks,
        }
    }

    /// Serialized snapshot, parseable by [`read_config_file`].
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "epsilon={}/{}\n",
            self.epsilon.numer(),
            self.epsilon.denom()
        ));
        out.push_str(&format!("workers={}\n", self.workers));
        out.push_str(&format!("block_size={}\n", self.block_size));
        out.push_str(&format!("squarefree_only={}\n", self.squarefree_only));
        out.push_str(&format!("format={}\n", self.format.name()));
        out.push_str(&format!("out_dir={}\n", self.out_dir.display()));
        if let Some(dir) = &self.checkpoint_dir {
            out.push_str(&format!("checkpoint_dir={}\n", dir.display()));
        }
        if let Some(v) = self.scan_limit {
            out.push_str(&format!("scan_limit={v}\n"));
        }
        if let Some(v) = self.max_blocks {
            out.push_str(&format!("max_blocks={v}\n"));
        }
        out.push_str(&format!("bound={}\n", self.bound));
        out
    }

    pub fn eps_parts(&self) -> (u64, u64) {
        (
            self.epsilon.numer().to_u64().unwrap_or(0),
            self.epsilon.denom().to_u64().unwrap_or(0),
        )
    }
}
