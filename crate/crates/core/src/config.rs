//! Run configuration shared by the library entry points and the CLI.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::proofsearch::{CensusConfig, SolverConfig, ValidityRule};
use crate::raygen::DEFAULT_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Mismatch(format!("unknown output format `{other}`"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub threshold: f64,
    pub enumeration_cap: usize,
    pub node_budget: u64,
    pub seed: u64,
    /// Kernel samples drawn for families too large to enumerate.
    pub samples: u64,
    pub cache_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub rule: ValidityRule,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            threshold: DEFAULT_THRESHOLD,
            enumeration_cap: 26,
            node_budget: 10_000_000,
            seed: 0,
            samples: 200_000,
            cache_dir: None,
            format: OutputFormat::default(),
            rule: ValidityRule::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 0.5) {
            return Err(Error::Mismatch(format!(
                "threshold {} must lie in (0, 0.5)",
                self.threshold
            )));
        }
        if self.enumeration_cap == 0 || self.enumeration_cap > 40 {
            return Err(Error::Mismatch(format!(
                "enumeration cap {} must lie in 1..=40",
                self.enumeration_cap
            )));
        }
        if self.node_budget == 0 || self.samples == 0 {
            return Err(Error::Mismatch(
                "node budget and sample count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            rule: self.rule,
            node_budget: self.node_budget,
        }
    }

    pub fn census(&self) -> CensusConfig {
        CensusConfig {
            enumeration_cap: self.enumeration_cap,
            solver: self.solver(),
            seed: self.seed,
            samples: self.samples,
        }
    }
}
