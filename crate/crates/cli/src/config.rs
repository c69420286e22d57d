//! Run configuration: command-line flags, then a TOML file whose values win.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;

use radsum_core::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// beta = 1/200, 50 iterations; builds in about a minute
    Desk,
    /// beta = 1/2000, 1000 iterations; hours of compute
    Full,
}

impl Scale {
    pub fn grid(self) -> GridSpec {
        match self {
            Scale::Desk => GridSpec::desk(),
            Scale::Full => GridSpec::full(),
        }
    }
}

/// Values accepted in the `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scale: Option<Scale>,
    pub table: Option<PathBuf>,
    pub table_dir: Option<PathBuf>,
    pub case_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub time_budget_secs: Option<u64>,
    pub memory_budget_mb: Option<usize>,
    pub search_budget: Option<u64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scale: Scale,
    /// Explicit table file; otherwise the cache in `table_dir` is used.
    pub table: Option<PathBuf>,
    pub table_dir: PathBuf,
    pub case_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub time_budget: Option<Duration>,
    pub memory_budget_mb: Option<usize>,
    pub search_budget: Option<u64>,
    pub samples: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn apply(&mut self, f: FileConfig) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = f.$field {
                    self.$field = v;
                }
            };
            ($field:ident, opt) => {
                if f.$field.is_some() {
                    self.$field = f.$field;
                }
            };
        }
        take!(scale);
        take!(table, opt);
        take!(table_dir);
        take!(case_dir, opt);
        take!(out_dir);
        take!(threads, opt);
        take!(memory_budget_mb, opt);
        take!(search_budget, opt);
        take!(samples);
        take!(seed);
        if let Some(s) = f.time_budget_secs {
            self.time_budget = Some(Duration::from_secs(s));
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            bail!("samples must be positive");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        Ok(())
    }

    /// Grid for the configured scale with the memory budget applied.
    pub fn grid(&self) -> GridSpec {
        let mut spec = self.scale.grid();
        if let Some(mb) = self.memory_budget_mb {
            spec.memory_budget_bytes = mb << 20;
        }
        spec
    }
}
