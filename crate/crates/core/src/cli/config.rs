use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::wick::{Enumeration, DEFAULT_BUDGET};

pub const OUTPUT_DIR_ENV: &str = "HAARTV_OUTPUT_DIR";
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Moments,
    Cov,
    Ballot,
    Tv,
    Phi,
    DfBound,
    KnCheck,
    CancelCheck,
    Eigmax,
    Sphere,
    Sweep,
}

/// Everything needed to reproduce a run. Stored verbatim in the manifest;
/// JSON config files use the same field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    pub n: Vec<u64>,
    pub p: Vec<u64>,
    pub q: Vec<u64>,
    pub h: Vec<u64>,
    pub k: Vec<u64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// `0` means one worker per core; results do not depend on it.
    pub workers: usize,
    pub output_dir: Option<PathBuf>,
    pub plot: bool,
    /// Fill `phi_reference` with `φ(p/√n, q/√n)` in tv/sweep rows.
    pub sqrt_regime: bool,
    pub budget: u64,
    pub strategy: Enumeration,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            n: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            h: Vec::new(),
            k: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            workers: 0,
            output_dir: None,
            plot: false,
            sqrt_regime: false,
            budget: DEFAULT_BUDGET as u64,
            strategy: Enumeration::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file, or the `config` entry of a run manifest.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value)
            .with_context(|| format!("config fields in {}", path.display()))
    }

    pub fn command(&self) -> anyhow::Result<CommandKind> {
        self.command
            .context("no command given (pass a subcommand or a config with \"command\")")
    }

    /// Flag, then config file, then `HAARTV_OUTPUT_DIR`, then the current
    /// directory.
    pub fn resolve_output_dir(&mut self) {
        if self.output_dir.is_none() {
            self.output_dir = Some(
                std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from),
            );
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let command = self.command()?;
        let need = |name: &str, len: usize| -> anyhow::Result<()> {
            if len == 0 {
                bail!("{command:?} needs a non-empty --{name} list");
            }
            Ok(())
        };
        let positive = |name: &str, values: &[u64]| -> anyhow::Result<()> {
            if values.contains(&0) {
                bail!("--{name} values must be positive");
            }
            Ok(())
        };
        use CommandKind::*;
        match command {
            Moments => {
                need("p", self.p.len())?;
                need("q", self.q.len())?;
                need("h", self.h.len())?;
            }
            Cov => {
                need("p", self.p.len())?;
                need("q", self.q.len())?;
                need("h", self.h.len())?;
                need("k", self.k.len())?;
            }
            Ballot => need("h", self.h.len())?,
            Phi => {
                need("x", self.x.len())?;
                need("y", self.y.len())?;
                if self
                    .x
                    .iter()
                    .chain(&self.y)
                    .any(|v| !(v.is_finite() && *v >= 0.0))
                {
                    bail!("--x and --y must be finite and nonnegative");
                }
            }
            DfBound => {
                need("n", self.n.len())?;
                need("k", self.k.len())?;
            }
            Tv | Sweep | KnCheck | CancelCheck => {
                need("n", self.n.len())?;
                need("p", self.p.len())?;
                need("q", self.q.len())?;
            }
            Eigmax => {
                need("p", self.p.len())?;
                need("q", self.q.len())?;
            }
            Sphere => need("n", self.n.len())?,
        }
        for (name, values) in [
            ("n", &self.n),
            ("p", &self.p),
            ("q", &self.q),
            ("h", &self.h),
            ("k", &self.k),
        ] {
            positive(name, values)?;
        }
        if self.samples == 0 {
            bail!("--samples must be positive");
        }
        if self.budget == 0 {
            bail!("--budget must be positive");
        }
        Ok(())
    }
}
