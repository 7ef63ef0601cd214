use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{CommandKind, RunConfig};
use crate::wick::Enumeration;

/// Experiments on the total variation distance between blocks of Haar
/// orthogonal matrices and Gaussian matrices.
#[derive(Debug, Parser)]
#[command(name = "haartv", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Base seed; sample i uses stream i of this seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Worker threads, 0 = one per core (never changes results)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Where results.csv and manifest.json go [env: HAARTV_OUTPUT_DIR]
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Also write plot.svg (tv and sweep)
    #[arg(long, global = true)]
    pub plot: bool,
    /// JSON config, or a manifest.json from an earlier run; flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact E tr (XᵀX)^h against its leading term
    Moments(MomentArgs),
    /// Exact Cov(tr (XᵀX)^h, tr (XᵀX)^k) against its three-term expansion
    Cov(CovArgs),
    /// Ballot sequence pair counts against Narayana numbers
    Ballot(BallotArgs),
    /// Monte Carlo total variation for each (n, p, q)
    Tv(GridArgs),
    /// The sharp-threshold profile φ(x, y)
    Phi(PhiArgs),
    /// Diaconis–Freedman bound 2(k+3)/(n-k-3)
    DfBound(DfBoundArgs),
    /// log K_n against its large-n expansion
    KnCheck(SpecArgs),
    /// log K_n + Σ E_j
    CancelCheck(SpecArgs),
    /// Largest Wishart eigenvalue over p
    Eigmax(EigmaxArgs),
    /// KS distance of a scaled sphere coordinate from N(0,1)
    Sphere(SphereArgs),
    /// tv over a grid of (n, p, q), with optional plot
    Sweep(GridArgs),
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Maximum tuples the exact enumeration may visit
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, value_enum)]
    pub strategy: Option<Enumeration>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<u64>,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct CovArgs {
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct BallotArgs {
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Add φ(p/√n, q/√n) as phi_reference
    #[arg(long)]
    pub sqrt_regime: bool,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub y: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct DfBoundArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct EigmaxArgs {
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SphereArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
}

fn set_list<T: Clone>(target: &mut Vec<T>, flag: &[T]) {
    if !flag.is_empty() {
        *target = flag.to_vec();
    }
}

fn set_spec(cfg: &mut RunConfig, spec: &SpecArgs) {
    set_list(&mut cfg.n, &spec.n);
    set_list(&mut cfg.p, &spec.p);
    set_list(&mut cfg.q, &spec.q);
}

fn set_oracle(cfg: &mut RunConfig, oracle: &OracleArgs) {
    if let Some(b) = oracle.budget {
        cfg.budget = b;
    }
    if let Some(s) = oracle.strategy {
        cfg.strategy = s;
    }
}

impl Cli {
    /// Layers the flags over `base` (a loaded config file or the defaults).
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        let c = &self.common;
        if let Some(v) = c.seed {
            cfg.seed = v;
        }
        if let Some(v) = c.samples {
            cfg.samples = v;
        }
        if let Some(v) = c.workers {
            cfg.workers = v;
        }
        if let Some(v) = &c.output_dir {
            cfg.output_dir = Some(v.clone());
        }
        cfg.plot |= c.plot;
        let Some(command) = &self.command else {
            return cfg;
        };
        let kind = match command {
            Command::Moments(a) => {
                set_list(&mut cfg.p, &a.p);
                set_list(&mut cfg.q, &a.q);
                set_list(&mut cfg.h, &a.h);
                set_oracle(&mut cfg, &a.oracle);
                CommandKind::Moments
            }
            Command::Cov(a) => {
                set_list(&mut cfg.p, &a.p);
                set_list(&mut cfg.q, &a.q);
                set_list(&mut cfg.h, &a.h);
                set_list(&mut cfg.k, &a.k);
                set_oracle(&mut cfg, &a.oracle);
                CommandKind::Cov
            }
            Command::Ballot(a) => {
                set_list(&mut cfg.h, &a.h);
                CommandKind::Ballot
            }
            Command::Tv(a) | Command::Sweep(a) => {
                set_spec(&mut cfg, &a.spec);
                cfg.sqrt_regime |= a.sqrt_regime;
                if matches!(command, Command::Tv(_)) {
                    CommandKind::Tv
                } else {
                    CommandKind::Sweep
                }
            }
            Command::Phi(a) => {
                set_list(&mut cfg.x, &a.x);
                set_list(&mut cfg.y, &a.y);
                CommandKind::Phi
            }
            Command::DfBound(a) => {
                set_list(&mut cfg.n, &a.n);
                set_list(&mut cfg.k, &a.k);
                CommandKind::DfBound
            }
            Command::KnCheck(a) => {
                set_spec(&mut cfg, a);
                CommandKind::KnCheck
            }
            Command::CancelCheck(a) => {
                set_spec(&mut cfg, a);
                CommandKind::CancelCheck
            }
            Command::Eigmax(a) => {
                set_list(&mut cfg.p, &a.p);
                set_list(&mut cfg.q, &a.q);
                CommandKind::Eigmax
            }
            Command::Sphere(a) => {
                set_list(&mut cfg.n, &a.n);
                CommandKind::Sphere
            }
        };
        cfg.command = Some(kind);
        cfg
    }
}
