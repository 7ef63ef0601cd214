//! Batch runner behind the `haartv` binary: every command expands its list
//! flags into a grid, computes one CSV row per point and writes
//! `results.csv` plus `manifest.json` (and `plot.svg` on request).

mod args;
mod config;
mod svg;
mod table;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde::{Deserialize, Serialize};

pub use args::Cli;
pub use config::{CommandKind, RunConfig, DEFAULT_SAMPLES, DEFAULT_SEED, OUTPUT_DIR_ENV};
pub use table::Table;

use crate::density::{
    cancellation_residual, choose_l, ej_sum_asymptotic, log_kn, log_kn_asymptotic, BlockSpec,
    MomentSource,
};
use crate::formulas::{covariance_breakdown, mean_trace_leading, narayana, rational_to_f64};
use crate::numerics::Workers;
use crate::tvlab::{
    df_bound, eigmax_experiment, phi_profile, sphere_coordinate_experiment, tv_estimate,
};
use crate::wick::{count_valid_ballot_pairs, Oracle, TraceMomentQuery};
use table::{fmt_f64, fmt_int, fmt_rational};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PLOT_FILE: &str = "plot.svg";

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub config: RunConfig,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub failed_rows: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
    pub plot_path: Option<PathBuf>,
}

impl RunOutcome {
    pub fn all_rows_ok(&self) -> bool {
        self.record.failed_rows == 0
    }
}

fn oracle(cfg: &RunConfig) -> Oracle {
    Oracle {
        budget: cfg.budget as u128,
        strategy: cfg.strategy,
        workers: Workers(cfg.workers),
    }
}

fn keys(values: &[u64]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn grid3<'a>(
    a: &'a [u64],
    b: &'a [u64],
    c: &'a [u64],
) -> impl Iterator<Item = (u64, u64, u64)> + 'a {
    a.iter().flat_map(move |&x| {
        b.iter()
            .flat_map(move |&y| c.iter().map(move |&z| (x, y, z)))
    })
}

fn to_u32(v: u64, name: &str) -> anyhow::Result<u32> {
    u32::try_from(v).with_context(|| format!("{name} = {v} is too large"))
}

/// Computes the table for `cfg` without touching the filesystem.
pub fn compute(cfg: &RunConfig) -> anyhow::Result<Table> {
    let workers = Workers(cfg.workers);
    let table = match cfg.command()? {
        CommandKind::Moments => {
            let mut t = Table::new(
                &["p", "q", "h"],
                &["exact", "leading", "envelope", "relative_gap"],
            );
            let oracle = oracle(cfg);
            for (p, q, h) in grid3(&cfg.p, &cfg.q, &cfg.h) {
                let row = (|| {
                    let exact =
                        oracle.trace_moment(TraceMomentQuery::new(p, q, to_u32(h, "h")?)?)?;
                    let lead = mean_trace_leading(p, q, h)?;
                    let exact_f = exact.0.to_string().parse::<f64>()?;
                    Ok(vec![
                        exact.0.to_string(),
                        fmt_rational(&lead.main_term),
                        fmt_f64(lead.relative_error_envelope),
                        fmt_f64((lead.main_f64() / exact_f - 1.0).abs()),
                    ])
                })();
                t.push(keys(&[p, q, h]), row);
            }
            t
        }
        CommandKind::Cov => {
            let mut t = Table::new(
                &["p", "q", "h", "k"],
                &[
                    "exact",
                    "three_term_sum",
                    "term1",
                    "term2",
                    "term2_formula",
                    "term3",
                    "simplified_main",
                    "authoritative_main",
                    "e_envelope",
                    "f_envelope",
                    "relative_gap",
                ],
            );
            let oracle = oracle(cfg);
            for (p, q, h) in grid3(&cfg.p, &cfg.q, &cfg.h) {
                for &k in &cfg.k {
                    let row = (|| {
                        let exact =
                            oracle.trace_covariance(p, q, to_u32(h, "h")?, to_u32(k, "k")?)?;
                        let b = covariance_breakdown(p, q, h.min(k), h.max(k))?;
                        let sum = b.three_term_sum();
                        let exact_f = exact.0.to_string().parse::<f64>()?;
                        Ok(vec![
                            exact.0.to_string(),
                            fmt_rational(&sum),
                            fmt_rational(&b.term1),
                            fmt_rational(&b.term2),
                            fmt_rational(&b.term2_formula),
                            fmt_rational(&b.term3),
                            fmt_rational(&b.simplified_main),
                            fmt_rational(&b.authoritative_main()),
                            fmt_f64(b.e_envelope),
                            fmt_f64(b.f_envelope),
                            fmt_f64((rational_to_f64(&sum) / exact_f - 1.0).abs()),
                        ])
                    })();
                    t.push(keys(&[p, q, h, k]), row);
                }
            }
            t
        }
        CommandKind::Ballot => {
            let mut t = Table::new(&["h", "r"], &["ballot_count", "narayana"]);
            for &h in &cfg.h {
                for r in 0..h {
                    let row = (|| {
                        let count = count_valid_ballot_pairs(to_u32(h, "h")?, to_u32(r, "r")?)?;
                        Ok(vec![fmt_int(count), narayana(h, r)?.to_string()])
                    })();
                    t.push(keys(&[h, r]), row);
                }
            }
            t
        }
        CommandKind::Tv | CommandKind::Sweep => {
            let mut t = Table::new(
                &["n", "p", "q", "samples", "seed"],
                &[
                    "tv_mean",
                    "tv_stderr",
                    "norm_mean",
                    "norm_stderr",
                    "df_bound",
                    "phi_reference",
                ],
            );
            for (n, p, q) in grid3(&cfg.n, &cfg.p, &cfg.q) {
                let row = (|| {
                    let spec = BlockSpec::new(n, p, q)?;
                    let est = tv_estimate(spec, cfg.samples, cfg.seed, workers)?;
                    // the first column of a Haar matrix is uniform on the sphere
                    let df = if q == 1 {
                        df_bound(n, p).map(fmt_f64).unwrap_or_default()
                    } else {
                        String::new()
                    };
                    let phi = if cfg.sqrt_regime {
                        let root = (n as f64).sqrt();
                        fmt_f64(phi_profile(p as f64 / root, q as f64 / root))
                    } else {
                        String::new()
                    };
                    Ok(vec![
                        fmt_f64(est.mean),
                        fmt_f64(est.stderr),
                        fmt_f64(est.normalization_mean),
                        fmt_f64(est.normalization_stderr),
                        df,
                        phi,
                    ])
                })();
                t.push(keys(&[n, p, q, cfg.samples as u64, cfg.seed]), row);
            }
            t
        }
        CommandKind::Phi => {
            let mut t = Table::new(&["x", "y"], &["phi"]);
            for &x in &cfg.x {
                for &y in &cfg.y {
                    t.push(
                        vec![fmt_f64(x), fmt_f64(y)],
                        Ok(vec![fmt_f64(phi_profile(x, y))]),
                    );
                }
            }
            t
        }
        CommandKind::DfBound => {
            let mut t = Table::new(&["n", "k"], &["bound"]);
            for &n in &cfg.n {
                for &k in &cfg.k {
                    t.push(
                        keys(&[n, k]),
                        df_bound(n, k).map(|b| vec![fmt_f64(b)]).map_err(Into::into),
                    );
                }
            }
            t
        }
        CommandKind::KnCheck => {
            let mut t = Table::new(
                &["n", "p", "q"],
                &["l", "log_kn", "log_kn_asymptotic", "abs_gap"],
            );
            for (n, p, q) in grid3(&cfg.n, &cfg.p, &cfg.q) {
                let row = (|| {
                    let spec = BlockSpec::new(n, p, q)?;
                    let l = choose_l(spec)?;
                    let exact = log_kn(spec)?;
                    let asym = log_kn_asymptotic(spec, l)?;
                    Ok(vec![
                        fmt_int(l.get()),
                        fmt_f64(exact),
                        fmt_f64(asym),
                        fmt_f64((exact - asym).abs()),
                    ])
                })();
                t.push(keys(&[n, p, q]), row);
            }
            t
        }
        CommandKind::CancelCheck => {
            let mut t = Table::new(
                &["n", "p", "q"],
                &[
                    "l",
                    "log_kn",
                    "ej_sum",
                    "residual",
                    "approximate",
                    "ej_sum_asymptotic",
                ],
            );
            let source = MomentSource::Auto(oracle(cfg));
            for (n, p, q) in grid3(&cfg.n, &cfg.p, &cfg.q) {
                let row = (|| {
                    let spec = BlockSpec::new(n, p, q)?;
                    let report = cancellation_residual(spec, &source)?;
                    let l = choose_l(spec)?;
                    Ok(vec![
                        fmt_int(report.l),
                        fmt_f64(report.log_kn),
                        fmt_f64(report.residual - report.log_kn),
                        fmt_f64(report.residual),
                        report.approximate.to_string(),
                        fmt_f64(ej_sum_asymptotic(spec, l)?),
                    ])
                })();
                t.push(keys(&[n, p, q]), row);
            }
            t
        }
        CommandKind::Eigmax => {
            let mut t = Table::new(
                &["p", "q", "samples", "seed"],
                &[
                    "max_ratio",
                    "mean_ratio",
                    "q05",
                    "q50",
                    "q95",
                    "crude_bound",
                    "bai_silverstein",
                ],
            );
            for &p in &cfg.p {
                for &q in &cfg.q {
                    let row = (|| {
                        let r = eigmax_experiment(p, q, cfg.samples, cfg.seed, workers)?;
                        let mut cells = vec![fmt_f64(r.max_ratio), fmt_f64(r.mean_ratio)];
                        cells.extend(r.quantiles.iter().map(|&(_, v)| fmt_f64(v)));
                        cells.push(fmt_f64(r.crude_bound));
                        cells.push(fmt_f64(r.bai_silverstein));
                        Ok(cells)
                    })();
                    t.push(keys(&[p, q, cfg.samples as u64, cfg.seed]), row);
                }
            }
            t
        }
        CommandKind::Sphere => {
            let mut t = Table::new(&["n", "samples", "seed"], &["ks"]);
            for &n in &cfg.n {
                let row = sphere_coordinate_experiment(n, cfg.samples, cfg.seed, workers)
                    .map(|ks| vec![fmt_f64(ks)])
                    .map_err(Into::into);
                t.push(keys(&[n, cfg.samples as u64, cfg.seed]), row);
            }
            t
        }
    };
    Ok(table)
}

fn csv_bytes(table: &Table) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner()?)
}

fn plot_series(table: &Table) -> Vec<svg::Series> {
    let col = |name| table.column(name).expect("tv table column");
    let (n, p, q, mean, se) = (
        col("n"),
        col("p"),
        col("q"),
        col("tv_mean"),
        col("tv_stderr"),
    );
    let mut series: Vec<svg::Series> = Vec::new();
    for row in table.rows.iter().filter(|r| !r[mean].is_empty()) {
        let label = format!("p={} q={}", row[p], row[q]);
        let point = (
            row[n].parse().unwrap_or(f64::NAN),
            row[mean].parse().unwrap_or(f64::NAN),
            row[se].parse().unwrap_or(f64::NAN),
        );
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(svg::Series {
                label,
                points: vec![point],
            }),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    series
}

/// Runs a validated config and writes its artifacts.
pub fn run(mut cfg: RunConfig) -> anyhow::Result<RunOutcome> {
    cfg.resolve_output_dir();
    cfg.validate()?;
    let started = Instant::now();
    let table = compute(&cfg)?;
    let elapsed_seconds = started.elapsed().as_secs_f64();

    let dir = cfg.output_dir.clone().expect("resolved above");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let results_path = dir.join(RESULTS_FILE);
    fs::write(&results_path, csv_bytes(&table)?)
        .with_context(|| format!("writing {}", results_path.display()))?;

    let plot_path = if cfg.plot && matches!(cfg.command()?, CommandKind::Tv | CommandKind::Sweep) {
        let path = dir.join(PLOT_FILE);
        let title = "total variation, mean ± 2 stderr";
        fs::write(&path, svg::render(title, &plot_series(&table)))
            .with_context(|| format!("writing {}", path.display()))?;
        Some(path)
    } else {
        None
    };

    let record = RunRecord {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        config: cfg,
        header: table.header.clone(),
        rows: table.rows.clone(),
        failed_rows: table.failed,
        elapsed_seconds,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&record)? + "\n",
    )
    .with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(RunOutcome {
        record,
        results_path,
        manifest_path,
        plot_path,
    })
}

/// 95% bands for tv rows, one line each.
fn print_bands(record: &RunRecord) {
    let col = |name: &str| record.header.iter().position(|h| h == name);
    let (Some(n), Some(p), Some(q), Some(mean), Some(se)) = (
        col("n"),
        col("p"),
        col("q"),
        col("tv_mean"),
        col("tv_stderr"),
    ) else {
        return;
    };
    for row in &record.rows {
        let (Ok(m), Ok(s)) = (row[mean].parse::<f64>(), row[se].parse::<f64>()) else {
            continue;
        };
        println!(
            "n={} p={} q={}: tv = {m:.6} ± {:.6} (95% band [{:.6}, {:.6}])",
            row[n],
            row[p],
            row[q],
            1.96 * s,
            m - 1.96 * s,
            m + 1.96 * s
        );
    }
}

/// Entry point used by the binary. Returns `Ok(false)` when some rows
/// failed (the files are still written).
pub fn main_with_args<I, T>(args: I) -> anyhow::Result<bool>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    let base = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let outcome = run(cli.apply(base))?;
    print_bands(&outcome.record);
    println!("wrote {}", outcome.results_path.display());
    println!("wrote {}", outcome.manifest_path.display());
    if let Some(plot) = &outcome.plot_path {
        println!("wrote {}", plot.display());
    }
    let error_col = outcome.record.header.len() - 1;
    for row in outcome
        .record
        .rows
        .iter()
        .filter(|r| !r[error_col].is_empty())
    {
        eprintln!("row {:?} failed: {}", &row[..error_col], row[error_col]);
    }
    Ok(outcome.all_rows_ok())
}
