//! Monte Carlo experiments: total variation between the scaled Haar block
//! and a Gaussian matrix, the sharp-threshold profile `φ`, largest
//! eigenvalues of Wishart matrices and single sphere coordinates.
//!
//! Every sample `i` draws from its own stream `(seed, i)` and reductions run
//! in fixed chunk order, so results never depend on the worker count.

use serde::{Deserialize, Serialize};

use crate::density::{eaton_log_density, log_kn, log_l, BlockSpec};
use crate::numerics::{
    abs_expm1, gaussian_block, gram, haar_columns, map_chunked, map_reduce_kahan,
    standard_normal_cdf, symmetric_eigenvalues, KahanSum, Matrix, RngStream, Workers, CHUNK_LEN,
};
use crate::{Error, Result};

pub const MIN_TV_SAMPLES: usize = 100;

/// Estimate of `E|K_n L_n - 1|` under the Gaussian measure, plus the
/// normalization check `E[K_n L_n] = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub spec: BlockSpec,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub normalization_mean: f64,
    pub normalization_stderr: f64,
}

impl TvEstimate {
    /// Two-sided 95% normal band around the mean.
    pub fn band95(&self) -> (f64, f64) {
        (
            self.mean - 1.96 * self.stderr,
            self.mean + 1.96 * self.stderr,
        )
    }
}

fn mean_and_stderr(sum: KahanSum, sum_sq: KahanSum, m: usize) -> (f64, f64) {
    let mf = m as f64;
    let mean = sum.value() / mf;
    let var = ((sum_sq.value() - mf * mean * mean) / (mf - 1.0)).max(0.0);
    (mean, (var / mf).sqrt())
}

/// `log K_n L_n` for one Gaussian block; `None` if the eigensolver failed.
fn sample_log_ratio(spec: BlockSpec, log_k: f64, rng: &RngStream) -> Option<f64> {
    let z = gaussian_block(spec.p as usize, spec.q as usize, rng);
    let spectrum = symmetric_eigenvalues(&gram(&z)).ok()?;
    Some(log_k + log_l(&spectrum, spec))
}

pub fn tv_estimate(
    spec: BlockSpec,
    samples: usize,
    seed: u64,
    workers: Workers,
) -> Result<TvEstimate> {
    if samples < MIN_TV_SAMPLES {
        return Err(Error::invalid(format!(
            "tv estimate needs at least {MIN_TV_SAMPLES} samples, got {samples}"
        )));
    }
    let log_k = log_kn(spec)?;
    let [abs_sum, abs_sq, ratio_sum, ratio_sq, failures] =
        map_reduce_kahan(samples, workers, |i| {
            match sample_log_ratio(spec, log_k, &RngStream::new(seed, i as u64)) {
                Some(lr) => {
                    let dev = abs_expm1(lr);
                    let ratio = lr.exp();
                    [dev, dev * dev, ratio, ratio * ratio, 0.0]
                }
                None => [0.0, 0.0, 0.0, 0.0, 1.0],
            }
        })?;
    if failures.value() > 0.0 {
        return Err(Error::invalid(format!(
            "eigensolver failed on {} of {samples} samples",
            failures.value()
        )));
    }
    let (mean, stderr) = mean_and_stderr(abs_sum, abs_sq, samples);
    let (normalization_mean, normalization_stderr) = mean_and_stderr(ratio_sum, ratio_sq, samples);
    Ok(TvEstimate {
        spec,
        mean,
        stderr,
        samples,
        seed,
        normalization_mean,
        normalization_stderr,
    })
}

/// Diaconis–Freedman bound `2(k+3)/(n-k-3)` on the total variation between
/// `k` coordinates of a uniform point on `S^{n-1}` (scaled by `√n`) and `k`
/// iid standard normals.
pub fn df_bound(n: u64, k: u64) -> Result<f64> {
    if n < 5 || k == 0 || k + 4 > n {
        return Err(Error::invalid(format!(
            "need n >= 5 and 1 <= k <= n-4, got n={n}, k={k}"
        )));
    }
    Ok(2.0 * (k + 3) as f64 / (n - k - 3) as f64)
}

/// Absolute error targeted by [`phi_profile`].
pub const PHI_TOLERANCE: f64 = 1e-10;

/// Distance from the centre of mass beyond which the Gaussian tails are
/// dropped (`Φ̄(14) ≈ 8e-45`).
const TAIL_CUTOFF: f64 = 14.0;

/// Integrates `f` over `[lo, hi]` split at `breaks` and at unit spacing.
fn integrate_piecewise(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut points: Vec<f64> = vec![lo, hi];
    let mut t = lo.ceil();
    while t < hi {
        points.push(t);
        t += 1.0;
    }
    points.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let panel_tol = tol / points.len() as f64;
    let mut acc = KahanSum::new();
    for w in points.windows(2) {
        acc.add(quadrature::integrate(&f, w[0], w[1], panel_tol).integral);
    }
    acc.value()
}

/// `φ(x, y) = E|exp(-x²y²/8 + (xy/4) ξ) - 1|` for standard normal `ξ`.
///
/// Depends on `xy` only. The integrand has a kink where the exponent
/// vanishes, at `ξ = xy/2`; the quadrature is split there.
pub fn phi_profile(x: f64, y: f64) -> f64 {
    let b = (x * y).abs() / 4.0;
    if b == 0.0 {
        return 0.0;
    }
    let a = -2.0 * b * b;
    let kink = 2.0 * b;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let integrand = |t: f64| abs_expm1(a + b * t) * density(t);
    // mass of the two pieces sits around 0 and around b
    integrate_piecewise(
        integrand,
        -TAIL_CUTOFF,
        b + TAIL_CUTOFF,
        &[kink, 0.0, b],
        PHI_TOLERANCE,
    )
}

/// Statistics of `λ_max(XᵀX) / p` for `p x q` Gaussian `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigMaxReport {
    pub p: u64,
    pub q: u64,
    pub samples: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub quantiles: Vec<(f64, f64)>,
    /// Crude almost-sure bound on the limsup.
    pub crude_bound: f64,
    /// `(1 + √(q/p))²`.
    pub bai_silverstein: f64,
}

pub const EIGMAX_QUANTILES: [f64; 3] = [0.05, 0.5, 0.95];

pub fn eigmax_experiment(
    p: u64,
    q: u64,
    samples: usize,
    seed: u64,
    workers: Workers,
) -> Result<EigMaxReport> {
    if samples == 0 || q == 0 || q > p {
        return Err(Error::invalid(format!(
            "need samples >= 1 and 1 <= q <= p, got samples={samples}, p={p}, q={q}"
        )));
    }
    let chunks = map_chunked(samples, 1, workers, |range| -> Result<Vec<f64>> {
        range
            .map(|i| {
                let x = gaussian_block(p as usize, q as usize, &RngStream::new(seed, i as u64));
                Ok(symmetric_eigenvalues(&gram(&x))?.max() / p as f64)
            })
            .collect()
    })?;
    let mut ratios = Vec::with_capacity(samples);
    for chunk in chunks {
        ratios.extend(chunk?);
    }
    let mean_ratio = ratios.iter().copied().collect::<KahanSum>().value() / samples as f64;
    ratios.sort_by(f64::total_cmp);
    let quantiles = EIGMAX_QUANTILES
        .iter()
        .map(|&prob| (prob, empirical_quantile(&ratios, prob)))
        .collect();
    Ok(EigMaxReport {
        p,
        q,
        samples,
        max_ratio: ratios[samples - 1],
        mean_ratio,
        quantiles,
        crude_bound: 4.0,
        bai_silverstein: (1.0 + (q as f64 / p as f64).sqrt()).powi(2),
    })
}

/// Linear interpolation between order statistics of sorted data.
fn empirical_quantile(sorted: &[f64], prob: f64) -> f64 {
    let pos = prob.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Kolmogorov–Smirnov distance between the empirical distribution of `data`
/// and `cdf`. Sorts `data` in place.
pub fn ks_statistic(data: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    data.sort_by(f64::total_cmp);
    let m = data.len() as f64;
    data.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

fn collect_samples(
    samples: usize,
    workers: Workers,
    draw: impl Fn(usize) -> f64 + Sync + Send,
) -> Result<Vec<f64>> {
    Ok(map_chunked(samples, CHUNK_LEN, workers, |range| {
        range.map(&draw).collect::<Vec<_>>()
    })?
    .into_iter()
    .flatten()
    .collect())
}

/// KS distance between `√n X_1` for `X` uniform on `S^{n-1}` and the
/// standard normal.
pub fn sphere_coordinate_experiment(
    n: u64,
    samples: usize,
    seed: u64,
    workers: Workers,
) -> Result<f64> {
    if n < 5 || samples == 0 {
        return Err(Error::invalid(format!(
            "need n >= 5 and samples >= 1, got n={n}, samples={samples}"
        )));
    }
    let mut coords = collect_samples(samples, workers, |i| {
        let g: Vec<f64> = RngStream::new(seed, i as u64)
            .normals()
            .take(n as usize)
            .collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        (n as f64).sqrt() * g[0] / norm
    })?;
    Ok(ks_statistic(&mut coords, standard_normal_cdf))
}

/// KS distance between `√n U_11` for Haar `U ∈ O(n)` and the distribution
/// whose density is the block density at `p = q = 1`, integrated
/// numerically. Ties the Haar sampler and the density formula together.
pub fn haar_corner_ks(n: u64, samples: usize, seed: u64, workers: Workers) -> Result<f64> {
    let spec = BlockSpec::new(n, 1, 1)?;
    if samples == 0 {
        return Err(Error::invalid("need samples >= 1"));
    }
    let scale = (n as f64).sqrt();
    let mut corner = collect_samples(samples, workers, |i| {
        scale * haar_columns(n as usize, 1, &RngStream::new(seed, i as u64))[(0, 0)]
    })?;
    corner.sort_by(f64::total_cmp);

    let density = |t: f64| {
        let z = Matrix::from_rows(1, 1, vec![t]).expect("1x1 block");
        eaton_log_density(&z, spec).map(f64::exp).unwrap_or(0.0)
    };
    // cumulative integrals between consecutive order statistics
    let mut cdf_at = Vec::with_capacity(samples);
    let mut acc = KahanSum::new();
    let mut prev = -scale;
    let tol = 1e-10 / samples as f64;
    for &x in &corner {
        acc.add(quadrature::integrate(density, prev, x, tol).integral);
        cdf_at.push(acc.value());
        prev = x;
    }
    let m = samples as f64;
    Ok(cdf_at
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / m).max((i + 1) as f64 / m - f))
        .fold(0.0, f64::max))
}
