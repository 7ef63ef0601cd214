//! Density of the scaled upper-left block of a Haar orthogonal matrix and
//! its likelihood ratio against the Gaussian density.
//!
//! Everything is kept in log space; `f64::NEG_INFINITY` is an ordinary value
//! meaning "outside the support".

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::formulas::{falling_factorial, mean_trace_leading, rational_to_f64};
use crate::numerics::{
    gram, log_gamma, log_gamma_ratio_reduced, symmetric_eigenvalues, Matrix, Spectrum,
};
use crate::wick::{Oracle, TraceMomentQuery};
use crate::{Error, Result};

/// Dimensions of the block: a `p x q` corner of an `n x n` orthogonal matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpec {
    pub n: u64,
    pub p: u64,
    pub q: u64,
}

impl BlockSpec {
    pub fn new(n: u64, p: u64, q: u64) -> Result<Self> {
        if q == 0 || q > p {
            return Err(Error::invalid(format!(
                "need 1 <= q <= p, got p={p}, q={q}"
            )));
        }
        if p.checked_add(q).is_none_or(|s| s > n) {
            return Err(Error::invalid(format!(
                "need p + q <= n, got n={n}, p={p}, q={q}"
            )));
        }
        Ok(Self { n, p, q })
    }

    /// Asymptotic expansions are only meaningful when `pq < n`.
    pub fn require_sparse(&self) -> Result<()> {
        if (self.p as u128) * (self.q as u128) >= self.n as u128 {
            return Err(Error::Domain {
                what: "p*q/n",
                value: (self.p * self.q) as f64 / self.n as f64,
                expected: "p*q < n",
            });
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Exponent of `det(I - zᵀz/n)` in the density, times two.
    fn det_exponent(&self) -> f64 {
        self.n as f64 - self.p as f64 - self.q as f64 - 1.0
    }
}

/// `log ω(r, s)` for the Wishart normalizing constant
/// `ω(r,s)^{-1} = π^{s(s-1)/4} 2^{rs/2} ∏_{j=1}^{s} Γ((r-j+1)/2)`.
pub fn log_wishart_constant(r: f64, s: u64) -> Result<f64> {
    if s == 0 {
        return Err(Error::invalid("Wishart constant needs s >= 1"));
    }
    let sf = s as f64;
    if r.is_nan() || r <= sf - 1.0 {
        return Err(Error::Domain {
            what: "Wishart degrees of freedom",
            value: r,
            expected: "r > s - 1",
        });
    }
    let mut acc = sf * (sf - 1.0) / 4.0 * PI.ln() + r * sf / 2.0 * 2f64.ln();
    for j in 1..=s {
        acc += log_gamma((r - j as f64 + 1.0) / 2.0)?;
    }
    Ok(-acc)
}

/// `log K_n = (pq/2) log(2/n) + Σ_j [log Γ((n-j+1)/2) - log Γ((n-p-j+1)/2)]`.
pub fn log_kn(spec: BlockSpec) -> Result<f64> {
    let BlockSpec { n, p, q } = spec;
    if n < p + q {
        return Err(Error::Domain {
            what: "n",
            value: n as f64,
            expected: "n > p + q - 1",
        });
    }
    // Each gamma ratio is about (p/2) log((n-p-j+1)/2); that power is folded
    // into the (2/n)^{pq/2} prefactor as (p/2) log1p(-(p+j-1)/n) so the large
    // logarithms never get subtracted from each other.
    let nf = spec.nf();
    let mut acc = 0.0;
    for j in 1..=q {
        let top = (n - j + 1) as f64 / 2.0;
        let bottom = (n - p - j + 1) as f64 / 2.0;
        acc += log_gamma_ratio_reduced(top, bottom)?
            + p as f64 / 2.0 * (-((p + j - 1) as f64) / nf).ln_1p();
    }
    Ok(acc)
}

/// `F(x) = x/2 + (n-p-q-1)/2 log(1 - x/n)` on `[0, n)`, `-∞` elsewhere.
pub fn f_eval(x: f64, spec: BlockSpec) -> f64 {
    let n = spec.nf();
    if !(0.0..n).contains(&x) {
        return f64::NEG_INFINITY;
    }
    x / 2.0 + spec.det_exponent() / 2.0 * (-x / n).ln_1p()
}

/// `log L_n = Σ_i F(λ_i)` over the eigenvalues of `zᵀz`.
pub fn log_l(spectrum: &Spectrum, spec: BlockSpec) -> f64 {
    let mut acc = 0.0;
    for &lambda in spectrum.values() {
        let f = f_eval(lambda, spec);
        if f == f64::NEG_INFINITY {
            return f;
        }
        acc += f;
    }
    acc
}

/// Log of the standard Gaussian density on `p x q` matrices.
pub fn log_g(z: &Matrix) -> f64 {
    let dim = z.as_slice().len() as f64;
    let sq: f64 = z.as_slice().iter().map(|v| v * v).sum();
    -dim / 2.0 * (2.0 * PI).ln() - sq / 2.0
}

fn check_block(z: &Matrix, spec: BlockSpec) -> Result<()> {
    if z.rows() as u64 != spec.p || z.cols() as u64 != spec.q {
        return Err(Error::invalid(format!(
            "block is {}x{}, spec expects {}x{}",
            z.rows(),
            z.cols(),
            spec.p,
            spec.q
        )));
    }
    Ok(())
}

fn spectrum_of(z: &Matrix) -> Result<Spectrum> {
    symmetric_eigenvalues(&gram(z))
}

/// The likelihood ratio `f_n / g_n = K_n L_n` split into its two factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodParts {
    pub log_k: f64,
    pub log_l: f64,
    pub log_ratio: f64,
}

impl LikelihoodParts {
    pub fn new(log_k: f64, log_l: f64) -> Self {
        Self {
            log_k,
            log_l,
            log_ratio: log_k + log_l,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.log_ratio.exp()
    }
}

pub fn likelihood_parts(z: &Matrix, spec: BlockSpec) -> Result<LikelihoodParts> {
    check_block(z, spec)?;
    Ok(LikelihoodParts::new(
        log_kn(spec)?,
        log_l(&spectrum_of(z)?, spec),
    ))
}

/// `log f_n(z)` for the density of `√n` times the block, as `log K_n +
/// log g_n(z) + log L_n(z)`.
pub fn eaton_log_density(z: &Matrix, spec: BlockSpec) -> Result<f64> {
    let parts = likelihood_parts(z, spec)?;
    Ok(parts.log_ratio + log_g(z))
}

/// The same density from the displayed form
/// `ω(n-p,q) / (ω(n,q) (2π)^{pq/2}) n^{-pq/2} det(I - zᵀz/n)^{(n-p-q-1)/2}`.
pub fn eaton_log_density_direct(z: &Matrix, spec: BlockSpec) -> Result<f64> {
    check_block(z, spec)?;
    let BlockSpec { n, p, q } = spec;
    let spectrum = spectrum_of(z)?;
    let nf = spec.nf();
    if spectrum.values().iter().any(|&l| !(0.0..nf).contains(&l)) {
        return Ok(f64::NEG_INFINITY);
    }
    let log_det: f64 = spectrum.values().iter().map(|&l| (-l / nf).ln_1p()).sum();
    let pq = (p * q) as f64;
    Ok(log_wishart_constant((n - p) as f64, q)?
        - log_wishart_constant(n as f64, q)?
        - pq / 2.0 * (2.0 * PI).ln()
        - pq / 2.0 * nf.ln()
        + spec.det_exponent() / 2.0 * log_det)
}

/// Number of Taylor terms kept when expanding `log(1 - x/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationOrder {
    l: u32,
}

impl TruncationOrder {
    /// Any positive odd integer.
    pub fn new(l: u32) -> Result<Self> {
        if l.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "truncation order must be odd, got {l}"
            )));
        }
        Ok(Self { l })
    }

    pub fn get(self) -> u32 {
        self.l
    }
}

/// Smallest odd `l` with `l >= log p / log(n/(pq))`, decided exactly as
/// `n^l >= p (pq)^l`.
pub fn choose_l(spec: BlockSpec) -> Result<TruncationOrder> {
    spec.require_sparse()?;
    let n = BigUint::from(spec.n);
    let p = BigUint::from(spec.p);
    let pq = BigUint::from(spec.p * spec.q);
    let mut l = 1u32;
    while n.clone().pow(l) < &p * pq.clone().pow(l) {
        l += 2;
    }
    Ok(TruncationOrder { l })
}

/// `-pq²/(4n) - Σ_{k<l} p^{k+1}q/(2k(k+1)n^k) - p^{l+1}q/(2l n^l)`.
pub fn log_kn_asymptotic(spec: BlockSpec, l: TruncationOrder) -> Result<f64> {
    spec.require_sparse()?;
    let (n, p, q) = (spec.nf(), spec.p as f64, spec.q as f64);
    let l = l.get() as i32;
    let mut acc = -p * q * q / (4.0 * n);
    for k in 1..l {
        let kf = k as f64;
        acc -= p.powi(k + 1) * q / (2.0 * kf * (kf + 1.0) * n.powi(k));
    }
    acc -= p.powi(l + 1) * q / (2.0 * l as f64 * n.powi(l));
    Ok(acc)
}

/// Where the trace moments `E tr (XᵀX)^m` inside `E_j` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentSource {
    /// Closed forms for `m <= 2`, exact enumeration within the oracle's
    /// budget, and leading terms (flagged) beyond it.
    Auto(Oracle),
    /// Leading terms only; always flagged approximate.
    Leading,
}

impl Default for MomentSource {
    fn default() -> Self {
        MomentSource::Auto(Oracle::default())
    }
}

/// A value together with whether any leading-order moment went into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approximable {
    pub value: f64,
    pub approximate: bool,
}

fn int_rational(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl MomentSource {
    /// `E tr (XᵀX)^m` and whether it is only a leading term.
    pub fn trace_moment(&self, p: u64, q: u64, m: u32) -> Result<(BigRational, bool)> {
        match self {
            MomentSource::Leading => {
                let lead = mean_trace_leading(p, q, m as u64)?;
                Ok((lead.main_term, true))
            }
            MomentSource::Auto(oracle) => {
                let (pb, qb) = (BigUint::from(p), BigUint::from(q));
                match m {
                    1 => return Ok((int_rational(pb * qb), false)),
                    2 => return Ok((int_rational(&pb * &qb * (&pb + &qb + 1u32)), false)),
                    _ => {}
                }
                match oracle.trace_moment(TraceMomentQuery::new(p, q, m)?) {
                    Ok(exact) => Ok((int_rational(exact.0), false)),
                    Err(Error::BudgetExceeded { .. }) => {
                        let lead = mean_trace_leading(p, q, m as u64)?;
                        Ok((lead.main_term, true))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }
}

/// `E_j = n^{-j} E[(p+q+1)/(2j) tr W^j - 1/(2(j+1)) tr W^{j+1}]` for
/// `j < l`, and `E_l = n^{-l} (p+q+1)/(2l) E tr W^l`.
pub fn expected_ej(
    spec: BlockSpec,
    j: u32,
    l: TruncationOrder,
    source: &MomentSource,
) -> Result<Approximable> {
    if j == 0 || j > l.get() {
        return Err(Error::invalid(format!(
            "need 1 <= j <= l = {}, got j={j}",
            l.get()
        )));
    }
    let BlockSpec { n, p, q } = spec;
    let (m_j, mut approximate) = source.trace_moment(p, q, j)?;
    let frac = |a: u64, b: u64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let mut inner = frac(p + q + 1, 2 * j as u64) * m_j;
    if j < l.get() {
        let (m_next, approx_next) = source.trace_moment(p, q, j + 1)?;
        approximate |= approx_next;
        inner -= frac(1, 2 * (j as u64 + 1)) * m_next;
    }
    let scale = BigRational::new(BigInt::one(), BigInt::from(n).pow(j));
    Ok(Approximable {
        value: rational_to_f64(&(inner * scale)),
        approximate,
    })
}

/// `pq²/(4n) + Σ_{j<l} (p)_j pq/(2j(j+1)n^j) + (p)_l pq/(2l n^l)`, the
/// leading form of `Σ_j E_j`.
pub fn ej_sum_asymptotic(spec: BlockSpec, l: TruncationOrder) -> Result<f64> {
    spec.require_sparse()?;
    let BlockSpec { n, p, q } = spec;
    let pq = BigInt::from(p * q);
    let nb = BigInt::from(n);
    let term = |j: u32, den: u64| {
        BigRational::new(
            BigInt::from(falling_factorial(p, j as u64)) * BigInt::from(p) * &pq,
            BigInt::from(den) * nb.clone().pow(j),
        )
    };
    let mut acc = BigRational::new(BigInt::from(p * q * q), BigInt::from(4) * &nb);
    for j in 1..l.get() {
        acc += term(j, 2 * j as u64 * (j as u64 + 1));
    }
    acc += term(l.get(), 2 * l.get() as u64);
    Ok(rational_to_f64(&acc))
}

/// `log K_n + Σ_{j=1}^{l} E_j` with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub spec: BlockSpec,
    pub l: u32,
    pub log_kn: f64,
    pub ej: Vec<f64>,
    pub residual: f64,
    pub approximate: bool,
}

pub fn cancellation_residual(spec: BlockSpec, source: &MomentSource) -> Result<CancellationReport> {
    let l = choose_l(spec)?;
    let log_k = log_kn(spec)?;
    let mut ej = Vec::with_capacity(l.get() as usize);
    let mut approximate = false;
    for j in 1..=l.get() {
        let e = expected_ej(spec, j, l, source)?;
        approximate |= e.approximate;
        ej.push(e.value);
    }
    let residual = ej.iter().fold(log_k, |a, e| a + e);
    Ok(CancellationReport {
        spec,
        l: l.get(),
        log_kn: log_k,
        ej,
        residual,
        approximate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_block, RngStream};
    use proptest::prelude::*;

    fn spec(n: u64, p: u64, q: u64) -> BlockSpec {
        BlockSpec::new(n, p, q).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn block_spec_validation() {
        assert!(BlockSpec::new(10, 2, 3).is_err());
        assert!(BlockSpec::new(4, 3, 2).is_err());
        assert!(BlockSpec::new(5, 3, 2).is_ok());
        assert!(BlockSpec::new(5, 3, 0).is_err());
        assert!(spec(4, 2, 2).require_sparse().is_err());
        assert!(spec(5, 2, 2).require_sparse().is_ok());
    }

    #[test]
    fn wishart_constant_examples() {
        assert!(close(
            log_wishart_constant(4.0, 1).unwrap(),
            -1.386_294_361_119_890_6,
            1e-12
        ));
        assert!(close(
            log_wishart_constant(3.0, 1).unwrap(),
            -0.918_938_533_204_672_7,
            1e-12
        ));
        assert!(log_wishart_constant(3.0, 0).is_err());
        assert!(matches!(
            log_wishart_constant(1.0, 2),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn log_kn_examples() {
        assert!(close(
            log_kn(spec(4, 1, 1)).unwrap(),
            -0.225_791_352_644_727_4,
            1e-12
        ));
        // high-precision reference values of the gamma ratio product
        let reference = [
            (10_000u64, -0.006_877_125_951_550_596),
            (100_000, -6.875_212_509_510_925e-4),
            (1_000_000, -6.875_021_250_095_105e-5),
        ];
        for (n, expected) in reference {
            let got = log_kn(spec(n, 5, 5)).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs() + 1e-15,
                "n={n}: {got}"
            );
        }
    }

    #[test]
    fn density_at_origin_is_sphere_marginal() {
        let s = spec(4, 1, 1);
        let z = Matrix::zeros(1, 1);
        let expected = (1.0 / PI).ln();
        assert!(close(eaton_log_density(&z, s).unwrap(), expected, 1e-12));
        assert!(close(
            eaton_log_density_direct(&z, s).unwrap(),
            expected,
            1e-12
        ));
        assert!(close(log_kn(s).unwrap() + log_g(&z), expected, 1e-12));
    }

    #[test]
    fn density_vanishes_outside_support() {
        let s = spec(4, 1, 1);
        let z = Matrix::from_rows(1, 1, vec![2.0]).unwrap();
        assert_eq!(eaton_log_density(&z, s).unwrap(), f64::NEG_INFINITY);
        assert_eq!(eaton_log_density_direct(&z, s).unwrap(), f64::NEG_INFINITY);
        let parts = likelihood_parts(&z, s).unwrap();
        assert_eq!(parts.log_ratio, f64::NEG_INFINITY);
        assert_eq!(parts.ratio(), 0.0);
    }

    #[test]
    fn f_eval_examples() {
        let s = spec(10, 1, 1);
        assert_eq!(f_eval(0.0, s), 0.0);
        assert_eq!(f_eval(10.0, s), f64::NEG_INFINITY);
        assert_eq!(f_eval(-1.0, s), f64::NEG_INFINITY);
        assert!(close(f_eval(1.0, s), 0.131_238_195_197_608_04, 1e-12));
        let single = Spectrum::from_values(vec![1.0], 1.0);
        assert!(close(log_l(&single, s), 0.131_238_195_197_608_04, 1e-12));
        assert_eq!(
            log_l(&Spectrum::from_values(vec![0.0, 0.0], 0.0), spec(10, 2, 2)),
            0.0
        );
        assert_eq!(
            log_l(
                &Spectrum::from_values(vec![12.0, 0.5], 12.0),
                spec(10, 2, 2)
            ),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn two_density_routes_agree() {
        for (n, p, q) in [(20u64, 3u64, 2u64), (50, 5, 5), (200, 10, 4)] {
            let s = spec(n, p, q);
            for i in 0..20 {
                let z = gaussian_block(p as usize, q as usize, &RngStream::new(3, i));
                let a = eaton_log_density(&z, s).unwrap();
                let b = eaton_log_density_direct(&z, s).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn choose_l_examples() {
        assert_eq!(choose_l(spec(1_000_000, 10, 10)).unwrap().get(), 1);
        assert_eq!(choose_l(spec(10_000, 31, 31)).unwrap().get(), 3);
        assert_eq!(choose_l(spec(1_000_000, 5, 5)).unwrap().get(), 1);
        // boundary n = p^2 q: ratio exactly 1
        assert_eq!(choose_l(spec(500, 10, 5)).unwrap().get(), 1);
        assert_eq!(choose_l(spec(499, 10, 5)).unwrap().get(), 3);
        assert!(choose_l(spec(100, 10, 10)).is_err());
        assert!(TruncationOrder::new(2).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let s = spec(1_000_000, 5, 5);
        let l = choose_l(s).unwrap();
        assert!(close(log_kn_asymptotic(s, l).unwrap(), -9.375e-5, 1e-18));
        assert!(log_kn_asymptotic(spec(100, 10, 10), l).is_err());
    }

    #[test]
    fn expected_ej_examples() {
        let s = spec(1_000_000, 5, 5);
        let source = MomentSource::default();
        let three = TruncationOrder::new(3).unwrap();
        let e1 = expected_ej(s, 1, three, &source).unwrap();
        assert!(close(e1.value, 6.875e-5, 1e-18));
        assert!(!e1.approximate);
        let one = TruncationOrder::new(1).unwrap();
        let e1_last = expected_ej(s, 1, one, &source).unwrap();
        assert!(close(e1_last.value, 11.0 * 25.0 / 2e6, 1e-18));
        assert!(expected_ej(s, 2, one, &source).is_err());

        let lead = expected_ej(s, 1, three, &MomentSource::Leading).unwrap();
        assert!(lead.approximate);

        let starved = MomentSource::Auto(Oracle {
            budget: 1,
            ..Oracle::default()
        });
        let e3 = expected_ej(spec(10_000, 31, 31), 2, three, &starved).unwrap();
        assert!(e3.approximate);
        let e3_exact = expected_ej(spec(10_000, 31, 31), 2, three, &source).unwrap();
        assert!(!e3_exact.approximate);
        // leading terms overshoot the exact third moment at this size
        assert!(e3.value > e3_exact.value && e3.value < 2.0 * e3_exact.value);
    }

    #[test]
    fn ej_sum_against_exact_at_small_sizes() {
        for (n, p, q) in [(10_000u64, 3u64, 2u64), (100_000, 4, 3)] {
            let s = spec(n, p, q);
            let l = choose_l(s).unwrap();
            let exact: f64 = (1..=l.get())
                .map(|j| {
                    expected_ej(s, j, l, &MomentSource::default())
                        .unwrap()
                        .value
                })
                .sum();
            let asym = ej_sum_asymptotic(s, l).unwrap();
            // both are O(p²q/n); they differ at that order only by bounded factors
            assert!(exact > 0.0 && asym > 0.0);
            assert!((exact / asym).abs() < 4.0 && (asym / exact).abs() < 4.0);
        }
    }

    #[test]
    fn cancellation_examples() {
        let source = MomentSource::default();
        let big = cancellation_residual(spec(1_000_000, 5, 5), &source).unwrap();
        assert_eq!(big.l, 1);
        assert!(!big.approximate);
        // log K_n + (p+q+1)pq/(2n)
        assert!(close(big.residual, -6.875_021_250_095e-5 + 1.375e-4, 1e-12));
        let small = cancellation_residual(spec(10_000, 5, 5), &source).unwrap();
        assert!((small.residual / big.residual / 100.0 - 1.0).abs() < 0.1);
        let mid = cancellation_residual(spec(100_000, 5, 5), &source).unwrap();
        assert!(
            big.residual.abs() < mid.residual.abs() && mid.residual.abs() < small.residual.abs()
        );
    }

    #[test]
    fn log_kn_gap_shrinks_along_schedule() {
        let gaps: Vec<f64> = [10_000u64, 100_000, 1_000_000]
            .iter()
            .map(|&n| {
                let s = spec(n, 5, 5);
                (log_kn(s).unwrap() - log_kn_asymptotic(s, choose_l(s).unwrap()).unwrap()).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    proptest! {
        #[test]
        fn f_is_concave(n in 10u64..500, a in 0.0f64..1.0, b in 0.0f64..1.0, t in 0.0f64..1.0) {
            let s = spec(n, 2, 2);
            let nf = n as f64;
            let (x, y) = (a * nf * 0.999, b * nf * 0.999);
            let mid = f_eval(t * x + (1.0 - t) * y, s);
            let chord = t * f_eval(x, s) + (1.0 - t) * f_eval(y, s);
            prop_assert!(mid >= chord - 1e-9 * (1.0 + chord.abs()));
        }

        #[test]
        fn choose_l_is_one_iff_ratio_small(n in 50u64..100_000, p in 1u64..20, q in 1u64..20) {
            prop_assume!(q <= p && p * q < n && p + q <= n);
            let s = spec(n, p, q);
            let l = choose_l(s).unwrap().get();
            let small = (p as f64).ln() <= (n as f64 / (p * q) as f64).ln();
            // skip float ties at the exact boundary
            prop_assume!(p * p * q != n);
            prop_assert_eq!(l == 1, small);
            prop_assert!(l % 2 == 1);
            let ratio = (p as f64).ln() / (n as f64 / (p * q) as f64).ln();
            prop_assert!(l as f64 >= ratio - 1e-9 && (l as f64 - 2.0) < ratio + 1e-9);
        }

        #[test]
        fn likelihood_ratio_nonnegative(seed in 0u64..1000) {
            let s = spec(30, 4, 3);
            let z = gaussian_block(4, 3, &RngStream::new(seed, 0));
            let parts = likelihood_parts(&z, s).unwrap();
            prop_assert!(parts.ratio() >= 0.0);
        }
    }
}
