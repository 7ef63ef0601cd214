//! Exact ground truth for moments of traces of Wishart powers.
//!
//! `tr (XᵀX)^h` expands into a sum over index tuples
//! `(i_1..i_h) ∈ [p]^h`, `(j_1..j_h) ∈ [q]^h` of the monomial
//! `x_{i1 j1} x_{i1 j2} x_{i2 j2} ... x_{ih jh} x_{ih j1}`. The expectation of
//! a monomial is the product over distinct entries of the Gaussian moment
//! `E[x^m]`, which is `(m-1)!!` for even `m` and zero otherwise. Summing
//! those products exactly gives the moment; covariances are handled the
//! same way on pairs of tuples.
//!
//! Two enumeration strategies produce the same exact sum:
//!
//! * [`Enumeration::Direct`] walks every tuple.
//! * [`Enumeration::Orbits`] walks one canonical representative per
//!   relabelling class (restricted growth strings for the row and column
//!   labels) and weights it by the number of injective relabellings,
//!   `p(p-1)...(p-a+1) * q(q-1)...(q-b+1)`. The monomial expectation only
//!   depends on which labels coincide, so this is the same sum regrouped.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::numerics::{map_chunked, Workers};
use crate::{Error, Result};

pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Enumeration {
    Direct,
    #[default]
    Orbits,
}

/// `(p, q, h)` for `E[tr (XᵀX)^h]` with `X` a `p x q` Gaussian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMomentQuery {
    pub p: u64,
    pub q: u64,
    pub h: u32,
}

impl TraceMomentQuery {
    pub fn new(p: u64, q: u64, h: u32) -> Result<Self> {
        if p == 0 || q == 0 || h == 0 {
            return Err(Error::invalid(format!(
                "trace moment needs p, q, h >= 1 (got p={p}, q={q}, h={h})"
            )));
        }
        Ok(Self { p, q, h })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactMoment(pub BigUint);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactCovariance(pub BigInt);

/// Enumeration settings shared by the oracle entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oracle {
    pub budget: u128,
    pub strategy: Enumeration,
    pub workers: Workers,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            strategy: Enumeration::Orbits,
            workers: Workers::AUTO,
        }
    }
}

pub fn exact_trace_moment(query: TraceMomentQuery) -> Result<ExactMoment> {
    Oracle::default().trace_moment(query)
}

pub fn exact_trace_covariance(p: u64, q: u64, h: u32, k: u32) -> Result<ExactCovariance> {
    Oracle::default().trace_covariance(p, q, h, k)
}

impl Oracle {
    pub fn with_strategy(strategy: Enumeration) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    /// Number of tuples (or canonical tuples) the oracle would visit for an
    /// index cycle of total length `len`.
    pub fn cost(&self, p: u64, q: u64, len: u32) -> u128 {
        match self.strategy {
            Enumeration::Direct => saturating_pow(p as u128 * q as u128, len),
            Enumeration::Orbits => {
                count_label_patterns(len, p).saturating_mul(count_label_patterns(len, q))
            }
        }
    }

    fn check_budget(&self, p: u64, q: u64, len: u32) -> Result<()> {
        let required = self.cost(p, q, len);
        if required > self.budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        Ok(())
    }

    pub fn trace_moment(&self, query: TraceMomentQuery) -> Result<ExactMoment> {
        let TraceMomentQuery { p, q, h } = query;
        self.check_budget(p, q, h)?;
        let make_eval = || {
            |rows: &[u32], cols: &[u32], edges: &mut Vec<u64>| {
                cycle_edges(rows, cols, edges);
                BigInt::from(gaussian_monomial_moment(edges))
            }
        };
        let total = self.sum_over_tuples(p, q, h as usize, &make_eval)?;
        Ok(ExactMoment(
            total
                .to_biguint()
                .expect("moments of even monomials are nonnegative"),
        ))
    }

    /// `Cov(tr (XᵀX)^h, tr (XᵀX)^k)`; symmetric in `h` and `k`.
    pub fn trace_covariance(&self, p: u64, q: u64, h: u32, k: u32) -> Result<ExactCovariance> {
        if p == 0 || q == 0 || h == 0 || k == 0 {
            return Err(Error::invalid("covariance needs p, q, h, k >= 1"));
        }
        let (h, k) = if h <= k { (h, k) } else { (k, h) };
        self.check_budget(p, q, h + k)?;
        let split = h as usize;
        let make_eval = || {
            let mut first = Vec::new();
            let mut second = Vec::new();
            move |rows: &[u32], cols: &[u32], joint: &mut Vec<u64>| {
                cycle_edges(&rows[..split], &cols[..split], &mut first);
                cycle_edges(&rows[split..], &cols[split..], &mut second);
                joint.clear();
                joint.extend_from_slice(&first);
                joint.extend_from_slice(&second);
                let both = gaussian_monomial_moment(joint);
                if both.is_zero() {
                    // every odd-multiplicity entry of the pair is odd in one factor too
                    return BigInt::zero();
                }
                let product =
                    gaussian_monomial_moment(&mut first) * gaussian_monomial_moment(&mut second);
                BigInt::from(both) - BigInt::from(product)
            }
        };
        let total = self.sum_over_tuples(p, q, (h + k) as usize, &make_eval)?;
        Ok(ExactCovariance(total))
    }

    fn sum_over_tuples<E, M>(&self, p: u64, q: u64, len: usize, make_eval: &M) -> Result<BigInt>
    where
        E: FnMut(&[u32], &[u32], &mut Vec<u64>) -> BigInt,
        M: Fn() -> E + Sync,
    {
        match self.strategy {
            Enumeration::Direct => direct_sum(p, q, len, self.workers, make_eval),
            Enumeration::Orbits => orbit_sum(p, q, len, self.workers, make_eval),
        }
    }
}

/// Edges of one index cycle: `(i_t, j_t)` and `(i_t, j_{t+1})`, encoded as
/// `i * 2^32 + j`.
fn cycle_edges(rows: &[u32], cols: &[u32], out: &mut Vec<u64>) {
    let h = rows.len();
    out.clear();
    for t in 0..h {
        let i = (rows[t] as u64) << 32;
        out.push(i | cols[t] as u64);
        out.push(i | cols[(t + 1) % h] as u64);
    }
}

/// `E[∏ x_e]` over a multiset of entries: the product of `(m-1)!!` over
/// entry multiplicities `m`, zero as soon as one multiplicity is odd.
/// Sorts `edges` in place.
fn gaussian_monomial_moment(edges: &mut [u64]) -> BigUint {
    edges.sort_unstable();
    let mut mults = Vec::with_capacity(edges.len());
    let mut run = 0usize;
    for (idx, e) in edges.iter().enumerate() {
        run += 1;
        if idx + 1 == edges.len() || edges[idx + 1] != *e {
            if run % 2 == 1 {
                return BigUint::zero();
            }
            mults.push(run);
            run = 0;
        }
    }
    let mut small: Option<u128> = Some(1);
    for &m in &mults {
        small = small.and_then(|acc| double_factorial_u128(m - 1).and_then(|d| acc.checked_mul(d)));
    }
    match small {
        Some(v) => BigUint::from(v),
        None => mults
            .iter()
            .fold(BigUint::one(), |acc, &m| acc * double_factorial_big(m - 1)),
    }
}

fn double_factorial_u128(m: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut t = m;
    while t > 1 {
        acc = acc.checked_mul(t as u128)?;
        t -= 2;
    }
    Some(acc)
}

fn double_factorial_big(m: usize) -> BigUint {
    let mut acc = BigUint::one();
    let mut t = m;
    while t > 1 {
        acc *= t;
        t -= 2;
    }
    acc
}

fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Number of set partitions of `len` labelled slots into at most `max_blocks`
/// blocks (Stirling numbers of the second kind, summed).
fn count_label_patterns(len: u32, max_blocks: u64) -> u128 {
    let len = len as usize;
    let mut row = vec![0u128; len + 1];
    row[0] = 1;
    for n in 1..=len {
        let mut next = vec![0u128; len + 1];
        for b in 1..=n {
            next[b] = (b as u128)
                .saturating_mul(row[b])
                .saturating_add(row[b - 1]);
        }
        row = next;
    }
    row.iter()
        .enumerate()
        .filter(|(b, _)| *b as u64 <= max_blocks)
        .fold(0u128, |acc, (_, v)| acc.saturating_add(*v))
}

/// All restricted growth strings of length `len` using at most `max_blocks`
/// labels, paired with their number of distinct labels.
fn label_patterns(len: usize, max_blocks: u64) -> Vec<(Vec<u32>, u32)> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(
        len: usize,
        max_blocks: u64,
        used: u32,
        cur: &mut Vec<u32>,
        out: &mut Vec<(Vec<u32>, u32)>,
    ) {
        if cur.len() == len {
            out.push((cur.clone(), used));
            return;
        }
        let top = if (used as u64) < max_blocks {
            used + 1
        } else {
            used
        };
        for v in 0..top {
            cur.push(v);
            rec(len, max_blocks, used.max(v + 1), cur, out);
            cur.pop();
        }
    }
    rec(len, max_blocks, 0, &mut cur, &mut out);
    out
}

fn falling(x: u64, a: u32) -> BigUint {
    (0..a as u64).fold(BigUint::one(), |acc, t| acc * (x - t))
}

fn orbit_sum<E, M>(p: u64, q: u64, len: usize, workers: Workers, make_eval: &M) -> Result<BigInt>
where
    E: FnMut(&[u32], &[u32], &mut Vec<u64>) -> BigInt,
    M: Fn() -> E + Sync,
{
    let rows = label_patterns(len, p);
    let cols = label_patterns(len, q);
    let row_weights: Vec<BigInt> = rows
        .iter()
        .map(|(_, a)| BigInt::from(falling(p, *a)))
        .collect();
    let col_weights: Vec<BigInt> = cols
        .iter()
        .map(|(_, b)| BigInt::from(falling(q, *b)))
        .collect();
    let partials = map_chunked(rows.len(), 8, workers, |range| {
        let mut eval = make_eval();
        let mut edges = Vec::with_capacity(4 * len);
        let mut acc = BigInt::zero();
        for r in range {
            let mut inner = BigInt::zero();
            for (c, (col, _)) in cols.iter().enumerate() {
                let v = eval(&rows[r].0, col, &mut edges);
                if !v.is_zero() {
                    inner += v * &col_weights[c];
                }
            }
            acc += inner * &row_weights[r];
        }
        acc
    })?;
    Ok(partials.into_iter().sum())
}

fn direct_sum<E, M>(p: u64, q: u64, len: usize, workers: Workers, make_eval: &M) -> Result<BigInt>
where
    E: FnMut(&[u32], &[u32], &mut Vec<u64>) -> BigInt,
    M: Fn() -> E + Sync,
{
    // parallel over the first row index; each task walks the remaining
    // indices with an odometer
    let partials = map_chunked(p as usize, 1, workers, |range| {
        let mut eval = make_eval();
        let mut edges = Vec::with_capacity(4 * len);
        let mut acc = BigInt::zero();
        for first in range {
            let mut rows = vec![0u32; len];
            let mut cols = vec![0u32; len];
            rows[0] = first as u32;
            loop {
                acc += eval(&rows, &cols, &mut edges);
                if !advance(&mut rows[1..], p as u32) && !advance(&mut cols, q as u32) {
                    break;
                }
            }
        }
        acc
    })?;
    Ok(partials.into_iter().sum())
}

/// Odometer step; returns false after wrapping back to all zeros.
fn advance(digits: &mut [u32], base: u32) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Brute-force count of the down/up step arrangements for a closed walk
/// with `h` down edges, `r` of which open a new column vertex (`d_l = 1`) and
/// `r` up edges leaving a column vertex for the last time (`u_l = -1`), such
/// that `d_1 + ... + d_{l-1} + u_1 + ... + u_l >= 0` for every `l`. The first
/// up edge can never leave its vertex for the last time, so `u_1 = 0`.
pub fn count_valid_ballot_pairs(h: u32, r: u32) -> Result<u64> {
    if h == 0 || h > 14 {
        return Err(Error::invalid(format!(
            "ballot enumeration needs 1 <= h <= 14, got {h}"
        )));
    }
    if r >= h {
        return Err(Error::invalid(format!(
            "need 0 <= r <= h-1, got r={r}, h={h}"
        )));
    }
    let h = h as usize;
    let mut count = 0u64;
    for downs in 0u32..(1 << h) {
        if downs.count_ones() != r {
            continue;
        }
        for ups_tail in 0u32..(1 << (h - 1)) {
            if ups_tail.count_ones() != r {
                continue;
            }
            // bit l-1 of `downs` is d_l; bit l-2 of `ups_tail` is -u_l for l >= 2
            let mut prefix: i64 = 0;
            let mut ok = true;
            for l in 1..=h {
                if l >= 2 {
                    prefix += ((downs >> (l - 2)) & 1) as i64;
                    prefix -= ((ups_tail >> (l - 2)) & 1) as i64;
                }
                if prefix < 0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                count += 1;
            }
        }
    }
    Ok(count)
}

impl PartialOrd<u64> for ExactMoment {
    fn partial_cmp(&self, other: &u64) -> Option<Ordering> {
        self.0.partial_cmp(&BigUint::from(*other))
    }
}

impl PartialEq<u64> for ExactMoment {
    fn eq(&self, other: &u64) -> bool {
        self.0 == BigUint::from(*other)
    }
}

impl PartialEq<i64> for ExactCovariance {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigInt::from(*other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_block, gram, symmetric_eigenvalues, RngStream};
    use proptest::prelude::*;

    fn moment(p: u64, q: u64, h: u32) -> ExactMoment {
        exact_trace_moment(TraceMomentQuery::new(p, q, h).unwrap()).unwrap()
    }

    fn direct() -> Oracle {
        Oracle::with_strategy(Enumeration::Direct)
    }

    #[test]
    fn spec_moment_examples() {
        assert_eq!(moment(3, 2, 1), 6u64);
        assert_eq!(moment(1, 1, 2), 3u64);
        assert_eq!(moment(2, 1, 2), 8u64);
        assert_eq!(moment(3, 2, 2), 36u64);
    }

    #[test]
    fn spec_covariance_examples() {
        assert_eq!(exact_trace_covariance(3, 2, 1, 1).unwrap(), 12i64);
        assert_eq!(exact_trace_covariance(3, 2, 1, 2).unwrap(), 144i64);
        assert_eq!(exact_trace_covariance(1, 1, 1, 2).unwrap(), 12i64);
    }

    #[test]
    fn direct_and_orbit_enumerations_agree() {
        for p in 1..=3u64 {
            for q in 1..=3u64 {
                for h in 1..=3u32 {
                    let query = TraceMomentQuery::new(p, q, h).unwrap();
                    let a = direct().trace_moment(query).unwrap();
                    let b = Oracle::default().trace_moment(query).unwrap();
                    assert_eq!(a, b, "p={p} q={q} h={h}");
                }
                for (h, k) in [(1, 1), (1, 2), (2, 2)] {
                    let a = direct().trace_covariance(p, q, h, k).unwrap();
                    let b = Oracle::default().trace_covariance(p, q, h, k).unwrap();
                    assert_eq!(a, b, "p={p} q={q} h={h} k={k}");
                }
            }
        }
    }

    #[test]
    fn direct_enumeration_visits_every_tuple() {
        let mut seen = 0u64;
        let _ = direct_sum(3, 2, 2, Workers::SEQUENTIAL, &|| {
            |_: &[u32], _: &[u32], _: &mut Vec<u64>| BigInt::one()
        })
        .map(|s| seen = s.try_into().unwrap());
        assert_eq!(seen, 36); // (3*2)^2 tuples
    }

    #[test]
    fn budget_exceeded_reports_required_count() {
        let oracle = Oracle {
            budget: 1000,
            ..direct()
        };
        let err = oracle
            .trace_moment(TraceMomentQuery::new(10, 10, 2).unwrap())
            .unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                required: 10_000,
                budget: 1000
            }
        );
    }

    #[test]
    fn pattern_counts_are_bell_numbers() {
        assert_eq!(count_label_patterns(5, 100), 52);
        assert_eq!(label_patterns(5, 100).len(), 52);
        // at most 2 labels: 2^4 patterns
        assert_eq!(count_label_patterns(5, 2), 16);
        assert_eq!(label_patterns(5, 2).len(), 16);
    }

    #[test]
    fn large_multiplicity_falls_back_to_bigint() {
        // p = q = 1: tr(XᵀX)^h = x^{2h}, E = (2h-1)!!; 79!! overflows u128
        let m = moment(1, 1, 40);
        assert_eq!(m.0, double_factorial_big(79));
    }

    #[test]
    fn ballot_examples() {
        assert_eq!(count_valid_ballot_pairs(3, 1).unwrap(), 3);
        assert_eq!(count_valid_ballot_pairs(3, 2).unwrap(), 1);
        for h in 1..=8 {
            assert_eq!(count_valid_ballot_pairs(h, 0).unwrap(), 1);
        }
        assert!(count_valid_ballot_pairs(15, 1).is_err());
        assert!(count_valid_ballot_pairs(3, 3).is_err());
    }

    #[test]
    fn ballot_rows_sum_to_catalan() {
        // Catalan numbers C_1..C_10
        let catalan = [1u64, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];
        for h in 1..=10u32 {
            let total: u64 = (0..h)
                .map(|r| count_valid_ballot_pairs(h, r).unwrap())
                .sum();
            assert_eq!(total, catalan[h as usize - 1], "h = {h}");
        }
    }

    #[test]
    fn second_moment_identity() {
        for p in 1..=4u64 {
            for q in 1..=4u64 {
                assert_eq!(moment(p, q, 1), p * q);
                assert_eq!(moment(p, q, 2), p * q * (p + q + 1));
            }
        }
    }

    proptest! {
        #[test]
        fn moment_symmetric_in_p_q(p in 1u64..5, q in 1u64..5, h in 1u32..4) {
            prop_assert_eq!(moment(p, q, h), moment(q, p, h));
        }

        #[test]
        fn covariance_symmetric_in_h_k(p in 1u64..4, q in 1u64..4, h in 1u32..3, k in 1u32..3) {
            let a = exact_trace_covariance(p, q, h, k).unwrap();
            let b = exact_trace_covariance(p, q, k, h).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn monte_carlo_consistency() {
        let draws = 100_000u64;
        for p in 1..=3usize {
            for q in 1..=p {
                let powers: Vec<Vec<f64>> = (0..draws)
                    .map(|i| {
                        let x = gaussian_block(p, q, &RngStream::new(77, i));
                        let s = symmetric_eigenvalues(&gram(&x)).unwrap();
                        (1..=3)
                            .map(|h| s.values().iter().map(|l| l.powi(h)).sum())
                            .collect()
                    })
                    .collect();
                for h in 1..=3u32 {
                    let xs: Vec<f64> = powers.iter().map(|v| v[h as usize - 1]).collect();
                    let mean = xs.iter().sum::<f64>() / draws as f64;
                    let var =
                        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
                    let se = (var / draws as f64).sqrt();
                    let exact: f64 = moment(p as u64, q as u64, h).0.to_string().parse().unwrap();
                    assert!(
                        (mean - exact).abs() <= 5.0 * se,
                        "p={p} q={q} h={h}: mean {mean} exact {exact} se {se}"
                    );
                }
            }
        }
    }
}
