//! Closed-form leading terms and error envelopes for moments of traces of
//! Wishart powers, with the combinatorial primitives they are built from.
//!
//! Main terms are evaluated in exact rational arithmetic; envelope
//! expressions (the quantities inside the `O(·)`/`o(·)` factors) are plain
//! floats since only their size matters.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// `x (x-1) ... (x-a+1)`; `a = 0` gives 1 and `a > x` gives 0.
pub fn falling_factorial(x: u64, a: u64) -> BigUint {
    if a > x {
        return BigUint::zero();
    }
    (0..a).fold(BigUint::one(), |acc, t| acc * (x - t))
}

/// Binomial coefficient by the multiplicative formula (every partial
/// product is itself a binomial coefficient, so the divisions are exact).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for t in 0..k {
        acc = acc * (n - t) / (t + 1);
    }
    acc
}

/// Narayana number `C(h,r) C(h-1,r) / (r+1)`.
pub fn narayana(h: u64, r: u64) -> Result<BigUint> {
    if h == 0 || r >= h {
        return Err(Error::invalid(format!(
            "narayana needs 0 <= r <= h-1, got h={h}, r={r}"
        )));
    }
    Ok(binomial(h, r) * binomial(h - 1, r) / (r + 1))
}

pub fn catalan(h: u64) -> BigUint {
    binomial(2 * h, h) / (h + 1)
}

pub fn factorial(m: u64) -> BigUint {
    falling_factorial(m, m)
}

fn ratio(num: BigUint, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(1/(r+1)) C(a,r) C(b,r)`, the class count used throughout the
/// covariance sums.
fn class_count(a: u64, b: u64, r: u64) -> BigRational {
    ratio(binomial(a, r) * binomial(b, r), r + 1)
}

/// Leading-order value of a moment with the computable relative error
/// expression from its `(1 + O(·))` factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingEstimate {
    pub main_term: BigRational,
    pub relative_error_envelope: f64,
}

impl LeadingEstimate {
    pub fn main_f64(&self) -> f64 {
        rational_to_f64(&self.main_term)
    }
}

fn check_shape(p: u64, q: u64) -> Result<()> {
    if q == 0 || q > p {
        return Err(Error::invalid(format!(
            "need 1 <= q <= p, got p={p}, q={q}"
        )));
    }
    Ok(())
}

/// `sum_{r=0}^{h-1} (p)_{h-r} (q)_{r+1} C(h,r) C(h-1,r)/(r+1)`: the number of
/// index cycles with exactly `h` distinct entries, with envelope `h/(p-h)`.
pub fn mean_trace_leading(p: u64, q: u64, h: u64) -> Result<LeadingEstimate> {
    check_shape(p, q)?;
    if h == 0 {
        return Err(Error::invalid("h must be >= 1"));
    }
    if p <= h {
        return Err(Error::EnvelopeUndefined { p, bound: h });
    }
    Ok(LeadingEstimate {
        main_term: mean_main_sum(p, q, h),
        relative_error_envelope: h as f64 / (p - h) as f64,
    })
}

fn mean_main_sum(p: u64, q: u64, h: u64) -> BigRational {
    (0..h)
        .map(|r| {
            int(falling_factorial(p, h - r) * falling_factorial(q, r + 1))
                * class_count(h, h - 1, r)
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// The three bracketed counts of the covariance expansion and the
/// simplified large-`p` main term with its two envelope expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBreakdown {
    pub h: u64,
    pub k: u64,
    /// Pairs of cycles sharing one doubled entry.
    pub term1: BigRational,
    /// Pairs where one cycle is a loop of `2h` single entries overlapped by
    /// the other. That configuration only exists for `2 < h < k`; outside
    /// that range this is 0 and [`Self::term2_formula`] keeps the raw value
    /// of the bracket.
    pub term2: BigRational,
    pub term2_formula: BigRational,
    /// Pairs sharing a loop of `2l` single entries, `2 <= l <= h-1`.
    pub term3: BigRational,
    /// `2hk((p)_h q (p)_{k-1} + p (q)_h (q)_{k-1})`.
    pub simplified_main: BigRational,
    /// `k p^{h+k-2} q^2 4^{h+k}`.
    pub e_envelope: f64,
    /// `k^8 p^{h+k-2} q^2 4^{h+k}`.
    pub f_envelope: f64,
}

impl CovarianceBreakdown {
    pub fn three_term_sum(&self) -> BigRational {
        &self.term1 + &self.term2 + &self.term3
    }

    /// At `h = k = 1` the simplified main term counts the single shared
    /// doubled entry twice (4pq against the exact 2pq).
    pub fn simplified_main_double_counts(&self) -> bool {
        self.k == 1
    }

    /// The main term to report: the three-term sum when the simplified form
    /// double counts, the simplified form otherwise.
    pub fn authoritative_main(&self) -> BigRational {
        if self.simplified_main_double_counts() {
            self.three_term_sum()
        } else {
            self.simplified_main.clone()
        }
    }

    /// `c * e + d * f` for user-chosen envelope multipliers.
    pub fn envelope(&self, c: f64, d: f64) -> f64 {
        c * self.e_envelope + d * self.f_envelope
    }
}

pub fn covariance_breakdown(p: u64, q: u64, h: u64, k: u64) -> Result<CovarianceBreakdown> {
    check_shape(p, q)?;
    if h == 0 || h > k {
        return Err(Error::invalid(format!(
            "need 1 <= h <= k, got h={h}, k={k}"
        )));
    }
    if p <= k {
        return Err(Error::EnvelopeUndefined { p, bound: k });
    }
    let ff = |x: u64, a: u64| int(falling_factorial(x, a));

    let second_factor = (0..k)
        .map(|s| ff(p, k - 1 - s) * ff(q, s) * class_count(k, k - 1, s))
        .fold(BigRational::zero(), |a, b| a + b);
    let term1 =
        BigRational::from_integer(BigInt::from(2 * h * k)) * mean_main_sum(p, q, h) * second_factor;

    let attached = |len: u64| -> BigRational {
        (0..=len)
            .map(|r| ff(p, len - r) * ff(q, r) * class_count(len + 1, len, r))
            .fold(BigRational::zero(), |a, b| a + b)
    };

    let term2_formula = BigRational::from_integer(BigInt::from(2 * (k - h)))
        * ff(p, h)
        * ff(q, h)
        * attached(k - h);
    let term2 = if 2 < h && h < k {
        term2_formula.clone()
    } else {
        BigRational::zero()
    };

    let mut term3 = BigRational::zero();
    for l in 2..h {
        let weight = BigRational::from_integer(BigInt::from(2 * (h - l) * (k - l)));
        term3 += weight * ff(p, l) * ff(q, l) * attached(h - l) * attached(k - l);
    }

    let simplified = BigRational::from_integer(BigInt::from(2 * h * k))
        * (ff(p, h) * ff(q, 1) * ff(p, k - 1) + ff(p, 1) * ff(q, h) * ff(q, k - 1));

    let base = (p as f64).powi((h + k - 2) as i32) * (q as f64).powi(2) * 4f64.powi((h + k) as i32);
    Ok(CovarianceBreakdown {
        h,
        k,
        term1,
        term2,
        term2_formula,
        term3,
        simplified_main: simplified,
        e_envelope: k as f64 * base,
        f_envelope: (k as f64).powi(8) * base,
    })
}

/// Main term of `Var[h_i]` where
/// `h_i = n^{-i} ((p+q+1)/(2i) tr W^i - 1/(2(i+1)) tr W^{i+1})`:
/// `[(p)_{i-1}(p)_i q (q²-p+i²+i+2qi-1) + p (q)_{i-1}(q)_i (p²-q+i²+i+2pi-1)] / (2 n^{2i})`.
pub fn variance_hi_main(p: u64, q: u64, n: u64, i: u64) -> Result<f64> {
    if i == 0 || p <= i + 1 {
        return Err(Error::invalid(format!(
            "need i >= 1 and p > i+1, got p={p}, i={i}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let (pi, qi, ii) = (BigInt::from(p), BigInt::from(q), BigInt::from(i));
    let one = BigInt::one();
    let two = BigInt::from(2);
    let first_poly = &qi * &qi - &pi + &ii * &ii + &ii + &two * &qi * &ii - &one;
    let second_poly = &pi * &pi - &qi + &ii * &ii + &ii + &two * &pi * &ii - &one;
    let first =
        BigInt::from(falling_factorial(p, i - 1) * falling_factorial(p, i)) * &qi * first_poly;
    let second =
        &pi * BigInt::from(falling_factorial(q, i - 1) * falling_factorial(q, i)) * second_poly;
    let den = two * BigInt::from(n).pow(2 * i as u32);
    Ok(rational_to_f64(&BigRational::new(first + second, den)))
}

/// `(sqrt(2π) m^{m+1/2} e^{-m}, e m^{m+1/2} e^{-m})`.
pub fn stirling_bounds(m: u64) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::invalid("stirling bounds need m >= 1"));
    }
    let x = m as f64;
    let core = (x + 0.5) * x.ln() - x;
    let lower = (0.5 * (2.0 * std::f64::consts::PI).ln() + core).exp();
    let upper = (1.0 + core).exp();
    Ok((lower, upper))
}

/// Exact check `lower <= m! <= upper` with the float bounds converted to
/// rationals without rounding.
pub fn stirling_sandwich_holds(m: u64) -> Result<bool> {
    let (lower, upper) = stirling_bounds(m)?;
    let exact = BigRational::from_integer(BigInt::from(factorial(m)));
    let lo = BigRational::from_float(lower).ok_or_else(|| Error::invalid("non-finite bound"))?;
    let hi = BigRational::from_float(upper).ok_or_else(|| Error::invalid("non-finite bound"))?;
    Ok(lo <= exact && exact <= hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::{
        count_valid_ballot_pairs, exact_trace_covariance, exact_trace_moment, TraceMomentQuery,
    };

    fn r(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn exact_f64(b: &BigInt) -> f64 {
        b.to_f64().unwrap()
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5, 3), BigUint::from(60u32));
        assert_eq!(falling_factorial(7, 0), BigUint::one());
        assert_eq!(falling_factorial(3, 5), BigUint::zero());
    }

    #[test]
    fn narayana_examples() {
        assert_eq!(narayana(3, 1).unwrap(), BigUint::from(3u32));
        for h in 1..10 {
            assert_eq!(narayana(h, 0).unwrap(), BigUint::one());
        }
        let row: BigUint = (0..3).map(|r| narayana(3, r).unwrap()).sum();
        assert_eq!(row, BigUint::from(5u32));
        assert!(narayana(3, 3).is_err());
    }

    #[test]
    fn narayana_matches_ballot_enumeration() {
        for h in 1..=10u32 {
            for rr in 0..h {
                let brute = count_valid_ballot_pairs(h, rr).unwrap();
                assert_eq!(
                    narayana(h as u64, rr as u64).unwrap(),
                    BigUint::from(brute),
                    "h={h} r={rr}"
                );
            }
        }
    }

    #[test]
    fn binomial_against_pascal() {
        let mut row = vec![BigUint::one()];
        for n in 1..40u64 {
            let mut next = vec![BigUint::one(); n as usize + 1];
            for k in 1..n as usize {
                next[k] = &row[k - 1] + &row[k];
            }
            row = next;
            for k in 0..=n {
                assert_eq!(binomial(n, k), row[k as usize]);
            }
        }
    }

    #[test]
    fn mean_leading_examples() {
        let e = mean_trace_leading(3, 2, 1).unwrap();
        assert_eq!(e.main_term, r(6));
        assert_eq!(e.relative_error_envelope, 0.5);
        assert_eq!(mean_trace_leading(3, 2, 2).unwrap().main_term, r(18));
        assert!(matches!(
            mean_trace_leading(2, 2, 2),
            Err(Error::EnvelopeUndefined { .. })
        ));
        assert!(mean_trace_leading(2, 3, 1).is_err());
    }

    #[test]
    fn mean_leading_gap_at_p50() {
        let lead = mean_trace_leading(50, 2, 2).unwrap();
        let exact = exact_trace_moment(TraceMomentQuery::new(50, 2, 2).unwrap()).unwrap();
        assert_eq!(exact, 50 * 2 * 53);
        let gap = (lead.main_f64() / 5300.0 - 1.0).abs();
        // exact gap is (p+q+1)/(p+q+1) - (p+q-2)/(p+q+1) = 3/(p+q+1)
        assert!((gap - 3.0 / 53.0).abs() < 1e-12);
        assert!(gap <= 5.0 * lead.relative_error_envelope);
    }

    #[test]
    fn mean_leading_within_envelope() {
        for h in 1..=3u64 {
            for p in [20u64, 40, 60] {
                let lead = mean_trace_leading(p, 2, h).unwrap();
                let exact =
                    exact_trace_moment(TraceMomentQuery::new(p, 2, h as u32).unwrap()).unwrap();
                let ex: f64 = exact.0.to_f64().unwrap();
                assert!((lead.main_f64() / ex - 1.0).abs() <= 5.0 * lead.relative_error_envelope);
            }
        }
    }

    #[test]
    fn covariance_examples() {
        let b = covariance_breakdown(3, 2, 1, 1).unwrap();
        assert_eq!(b.term1, r(12));
        assert_eq!(b.term2, r(0));
        assert_eq!(b.three_term_sum(), r(12));
        assert!(b.simplified_main_double_counts());
        assert_eq!(b.simplified_main, r(24));
        assert_eq!(b.authoritative_main(), r(12));

        let b = covariance_breakdown(3, 2, 1, 2).unwrap();
        assert_eq!(b.simplified_main, r(120));
        assert!(!b.simplified_main_double_counts());
        // raw second bracket 2 p q (p+q) is reported but not applied at h = 1
        assert_eq!(b.term2_formula, r(60));
        assert_eq!(b.term2, r(0));
        assert_eq!(b.e_envelope, 2.0 * 3.0 * 4.0 * 64.0);
        assert_eq!(b.f_envelope, 256.0 * 3.0 * 4.0 * 64.0);
    }

    #[test]
    fn covariance_term2_vanishes_on_diagonal() {
        for h in 1..=5u64 {
            let b = covariance_breakdown(12, 3, h, h).unwrap();
            assert!(b.term2.is_zero());
            assert!(b.term2_formula.is_zero());
        }
        let b = covariance_breakdown(12, 3, 3, 5).unwrap();
        assert!(!b.term2.is_zero());
        assert_eq!(b.term2, b.term2_formula);
    }

    #[test]
    fn covariance_breakdown_within_envelope() {
        for (h, k) in [(1u64, 1u64), (1, 2), (2, 2), (2, 3)] {
            for p in [20u64, 40] {
                let b = covariance_breakdown(p, 2, h, k).unwrap();
                let exact = exact_trace_covariance(p, 2, h as u32, k as u32).unwrap();
                let ratio = rational_to_f64(&b.three_term_sum()) / exact_f64(&exact.0);
                assert!(
                    (ratio - 1.0).abs() <= 5.0 * k as f64 / (p - k) as f64,
                    "h={h} k={k} p={p} ratio={ratio}"
                );
            }
        }
    }

    #[test]
    fn covariance_preconditions() {
        assert!(matches!(
            covariance_breakdown(3, 2, 1, 3),
            Err(Error::EnvelopeUndefined { .. })
        ));
        assert!(covariance_breakdown(10, 2, 3, 2).is_err());
    }

    #[test]
    fn variance_display_example() {
        let v = variance_hi_main(3, 2, 100, 1).unwrap();
        assert!((v - 0.006).abs() < 1e-15);
        // p = q: the two summands coincide
        let p = 7;
        let a = variance_hi_main(p, p, 1, 2).unwrap();
        let first = (falling_factorial(p, 1) * falling_factorial(p, 2))
            .to_f64()
            .unwrap()
            * p as f64
            * ((p * p) as f64 - p as f64 + 4.0 + 2.0 + 4.0 * p as f64 - 1.0);
        assert!((a - first).abs() < 1e-9 * a);
    }

    /// `Var[h_1]` assembled from exact oracle covariances.
    fn exact_var_h1(p: u64, q: u64, n: u64) -> f64 {
        let a = (p + q + 1) as f64 / (2.0 * n as f64);
        let b = 1.0 / (4.0 * n as f64);
        let c11 = exact_f64(&exact_trace_covariance(p, q, 1, 1).unwrap().0);
        let c22 = exact_f64(&exact_trace_covariance(p, q, 2, 2).unwrap().0);
        let c12 = exact_f64(&exact_trace_covariance(p, q, 1, 2).unwrap().0);
        a * a * c11 + b * b * c22 - 2.0 * a * b * c12
    }

    #[test]
    fn variance_display_against_oracle() {
        let exact = exact_var_h1(3, 2, 100);
        assert!((exact - 0.0021).abs() < 1e-12);
        let main = variance_hi_main(3, 2, 100, 1).unwrap();
        assert!(exact <= main && main <= 3.0 * exact);
        // the leading p^3 q pieces cancel in the exact variance, so the
        // display is an upper bound that loosens as p grows
        for (p, q, n) in [(20, 2, 10_000), (40, 2, 10_000), (40, 4, 100_000)] {
            assert!(exact_var_h1(p, q, n) <= variance_hi_main(p, q, n, 1).unwrap());
        }
    }

    #[test]
    fn stirling_examples() {
        let (lo, hi) = stirling_bounds(1).unwrap();
        assert!((lo - 0.922_137).abs() < 1e-6);
        assert_eq!(hi, 1.0);
        let (lo, hi) = stirling_bounds(5).unwrap();
        assert!(lo <= 120.0 && 120.0 <= hi);
        for m in 1..=20 {
            assert!(stirling_sandwich_holds(m).unwrap(), "m = {m}");
        }
        assert!(stirling_bounds(0).is_err());
    }
}
