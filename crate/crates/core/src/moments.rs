//! First and second moments of the number of zero-sum column subsets.
//!
//! For a random `n × d` sign matrix, `X` counts the `s`-column subsets `S`
//! whose columns sum to zero in every row. Everything here is computed
//! exactly from binomial sums; the log mode trades exactness for range.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::ExactProb;

fn big_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        BigUint::zero()
    } else {
        binomial(BigUint::from(n), BigUint::from(k))
    }
}

/// `C(n, 0..=n)`.
fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    for k in 0..=n {
        row.push(c.clone());
        c = c * (n - k) / (k + 1);
    }
    row
}

/// `Σ_k C(m,k) C(n-m, n/2-k)^2`, the number of joint zero assignments
/// before dividing by `2^{2n-m}`.
fn overlap_count(n: usize, m: usize) -> BigUint {
    let h = n / 2;
    let shared = binomial_row(m);
    let rest = binomial_row(n - m);
    let mut sum = BigUint::zero();
    for k in 0..=m.min(h) {
        if h - k > n - m {
            continue;
        }
        let outer = &rest[h - k];
        sum += &shared[k] * outer * outer;
    }
    sum
}

fn require_even(n: usize, what: &str) -> Result<()> {
    if n % 2 == 1 {
        Err(Error::InvalidArgument(format!("{what} must be even, got {n}; odd sign sums never vanish")))
    } else {
        Ok(())
    }
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `P[ξ_1 + ... + ξ_n = 0] = C(n, n/2) / 2^n`.
pub fn prob_sum_zero(n: usize) -> Result<ExactProb> {
    require_even(n, "n")?;
    Ok(ExactProb::new(big_binomial(n, n / 2), n as u64))
}

/// The correlation ratio: probability that `ξ_1 + ... + ξ_n` and
/// `ξ_1 + ... + ξ_m + ξ'_{m+1} + ... + ξ'_n` both vanish, over the square
/// of the single-sum probability. Closed form:
/// `2^m Σ_k C(m,k) C(n-m, n/2-k)^2 / C(n, n/2)^2`.
pub fn alpha_exact(n: usize, m: usize) -> Result<BigRational> {
    require_even(n, "n")?;
    if m > n {
        return Err(Error::InvalidArgument(format!("overlap m = {m} exceeds n = {n}")));
    }
    let central = big_binomial(n, n / 2);
    Ok(ratio(overlap_count(n, m) << m, &central * &central))
}

/// Largest `2n - m` that `alpha_bruteforce` will enumerate.
pub const ALPHA_BRUTEFORCE_MAX_BITS: usize = 24;

/// α(n, m) by enumerating all `2^{2n-m}` sign assignments.
pub fn alpha_bruteforce(n: usize, m: usize) -> Result<BigRational> {
    require_even(n, "n")?;
    if m > n {
        return Err(Error::InvalidArgument(format!("overlap m = {m} exceeds n = {n}")));
    }
    let bits = 2 * n - m;
    if bits > ALPHA_BRUTEFORCE_MAX_BITS {
        return Err(Error::BudgetExceeded(format!(
            "2n - m = {bits} exceeds the enumeration limit {ALPHA_BRUTEFORCE_MAX_BITS}"
        )));
    }
    let first = (1u64 << n) - 1;
    let shared = (1u64 << m) - 1;
    let mut joint: u64 = 0;
    for x in 0u64..(1 << bits) {
        // Bits 0..n are ξ; bits n..2n-m are ξ'_{m+1..n}.
        let a = (x & first).count_ones() as usize;
        let b = (x & shared).count_ones() as usize + (x >> n).count_ones() as usize;
        if 2 * a == n && 2 * b == n {
            joint += 1;
        }
    }
    let single = (0u64..(1 << n)).filter(|x| 2 * x.count_ones() as usize == n).count() as u64;
    // (joint / 2^bits) / (single / 2^n)^2
    let num = BigUint::from(joint) << (2 * n);
    let den = (BigUint::from(single) * BigUint::from(single)) << bits;
    Ok(ratio(num, den))
}

/// α(n, 0..=n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaTable {
    pub n: usize,
    pub values: Vec<BigRational>,
}

pub fn alpha_table(n: usize) -> Result<AlphaTable> {
    let values = (0..=n).map(|m| alpha_exact(n, m)).collect::<Result<_>>()?;
    Ok(AlphaTable { n, values })
}

/// `C(s, m) C(d-s, s-m) / C(d, s)`: the chance that a second random
/// `s`-subset shares exactly `m` columns with a fixed one.
pub fn hypergeometric_weight(s: usize, d: usize, m: usize) -> Result<BigRational> {
    if m > s || s > d {
        return Err(Error::InvalidArgument(format!("need m <= s <= d, got m = {m}, s = {s}, d = {d}")));
    }
    Ok(ratio(big_binomial(s, m) * big_binomial(d - s, s - m), big_binomial(d, s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    Exact,
    Log,
}

impl std::str::FromStr for MomentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(MomentMode::Exact),
            "log" => Ok(MomentMode::Log),
            _ => Err(Error::InvalidArgument(format!("unknown moment mode {s:?}, expected exact or log"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub mode: MomentMode,
    /// `E X` as a dyadic rational; exact mode only.
    pub mean: Option<ExactProb>,
    /// `Var X` as a dyadic rational; exact mode only.
    pub variance: Option<ExactProb>,
    pub ln_mean: f64,
    /// `Var X / (E X)^2 = Σ_m w_m (α(s,m)^n - 1)`.
    pub var_over_mean_sq: f64,
    /// `max(0, 1 - Var X / (E X)^2)`, a lower bound on `P[X > 0]`.
    pub chebyshev_lower_bound: f64,
}

/// Exact numerators are refused beyond this many bits.
pub const EXACT_MOMENT_MAX_BITS: u64 = 4_000_000;

/// Mean and variance of the number of zero-sum `s`-subsets of columns of
/// a random `n × d` sign matrix.
pub fn moment_report(n: usize, d: usize, s: usize, mode: MomentMode) -> Result<MomentReport> {
    require_even(s, "s")?;
    if s > n.min(d) {
        return Err(Error::InvalidArgument(format!("need s <= min(n, d), got s = {s}, n = {n}, d = {d}")));
    }
    match mode {
        MomentMode::Exact => exact_moments(n, d, s),
        MomentMode::Log => log_moments(n, d, s),
    }
}

fn exact_moments(n: usize, d: usize, s: usize) -> Result<MomentReport> {
    let subsets = big_binomial(d, s);
    let bits = 2 * (s * n) as u64 + 2 * subsets.bits();
    if bits > EXACT_MOMENT_MAX_BITS {
        return Err(Error::Overflow(format!(
            "exact moments for (n, d, s) = ({n}, {d}, {s}) need about {bits} bits; use log mode"
        )));
    }
    let q = prob_sum_zero(s)?;
    let q_n = q.pow(n as u32);
    let mean = ExactProb::new(subsets.clone(), 0).mul(&q_n);

    // Var X = C(d,s) Σ_m C(s,m) C(d-s,s-m) (P_m^n - q^{2n}) with P_m the
    // one-row probability that two subsets overlapping in m columns both
    // sum to zero.
    let q_2n = q_n.mul(&q_n);
    let mut positive = ExactProb::zero();
    let mut negative = ExactProb::zero();
    for m in 0..=s {
        let pairs = big_binomial(s, m) * big_binomial(d - s, s - m);
        if pairs.is_zero() {
            continue;
        }
        let joint = ExactProb::new(overlap_count(s, m), (2 * s - m) as u64).pow(n as u32);
        let weight = ExactProb::new(pairs, 0);
        positive = positive.add(&weight.mul(&joint));
        negative = negative.add(&weight.mul(&q_2n));
    }
    let scale = ExactProb::new(subsets, 0);
    let variance = dyadic_difference(&scale.mul(&positive), &scale.mul(&negative))?;
    let mean_sq = mean.mul(&mean);
    let ratio = variance.to_rational() / mean_sq.to_rational();
    let var_over_mean_sq = ratio.to_f64().unwrap_or(f64::INFINITY);
    Ok(MomentReport {
        n,
        d,
        s,
        mode: MomentMode::Exact,
        ln_mean: mean.ln(),
        mean: Some(mean),
        variance: Some(variance),
        var_over_mean_sq,
        chebyshev_lower_bound: (1.0 - var_over_mean_sq).max(0.0),
    })
}

fn dyadic_difference(a: &ExactProb, b: &ExactProb) -> Result<ExactProb> {
    if a < b {
        return Err(Error::InvalidArgument("negative variance; arithmetic invariant broken".into()));
    }
    let e = a.exponent().max(b.exponent());
    let x = a.numerator() << (e - a.exponent());
    let y = b.numerator() << (e - b.exponent());
    Ok(ExactProb::new(x - y, e))
}

fn log_moments(n: usize, d: usize, s: usize) -> Result<MomentReport> {
    let q = prob_sum_zero(s)?;
    let ln_mean = ln_binomial(d, s) + n as f64 * q.ln();
    let inside = binomial_row(s);
    let outside = binomial_row(d - s);
    let subsets = big_binomial(d, s);
    let mut ratio = 0.0;
    for m in 0..=s {
        if s - m > d - s {
            continue;
        }
        let w = BigRational::new(BigInt::from(&inside[m] * &outside[s - m]), BigInt::from(subsets.clone()))
            .to_f64()
            .unwrap_or(0.0);
        if w == 0.0 {
            continue;
        }
        // α - 1 is formed exactly, so small excesses keep full precision.
        let excess = (alpha_exact(s, m)? - BigRational::one()).to_f64().unwrap_or(f64::INFINITY);
        ratio += w * (n as f64 * excess.ln_1p()).exp_m1();
    }
    Ok(MomentReport {
        n,
        d,
        s,
        mode: MomentMode::Log,
        mean: None,
        variance: None,
        ln_mean,
        var_over_mean_sq: ratio,
        chebyshev_lower_bound: (1.0 - ratio).max(0.0),
    })
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Binomial relative entropy `q ln(q/p) + (1-q) ln((1-q)/(1-p))`.
pub fn kl_divergence<T: Float>(q: T, p: T) -> Result<T> {
    let inside = |x: T| x > T::zero() && x < T::one();
    if !inside(q) || !inside(p) {
        return Err(Error::InvalidArgument("kl_divergence needs 0 < q, p < 1".into()));
    }
    let one = T::one();
    Ok(q * (q / p).ln() + (one - q) * ((one - q) / (one - p)).ln())
}
