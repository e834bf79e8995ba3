//! Exact Littlewood-Offord quantities: the law of a signed sum, its atom
//! probability, the R_k* collision count, the Halász-type bound built on
//! it, and membership in the sets of vectors whose every large subvector
//! has many collisions.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{Float, FromPrimitive};

use crate::error::{Error, Result};
use crate::linalg::{find_sparse_kernel_vector, FieldSpec, SparseSearch, SparseSearchConfig};
use crate::matrix::{SeedSpec, SignMatrix};
use crate::prob::ExactProb;
use crate::vector::FpVector;

/// Largest support `walk_distribution` enumerates unless told otherwise.
pub const DEFAULT_WALK_SUPPORT: usize = 30;

/// Work units (table entries touched) allowed for one R_k* evaluation.
pub const DEFAULT_RK_BUDGET: u64 = 50_000_000;

/// Exact law of `Σ a_i ξ_i` with independent uniform signs `ξ_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkDistribution {
    /// Modulus of the sum; 0 for the integers.
    pub p: u64,
    /// Value (reduced into `[0, p)` when `p > 0`) to number of sign patterns.
    pub masses: BTreeMap<i128, u128>,
    /// Total mass is `2^total_exponent`.
    pub total_exponent: u32,
}

impl WalkDistribution {
    pub fn count(&self, value: i128) -> u128 {
        self.masses.get(&reduce(value, self.p)).copied().unwrap_or(0)
    }

    pub fn prob(&self, value: i128) -> ExactProb {
        ExactProb::new(self.count(value), self.total_exponent as u64)
    }

    /// Largest mass and the smallest value attaining it.
    pub fn max_mass(&self) -> (i128, u128) {
        let mut best = (0, 0);
        for (&v, &c) in &self.masses {
            if c > best.1 {
                best = (v, c);
            }
        }
        best
    }
}

fn reduce(x: i128, p: u64) -> i128 {
    if p == 0 {
        x
    } else {
        x.rem_euclid(p as i128)
    }
}

fn support_values(a: &FpVector) -> Vec<i128> {
    a.support_values().into_iter().map(i128::from).collect()
}

pub fn walk_distribution(a: &FpVector) -> Result<WalkDistribution> {
    walk_distribution_with_budget(a, DEFAULT_WALK_SUPPORT)
}

/// Iterated sparse convolution over the support of `a`. Refuses supports
/// larger than `max_support` (at most 120, so counts fit in `u128`).
pub fn walk_distribution_with_budget(a: &FpVector, max_support: usize) -> Result<WalkDistribution> {
    let max_support = max_support.min(120);
    let support = a.support_size();
    if support > max_support {
        return Err(Error::BudgetExceeded(format!(
            "support {support} exceeds the walk enumeration limit {max_support}"
        )));
    }
    let p = a.modulus();
    let mut dist: HashMap<i128, u128> = HashMap::from([(0, 1)]);
    for v in support_values(a) {
        let mut next = HashMap::with_capacity(dist.len() * 2);
        for (&x, &c) in &dist {
            *next.entry(reduce(x + v, p)).or_insert(0) += c;
            *next.entry(reduce(x - v, p)).or_insert(0) += c;
        }
        dist = next;
    }
    Ok(WalkDistribution { p, masses: dist.into_iter().collect(), total_exponent: support as u32 })
}

/// Atom probability `max_x P[Σ a_i ξ_i = x]`, exact.
pub fn rho(a: &FpVector) -> Result<ExactProb> {
    if a.is_zero() {
        return Err(Error::InvalidArgument("rho of the zero vector is degenerate".into()));
    }
    let w = walk_distribution(a)?;
    Ok(ExactProb::new(w.max_mass().1, w.total_exponent as u64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RkStarParams {
    pub k: usize,
    /// Solutions must use more than `distinctness_threshold * k` distinct
    /// indices.
    pub distinctness_threshold: f64,
}

impl RkStarParams {
    pub fn new(k: usize) -> Self {
        Self { k, distinctness_threshold: 1.01 }
    }

    fn enough_distinct(&self, r: usize) -> bool {
        r as f64 > self.distinctness_threshold * self.k as f64
    }
}

pub fn rk_star(a: &FpVector, params: RkStarParams) -> Result<u128> {
    rk_star_with_budget(a, params, DEFAULT_RK_BUDGET)
}

/// Counts pairs (ordered index tuple `i` in `supp(a)^{2k}`, sign pattern
/// `ε` in `{±1}^{2k}`) with `Σ ε_j a_{i_j} = 0` (mod p) and enough
/// distinct indices.
///
/// All solutions are counted by convolving the one-step law `k` times and
/// pairing values with their negatives; solutions with too few distinct
/// indices are counted separately by position partition and subtracted.
pub fn rk_star_with_budget(a: &FpVector, params: RkStarParams, budget: u64) -> Result<u128> {
    let p = a.modulus();
    let vals = support_values(a);
    let k = params.k;
    let mut work: u64 = 0;
    let mut spend = |units: u64| -> Result<()> {
        work = work.saturating_add(units);
        if work > budget {
            Err(Error::BudgetExceeded(format!("R_k* evaluation needs more than {budget} work units")))
        } else {
            Ok(())
        }
    };

    let mut step: HashMap<i128, u128> = HashMap::new();
    for &v in &vals {
        *step.entry(reduce(v, p)).or_insert(0) += 1;
        *step.entry(reduce(-v, p)).or_insert(0) += 1;
    }
    let mut half: HashMap<i128, u128> = HashMap::from([(0, 1)]);
    for _ in 0..k {
        spend(half.len() as u64 * step.len() as u64)?;
        let mut next = HashMap::with_capacity(half.len() * step.len());
        for (&x, &c) in &half {
            for (&y, &e) in &step {
                *next.entry(reduce(x + y, p)).or_insert(0u128) += c * e;
            }
        }
        half = next;
    }
    let mut all: u128 = 0;
    for (&x, &c) in &half {
        let opposite = half.get(&reduce(-x, p)).copied().unwrap_or(0);
        all = all.checked_add(c * opposite).ok_or_else(|| Error::Overflow("R_k* exceeds u128".into()))?;
    }

    let mut few: u128 = 0;
    for sizes in partitions(2 * k) {
        if params.enough_distinct(sizes.len()) || sizes.len() > vals.len() {
            continue;
        }
        let cost = (vals.len() as u64)
            .saturating_pow(sizes.len() as u32)
            .saturating_mul(sizes.iter().map(|&b| b as u64 + 1).product());
        spend(cost)?;
        let ways = partition_count(&sizes);
        let mut used = vec![false; vals.len()];
        let assigned = injective_zero_sums(&vals, p, &sizes, &mut used, 0);
        few += ways * assigned;
    }
    Ok(all - few)
}

/// Integer partitions of `total` as nonincreasing part lists.
fn partitions(total: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, total, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Number of set partitions of `Σ sizes` positions with these block sizes.
fn partition_count(sizes: &[usize]) -> u128 {
    let total: usize = sizes.iter().sum();
    let mut denom: u128 = sizes.iter().map(|&b| factorial(b)).product();
    let mut i = 0;
    while i < sizes.len() {
        let run = sizes[i..].iter().take_while(|&&b| b == sizes[i]).count();
        denom *= factorial(run);
        i += run;
    }
    factorial(total) / denom
}

/// Σ over injective block-to-index maps and per-block sign totals `c_j`
/// (weighted by the number of sign patterns giving that total) of
/// `[Σ c_j a_{i_j} = 0]`.
fn injective_zero_sums(vals: &[i128], p: u64, sizes: &[usize], used: &mut [bool], acc: i128) -> u128 {
    let Some((&b, rest)) = sizes.split_first() else {
        return u128::from(reduce(acc, p) == 0);
    };
    let mut total = 0;
    for i in 0..vals.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut binom: u128 = 1;
        for plus in 0..=b {
            let c = 2 * plus as i128 - b as i128;
            total += binom * injective_zero_sums(vals, p, rest, used, reduce(acc + c * vals[i], p));
            binom = binom * (b - plus) as u128 / (plus + 1) as u128;
        }
        used[i] = false;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalaszParams {
    pub k: usize,
    /// The concentration parameter `L`, positive.
    pub l: f64,
    /// Multiplier of the collision term.
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalaszReport {
    pub rho: ExactProb,
    pub rk_star: u128,
    /// The collision term without its constant:
    /// `(R_k* + ((40k)^0.99 n^1.01)^k) / (4^k n^{2k} √L)`.
    pub collision_term: f64,
    /// `1/p + C · collision_term + e^{-L}`.
    pub bound: f64,
}

/// The collision term `(R + ((40k)^0.99 n^1.01)^k) / (4^k n^{2k} √L)`,
/// evaluated without forming the large powers.
pub fn halasz_collision_term<T: Float + FromPrimitive>(n: T, k: usize, l: T, rk: T) -> T {
    let c = |x: f64| T::from_f64(x).expect("representable constant");
    let kf = c(k as f64);
    let scale = (c(4.0).ln() * kf + c(2.0) * kf * n.ln()).exp();
    let structured = ((c(40.0) * kf).powf(c(0.99)) * n.powf(c(1.01)) / (c(4.0) * n * n)).powi(k as i32);
    (rk / scale + structured) / l.sqrt()
}

/// `1/p + C · collision_term + e^{-L}`.
pub fn halasz_rhs<T: Float + FromPrimitive>(p: T, n: T, k: usize, l: T, c: T, rk: T) -> T {
    p.recip() + c * halasz_collision_term(n, k, l, rk) + (-l).exp()
}

/// Checks the bound's hypotheses, naming the first one that fails.
pub fn check_halasz_preconditions(a: &FpVector, k: usize, l: f64) -> Result<()> {
    let n = a.len() as f64;
    let supp = a.support_size() as f64;
    let fail = |what: String| Err(Error::Precondition(what));
    if a.modulus() == 0 {
        return fail("the bound needs an odd prime modulus, got p = 0".into());
    }
    if a.is_zero() {
        return fail("a must be nonzero".into());
    }
    if 2 * k > a.len() {
        return fail(format!("k <= n/2 fails: k = {k}, n = {}", a.len()));
    }
    if l.is_nan() || l <= 0.0 {
        return fail(format!("L > 0 fails: L = {l}"));
    }
    if 30.0 * l > supp {
        return fail(format!("30L <= |supp(a)| fails: 30 * {l} > {supp}"));
    }
    if 80.0 * k as f64 * l > n {
        return fail(format!("80kL <= n fails: 80 * {k} * {l} > {n}"));
    }
    Ok(())
}

/// Largest `L` allowed by the hypotheses for this `a` and `k`.
pub fn max_admissible_l(a: &FpVector, k: usize) -> f64 {
    let by_support = a.support_size() as f64 / 30.0;
    if k == 0 {
        by_support
    } else {
        by_support.min(a.len() as f64 / (80.0 * k as f64))
    }
}

/// Evaluates the bound with `n = a.len()` alongside the exact `ρ(a)`.
pub fn halasz_bound(a: &FpVector, params: HalaszParams) -> Result<HalaszReport> {
    check_halasz_preconditions(a, params.k, params.l)?;
    let rk = rk_star(a, RkStarParams::new(params.k))?;
    let collision_term = halasz_collision_term(a.len() as f64, params.k, params.l, rk as f64);
    let bound = halasz_rhs(a.modulus() as f64, a.len() as f64, params.k, params.l, params.c, rk as f64);
    Ok(HalaszReport { rho: rho(a)?, rk_star: rk, collision_term, bound })
}

/// Smallest nonnegative constant for which the bound covers every pilot
/// `(a, k, L)`.
pub fn calibrate_halasz_constant(pilot: &[(FpVector, usize, f64)]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for (a, k, l) in pilot {
        let r = halasz_bound(a, HalaszParams { k: *k, l: *l, c: 0.0 })?;
        let slack = r.rho.to_f64() - r.bound;
        if slack > 0.0 {
            c = c.max(slack / r.collision_term);
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BadParams {
    pub k: usize,
    /// Smallest subvector support that must have many collisions.
    pub m: usize,
    /// Collision multiplier.
    pub t: u64,
    /// Largest allowed support of `a`.
    pub s: usize,
}

/// Subvectors checked by one `bad_membership` call unless told otherwise.
pub const DEFAULT_BAD_BUDGET: u64 = 1 << 20;

/// Whether `a` has support at most `s` and every subvector `b` (a
/// restriction to `S ⊆ supp(a)`, `|S| >= m`) has
/// `R_k*(b) >= t · 4^k · |S|^{2k} / p`.
///
/// The zero vector is never a member. A nonzero vector with fewer than `m`
/// nonzero entries is a member vacuously.
pub fn bad_membership(a: &FpVector, params: BadParams, budget: u64) -> Result<bool> {
    let p = a.modulus();
    if p == 0 {
        return Err(Error::InvalidArgument("membership is defined over F_p; got p = 0".into()));
    }
    let supp = a.support();
    if a.is_zero() || supp.len() > params.s {
        return Ok(false);
    }
    if supp.len() < params.m {
        return Ok(true);
    }
    let subsets: u64 = (params.m..=supp.len()).map(|size| binomial_u64(supp.len(), size)).sum();
    if subsets > budget {
        return Err(Error::BudgetExceeded(format!("{subsets} subvectors exceed the budget of {budget}")));
    }
    let values = a.support_values();
    let four_k = BigUint::from(4u32).pow(params.k as u32);
    for mask in 1u64..(1 << values.len()) {
        let size = mask.count_ones() as usize;
        if size < params.m {
            continue;
        }
        let b: Vec<i64> = (0..values.len()).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).collect();
        let rk = rk_star(&FpVector::new_unchecked(p, b), RkStarParams::new(params.k))?;
        let lhs = BigUint::from(rk) * p;
        let rhs = BigUint::from(params.t) * &four_k * BigUint::from(size).pow(2 * params.k as u32);
        if lhs < rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn binomial_u64(n: usize, k: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) as u64 / (i + 1) as u64;
    }
    c
}

/// The right-hand side of the count bound:
/// `C(d, s) (m/s)^{2k-1} (1.01 t)^{m-s} p^s`.
pub fn bad_count_bound(d: usize, p: u64, params: BadParams) -> f64 {
    let (k, m, s) = (params.k as f64, params.m as f64, params.s as f64);
    let ln = ln_binomial(d, params.s) + (2.0 * k - 1.0) * (m / s).ln() + (m - s) * (1.01 * params.t as f64).ln()
        + s * (p as f64).ln();
    ln.exp()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub vector: FpVector,
    pub rho: ExactProb,
}

/// Looks for kernel vectors of `m1` with support at most `s` and reports
/// the atom probability of each one found. The search is exhaustive when
/// the subset count fits `budget`, and otherwise samples information sets.
/// An empty report is the typical outcome for random matrices.
pub fn kernel_rho_audit(
    m1: &SignMatrix,
    field: FieldSpec,
    s: usize,
    budget: u64,
    seed: SeedSpec,
) -> Result<Vec<AuditEntry>> {
    let s = s.min(m1.cols());
    if s == 0 {
        return Ok(Vec::new());
    }
    let config = SparseSearchConfig { exhaustive_budget: budget, ..SparseSearchConfig::default() };
    match find_sparse_kernel_vector(m1, s, field, config, seed)? {
        SparseSearch::Found(v) => {
            let r = rho(&v)?;
            Ok(vec![AuditEntry { vector: v, rho: r }])
        }
        SparseSearch::NoneExist | SparseSearch::Unknown => Ok(Vec::new()),
    }
}

// Only used by tests, kept here so the oracle sits next to what it checks.
#[cfg(test)]
fn brute_force_walk(a: &FpVector) -> BTreeMap<i128, u128> {
    let vals = support_values(a);
    let mut out = BTreeMap::new();
    for mask in 0u64..(1 << vals.len()) {
        let s: i128 = vals.iter().enumerate().map(|(i, &v)| if mask >> i & 1 == 1 { v } else { -v }).sum();
        *out.entry(reduce(s, a.modulus())).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::generate;
    use rand::Rng;

    fn v(p: u64, e: &[i64]) -> FpVector {
        FpVector::new(p, e.to_vec()).unwrap()
    }

    #[test]
    fn walk_examples() {
        let w = walk_distribution(&v(5, &[1])).unwrap();
        assert_eq!(w.masses, BTreeMap::from([(1, 1), (4, 1)]));
        assert_eq!(w.total_exponent, 1);
        let w = walk_distribution(&v(0, &[1, 1, 1])).unwrap();
        assert_eq!(w.masses, BTreeMap::from([(-3, 1), (-1, 3), (1, 3), (3, 1)]));
        let w = walk_distribution(&v(3, &[1, 1, 1])).unwrap();
        assert_eq!(w.masses, BTreeMap::from([(0, 2), (1, 3), (2, 3)]));
        assert_eq!(w.prob(0), ExactProb::new(1u32, 2));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&v(7, &[1, 1])).unwrap(), ExactProb::new(1u32, 1));
        assert_eq!(rho(&v(1_000_003, &[1, 1, 1, 1])).unwrap(), ExactProb::new(3u32, 3));
        assert!(rho(&FpVector::zeros(5, 3)).is_err());
        let big = FpVector::integers(vec![1; 40]);
        assert!(matches!(rho(&big), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn walk_matches_enumeration_and_is_symmetric() {
        let mut rng = SeedSpec::new(9, 0).rng();
        for p in [0u64, 3, 5, 17, 101] {
            for _ in 0..40 {
                let len = rng.gen_range(1..=12);
                let e: Vec<i64> = (0..len).map(|_| rng.gen_range(-6..=6)).collect();
                let a = v(p, &e);
                let w = walk_distribution(&a).unwrap();
                assert_eq!(w.masses, brute_force_walk(&a));
                assert_eq!(w.masses.values().sum::<u128>(), 1u128 << a.support_size());
                for (&x, &c) in &w.masses {
                    assert_eq!(w.count(-x), c);
                }
            }
        }
    }

    #[test]
    fn rho_is_dilation_invariant() {
        let p = 101;
        let mut rng = SeedSpec::new(10, 0).rng();
        for _ in 0..50 {
            let e: Vec<i64> = (0..8).map(|_| rng.gen_range(0..p as i64)).collect();
            let a = v(p, &e);
            if a.is_zero() {
                continue;
            }
            let c = rng.gen_range(1..p as i64);
            assert_eq!(rho(&a).unwrap(), rho(&a.scale(c)).unwrap());
        }
    }

    #[test]
    fn erdos_bound_on_small_integer_vectors() {
        // All vectors with entries in {1, 2, 3}, n <= 7 here; the
        // acceptance suite covers larger n.
        for n in 1..=7usize {
            let central = ExactProb::new(binomial_u64(n, n / 2), n as u64);
            for code in 0..3usize.pow(n as u32) {
                let e: Vec<i64> = (0..n).map(|i| (code / 3usize.pow(i as u32) % 3) as i64 + 1).collect();
                assert!(rho(&FpVector::integers(e)).unwrap() <= central);
            }
        }
    }

    /// Enumerates every index tuple and sign pattern.
    fn rk_brute(a: &FpVector, k: usize) -> u128 {
        let vals = support_values(a);
        let n = vals.len();
        let len = 2 * k;
        let mut count = 0;
        for code in 0..n.pow(len as u32) {
            let idx: Vec<usize> = (0..len).map(|j| code / n.pow(j as u32) % n).collect();
            let mut distinct = idx.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() as f64 <= 1.01 * k as f64 {
                continue;
            }
            for signs in 0u32..(1 << len) {
                let s: i128 = idx
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| if signs >> j & 1 == 1 { vals[i] } else { -vals[i] })
                    .sum();
                if reduce(s, a.modulus()) == 0 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn rk_star_examples() {
        assert_eq!(rk_star(&v(5, &[1, 1]), RkStarParams::new(1)).unwrap(), 4);
        assert_eq!(rk_star(&v(5, &[1]), RkStarParams::new(1)).unwrap(), 0);
        assert_eq!(rk_star(&v(5, &[3, 0, 0]), RkStarParams::new(2)).unwrap(), 0);
        assert_eq!(rk_star(&v(5, &[1, 2]), RkStarParams::new(0)).unwrap(), 0);
    }

    #[test]
    fn rk_star_matches_tuple_enumeration() {
        let mut rng = SeedSpec::new(11, 0).rng();
        for p in [0u64, 3, 5, 7, 13] {
            for _ in 0..15 {
                let len = rng.gen_range(1..=6);
                let e: Vec<i64> = (0..len).map(|_| rng.gen_range(-4..=4)).collect();
                let a = v(p, &e);
                for k in 1..=2 {
                    assert_eq!(rk_star(&a, RkStarParams::new(k)).unwrap(), rk_brute(&a, k), "{a:?} k={k}");
                }
            }
        }
        let a = v(0, &[1, 1, 2]);
        assert_eq!(rk_star(&a, RkStarParams::new(3)).unwrap(), rk_brute(&a, 3));
    }

    #[test]
    fn rk_star_mean_on_random_vectors() {
        // Average over uniform a in F_p^n against 4^k n^{2k} / p.
        let (p, n, k) = (101u64, 8usize, 2usize);
        let mut rng = SeedSpec::new(12, 0).rng();
        let trials = 400;
        let mut total = 0f64;
        for _ in 0..trials {
            let e: Vec<i64> = (0..n).map(|_| rng.gen_range(1..p as i64)).collect();
            total += rk_star(&v(p, &e), RkStarParams::new(k)).unwrap() as f64;
        }
        let mean = total / trials as f64;
        let expected = 4f64.powi(k as i32) * (n as f64).powi(2 * k as i32) / p as f64;
        assert!((mean / expected - 1.0).abs() < 0.15, "mean {mean} vs {expected}");
    }

    #[test]
    fn rk_star_refuses_over_budget() {
        let a = v(1_000_003, &(1..=20).collect::<Vec<_>>());
        assert!(matches!(rk_star_with_budget(&a, RkStarParams::new(3), 1000), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partition_count(&[2, 2]), 3);
        assert_eq!(partition_count(&[2, 1, 1]), 6);
        let bell4: u128 = partitions(4).iter().map(|s| partition_count(s)).sum();
        assert_eq!(bell4, 15);
    }

    #[test]
    fn halasz_preconditions_and_shape() {
        let a = v(101, &[1; 30]);
        assert!(matches!(halasz_bound(&a, HalaszParams { k: 1, l: 1.5, c: 1.0 }), Err(Error::Precondition(_))));
        let err = halasz_bound(&a, HalaszParams { k: 1, l: 0.375, c: 1.0 }).unwrap();
        assert!(err.bound >= 1.0 / 101.0);
        assert!(err.bound >= err.rho.to_f64());
        let e = check_halasz_preconditions(&a, 16, 0.1).unwrap_err().to_string();
        assert!(e.contains("k <= n/2"), "{e}");
        let e = check_halasz_preconditions(&a, 1, 0.5).unwrap_err().to_string();
        assert!(e.contains("80kL"), "{e}");
        assert!(check_halasz_preconditions(&FpVector::integers(vec![1; 30]), 1, 0.1).is_err());
        let lo: f64 = halasz_rhs(101.0, 30.0, 1, 0.3, 2.0, 10.0);
        let hi: f64 = halasz_rhs(101.0, 30.0, 1, 0.3, 2.0, 20.0);
        assert!(lo < hi);
        let single: f32 = halasz_rhs(101.0f32, 30.0, 1, 0.3, 2.0, 10.0);
        assert!((single as f64 - lo).abs() < 1e-5);
    }

    #[test]
    fn calibration_is_never_negative() {
        let pilot: Vec<_> = (1..=10).map(|n| (v(7, &vec![1; 2 * n]), 1, 2.0 * n as f64 / 80.0)).collect();
        let c = calibrate_halasz_constant(&pilot).unwrap();
        assert!(c >= 0.0);
        for (a, k, l) in &pilot {
            let r = halasz_bound(a, HalaszParams { k: *k, l: *l, c }).unwrap();
            assert!(r.rho.to_f64() <= r.bound);
        }
    }

    #[test]
    fn bad_membership_edges() {
        let params = BadParams { k: 1, m: 2, t: 2, s: 3 };
        assert!(!bad_membership(&FpVector::zeros(5, 6), params, DEFAULT_BAD_BUDGET).unwrap());
        assert!(bad_membership(&v(5, &[0, 3, 0, 0, 0, 0]), params, DEFAULT_BAD_BUDGET).unwrap());
        assert!(!bad_membership(&v(5, &[1, 1, 1, 1, 0, 0]), params, DEFAULT_BAD_BUDGET).unwrap());
        let t0 = BadParams { t: 0, ..params };
        assert!(bad_membership(&v(5, &[1, 2, 3, 0, 0, 0]), t0, DEFAULT_BAD_BUDGET).unwrap());
        assert!(bad_membership(&FpVector::integers(vec![1]), params, 10).is_err());
        let big = BadParams { k: 1, m: 1, t: 1, s: 30 };
        assert!(bad_membership(&v(5, &[1; 30]), big, 10).is_err());
    }

    #[test]
    fn bad_membership_is_monotone() {
        let mut rng = SeedSpec::new(13, 0).rng();
        for _ in 0..200 {
            let e: Vec<i64> = (0..5).map(|_| if rng.gen_bool(0.6) { rng.gen_range(1..7) } else { 0 }).collect();
            let a = v(7, &e);
            for k in 1..=2 {
                for m in 1..=4 {
                    for t in 0..4 {
                        let base = BadParams { k, m, t, s: 5 };
                        let member = bad_membership(&a, base, DEFAULT_BAD_BUDGET).unwrap();
                        let higher_t = bad_membership(&a, BadParams { t: t + 1, ..base }, DEFAULT_BAD_BUDGET).unwrap();
                        let lower_m = bad_membership(&a, BadParams { m: m - 1, ..base }, DEFAULT_BAD_BUDGET).unwrap();
                        assert!(!higher_t || member);
                        assert!(!lower_m || member);
                    }
                }
            }
        }
    }

    #[test]
    fn count_bound_value() {
        let b = bad_count_bound(6, 5, BadParams { k: 1, m: 2, t: 2, s: 3 });
        let expected = 20.0 * (2.0 / 3.0) / 2.02 * 125.0;
        assert!((b / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_examples() {
        let full = generate(8, 5, SeedSpec::new(14, 0));
        assert!(kernel_rho_audit(&full, FieldSpec::Rationals, 5, 1 << 20, SeedSpec::new(0, 0)).unwrap().is_empty());
        let dup = SignMatrix::from_rows(&[[1i8, 1, -1], [-1, -1, 1], [1, 1, 1]]).unwrap();
        let report = kernel_rho_audit(&dup, FieldSpec::Rationals, 2, 1 << 20, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].vector.entries(), &[1, -1, 0]);
        assert_eq!(report[0].rho, ExactProb::new(1u32, 1));
    }

    #[test]
    fn audit_reports_verified_sparse_vectors() {
        // At 20 x 30 sparse kernel vectors with small coefficients turn out
        // to be common; every one reported must check out exactly.
        let f = FieldSpec::PrimeField(crate::scalar::MERSENNE_61);
        for t in 0..20 {
            let m = generate(20, 30, SeedSpec::new(15, t));
            for entry in kernel_rho_audit(&m, f, 15, 1 << 16, SeedSpec::new(16, t)).unwrap() {
                assert!(entry.vector.support_size() <= 15);
                assert!(crate::linalg::is_kernel_vector(&m, &entry.vector));
                assert_eq!(entry.rho, rho(&entry.vector).unwrap());
            }
        }
    }
}
