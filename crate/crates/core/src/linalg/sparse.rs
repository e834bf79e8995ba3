//! Search for kernel vectors of small support in matrices too large for
//! exhaustive subset enumeration.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::spark::{dependent_subset_search, SearchOutcome};
use super::{circuit_vector, is_kernel_vector, kernel_basis, residue_rows, FieldSpec};
use crate::error::{Error, Result};
use crate::matrix::{ColumnSelection, SeedSpec, SignMatrix};
use crate::scalar::{field_rref, FieldOps, PrimeField, MERSENNE_61};
use crate::vector::FpVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparseSearch {
    /// A verified kernel vector with support at most `s`.
    Found(FpVector),
    /// Exhaustive search proved that no such vector exists.
    NoneExist,
    /// Neither found nor ruled out within the budget.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SparseSearchConfig {
    /// Random information sets tried before any exhaustive search.
    pub quick_attempts: usize,
    /// Subset extensions allowed for the exhaustive search; skipped when the
    /// subset count up to size `s` exceeds it.
    pub exhaustive_budget: u64,
    /// Random information sets tried afterwards.
    pub random_attempts: usize,
}

impl Default for SparseSearchConfig {
    fn default() -> Self {
        Self { quick_attempts: 16, exhaustive_budget: 20_000_000, random_attempts: 2_000 }
    }
}

/// Number of nonempty column subsets of size at most `s`, saturating.
pub fn subsets_up_to(d: usize, s: usize) -> u64 {
    let mut total: u64 = 0;
    let mut c: u128 = 1;
    for k in 1..=s.min(d) {
        c = c * (d - k + 1) as u128 / k as u128;
        if c >= u64::MAX as u128 {
            return u64::MAX;
        }
        total = total.saturating_add(c as u64);
    }
    total
}

/// Looks for a nonzero kernel vector with support at most `s`.
///
/// Tries, in order: a repeated or negated column; a few random information
/// sets, reading off kernel vectors that leave the basis in one or two
/// columns; exhaustive subset search when it fits the budget; then more
/// random information sets. Every returned vector is checked exactly.
pub fn find_sparse_kernel_vector(
    m: &SignMatrix,
    s: usize,
    field: FieldSpec,
    config: SparseSearchConfig,
    seed: SeedSpec,
) -> Result<SparseSearch> {
    let d = m.cols();
    if s == 0 || s > d {
        return Err(Error::InvalidArgument(format!("need 1 <= s <= d, got s = {s}, d = {d}")));
    }
    if s >= 2 && m.rows() > 0 {
        if let Some(pair) = parallel_columns(m) {
            return verified(m, s, circuit_vector(m, &pair, field)?);
        }
    }
    let mut rng = seed.rng();
    let quick = information_set_search(m, s, field, config.quick_attempts, &mut rng)?;
    if quick != SparseSearch::Unknown {
        return Ok(quick);
    }
    if subsets_up_to(d, s) <= config.exhaustive_budget {
        match dependent_subset_search(m, field, s, false, config.exhaustive_budget).0 {
            SearchOutcome::Found(subset) => return verified(m, s, circuit_vector(m, &subset, field)?),
            SearchOutcome::Exhausted => return Ok(SparseSearch::NoneExist),
            SearchOutcome::OverBudget => {}
        }
    }
    information_set_search(m, s, field, config.random_attempts, &mut rng)
}

fn verified(m: &SignMatrix, s: usize, v: FpVector) -> Result<SparseSearch> {
    if v.support_size() > s || !is_kernel_vector(m, &v) {
        return Err(Error::InvalidArgument("sparse kernel search produced an unverifiable witness".into()));
    }
    Ok(SparseSearch::Found(v))
}

/// Two columns that are equal or opposite, if any.
fn parallel_columns(m: &SignMatrix) -> Option<Vec<usize>> {
    let n = m.rows();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for j in 0..m.cols() {
        let mut bits = m.column_bits(j);
        if bits[0] & 1 == 1 {
            for (w, word) in bits.iter_mut().enumerate() {
                let live = (n - 64 * w).min(64);
                let mask = if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
                *word = !*word & mask;
            }
        }
        if let Some(&i) = seen.get(&bits) {
            return Some(vec![i, j]);
        }
        seen.insert(bits, j);
    }
    None
}

/// Lee-Brickell style search. A random column order fixes a pivot set;
/// each non-pivot column, and each pair of them with the best cancelling
/// ratio, gives a kernel vector whose support is read off the reduced
/// matrix. Rational searches reduce modulo 2^61 - 1 and re-check
/// candidate supports exactly.
///
/// Wide matrices are searched through a random window of `3n` columns per
/// attempt, which keeps the pair stage quadratic in `n` rather than `d`.
fn information_set_search(
    m: &SignMatrix,
    s: usize,
    field: FieldSpec,
    attempts: usize,
    rng: &mut impl rand::Rng,
) -> Result<SparseSearch> {
    let full = m.cols();
    let d = full.min((3 * m.rows()).max(s + 1));
    let f = PrimeField::new_unchecked(match field {
        FieldSpec::PrimeField(p) => p,
        FieldSpec::Rationals => MERSENNE_61,
    });
    let base = residue_rows(m, &f);
    let mut order: Vec<usize> = (0..full).collect();
    for _ in 0..attempts {
        order.shuffle(rng);
        let mut rows: Vec<Vec<u64>> = base.iter().map(|r| order[..d].iter().map(|&j| r[j]).collect()).collect();
        let pivots = field_rref(&f, &mut rows, d);
        let r = pivots.len();
        if r == full {
            // Only reachable without a window. Full rank modulo p implies
            // full rank over the rationals too.
            return Ok(SparseSearch::NoneExist);
        }
        let mut is_pivot = vec![false; d];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..d).filter(|&c| !is_pivot[c]).collect();
        // Nonzero rows of each free column of the reduced matrix.
        let nz: Vec<Vec<usize>> = free.iter().map(|&c| (0..r).filter(|&i| rows[i][c] != 0).collect()).collect();
        // Inverses of those entries, indexed by row (0 where the entry is 0).
        let inv: Vec<Vec<u64>> = free
            .iter()
            .zip(&nz)
            .map(|(&c, rows_nz)| {
                let mut col = vec![0; r];
                for &i in rows_nz {
                    col[i] = f.inv(&rows[i][c]);
                }
                col
            })
            .collect();

        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for (a, &ca) in free.iter().enumerate() {
            if nz[a].len() < s {
                let mut support: Vec<usize> = nz[a].iter().map(|&i| order[pivots[i]]).collect();
                support.push(order[ca]);
                candidates.push(support);
            }
        }
        if s >= 2 {
            for a in 0..free.len() {
                for b in a + 1..free.len() {
                    if let Some(rows_left) = best_pair_cancellation(&f, &rows, free[a], &nz[a], &nz[b], &inv[b], s) {
                        let mut support: Vec<usize> = rows_left.iter().map(|&i| order[pivots[i]]).collect();
                        support.push(order[free[a]]);
                        support.push(order[free[b]]);
                        candidates.push(support);
                    }
                }
            }
        }
        for support in candidates {
            if let Some(v) = exact_kernel_on(m, support, field)? {
                return verified(m, s, v);
            }
        }
    }
    Ok(SparseSearch::Unknown)
}

/// Pivot rows left nonzero by the combination `col_a - λ col_b` with the
/// most cancellations, when that keeps the support within `s`.
fn best_pair_cancellation(
    f: &PrimeField,
    rows: &[Vec<u64>],
    ca: usize,
    nza: &[usize],
    nzb: &[usize],
    inv_b: &[u64],
    s: usize,
) -> Option<Vec<usize>> {
    let (mut i, mut j) = (0, 0);
    let mut shared = Vec::new();
    while i < nza.len() && j < nzb.len() {
        match nza[i].cmp(&nzb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared.push(nza[i]);
                i += 1;
                j += 1;
            }
        }
    }
    let union = nza.len() + nzb.len() - shared.len();
    // Even cancelling every shared row cannot get below this.
    if 2 + union - shared.len() > s {
        return None;
    }
    let mut ratios: Vec<u64> = shared.iter().map(|&r| f.mul(&rows[r][ca], &inv_b[r])).collect();
    ratios.sort_unstable();
    let mut best = (0, 0u64);
    let mut k = 0;
    while k < ratios.len() {
        let run = ratios[k..].iter().take_while(|&&x| x == ratios[k]).count();
        if run > best.0 {
            best = (run, ratios[k]);
        }
        k += run;
    }
    if 2 + union - best.0 > s {
        return None;
    }
    // Rows where col_a - λ col_b survives: a alone, b alone, or shared rows
    // whose ratio differs from λ.
    let lambda = best.1;
    let mut left: Vec<usize> = nza.iter().chain(nzb).copied().collect();
    left.sort_unstable();
    left.dedup();
    left.retain(|&r| inv_b[r] == 0 || rows[r][ca] == 0 || f.mul(&rows[r][ca], &inv_b[r]) != lambda);
    Some(left)
}

/// A kernel vector of `m` supported inside `support`, computed exactly in
/// `field`, or `None` if those columns are independent there.
fn exact_kernel_on(m: &SignMatrix, support: Vec<usize>, field: FieldSpec) -> Result<Option<FpVector>> {
    let sel = ColumnSelection::from_unsorted(support);
    let sub = m.select_columns(&sel)?;
    Ok(kernel_basis(&sub, field)?
        .into_iter()
        .next()
        .map(|v| FpVector::embed(field.modulus(), m.cols(), sel.indices(), v.entries())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_s_robust, spark, Spark};
    use crate::matrix::generate;

    #[test]
    fn subset_counts() {
        assert_eq!(subsets_up_to(5, 2), 15);
        assert_eq!(subsets_up_to(3, 7), 7);
        assert_eq!(subsets_up_to(200, 100), u64::MAX);
    }

    #[test]
    fn finds_parallel_columns() {
        let m = SignMatrix::from_rows(&[[1i8, -1, 1, -1], [1, 1, -1, -1], [-1, 1, 1, 1]]).unwrap();
        let cfg = SparseSearchConfig { quick_attempts: 0, exhaustive_budget: 0, random_attempts: 0 };
        let r = find_sparse_kernel_vector(&m, 2, FieldSpec::Rationals, cfg, SeedSpec::new(0, 0)).unwrap();
        let SparseSearch::Found(v) = r else { panic!("expected a witness") };
        assert_eq!(v.support(), &[0, 3]);
        assert_eq!(v.support_values(), vec![1, 1]);
        assert!(is_kernel_vector(&m, &v));
    }

    #[test]
    fn exhaustive_mode_agrees_with_robustness() {
        for t in 0..60 {
            let m = generate(6, 12, SeedSpec::new(50, t));
            for s in 2..=5 {
                let found =
                    find_sparse_kernel_vector(&m, s, FieldSpec::Rationals, SparseSearchConfig::default(), SeedSpec::new(1, t))
                        .unwrap();
                let robust = is_s_robust(&m, s, FieldSpec::Rationals).unwrap().robust;
                match found {
                    SparseSearch::Found(v) => {
                        assert!(!robust);
                        assert!(v.support_size() <= s);
                    }
                    SparseSearch::NoneExist => assert!(robust),
                    SparseSearch::Unknown => panic!("exhaustive search fits the budget"),
                }
            }
        }
    }

    #[test]
    fn random_information_sets_find_sparse_vectors() {
        // With the exhaustive stage disabled, the random search should still
        // find the minimum-support vectors of small matrices.
        let mut hits = 0;
        for t in 0..40 {
            let m = generate(8, 16, SeedSpec::new(51, t));
            let Spark::Finite(k) = spark(&m, FieldSpec::Rationals, None).spark else { unreachable!() };
            let cfg = SparseSearchConfig { quick_attempts: 0, exhaustive_budget: 0, random_attempts: 300 };
            match find_sparse_kernel_vector(&m, k, FieldSpec::Rationals, cfg, SeedSpec::new(2, t)).unwrap() {
                SparseSearch::Found(v) => {
                    assert!(v.support_size() <= k);
                    assert!(is_kernel_vector(&m, &v));
                    hits += 1;
                }
                SparseSearch::NoneExist => panic!("a dependency of size {k} exists"),
                SparseSearch::Unknown => {}
            }
        }
        assert!(hits >= 36, "{hits} of 40");
    }

    #[test]
    fn prime_field_witnesses_carry_the_modulus() {
        let m = generate(4, 12, SeedSpec::new(52, 0));
        let cfg = SparseSearchConfig { quick_attempts: 0, exhaustive_budget: 0, random_attempts: 50 };
        if let SparseSearch::Found(v) =
            find_sparse_kernel_vector(&m, 5, FieldSpec::PrimeField(5), cfg, SeedSpec::new(3, 0)).unwrap()
        {
            assert_eq!(v.modulus(), 5);
            assert!(is_kernel_vector(&m, &v));
        } else {
            panic!("4x12 has 5-sparse kernel vectors");
        }
    }

    #[test]
    fn wide_matrices_use_a_window() {
        let m = generate(12, 2000, SeedSpec::new(54, 0));
        let cfg = SparseSearchConfig { quick_attempts: 0, exhaustive_budget: 0, random_attempts: 20 };
        let r = find_sparse_kernel_vector(&m, 6, FieldSpec::Rationals, cfg, SeedSpec::new(4, 0)).unwrap();
        let SparseSearch::Found(v) = r else { panic!("12x2000 is far from 6-robust") };
        assert!(v.support_size() <= 6 && is_kernel_vector(&m, &v));
    }

    #[test]
    fn full_rank_is_certified() {
        let m = generate(10, 6, SeedSpec::new(53, 0));
        let cfg = SparseSearchConfig { quick_attempts: 0, exhaustive_budget: 0, random_attempts: 5 };
        let r = find_sparse_kernel_vector(&m, 6, FieldSpec::Rationals, cfg, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(r, SparseSearch::NoneExist);
    }
}
