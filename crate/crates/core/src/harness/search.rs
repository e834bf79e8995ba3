use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::is_kernel_vector;
use crate::matrix::{ColumnSelection, SeedSpec, SignMatrix};
use crate::vector::FpVector;

fn check_even_size(m: &SignMatrix, s: usize) -> Result<()> {
    if s == 0 || s % 2 == 1 || s > m.cols() {
        return Err(Error::InvalidArgument(format!("need even s with 2 <= s <= d, got s = {s}, d = {}", m.cols())));
    }
    Ok(())
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    c
}

/// Chernoff signing threshold `⌈√(s ln(4n) / 2)⌉`.
pub fn signing_threshold(n: usize, s: usize) -> i64 {
    (s as f64 * (4.0 * n as f64).ln() / 2.0).sqrt().ceil() as i64
}

/// Row sums of `Σ x_i c_i` over the given columns and signs.
fn signed_sum(m: &SignMatrix, cols: &[usize], signs: &[i8]) -> Vec<i64> {
    (0..m.rows())
        .map(|i| cols.iter().zip(signs).map(|(&j, &x)| (m.entry(i, j) * x) as i64).sum())
        .collect()
}

/// `v` or `-v`, whichever has a positive first nonzero entry, and which
/// one was taken.
fn canonical(v: Vec<i64>) -> (Vec<i64>, i64) {
    match v.iter().find(|&&x| x != 0) {
        Some(&lead) if lead < 0 => (v.into_iter().map(|x| -x).collect(), -1),
        _ => (v, 1),
    }
}

/// Looks for two signed `s/2`-subsets of columns with equal (or opposite)
/// sums; their difference is a kernel vector of support at most `s`.
///
/// Random subsets are signed by retrying random signs until every row sum
/// is at most the Chernoff threshold in absolute value, so that sums land
/// in a small box and collide. When every subset and signing fits in
/// `budget`, all of them are enumerated without the threshold instead, and
/// the answer is exact: a witness is returned iff such a pair exists.
/// Each witness is verified before it is returned.
pub fn collision_search(m: &SignMatrix, s: usize, budget: u64, seed: SeedSpec) -> Result<Option<FpVector>> {
    check_even_size(m, s)?;
    let (d, h) = (m.cols(), s / 2);
    let combos = binomial_u128(d, h).saturating_mul(1 << (h - 1));
    let mut table: HashMap<Vec<i64>, (Vec<usize>, Vec<i8>, i64)> = HashMap::new();
    let mut consider = |cols: Vec<usize>, signs: Vec<i8>| -> Option<FpVector> {
        let (key, flip) = canonical(signed_sum(m, &cols, &signs));
        if key.iter().all(|&x| x == 0) {
            return difference(m, &cols, &signs, 1, &[], &[], 0);
        }
        if let Some((c2, s2, f2)) = table.get(&key) {
            if let Some(w) = difference(m, &cols, &signs, flip, c2, s2, *f2) {
                return Some(w);
            }
            return None;
        }
        table.insert(key, (cols, signs, flip));
        None
    };

    if combos <= budget as u128 {
        let mut cols: Vec<usize> = (0..h).collect();
        loop {
            for pattern in 0u64..(1 << (h - 1)) {
                let signs: Vec<i8> = (0..h).map(|b| if b > 0 && pattern >> (b - 1) & 1 == 1 { -1 } else { 1 }).collect();
                if let Some(w) = consider(cols.clone(), signs) {
                    return Ok(Some(w));
                }
            }
            if !next_combination(&mut cols, d) {
                return Ok(None);
            }
        }
    }

    let tau = signing_threshold(m.rows(), s);
    let mut rng = seed.rng();
    for _ in 0..budget {
        let mut cols = sample(&mut rng, d, h).into_vec();
        cols.sort_unstable();
        let mut signing = None;
        for _ in 0..64 {
            let signs: Vec<i8> = (0..h).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            if signed_sum(m, &cols, &signs).iter().all(|x| x.abs() <= tau) {
                signing = Some(signs);
                break;
            }
        }
        if let Some(signs) = signing {
            if let Some(w) = consider(cols, signs) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// `f1 · x1 - f2 · x2` as a length-`d` integer vector, if it is a nonzero
/// kernel vector of support at most `|c1| + |c2|`.
fn difference(m: &SignMatrix, c1: &[usize], s1: &[i8], f1: i64, c2: &[usize], s2: &[i8], f2: i64) -> Option<FpVector> {
    let mut w = vec![0i64; m.cols()];
    for (&j, &x) in c1.iter().zip(s1) {
        w[j] += f1 * x as i64;
    }
    for (&j, &x) in c2.iter().zip(s2) {
        w[j] -= f2 * x as i64;
    }
    let w = FpVector::integers(w);
    (!w.is_zero() && w.support_size() <= c1.len() + c2.len() && is_kernel_vector(m, &w)).then_some(w)
}

/// Advances a sorted `k`-combination of `0..n`; false after the last one.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Looks for `s` columns summing to the zero vector by matching `s/2`-subset
/// sums against negated `s/2`-subset sums on disjoint columns.
///
/// Exhaustive (and exact) when all `C(d, s/2)` half-subsets fit in
/// `budget`; otherwise samples `budget` random half-subsets. Hits are
/// verified before they are returned.
pub fn zero_sum_search(m: &SignMatrix, s: usize, budget: u64, seed: SeedSpec) -> Result<Option<ColumnSelection>> {
    check_even_size(m, s)?;
    let (d, h) = (m.cols(), s / 2);
    let ones = vec![1i8; h];
    let mut table: HashMap<Vec<i64>, Vec<Vec<usize>>> = HashMap::new();
    let mut consider = |cols: Vec<usize>, bucket_cap: usize| -> Option<ColumnSelection> {
        let sum = signed_sum(m, &cols, &ones);
        let negated: Vec<i64> = sum.iter().map(|x| -x).collect();
        if let Some(others) = table.get(&negated) {
            for other in others {
                if other.iter().all(|j| !cols.contains(j)) {
                    let mut all = cols.clone();
                    all.extend_from_slice(other);
                    let sel = ColumnSelection::from_unsorted(all);
                    if is_zero_sum(m, &sel) {
                        return Some(sel);
                    }
                }
            }
        }
        let bucket = table.entry(sum).or_default();
        if bucket.len() < bucket_cap && !bucket.contains(&cols) {
            bucket.push(cols);
        }
        None
    };

    if binomial_u128(d, h) <= budget as u128 {
        let mut cols: Vec<usize> = (0..h).collect();
        loop {
            if let Some(sel) = consider(cols.clone(), usize::MAX) {
                return Ok(Some(sel));
            }
            if !next_combination(&mut cols, d) {
                return Ok(None);
            }
        }
    }
    let mut rng = seed.rng();
    for _ in 0..budget {
        let mut cols = sample(&mut rng, d, h).into_vec();
        cols.sort_unstable();
        if let Some(sel) = consider(cols, 8) {
            return Ok(Some(sel));
        }
    }
    Ok(None)
}

fn is_zero_sum(m: &SignMatrix, sel: &ColumnSelection) -> bool {
    (0..m.rows()).all(|i| m.signed_row_sum(i, sel) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::generate;

    #[test]
    fn threshold_values() {
        assert_eq!(signing_threshold(12, 8), 4);
        assert_eq!(signing_threshold(100, 2), 3);
    }

    #[test]
    fn combinations_enumerate() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
        assert_eq!(c, vec![3, 4]);
    }

    #[test]
    fn equal_columns_collide_immediately() {
        let m = SignMatrix::from_rows(&[[1i8, -1, 1, 1], [-1, 1, 1, -1], [1, 1, -1, 1]]).unwrap();
        let w = collision_search(&m, 2, 100, SeedSpec::new(0, 0)).unwrap().unwrap();
        assert_eq!(w.support(), &[0, 3]);
        assert!(is_kernel_vector(&m, &w));
    }

    #[test]
    fn opposite_columns_sum_to_zero() {
        let m = SignMatrix::from_rows(&[[1i8, -1, 1], [-1, 1, 1], [1, -1, -1]]).unwrap();
        let sel = zero_sum_search(&m, 2, 100, SeedSpec::new(0, 0)).unwrap().unwrap();
        assert_eq!(sel.indices(), &[0, 1]);
    }

    #[test]
    fn rejects_odd_or_oversized_s() {
        let m = generate(4, 6, SeedSpec::new(0, 0));
        assert!(collision_search(&m, 3, 10, SeedSpec::new(0, 0)).is_err());
        assert!(zero_sum_search(&m, 8, 10, SeedSpec::new(0, 0)).is_err());
    }

    /// Brute force: some two distinct signed h-subsets with equal or
    /// opposite sums whose difference is nonzero.
    fn collision_exists(m: &SignMatrix, s: usize) -> bool {
        let h = s / 2;
        let mut combos = Vec::new();
        let mut cols: Vec<usize> = (0..h).collect();
        loop {
            for pattern in 0u64..(1 << h) {
                let signs: Vec<i8> = (0..h).map(|b| if pattern >> b & 1 == 1 { -1 } else { 1 }).collect();
                combos.push((cols.clone(), signs));
            }
            if !next_combination(&mut cols, m.cols()) {
                break;
            }
        }
        let sums: Vec<Vec<i64>> = combos.iter().map(|(c, x)| signed_sum(m, c, x)).collect();
        for a in 0..combos.len() {
            if sums[a].iter().all(|&x| x == 0) {
                return true;
            }
            for b in a + 1..combos.len() {
                for f in [1i64, -1] {
                    if sums[a].iter().zip(&sums[b]).all(|(x, y)| *x == f * y) {
                        let w = difference(m, &combos[a].0, &combos[a].1, 1, &combos[b].0, &combos[b].1, f);
                        if w.is_some() {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn collision_search_exhaustive_agreement() {
        for t in 0..40 {
            let m = generate(6, 8, SeedSpec::new(70, t));
            for s in [2, 4] {
                let found = collision_search(&m, s, 100_000, SeedSpec::new(1, t)).unwrap();
                assert_eq!(found.is_some(), collision_exists(&m, s), "trial {t} s {s}");
                if let Some(w) = found {
                    assert!(is_kernel_vector(&m, &w) && w.support_size() <= s);
                }
            }
        }
    }

    #[test]
    fn zero_sum_search_exhaustive_agreement() {
        for t in 0..100 {
            let m = generate(4, 8, SeedSpec::new(71, t));
            let found = zero_sum_search(&m, 4, 100_000, SeedSpec::new(1, t)).unwrap();
            let mut cols: Vec<usize> = (0..4).collect();
            let mut exists = false;
            loop {
                exists |= is_zero_sum(&m, &ColumnSelection::new(cols.clone()).unwrap());
                if !next_combination(&mut cols, 8) {
                    break;
                }
            }
            assert_eq!(found.is_some(), exists, "trial {t}");
            if let Some(sel) = found {
                assert_eq!(sel.len(), 4);
                assert!(is_zero_sum(&m, &sel));
            }
        }
    }

    #[test]
    fn random_mode_finds_collisions_on_wide_matrices() {
        let m = generate(12, 400, SeedSpec::new(72, 0));
        let w = collision_search(&m, 8, 200_000, SeedSpec::new(3, 0)).unwrap().expect("witness");
        assert!(is_kernel_vector(&m, &w) && w.support_size() <= 8);
    }
}
