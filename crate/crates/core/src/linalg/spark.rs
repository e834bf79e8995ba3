use rand::seq::index::sample;

use super::{circuit_vector, rank, residue_columns, FieldSpec};
use crate::error::{Error, Result};
use crate::matrix::{ColumnSelection, SeedSpec, SignMatrix};
use crate::scalar::{FieldOps, PrimeField, MERSENNE_61};
use crate::vector::FpVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spark {
    Finite(usize),
    /// Full column rank: no nonzero kernel vector at all.
    Infinite,
    /// No dependent set of size at most the cap exists.
    AboveCap(usize),
}

impl Spark {
    /// True when every `s` columns are independent.
    pub fn exceeds(&self, s: usize) -> bool {
        match *self {
            Spark::Finite(k) => k > s,
            Spark::Infinite => true,
            Spark::AboveCap(cap) => s <= cap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparkResult {
    pub spark: Spark,
    /// A minimal-support nonzero kernel vector when the spark is finite.
    pub witness: Option<FpVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobustnessResult {
    pub robust: bool,
    pub witness: Option<FpVector>,
}

pub(crate) enum SearchOutcome {
    Found(Vec<usize>),
    Exhausted,
    OverBudget,
}

/// Depth-first search over column subsets in lexicographic order, keeping
/// an incrementally reduced basis of the current prefix.
///
/// With `exact_size`, only subsets of exactly `max_size` columns are
/// reported (the caller has already ruled out smaller ones). Otherwise the
/// first dependent subset of any size up to `max_size` is reported.
///
/// `confirm` re-checks each candidate in the target field. When the search
/// field is only a filter (a large prime standing in for the rationals), a
/// rejected candidate's supersets are re-checked one by one with `confirm`.
struct SubsetSearch<'a, F: FieldOps, C: FnMut(&[usize]) -> bool> {
    f: &'a F,
    cols: &'a [Vec<F::Elem>],
    max_size: usize,
    exact_size: bool,
    confirm: C,
    basis: Vec<(usize, Vec<F::Elem>)>,
    stack: Vec<usize>,
    budget: u64,
    used: u64,
}

impl<'a, F: FieldOps, C: FnMut(&[usize]) -> bool> SubsetSearch<'a, F, C> {
    fn reduce(&self, j: usize) -> Vec<F::Elem> {
        let mut v = self.cols[j].clone();
        for (pr, b) in &self.basis {
            if self.f.is_zero(&v[*pr]) {
                continue;
            }
            let factor = v[*pr].clone();
            for (x, y) in v.iter_mut().zip(b) {
                if !self.f.is_zero(y) {
                    *x = self.f.sub(x, &self.f.mul(&factor, y));
                }
            }
        }
        v
    }

    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.budget
    }

    fn last_start(&self, depth: usize) -> usize {
        let d = self.cols.len();
        if self.exact_size {
            (d + depth + 1).saturating_sub(self.max_size)
        } else {
            d
        }
    }

    fn run(&mut self, start: usize) -> SearchOutcome {
        let depth = self.stack.len();
        for j in start..self.last_start(depth) {
            if !self.tick() {
                return SearchOutcome::OverBudget;
            }
            let v = self.reduce(j);
            self.stack.push(j);
            let pivot = v.iter().position(|x| !self.f.is_zero(x));
            let outcome = match pivot {
                None => {
                    let reportable = !self.exact_size || self.stack.len() == self.max_size;
                    if reportable && (self.confirm)(&self.stack) {
                        SearchOutcome::Found(self.stack.clone())
                    } else {
                        self.exact_subtree(j + 1)
                    }
                }
                Some(pr) if self.stack.len() < self.max_size => {
                    let inv = self.f.inv(&v[pr]);
                    let normalized = v.iter().map(|x| self.f.mul(x, &inv)).collect();
                    self.basis.push((pr, normalized));
                    let o = self.run(j + 1);
                    self.basis.pop();
                    o
                }
                Some(_) => SearchOutcome::Exhausted,
            };
            self.stack.pop();
            if !matches!(outcome, SearchOutcome::Exhausted) {
                return outcome;
            }
        }
        SearchOutcome::Exhausted
    }

    /// Checks every extension of the current stack with `confirm` alone.
    fn exact_subtree(&mut self, start: usize) -> SearchOutcome {
        if self.stack.len() >= self.max_size {
            return SearchOutcome::Exhausted;
        }
        for j in start..self.last_start(self.stack.len()) {
            if !self.tick() {
                return SearchOutcome::OverBudget;
            }
            self.stack.push(j);
            let reportable = !self.exact_size || self.stack.len() == self.max_size;
            let outcome = if reportable && (self.confirm)(&self.stack) {
                SearchOutcome::Found(self.stack.clone())
            } else {
                self.exact_subtree(j + 1)
            };
            self.stack.pop();
            if !matches!(outcome, SearchOutcome::Exhausted) {
                return outcome;
            }
        }
        SearchOutcome::Exhausted
    }
}

fn subset_is_dependent(m: &SignMatrix, subset: &[usize], field: FieldSpec) -> bool {
    let sel = ColumnSelection::new(subset.to_vec()).expect("search emits increasing subsets");
    let sub = m.select_columns(&sel).expect("search emits in-range columns");
    rank(&sub, field).rank < subset.len()
}

/// Runs the subset search in `field`. Rational searches run modulo 2^61 - 1
/// and confirm each hit with exact integer elimination.
pub(crate) fn dependent_subset_search(
    m: &SignMatrix,
    field: FieldSpec,
    max_size: usize,
    exact_size: bool,
    budget: u64,
) -> (SearchOutcome, u64) {
    let (search_field, confirm_exactly) = match field {
        FieldSpec::PrimeField(p) => (PrimeField::new_unchecked(p), false),
        FieldSpec::Rationals => (PrimeField::new_unchecked(MERSENNE_61), true),
    };
    let cols = residue_columns(m, &search_field);
    let mut search = SubsetSearch {
        f: &search_field,
        cols: &cols,
        max_size,
        exact_size,
        confirm: |s: &[usize]| !confirm_exactly || subset_is_dependent(m, s, field),
        basis: Vec::with_capacity(max_size),
        stack: Vec::with_capacity(max_size),
        budget,
        used: 0,
    };
    let outcome = search.run(0);
    (outcome, search.used)
}

/// Minimal support of a nonzero kernel vector, by subset search of
/// increasing size. With `cap`, sizes above it are not searched.
pub fn spark(m: &SignMatrix, field: FieldSpec, cap: Option<usize>) -> SparkResult {
    spark_with_budget(m, field, cap, u64::MAX).expect("unbounded search cannot exceed its budget")
}

/// As [`spark`], refusing once `budget` subset extensions have been tried.
pub fn spark_with_budget(m: &SignMatrix, field: FieldSpec, cap: Option<usize>, budget: u64) -> Result<SparkResult> {
    let d = m.cols();
    if let Some(c) = cap {
        if c > d {
            return Err(Error::InvalidArgument(format!("spark cap {c} exceeds column count {d}")));
        }
    }
    let r = rank(m, field).rank;
    if r == d {
        return Ok(SparkResult { spark: Spark::Infinite, witness: None });
    }
    // Any r + 1 columns are dependent.
    let upper = cap.map_or(r + 1, |c| c.min(r + 1));
    let mut remaining = budget;
    for size in 1..=upper {
        let (outcome, used) = dependent_subset_search(m, field, size, true, remaining);
        remaining = remaining.saturating_sub(used);
        match outcome {
            SearchOutcome::Found(subset) => {
                let witness = circuit_vector(m, &subset, field)?;
                return Ok(SparkResult { spark: Spark::Finite(size), witness: Some(witness) });
            }
            SearchOutcome::OverBudget => {
                return Err(Error::BudgetExceeded(format!(
                    "spark search passed {budget} subset extensions at size {size}"
                )))
            }
            SearchOutcome::Exhausted => {}
        }
    }
    match cap {
        Some(c) if c <= r => Ok(SparkResult { spark: Spark::AboveCap(c), witness: None }),
        _ => unreachable!("r + 1 columns of a rank-r matrix are always dependent"),
    }
}

/// Whether every `s` columns are independent; on failure, a kernel vector
/// supported on at most `s` columns.
pub fn is_s_robust(m: &SignMatrix, s: usize, field: FieldSpec) -> Result<RobustnessResult> {
    if s == 0 || s > m.cols() {
        return Err(Error::InvalidArgument(format!("need 1 <= s <= d, got s = {s}, d = {}", m.cols())));
    }
    let r = spark(m, field, Some(s));
    Ok(RobustnessResult { robust: r.spark.exceeds(s), witness: r.witness })
}

/// Largest `s - rank` over `samples` random `s`-column subsets (ranks over
/// the rationals).
pub fn max_rank_deficiency(m: &SignMatrix, s: usize, samples: usize, seed: SeedSpec) -> Result<usize> {
    let d = m.cols();
    if s > d {
        return Err(Error::InvalidArgument(format!("s = {s} exceeds d = {d}")));
    }
    let mut rng = seed.rng();
    let mut worst = 0;
    for _ in 0..samples {
        let sel = ColumnSelection::from_unsorted(sample(&mut rng, d, s).into_vec());
        let sub = m.select_columns(&sel)?;
        worst = worst.max(s - rank(&sub, FieldSpec::Rationals).rank);
    }
    Ok(worst)
}
