//! Exact rank, kernel, spark and s-robustness over the rationals and over
//! prime fields.

mod sparse;
mod spark;

pub use spark::{
    is_s_robust, max_rank_deficiency, spark, spark_with_budget, RobustnessResult, Spark, SparkResult,
};
pub use sparse::{find_sparse_kernel_vector, subsets_up_to, SparseSearch, SparseSearchConfig};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{ColumnSelection, SignMatrix};
use crate::scalar::{bareiss_pivots, field_pivots, field_rref, FieldOps, PrimeField, Rationals, DEFAULT_PRIME};
use crate::vector::{check_modulus, FpVector};

/// The field an exact computation runs over.
/// Serialized as its display form (`Q` or `F_p`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

impl FieldSpec {
    /// `F_p`, after checking that `p` is an odd prime below 2^63.
    pub fn prime(p: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("prime field modulus must be positive".into()));
        }
        check_modulus(p)?;
        Ok(FieldSpec::PrimeField(p))
    }

    pub fn default_prime() -> Self {
        FieldSpec::PrimeField(DEFAULT_PRIME)
    }

    /// 0 for the rationals, `p` otherwise; the convention used by [`FpVector`].
    pub fn modulus(&self) -> u64 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::PrimeField(p) => *p,
        }
    }

    pub fn from_modulus(p: u64) -> Result<Self> {
        if p == 0 {
            Ok(FieldSpec::Rationals)
        } else {
            Self::prime(p)
        }
    }
}

impl std::str::FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `q`/`rationals`, `fp` (the default prime), or a prime
    /// modulus, optionally written `fp:<p>` or `F_<p>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "rationals" | "0" => Ok(FieldSpec::Rationals),
            "fp" | "p" => Ok(FieldSpec::default_prime()),
            other => {
                let digits = ["fp:", "p:", "f_"].iter().find_map(|pre| other.strip_prefix(pre)).unwrap_or(other);
                let p = digits
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("unknown field {s:?}")))?;
                FieldSpec::prime(p)
            }
        }
    }
}

impl TryFrom<String> for FieldSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FieldSpec> for String {
    fn from(f: FieldSpec) -> String {
        f.to_string()
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "F_{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankResult {
    pub rank: usize,
    /// Greedy-leftmost maximal independent set of columns.
    pub independent_columns: ColumnSelection,
    /// Column count minus rank.
    pub deficiency: usize,
}

/// Hadamard's bound keeps every Bareiss intermediate below `i128::MAX`
/// while `n^n < 2^126`.
const I128_BAREISS_MAX_ROWS: usize = 26;

/// Exact rank. Over the rationals this is fraction-free elimination on
/// integers; over `F_p` it is modular Gaussian elimination.
pub fn rank(m: &SignMatrix, field: FieldSpec) -> RankResult {
    let pivots = pivot_columns(m, field);
    RankResult {
        rank: pivots.len(),
        deficiency: m.cols() - pivots.len(),
        independent_columns: ColumnSelection::new(pivots).expect("pivots are increasing"),
    }
}

fn pivot_columns(m: &SignMatrix, field: FieldSpec) -> Vec<usize> {
    let d = m.cols();
    match field {
        FieldSpec::Rationals if m.rows() <= I128_BAREISS_MAX_ROWS => {
            let rows = m.to_i64_rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
            bareiss_pivots::<i128>(rows, d)
        }
        FieldSpec::Rationals => {
            let rows = m.to_i64_rows().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
            bareiss_pivots::<BigInt>(rows, d)
        }
        FieldSpec::PrimeField(p) => {
            let f = PrimeField::new_unchecked(p);
            field_pivots(&f, residue_rows(m, &f), d)
        }
    }
}

pub(crate) fn residue_rows<F: FieldOps>(m: &SignMatrix, f: &F) -> Vec<Vec<F::Elem>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| f.from_sign(m.is_plus(i, j))).collect())
        .collect()
}

/// Columns of `m` as field elements.
pub(crate) fn residue_columns<F: FieldOps>(m: &SignMatrix, f: &F) -> Vec<Vec<F::Elem>> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| f.from_sign(m.is_plus(i, j))).collect())
        .collect()
}

/// A basis of the right kernel.
///
/// Over `F_p` each vector is scaled so its first nonzero entry is 1. Over
/// the rationals each vector is a primitive integer vector (`p = 0`) whose
/// first nonzero entry is positive.
pub fn kernel_basis(m: &SignMatrix, field: FieldSpec) -> Result<Vec<FpVector>> {
    match field {
        FieldSpec::PrimeField(p) => {
            let f = PrimeField::new_unchecked(p);
            let basis = kernel_over(&f, residue_rows(m, &f), m.cols());
            Ok(basis
                .into_iter()
                .map(|v| {
                    let lead = *v.iter().find(|&&x| x != 0).expect("kernel vectors are nonzero");
                    let inv = f.inv(&lead);
                    FpVector::new_unchecked(p, v.iter().map(|x| f.mul(x, &inv) as i64).collect())
                })
                .collect())
        }
        FieldSpec::Rationals => {
            let f = Rationals::<BigInt>::new();
            kernel_over(&f, residue_rows(m, &f), m.cols())
                .into_iter()
                .map(|v| primitive_integer_vector(&v))
                .collect()
        }
    }
}

fn kernel_over<F: FieldOps>(f: &F, mut rows: Vec<Vec<F::Elem>>, d: usize) -> Vec<Vec<F::Elem>> {
    let pivots = field_rref(f, &mut rows, d);
    let mut is_pivot = vec![false; d];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..d)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![f.zero(); d];
            v[free] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(&rows[r][free]);
            }
            v
        })
        .collect()
}

/// Clears denominators, divides by the content and makes the leading entry
/// positive.
pub(crate) fn primitive_integer_vector(v: &[BigRational]) -> Result<FpVector> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(lead) if lead.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    let scale = if gcd.is_zero() { BigInt::one() } else { gcd * sign };
    let entries = ints
        .iter()
        .map(|x| {
            (x / &scale)
                .to_i64()
                .ok_or_else(|| Error::Overflow(format!("kernel vector entry {x} does not fit in i64")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FpVector::integers(entries))
}

/// Exact check that `v` is a nonzero kernel vector of `m`, in the field
/// given by `v`'s modulus (integers when 0).
pub fn is_kernel_vector(m: &SignMatrix, v: &FpVector) -> bool {
    if v.len() != m.cols() || v.is_zero() {
        return false;
    }
    let p = v.modulus();
    (0..m.rows()).all(|i| {
        let mut acc: i128 = 0;
        for &j in v.support() {
            let e = v.entries()[j] as i128;
            acc += if m.is_plus(i, j) { e } else { -e };
            if p > 0 {
                acc %= p as i128;
            }
        }
        acc == 0
    })
}

/// Exact kernel vector of a column subset that is known to be a minimal
/// dependent set, expanded to length `m.cols()`.
pub(crate) fn circuit_vector(m: &SignMatrix, subset: &[usize], field: FieldSpec) -> Result<FpVector> {
    let sel = ColumnSelection::new(subset.to_vec())?;
    let sub = m.select_columns(&sel)?;
    let basis = kernel_basis(&sub, field)?;
    let Some(local) = basis.into_iter().next() else {
        return Err(Error::InvalidArgument(format!("columns {subset:?} are independent over {field}")));
    };
    Ok(FpVector::embed(field.modulus(), m.cols(), subset, local.entries()))
}
