//! Exact dyadic probabilities `numerator / 2^exponent`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A nonnegative dyadic rational, kept in lowest terms (odd numerator, or
/// zero with exponent 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactProb {
    numerator: BigUint,
    exponent: u64,
}

impl ExactProb {
    pub fn new(numerator: impl Into<BigUint>, exponent: u64) -> Self {
        let mut numerator = numerator.into();
        if numerator.is_zero() {
            return Self::zero();
        }
        let shift = numerator.trailing_zeros().unwrap_or(0).min(exponent);
        numerator >>= shift;
        Self { numerator, exponent: exponent - shift }
    }

    pub fn zero() -> Self {
        Self { numerator: BigUint::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Self { numerator: BigUint::one(), exponent: 0 }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator.clone()), BigInt::one() << self.exponent)
    }

    /// Nearest `f64`; values below the subnormal range round to 0.
    pub fn to_f64(&self) -> f64 {
        let (mantissa, exponent) = self.top_bits();
        let e = exponent as f64;
        if e > 1074.0 {
            return (mantissa.ln() - e * std::f64::consts::LN_2).exp();
        }
        mantissa * 2f64.powf(-e)
    }

    /// Natural log; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        let (mantissa, exponent) = self.top_bits();
        mantissa.ln() - exponent as f64 * std::f64::consts::LN_2
    }

    /// Splits off the leading 64 bits of the numerator as an `f64` and
    /// adjusts the exponent to match.
    fn top_bits(&self) -> (f64, i64) {
        let bits = self.numerator.bits();
        let shift = bits.saturating_sub(64);
        let top = (&self.numerator >> shift).to_u64().expect("at most 64 bits");
        (top as f64, self.exponent as i64 - shift as i64)
    }

    pub fn mul(&self, other: &ExactProb) -> ExactProb {
        ExactProb::new(&self.numerator * &other.numerator, self.exponent + other.exponent)
    }

    pub fn add(&self, other: &ExactProb) -> ExactProb {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        ExactProb::new(a + b, e)
    }

    pub fn pow(&self, k: u32) -> ExactProb {
        ExactProb::new(self.numerator.pow(k), self.exponent * k as u64)
    }
}

impl Ord for ExactProb {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl PartialOrd for ExactProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prints `0`, an integer, or `a/2^e`.
impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

/// Serialized as its display form, since numerators can exceed any
/// fixed-width integer.
impl serde::Serialize for ExactProb {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
