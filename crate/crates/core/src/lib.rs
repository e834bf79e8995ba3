//! Exact arithmetic and Monte Carlo tools for studying when random sign
//! matrices have every `s` columns linearly independent.

pub mod concentration;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix;
pub mod moments;
pub mod prob;
pub mod scalar;
pub mod vector;

pub use error::{Error, Result};
pub use linalg::{
    is_kernel_vector, is_s_robust, kernel_basis, max_rank_deficiency, rank, spark, spark_with_budget, FieldSpec,
    RankResult, RobustnessResult, Spark, SparkResult,
};
pub use prob::ExactProb;
pub use matrix::{generate, read_matrix, write_matrix, ColumnSelection, SeedSpec, SignMatrix};
pub use scalar::{FieldOps, PrimeField, Rationals, DEFAULT_PRIME, MERSENNE_61};
pub use vector::{read_vector, write_vector, FpVector};

/// Exact rational numbers.
pub type Rational = num_rational::BigRational;
/// Floating-point type of the real-valued evaluators.
pub type Real = f64;
