//! Scalar arithmetic shared by the exact linear algebra and the evaluators.
//!
//! Exact elimination is written once against [`FieldOps`], a field context
//! that owns whatever runtime data the element type needs (the modulus for
//! `F_p`). Integer fraction-free elimination is generic over any
//! `num_integer::Integer`, and the real-valued evaluators are generic over
//! `num_traits::Float`.

use std::fmt::Debug;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, Zero};

/// Largest prime below 2^62, the default modulus for `F_p` computations.
pub const DEFAULT_PRIME: u64 = 4_611_686_018_427_387_847;

/// The Mersenne prime 2^61 - 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Arithmetic in a field whose elements may need a runtime context.
#[allow(clippy::wrong_self_convention)]
pub trait FieldOps: Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    fn from_sign(&self, positive: bool) -> Self::Elem {
        if positive {
            self.one()
        } else {
            self.from_i64(-1)
        }
    }
}

/// The prime field `F_p` with elements stored as residues in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Caller guarantees `p` is an odd prime below 2^63.
    pub(crate) const fn new_unchecked(p: u64) -> Self {
        Self { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl FieldOps for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        reduce_i128(v as i128, self.p)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        add_mod(*a, *b, self.p)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        sub_mod(*a, *b, self.p)
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        if self.p == MERSENNE_61 {
            mul_mod_m61(*a, *b)
        } else {
            mul_mod(*a, *b, self.p)
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        inv_mod(*a, self.p).expect("inverse of zero in F_p")
    }
}

/// The rationals over an arbitrary signed integer type.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals<T>(std::marker::PhantomData<T>);

impl<T> Rationals<T> {
    pub fn new() -> Self {
        Self(std::marker::PhantomData)
    }
}

impl<T> FieldOps for Rationals<T>
where
    T: Integer + Signed + Clone + FromPrimitive + Debug + Send + Sync,
{
    type Elem = Ratio<T>;

    fn zero(&self) -> Ratio<T> {
        Ratio::zero()
    }
    fn one(&self) -> Ratio<T> {
        Ratio::one()
    }
    fn from_i64(&self, v: i64) -> Ratio<T> {
        Ratio::from_integer(T::from_i64(v).expect("integer type too narrow"))
    }
    fn is_zero(&self, a: &Ratio<T>) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Ratio<T>, b: &Ratio<T>) -> Ratio<T> {
        a + b
    }
    fn sub(&self, a: &Ratio<T>, b: &Ratio<T>) -> Ratio<T> {
        a - b
    }
    fn mul(&self, a: &Ratio<T>, b: &Ratio<T>) -> Ratio<T> {
        a * b
    }
    fn neg(&self, a: &Ratio<T>) -> Ratio<T> {
        -a.clone()
    }
    fn inv(&self, a: &Ratio<T>) -> Ratio<T> {
        assert!(!a.is_zero(), "inverse of zero rational");
        a.recip()
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    if s >= p as u128 {
        (s - p as u128) as u64
    } else {
        s as u64
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Multiplication modulo 2^61 - 1 by folding the high bits.
#[inline]
pub fn mul_mod_m61(a: u64, b: u64) -> u64 {
    let x = a as u128 * b as u128;
    let s = (x as u64 & MERSENNE_61) + (x >> 61) as u64;
    let s = (s & MERSENNE_61) + (s >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo `p` by the extended Euclidean algorithm.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % p as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    if old_r == 0 {
        return None;
    }
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(reduce_i128(old_s, p))
}

#[inline]
pub fn reduce_i128(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Fraction-free (Bareiss) row reduction of an integer matrix, processing
/// columns left to right.
///
/// Returns the pivot columns, which form the greedy-leftmost maximal
/// independent column set. Every division is exact, so the entries stay
/// integral and equal to minors of the input.
pub fn bareiss_pivots<T>(mut rows: Vec<Vec<T>>, columns: usize) -> Vec<usize>
where
    T: Integer + Clone,
{
    let n = rows.len();
    let mut prev = T::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..columns {
        if r == n {
            break;
        }
        let Some(pr) = (r..n).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pivot = pivot_row[c].clone();
        for row in tail.iter_mut() {
            let lead = row[c].clone();
            for j in (c + 1)..columns {
                let v = pivot.clone() * row[j].clone() - lead.clone() * pivot_row[j].clone();
                row[j] = v / prev.clone();
            }
            row[c] = T::zero();
        }
        prev = pivot;
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Greedy-leftmost pivot columns of a matrix over a field, by Gaussian
/// elimination.
pub fn field_pivots<F: FieldOps>(field: &F, mut rows: Vec<Vec<F::Elem>>, columns: usize) -> Vec<usize> {
    let n = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..columns {
        if r == n {
            break;
        }
        let Some(pr) = (r..n).find(|&i| !field.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = field.inv(&rows[r][c]);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            if field.is_zero(&row[c]) {
                continue;
            }
            let factor = field.mul(&row[c], &inv);
            for j in c..columns {
                let t = field.mul(&factor, &pivot_row[j]);
                row[j] = field.sub(&row[j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Reduced row echelon form over a field. Returns the pivot columns; `rows`
/// is left with unit pivots and zeros above and below them.
pub fn field_rref<F: FieldOps>(field: &F, rows: &mut [Vec<F::Elem>], columns: usize) -> Vec<usize> {
    let n = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..columns {
        if r == n {
            break;
        }
        let Some(pr) = (r..n).find(|&i| !field.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = field.inv(&rows[r][c]);
        for x in &mut rows[r][c..columns] {
            *x = field.mul(x, &inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || field.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for j in c..columns {
                let t = field.mul(&factor, &pivot_row[j]);
                row[j] = field.sub(&row[j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}
