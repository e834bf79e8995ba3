//! Sparse-aware vectors over `F_p` or, with `p = 0`, over the integers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{is_prime, reduce_i128};

/// A vector over `F_p` (residues in `[0, p)`), or over the integers when
/// `p == 0`. The support is cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpVector {
    p: u64,
    entries: Vec<i64>,
    support: Vec<usize>,
}

pub(crate) fn check_modulus(p: u64) -> Result<()> {
    if p == 0 || (p % 2 == 1 && p < (1 << 63) && is_prime(p)) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("modulus {p} is not 0 or an odd prime below 2^63")))
    }
}

impl FpVector {
    /// Entries are reduced modulo `p` when `p > 0`.
    pub fn new(p: u64, entries: Vec<i64>) -> Result<Self> {
        check_modulus(p)?;
        Ok(Self::new_unchecked(p, entries))
    }

    pub(crate) fn new_unchecked(p: u64, mut entries: Vec<i64>) -> Self {
        if p > 0 {
            for e in entries.iter_mut() {
                *e = reduce_i128(*e as i128, p) as i64;
            }
        }
        let support = entries.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, _)| i).collect();
        Self { p, entries, support }
    }

    pub fn from_residues(p: u64, residues: Vec<u64>) -> Result<Self> {
        check_modulus(p)?;
        if p == 0 {
            return Err(Error::InvalidArgument("residues need a positive modulus".into()));
        }
        Ok(Self::new_unchecked(p, residues.into_iter().map(|r| (r % p) as i64).collect()))
    }

    pub fn integers(entries: Vec<i64>) -> Self {
        Self::new_unchecked(0, entries)
    }

    pub fn zeros(p: u64, len: usize) -> Self {
        Self { p, entries: vec![0; len], support: Vec::new() }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Entries on the support, in index order.
    pub fn support_values(&self) -> Vec<i64> {
        self.support.iter().map(|&i| self.entries[i]).collect()
    }

    /// Multiplies by `c` (reduced modulo `p` when `p > 0`).
    pub fn scale(&self, c: i64) -> FpVector {
        let entries = if self.p > 0 {
            let c = reduce_i128(c as i128, self.p) as i128;
            self.entries.iter().map(|&e| ((e as i128 * c) % self.p as i128) as i64).collect()
        } else {
            self.entries.iter().map(|&e| e.checked_mul(c).expect("integer vector overflow")).collect()
        };
        Self::new_unchecked(self.p, entries)
    }

    /// The subvector on the given coordinates.
    pub fn restrict(&self, coords: &[usize]) -> FpVector {
        Self::new_unchecked(self.p, coords.iter().map(|&i| self.entries[i]).collect())
    }

    /// Reinterprets an integer vector modulo `p`.
    pub fn reduce_mod(&self, p: u64) -> Result<FpVector> {
        FpVector::new(p, self.entries.clone())
    }

    /// Expands a vector given on `coords` to length `len`, zero elsewhere.
    pub fn embed(p: u64, len: usize, coords: &[usize], values: &[i64]) -> FpVector {
        let mut entries = vec![0; len];
        for (&i, &v) in coords.iter().zip(values) {
            entries[i] = v;
        }
        Self::new_unchecked(p, entries)
    }

    /// Text form: header `p n`, then the entries space-separated on one line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.p, self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{e}");
        }
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<FpVector> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
        let mut it = header.split_whitespace();
        let (Some(p), Some(n), None) = (it.next(), it.next(), it.next()) else {
            return Err(perr(1, format!("malformed header {header:?}, expected \"p n\"")));
        };
        let p: u64 = p.parse().map_err(|_| perr(1, format!("bad modulus {p:?}")))?;
        let n: usize = n.parse().map_err(|_| perr(1, format!("bad length {n:?}")))?;
        let body = lines.next().unwrap_or("");
        let entries = body
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| perr(2, format!("bad entry {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != n {
            return Err(perr(2, format!("expected {n} entries, found {}", entries.len())));
        }
        check_modulus(p).map_err(|e| perr(1, e.to_string()))?;
        Ok(Self::new_unchecked(p, entries))
    }

    /// Parses the inline form `"p n a1 .. an"`.
    pub fn parse_inline(text: &str) -> Result<FpVector> {
        let mut it = text.split_whitespace();
        let p = it.next().unwrap_or("");
        let n = it.next().unwrap_or("");
        let rest: Vec<&str> = it.collect();
        Self::parse(&format!("{p} {n}\n{}\n", rest.join(" ")))
    }
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<FpVector> {
    FpVector::parse(&std::fs::read_to_string(path)?)
}

pub fn write_vector(v: &FpVector, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, v.to_text())?;
    Ok(())
}
