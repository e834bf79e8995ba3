//! Bit-packed ±1 matrices, seeded generation, column selection and the
//! plain-text interchange format.

use std::fmt::Write as _;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        Self { base_seed, stream_index }
    }

    /// ChaCha8 keyed by `base_seed`, positioned on stream `stream_index`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A seed for an independent sub-purpose of the same trial.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            base_seed: splitmix64(self.base_seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream_index: self.stream_index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Strictly increasing list of column indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ColumnSelection(Vec<usize>);

impl ColumnSelection {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "column selection must be strictly increasing: {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn all(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// An `n × d` matrix with entries in {+1, -1}; bit 1 is +1, bit 0 is -1.
///
/// Rows are packed into `u64` words; padding bits past column `d` are zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    n: usize,
    d: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SignMatrix {}x{} ", self.n, self.d)?;
        f.debug_list()
            .entries((0..self.n).map(|i| (0..self.d).map(|j| if self.is_plus(i, j) { '+' } else { '-' }).collect::<String>()))
            .finish()
    }
}

impl SignMatrix {
    fn zeroed(n: usize, d: usize) -> Self {
        let words = d.div_ceil(64);
        Self { n, d, words, bits: vec![0; n * words] }
    }

    /// Builds a matrix from ±1 rows.
    pub fn from_rows<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeroed(rows.len(), d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {d}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    1 => m.set_plus(i, j),
                    -1 => {}
                    _ => return Err(Error::InvalidArgument(format!("entry ({i},{j}) = {v} is not ±1"))),
                }
            }
        }
        Ok(m)
    }

    /// An `n × 0` matrix.
    pub fn empty_columns(n: usize) -> Self {
        Self::zeroed(n, 0)
    }

    /// A `0 × d` matrix.
    pub fn empty_rows(d: usize) -> Self {
        Self::zeroed(0, d)
    }

    pub fn all_plus(n: usize, d: usize) -> Self {
        let mut m = Self::zeroed(n, d);
        for i in 0..n {
            for j in 0..d {
                m.set_plus(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    #[inline]
    fn set_plus(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    #[inline]
    pub fn is_plus(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> i8 {
        assert!(i < self.n && j < self.d, "entry ({i},{j}) outside {}x{}", self.n, self.d);
        if self.is_plus(i, j) {
            1
        } else {
            -1
        }
    }

    /// Packed words of row `i`.
    pub fn row_bits(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn row(&self, i: usize) -> Vec<i8> {
        (0..self.d).map(|j| self.entry(i, j)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i8> {
        (0..self.n).map(|i| self.entry(i, j)).collect()
    }

    /// Column `j` packed with bit `i` set for each +1 entry.
    pub fn column_bits(&self, j: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.n.div_ceil(64)];
        for i in 0..self.n {
            if self.is_plus(i, j) {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    /// Sum of `+1` entries in row `i` over the given columns, minus the `-1`
    /// entries, computed by popcount.
    pub fn signed_row_sum(&self, i: usize, sel: &ColumnSelection) -> i64 {
        let plus = sel.indices().iter().filter(|&&j| self.is_plus(i, j)).count() as i64;
        2 * plus - sel.len() as i64
    }

    /// Row sums over all columns, via popcount.
    pub fn row_sums(&self) -> Vec<i64> {
        (0..self.n)
            .map(|i| 2 * self.row_bits(i).iter().map(|w| w.count_ones() as i64).sum::<i64>() - self.d as i64)
            .collect()
    }

    /// Vertical concatenation.
    pub fn stack(&self, bottom: &SignMatrix) -> Result<SignMatrix> {
        if self.d != bottom.d {
            return Err(Error::Dimension(format!(
                "cannot stack {}x{} over {}x{}",
                self.n, self.d, bottom.n, bottom.d
            )));
        }
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&bottom.bits);
        Ok(SignMatrix { n: self.n + bottom.n, d: self.d, words: self.words, bits })
    }

    /// The first `k` rows.
    pub fn top_rows(&self, k: usize) -> SignMatrix {
        let k = k.min(self.n);
        SignMatrix { n: k, d: self.d, words: self.words, bits: self.bits[..k * self.words].to_vec() }
    }

    /// Copies the selected columns, preserving their order.
    pub fn select_columns(&self, sel: &ColumnSelection) -> Result<SignMatrix> {
        if let Some(&bad) = sel.indices().iter().find(|&&j| j >= self.d) {
            return Err(Error::IndexOutOfRange { index: bad, columns: self.d });
        }
        let mut out = Self::zeroed(self.n, sel.len());
        for i in 0..self.n {
            for (k, &j) in sel.indices().iter().enumerate() {
                if self.is_plus(i, j) {
                    out.set_plus(i, k);
                }
            }
        }
        Ok(out)
    }

    /// Entries as `i64` rows, for exact arithmetic.
    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n).map(|i| (0..self.d).map(|j| self.entry(i, j) as i64).collect()).collect()
    }

    /// Plain-text form: header `n d`, then one line of `+`/`-` per row.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity((self.d + 1) * self.n + 16);
        let _ = writeln!(s, "{} {}", self.n, self.d);
        for i in 0..self.n {
            for j in 0..self.d {
                s.push(if self.is_plus(i, j) { '+' } else { '-' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses the plain-text form. Errors name the 1-based line.
    pub fn parse(text: &str) -> Result<SignMatrix> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        if !text.is_empty() && !text.ends_with('\n') {
            let line = text.matches('\n').count() + 1;
            return Err(perr(line, "missing terminating newline".into()));
        }
        let mut lines = text.split_terminator('\n');
        let header = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
        let (n, d) = parse_header(header).ok_or_else(|| perr(1, format!("malformed header {header:?}, expected \"n d\"")))?;
        let mut m = Self::zeroed(n, d);
        for i in 0..n {
            let lineno = i + 2;
            let line = lines.next().ok_or_else(|| perr(lineno, format!("expected {n} rows, found {i}")))?;
            let mut count = 0;
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '+' if j < d => m.set_plus(i, j),
                    '-' if j < d => {}
                    '+' | '-' => {}
                    other => return Err(perr(lineno, format!("illegal character {other:?} at column {}", j + 1))),
                }
                count += 1;
            }
            if count != d {
                return Err(perr(lineno, format!("row has {count} entries, expected {d}")));
            }
        }
        if lines.next().is_some() {
            return Err(perr(n + 2, "unexpected content after last row".into()));
        }
        Ok(m)
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let (a, b) = line.split_once(' ')?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    if !digits(a) || !digits(b) {
        return None;
    }
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Draws an `n × d` matrix of independent uniform signs.
///
/// Entries are drawn column by column, so the first `d'` columns of a
/// `n × d` draw coincide with the `n × d'` draw from the same seed.
pub fn generate(n: usize, d: usize, seed: SeedSpec) -> SignMatrix {
    let mut m = SignMatrix::zeroed(n, d);
    let mut rng = seed.rng();
    for j in 0..d {
        let mut i = 0;
        while i < n {
            let word = rng.next_u64();
            let take = (n - i).min(64);
            for b in 0..take {
                if (word >> b) & 1 == 1 {
                    m.set_plus(i + b, j);
                }
            }
            i += take;
        }
    }
    m
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SignMatrix> {
    SignMatrix::parse(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(m: &SignMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, m.to_text())?;
    Ok(())
}
