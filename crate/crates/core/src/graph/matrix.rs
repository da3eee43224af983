use crate::error::{Error, Result};

use super::VertexSet;

pub(crate) const WORD: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Mask of the valid bits in the last word of a row of `cols` bits.
pub(crate) fn tail_mask(cols: usize) -> u64 {
    match cols % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A dense 0/1 matrix with rows packed into 64-bit words.
///
/// Column `j` of row `i` lives in bit `j % 64` of word `i * words + j / 64`.
/// Bits past the last column are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let row = m.row_mut(i);
            row.fill(u64::MAX);
            if let Some(last) = row.last_mut() {
                *last &= tail_mask(cols);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Build from rows given as lists of column indices.
    pub fn from_row_supports(rows: usize, cols: usize, supports: &[Vec<usize>]) -> Result<Self> {
        if supports.len() != rows {
            return Err(Error::invalid(format!("expected {rows} rows, got {}", supports.len())));
        }
        let mut m = Self::zeros(rows, cols);
        for (i, support) in supports.iter().enumerate() {
            for &j in support {
                if j >= cols {
                    return Err(Error::IndexOutOfRange { index: j, len: cols });
                }
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.words + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.words + j / WORD];
        let bit = 1u64 << (j % WORD);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / WORD] ^= 1u64 << (j % WORD);
    }

    pub fn clear(&mut self) {
        self.data.fill(0);
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0usize; self.cols];
        for i in 0..self.rows {
            for j in self.row_support(i) {
                sums[j] += 1;
            }
        }
        sums
    }

    /// `|row(i1) ∧ row(i2)|`.
    #[inline]
    pub fn and_count(&self, i1: usize, i2: usize) -> usize {
        self.row(i1).iter().zip(self.row(i2)).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// `|row(i1) ∧ ¬row(i2)|`.
    #[inline]
    pub fn and_not_count(&self, i1: usize, i2: usize) -> usize {
        self.row(i1).iter().zip(self.row(i2)).map(|(a, b)| (a & !b).count_ones() as usize).sum()
    }

    /// `|row(i) ∧ mask|` for a column mask of the same layout.
    #[inline]
    pub fn masked_row_count(&self, i: usize, mask: &VertexSet) -> usize {
        debug_assert_eq!(mask.universe(), self.cols);
        self.row(i).iter().zip(mask.words()).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_support(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| BitIter { word }.map(move |b| w * WORD + b))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.row_support(i) {
                t.set(j, i, true);
            }
        }
        t
    }

    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        let mask = tail_mask(self.cols);
        for i in 0..self.rows {
            let row = c.row_mut(i);
            for w in row.iter_mut() {
                *w = !*w;
            }
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        c
    }

    /// Swap the entries of columns `j1` and `j2` in row `i`.
    #[inline]
    pub fn swap_in_row(&mut self, i: usize, j1: usize, j2: usize) {
        let a = self.get(i, j1);
        let b = self.get(i, j2);
        if a != b {
            self.flip(i, j1);
            self.flip(i, j2);
        }
    }

    /// Total number of ones.
    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: String = (0..self.cols).map(|j| if self.get(i, j) { '1' } else { '0' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

pub(crate) struct BitIter {
    pub(crate) word: u64,
}

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let b = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(b)
    }
}

/// An `m × n` 0/1 matrix with every row summing to `d` and every column to
/// `dp`. The square case `m = n`, `d = dp` is the adjacency matrix of a
/// `d`-regular digraph with self-loops allowed.
///
/// Instances are validated on construction and immutable afterwards.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BiregularBitMatrix {
    bits: BitMatrix,
    d: usize,
    dp: usize,
}

impl BiregularBitMatrix {
    /// Validate `bits` against the declared margins. The first offending row
    /// (then column) is named in the error.
    pub fn new(bits: BitMatrix, d: usize, dp: usize) -> Result<Self> {
        let (m, n) = (bits.rows(), bits.cols());
        if d > n || dp > m || m * d != n * dp {
            return Err(Error::invalid(format!(
                "margins inconsistent: m={m} n={n} d={d} dp={dp} (need m·d = n·dp, d ≤ n, dp ≤ m)"
            )));
        }
        for i in 0..m {
            let s = bits.row_sum(i);
            if s != d {
                return Err(Error::RowSum { row: i, found: s, expected: d });
            }
        }
        for (j, &s) in bits.col_sums().iter().enumerate() {
            if s != dp {
                return Err(Error::ColumnSum { column: j, found: s, expected: dp });
            }
        }
        Ok(Self { bits, d, dp })
    }

    /// Validate with margins read off the first row and first column.
    pub fn infer(bits: BitMatrix) -> Result<Self> {
        let d = if bits.rows() > 0 { bits.row_sum(0) } else { 0 };
        let dp = if bits.cols() > 0 { bits.col_sum(0) } else { 0 };
        Self::new(bits, d, dp)
    }

    pub(crate) fn new_unchecked(bits: BitMatrix, d: usize, dp: usize) -> Self {
        debug_assert!(Self::new(bits.clone(), d, dp).is_ok(), "margin invariant broken");
        Self { bits, d, dp }
    }

    /// Square matrix whose rows are given as column supports.
    pub fn from_row_supports(n: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let bits = BitMatrix::from_row_supports(supports.len(), n, supports)?;
        Self::infer(bits)
    }

    /// The circulant: row `i` has ones in columns `i, i+1, …, i+d−1 (mod n)`.
    pub fn circulant(n: usize, d: usize) -> Result<Self> {
        if d > n {
            return Err(Error::invalid(format!("d={d} exceeds n={n}")));
        }
        let bits = BitMatrix::from_fn(n, n, |i, j| (j + n - i) % n < d);
        Ok(Self::new_unchecked(bits, d, d))
    }

    /// A deterministic biregular matrix: row `i` covers the `d` consecutive
    /// columns starting at `i·d (mod n)`. Equals [`Self::circulant`] only up
    /// to a row relabelling; in the square case use that instead.
    pub fn block_circulant(m: usize, n: usize, d: usize, dp: usize) -> Result<Self> {
        if d > n || dp > m || m * d != n * dp {
            return Err(Error::invalid(format!("no biregular matrix with m={m} n={n} d={d} dp={dp}")));
        }
        let bits = BitMatrix::from_fn(m, n, |i, j| (j + n - (i * d) % n) % n < d);
        Ok(Self::new_unchecked(bits, d, dp))
    }

    pub fn all_ones(m: usize, n: usize) -> Self {
        Self::new_unchecked(BitMatrix::ones(m, n), n, m)
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self::new_unchecked(BitMatrix::zeros(m, n), 0, 0)
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.bits
    }

    pub fn into_bits(self) -> BitMatrix {
        self.bits
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.bits.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.bits.cols()
    }

    /// Row sum (out-degree).
    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Column sum (in-degree).
    #[inline]
    pub fn dp(&self) -> usize {
        self.dp
    }

    pub fn is_square(&self) -> bool {
        self.m() == self.n()
    }

    /// Edge density `d / n`.
    pub fn p(&self) -> f64 {
        self.d as f64 / self.n() as f64
    }

    pub fn theta(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    /// `min(d, n − d)`.
    pub fn d_hat(&self) -> usize {
        self.d.min(self.n() - self.d)
    }

    pub fn p_hat(&self) -> f64 {
        self.d_hat() as f64 / self.n() as f64
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits.get(i, j)
    }

    /// Entrywise `1 − M`; margins become `n − d` and `m − dp`.
    pub fn complement(&self) -> Self {
        Self::new_unchecked(self.bits.complement(), self.n() - self.d, self.m() - self.dp)
    }

    pub fn transpose(&self) -> Self {
        Self::new_unchecked(self.bits.transpose(), self.dp, self.d)
    }

    /// Re-check the margins (used by the verification suites).
    pub fn validate(&self) -> Result<()> {
        Self::new(self.bits.clone(), self.d, self.dp).map(|_| ())
    }
}

impl std::fmt::Debug for BiregularBitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d={} dp={} ", self.d, self.dp)?;
        self.bits.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bits_stay_clear() {
        let m = BitMatrix::ones(3, 70);
        assert_eq!(m.row_sum(0), 70);
        let c = m.complement();
        assert_eq!(c.count_ones(), 0);
        assert_eq!(BitMatrix::zeros(2, 70).complement().count_ones(), 140);
    }

    #[test]
    fn circulant_is_regular() {
        for n in 1..9 {
            for d in 0..=n {
                let m = BiregularBitMatrix::circulant(n, d).unwrap();
                assert!(m.validate().is_ok());
                for j in 0..d {
                    assert!(m.get(0, j));
                }
            }
        }
    }

    #[test]
    fn block_circulant_is_biregular() {
        let m = BiregularBitMatrix::block_circulant(6, 9, 3, 2).unwrap();
        assert!(m.validate().is_ok());
        assert!(BiregularBitMatrix::block_circulant(6, 9, 3, 3).is_err());
    }

    #[test]
    fn first_offending_index_named() {
        let bits = BitMatrix::from_row_supports(3, 3, &[vec![0], vec![0], vec![2]]).unwrap();
        assert_eq!(
            BiregularBitMatrix::new(bits.clone(), 1, 1),
            Err(Error::ColumnSum { column: 0, found: 2, expected: 1 })
        );
        let bits = BitMatrix::from_row_supports(3, 3, &[vec![0], vec![1, 2], vec![]]).unwrap();
        assert_eq!(BiregularBitMatrix::new(bits, 1, 1), Err(Error::RowSum { row: 1, found: 2, expected: 1 }));
    }

    #[test]
    fn complement_involution_and_margins() {
        let m = BiregularBitMatrix::block_circulant(6, 9, 3, 2).unwrap();
        let c = m.complement();
        assert_eq!((c.d(), c.dp()), (6, 4));
        assert!(c.validate().is_ok());
        assert_eq!(c.complement(), m);
        assert_eq!(BiregularBitMatrix::zeros(4, 4).complement(), BiregularBitMatrix::all_ones(4, 4));
    }

    #[test]
    fn row_support_iterates_set_bits() {
        let bits = BitMatrix::from_row_supports(1, 130, &[vec![0, 63, 64, 129]]).unwrap();
        assert_eq!(bits.row_support(0).collect::<Vec<_>>(), vec![0, 63, 64, 129]);
    }
}
