use serde::{Deserialize, Serialize};

use super::{BiregularBitMatrix, BitMatrix, VertexSetPair};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Rows `i1, i2`: common out-neighbours.
    Out,
    /// Columns `i1, i2`: common in-neighbours.
    In,
}

/// Neighbourhood overlap of two rows (or two columns).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CodegreeRecord {
    /// Positions where both vectors are 1.
    pub co: usize,
    /// Positions where the first is 1 and the second 0.
    pub ex: usize,
    /// Positions where both are 0.
    pub zero_zero: usize,
    pub direction: Direction,
}

impl CodegreeRecord {
    /// The regularity identities for vectors of length `len` with `deg` ones
    /// each: `ex = deg − co`, `zero_zero = len − 2·deg + co` and
    /// `max(0, 2·deg − len) ≤ co ≤ deg`.
    pub fn identities_hold(&self, deg: usize, len: usize) -> bool {
        let deg_hat = deg.min(len - deg);
        self.ex + self.co == deg
            && self.zero_zero + 2 * deg == len + self.co
            && self.co <= deg
            && self.co + len >= 2 * deg
            && self.ex <= deg_hat
    }
}

fn check_pair(i1: usize, i2: usize, len: usize) -> Result<()> {
    for i in [i1, i2] {
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
    }
    if i1 == i2 {
        return Err(Error::RepeatedIndex(i1));
    }
    Ok(())
}

/// Overlap statistics of rows `i1, i2` of an arbitrary 0/1 matrix.
pub fn row_overlap(bits: &BitMatrix, i1: usize, i2: usize) -> Result<CodegreeRecord> {
    check_pair(i1, i2, bits.rows())?;
    let co = bits.and_count(i1, i2);
    let ex = bits.and_not_count(i1, i2);
    let only_second = bits.and_not_count(i2, i1);
    Ok(CodegreeRecord { co, ex, zero_zero: bits.cols() - co - ex - only_second, direction: Direction::Out })
}

/// Overlap statistics of columns `j1, j2`.
pub fn column_overlap(bits: &BitMatrix, j1: usize, j2: usize) -> Result<CodegreeRecord> {
    check_pair(j1, j2, bits.cols())?;
    let (mut co, mut ex, mut zz) = (0, 0, 0);
    for i in 0..bits.rows() {
        match (bits.get(i, j1), bits.get(i, j2)) {
            (true, true) => co += 1,
            (true, false) => ex += 1,
            (false, false) => zz += 1,
            (false, true) => {}
        }
    }
    Ok(CodegreeRecord { co, ex, zero_zero: zz, direction: Direction::In })
}

/// Codegree of two rows (`Out`) or two columns (`In`).
pub fn codegree(m: &BiregularBitMatrix, i1: usize, i2: usize, direction: Direction) -> Result<CodegreeRecord> {
    let rec = match direction {
        Direction::Out => row_overlap(m.bits(), i1, i2)?,
        Direction::In => column_overlap(m.bits(), i1, i2)?,
    };
    debug_assert!(match direction {
        Direction::Out => rec.identities_hold(m.d(), m.n()),
        Direction::In => rec.identities_hold(m.dp(), m.m()),
    });
    Ok(rec)
}

/// `e(A,B) = |E ∩ (A × B)|`.
pub fn edge_count_bits(bits: &BitMatrix, sets: &VertexSetPair) -> usize {
    assert_eq!(sets.m(), bits.rows(), "row set universe mismatch");
    assert_eq!(sets.n(), bits.cols(), "column set universe mismatch");
    sets.rows.iter().map(|i| bits.masked_row_count(i, &sets.cols)).sum()
}

pub fn edge_count(m: &BiregularBitMatrix, sets: &VertexSetPair) -> usize {
    edge_count_bits(m.bits(), sets)
}

/// Edge discrepancy kept in the integer scale `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    /// `n·e(A,B) − d·a·b`, i.e. `n·(e − μ)`.
    pub deviation_scaled: i64,
    /// `n·μ̂(A,B)`.
    pub mu_hat_scaled: i64,
    /// The scale `n`.
    pub scale: i64,
}

impl Discrepancy {
    /// `|e(A,B) − μ(A,B)|`.
    pub fn disc(&self) -> f64 {
        self.deviation_scaled.unsigned_abs() as f64 / self.scale as f64
    }

    /// `disc / μ̂`; degenerate when `μ̂ = 0`.
    pub fn normalized(&self) -> Result<f64> {
        if self.mu_hat_scaled == 0 {
            return Err(Error::DegenerateScale);
        }
        Ok(self.deviation_scaled.unsigned_abs() as f64 / self.mu_hat_scaled as f64)
    }
}

pub fn discrepancy(m: &BiregularBitMatrix, sets: &VertexSetPair) -> Discrepancy {
    let e = edge_count(m, sets) as i64;
    Discrepancy {
        deviation_scaled: m.n() as i64 * e - sets.mu_scaled(m.d()),
        mu_hat_scaled: sets.mu_hat_scaled(m.d()),
        scale: m.n() as i64,
    }
}

/// Largest `|n·co − d²|` over all unordered row pairs, with the pair
/// attaining it. `None` when there are fewer than two rows.
pub fn max_codegree_deviation(m: &BiregularBitMatrix) -> Option<(i64, (usize, usize))> {
    let (n, d) = (m.n() as i64, m.d() as i64);
    let mut best: Option<(i64, (usize, usize))> = None;
    for i1 in 0..m.m() {
        for i2 in (i1 + 1)..m.m() {
            let co = m.bits().and_count(i1, i2) as i64;
            let dev = (n * co - d * d).abs();
            if best.is_none_or(|(b, _)| dev > b) {
                best = Some((dev, (i1, i2)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexSet;

    fn blocks() -> BiregularBitMatrix {
        BiregularBitMatrix::from_row_supports(4, &[vec![0, 1], vec![0, 1], vec![2, 3], vec![2, 3]]).unwrap()
    }

    fn spread() -> BiregularBitMatrix {
        BiregularBitMatrix::from_row_supports(4, &[vec![0, 1], vec![2, 3], vec![0, 2], vec![1, 3]]).unwrap()
    }

    #[test]
    fn identical_rows_have_full_codegree() {
        let r = codegree(&blocks(), 0, 1, Direction::Out).unwrap();
        assert_eq!((r.co, r.ex), (2, 0));
    }

    #[test]
    fn disjoint_rows_have_zero_codegree() {
        let r = codegree(&spread(), 0, 1, Direction::Out).unwrap();
        assert_eq!((r.co, r.ex), (0, 2));
    }

    #[test]
    fn codegree_errors() {
        assert_eq!(codegree(&blocks(), 1, 1, Direction::Out), Err(Error::RepeatedIndex(1)));
        assert_eq!(codegree(&blocks(), 0, 4, Direction::In), Err(Error::IndexOutOfRange { index: 4, len: 4 }));
    }

    #[test]
    fn in_direction_uses_columns() {
        let m = BiregularBitMatrix::block_circulant(6, 9, 3, 2).unwrap();
        for j1 in 0..9 {
            for j2 in 0..9 {
                if j1 != j2 {
                    let r = codegree(&m, j1, j2, Direction::In).unwrap();
                    assert!(r.identities_hold(2, 6));
                    let t = codegree(&m.transpose(), j1, j2, Direction::Out).unwrap();
                    assert_eq!((r.co, r.ex, r.zero_zero), (t.co, t.ex, t.zero_zero));
                }
            }
        }
    }

    #[test]
    fn edge_count_examples() {
        let m = blocks();
        let full = VertexSetPair::new(VertexSet::full(4), VertexSet::full(4));
        assert_eq!(edge_count(&m, &full), 8);
        let empty = VertexSetPair::new(VertexSet::empty(4), VertexSet::full(4));
        assert_eq!(edge_count(&m, &empty), 0);
        let p = VertexSetPair::from_indices(4, 4, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(edge_count(&m, &p), 4);
        assert_eq!(edge_count(&m, &p.complement()), 2 * (4 - 2 - 2) + 4);
        let disc = discrepancy(&m, &p);
        assert_eq!(disc.disc(), 2.0);
        assert_eq!(p.mu(2), 2.0);
    }

    #[test]
    fn degenerate_normalization() {
        let m = BiregularBitMatrix::all_ones(4, 4);
        let p = VertexSetPair::from_indices(4, 4, &[0, 1, 2, 3], &[1]).unwrap();
        let disc = discrepancy(&m, &p);
        assert_eq!(disc.disc(), 0.0);
        assert_eq!(disc.normalized(), Err(Error::DegenerateScale));
        let q = VertexSetPair::from_indices(4, 4, &[0], &[1, 2]).unwrap();
        assert_eq!(discrepancy(&m, &q).disc(), 0.0);
    }

    #[test]
    fn complement_codegree_shift() {
        let m = spread();
        let c = m.complement();
        for i1 in 0..4 {
            for i2 in 0..4 {
                if i1 == i2 {
                    continue;
                }
                let a = codegree(&m, i1, i2, Direction::Out).unwrap();
                let b = codegree(&c, i1, i2, Direction::Out).unwrap();
                assert_eq!(b.co, 4 - 2 * 2 + a.co);
                assert_eq!(b.ex, a.ex);
            }
        }
    }

    #[test]
    fn max_deviation_on_blocks() {
        // co ∈ {0, 2}, d²/n = 1: |4·co − 4| = 4 everywhere.
        let (dev, _) = max_codegree_deviation(&blocks()).unwrap();
        assert_eq!(dev, 4);
    }
}
