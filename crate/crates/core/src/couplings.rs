//! Simple switchings and column reflections, the two involutions on `𝓜`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BiregularBitMatrix, BitMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinorClass {
    /// `[[1,0],[0,1]]`
    I,
    /// `[[0,1],[1,0]]`
    J,
    Other,
}

/// Rows `(i1, i2)` and columns `(j1, j2)` of a 2×2 minor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SwitchSite {
    pub i1: usize,
    pub i2: usize,
    pub j1: usize,
    pub j2: usize,
}

impl SwitchSite {
    pub fn new(i1: usize, i2: usize, j1: usize, j2: usize) -> Self {
        Self { i1, i2, j1, j2 }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        for (idx, len) in [(self.i1, rows), (self.i2, rows), (self.j1, cols), (self.j2, cols)] {
            if idx >= len {
                return Err(Error::IndexOutOfRange { index: idx, len });
            }
        }
        if self.i1 == self.i2 {
            return Err(Error::RepeatedIndex(self.i1));
        }
        if self.j1 == self.j2 {
            return Err(Error::RepeatedIndex(self.j1));
        }
        Ok(())
    }

    pub fn minor_class(&self, bits: &BitMatrix) -> MinorClass {
        let minor = (
            bits.get(self.i1, self.j1),
            bits.get(self.i1, self.j2),
            bits.get(self.i2, self.j1),
            bits.get(self.i2, self.j2),
        );
        match minor {
            (true, false, false, true) => MinorClass::I,
            (false, true, true, false) => MinorClass::J,
            _ => MinorClass::Other,
        }
    }
}

/// Exchange `I ↔ J` at `site` in place. Returns whether anything changed.
pub fn switch_in_place(bits: &mut BitMatrix, site: &SwitchSite) -> bool {
    if site.minor_class(bits) == MinorClass::Other {
        return false;
    }
    bits.flip(site.i1, site.j1);
    bits.flip(site.i1, site.j2);
    bits.flip(site.i2, site.j1);
    bits.flip(site.i2, site.j2);
    true
}

/// The simple switching at `site`; the identity when the minor is not
/// switchable.
pub fn simple_switch(m: &BiregularBitMatrix, site: &SwitchSite) -> Result<BiregularBitMatrix> {
    site.validate(m.m(), m.n())?;
    let mut bits = m.bits().clone();
    switch_in_place(&mut bits, site);
    Ok(BiregularBitMatrix::new_unchecked(bits, m.d(), m.dp()))
}

/// Order in which the rows are read by a column walk: `i1`, `i2`, then the
/// remaining rows (ascending unless given explicitly).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowOrder {
    rows: Vec<usize>,
}

impl RowOrder {
    pub fn new(i1: usize, i2: usize, m: usize) -> Result<Self> {
        Self::check_pair(i1, i2, m)?;
        let mut rows = Vec::with_capacity(m);
        rows.push(i1);
        rows.push(i2);
        rows.extend((0..m).filter(|&i| i != i1 && i != i2));
        Ok(Self { rows })
    }

    /// `i1`, `i2`, then `trailing`, which must list the other rows once each.
    pub fn with_trailing(i1: usize, i2: usize, trailing: &[usize]) -> Result<Self> {
        let m = trailing.len() + 2;
        Self::check_pair(i1, i2, m)?;
        let mut rows = vec![i1, i2];
        rows.extend_from_slice(trailing);
        let mut seen = vec![false; m];
        for &r in &rows {
            if r >= m {
                return Err(Error::IndexOutOfRange { index: r, len: m });
            }
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::RepeatedIndex(r));
            }
        }
        Ok(Self { rows })
    }

    fn check_pair(i1: usize, i2: usize, m: usize) -> Result<()> {
        for i in [i1, i2] {
            if i >= m {
                return Err(Error::IndexOutOfRange { index: i, len: m });
            }
        }
        if i1 == i2 {
            return Err(Error::RepeatedIndex(i1));
        }
        Ok(())
    }

    pub fn i1(&self) -> usize {
        self.rows[0]
    }

    pub fn i2(&self) -> usize {
        self.rows[1]
    }

    /// Row read at walk step `k + 1`.
    pub fn row(&self, k: usize) -> usize {
        self.rows[k]
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// The lattice walk of an ordered column pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnWalk {
    /// `w(0), …, w(m)`, with `w(0) = 0`.
    pub positions: Vec<i32>,
    /// Number of `+1` steps (equal to the number of `−1` steps).
    pub r: usize,
    pub reflecting: bool,
    /// First `i ≥ 3` with `w(i) = +1`; present iff reflecting.
    pub i_star: Option<usize>,
}

#[inline]
fn step(bits: &BitMatrix, i: usize, j1: usize, j2: usize) -> i32 {
    bits.get(i, j1) as i32 - bits.get(i, j2) as i32
}

/// The full walk of `(j1, j2)` reading rows in `order`.
pub fn column_walk(m: &BiregularBitMatrix, j1: usize, j2: usize, order: &RowOrder) -> Result<ColumnWalk> {
    column_walk_bits(m.bits(), j1, j2, order)
}

/// [`column_walk`] on an arbitrary 0/1 matrix.
pub fn column_walk_bits(bits: &BitMatrix, j1: usize, j2: usize, order: &RowOrder) -> Result<ColumnWalk> {
    check_columns(bits, j1, j2)?;
    check_order(bits, order)?;
    let mut positions = Vec::with_capacity(order.len() + 1);
    positions.push(0);
    let (mut w, mut r) = (0i32, 0usize);
    for &row in order.rows() {
        let s = step(bits, row, j1, j2);
        r += (s == 1) as usize;
        w += s;
        positions.push(w);
    }
    let i_star = if positions.len() > 3 && positions[1] == 1 && positions[2] != 1 {
        (3..positions.len()).find(|&i| positions[i] == 1)
    } else {
        None
    };
    Ok(ColumnWalk { positions, r, reflecting: i_star.is_some(), i_star })
}

fn check_columns(bits: &BitMatrix, j1: usize, j2: usize) -> Result<()> {
    for j in [j1, j2] {
        if j >= bits.cols() {
            return Err(Error::IndexOutOfRange { index: j, len: bits.cols() });
        }
    }
    if j1 == j2 {
        return Err(Error::RepeatedIndex(j1));
    }
    Ok(())
}

fn check_order(bits: &BitMatrix, order: &RowOrder) -> Result<()> {
    if order.len() != bits.rows() {
        return Err(Error::invalid(format!("row order has {} rows, matrix has {}", order.len(), bits.rows())));
    }
    Ok(())
}

/// `i*` for `(j1, j2)`, or `None` when the pair is not reflecting. Stops at
/// the first return.
pub(crate) fn first_return(bits: &BitMatrix, j1: usize, j2: usize, order: &RowOrder) -> Option<usize> {
    let rows = order.rows();
    if step(bits, rows[0], j1, j2) != 1 {
        return None;
    }
    let mut w = 1 + step(bits, rows[1], j1, j2);
    if w == 1 {
        return None;
    }
    for (k, &row) in rows.iter().enumerate().skip(2) {
        w += step(bits, row, j1, j2);
        if w == 1 {
            return Some(k + 1);
        }
    }
    None
}

/// Reflect in place; returns whether the pair was reflecting.
pub fn reflect_in_place(bits: &mut BitMatrix, j1: usize, j2: usize, order: &RowOrder) -> bool {
    let Some(i_star) = first_return(bits, j1, j2, order) else {
        return false;
    };
    // Walk steps 2..=i* are order positions 1..i*.
    for &row in &order.rows()[1..i_star] {
        bits.swap_in_row(row, j1, j2);
    }
    true
}

/// Swap columns `j1, j2` on walk steps `2..=i*` when `(j1, j2)` is
/// reflecting; the identity otherwise.
pub fn reflect(m: &BiregularBitMatrix, j1: usize, j2: usize, order: &RowOrder) -> Result<BiregularBitMatrix> {
    check_columns(m.bits(), j1, j2)?;
    check_order(m.bits(), order)?;
    let mut bits = m.bits().clone();
    reflect_in_place(&mut bits, j1, j2, order);
    Ok(BiregularBitMatrix::new_unchecked(bits, m.d(), m.dp()))
}

fn exclusive_columns(bits: &BitMatrix, a: usize, b: usize) -> Vec<usize> {
    let (ra, rb) = (bits.row(a), bits.row(b));
    let mut out = Vec::new();
    for (w, (&x, &y)) in ra.iter().zip(rb).enumerate() {
        let mut word = x & !y;
        while word != 0 {
            out.push(w * 64 + word.trailing_zeros() as usize);
            word &= word - 1;
        }
    }
    out
}

pub(crate) fn bad_pairs_bits(bits: &BitMatrix, order: &RowOrder) -> usize {
    let (i1, i2) = (order.i1(), order.i2());
    let ex12 = exclusive_columns(bits, i1, i2);
    let ex21 = exclusive_columns(bits, i2, i1);
    let mut bad = 0;
    for &j1 in &ex12 {
        for &j2 in &ex21 {
            // The minor is I, so the walk starts 1, 0 and the pair is
            // reflecting iff it returns to 1 later.
            if first_return(bits, j1, j2, order).is_none() {
                bad += 1;
            }
        }
    }
    bad
}

/// `b(M)`: pairs in `Ex(i1,i2) × Ex(i2,i1)` that are not reflecting. The
/// rows `i1, i2` are taken from `order`.
pub fn bad_pair_count(m: &BiregularBitMatrix, order: &RowOrder) -> Result<usize> {
    check_order(m.bits(), order)?;
    Ok(bad_pairs_bits(m.bits(), order))
}

/// Minor counts over all ordered column pairs at rows `(i1, i2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MinorCounts {
    /// Minors equal to `[[1,0],[1,0]]`.
    pub n_k: usize,
    /// `I` minors whose column pair is reflecting.
    pub n_i_reflecting: usize,
    /// `I` minors whose column pair is not reflecting (the bad pairs).
    pub n_i_bad: usize,
}

pub(crate) fn minor_counts_bits(bits: &BitMatrix, order: &RowOrder) -> MinorCounts {
    let (i1, i2) = (order.i1(), order.i2());
    let n = bits.cols();
    let co = bits.and_count(i1, i2);
    let ex = bits.and_not_count(i1, i2);
    let d = co + ex;
    let bad = bad_pairs_bits(bits, order);
    MinorCounts { n_k: co * (n + co - 2 * d), n_i_reflecting: ex * ex - bad, n_i_bad: bad }
}

/// `#K = co·(n − 2d + co)`, `#I_reflecting + #I_bad = ex²`.
pub fn count_minor_classes(m: &BiregularBitMatrix, order: &RowOrder) -> Result<MinorCounts> {
    check_order(m.bits(), order)?;
    Ok(minor_counts_bits(m.bits(), order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::codegree;
    use crate::graph::Direction;
    use crate::rng::stream_rng;
    use crate::samplers::{enumerate_class, sample_switch_mcmc, Shape};
    use rand::seq::SliceRandom;

    /// Two-column matrix with the given row patterns.
    fn two_columns(rows: &[(bool, bool)]) -> BitMatrix {
        BitMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 })
    }

    fn walk_of(bits: BitMatrix) -> ColumnWalk {
        let order = RowOrder::new(0, 1, bits.rows()).unwrap();
        column_walk_bits(&bits, 0, 1, &order).unwrap()
    }

    #[test]
    fn walk_examples() {
        let w = walk_of(two_columns(&[(true, false), (true, false), (false, true), (false, true)]));
        assert_eq!(w.positions, vec![0, 1, 2, 1, 0]);
        assert!(w.reflecting);
        assert_eq!(w.i_star, Some(3));

        let w = walk_of(two_columns(&[(true, false), (false, true), (false, false), (false, false)]));
        assert_eq!(w.positions, vec![0, 1, 0, 0, 0]);
        assert!(!w.reflecting);

        let w = walk_of(two_columns(&[(true, true), (false, false), (true, true), (false, false)]));
        assert!(w.positions.iter().all(|&x| x == 0));
        assert!(!w.reflecting);
    }

    #[test]
    fn reflect_example_on_columns() {
        let mut bits = two_columns(&[(true, false), (true, false), (false, true), (false, true)]);
        let order = RowOrder::new(0, 1, 4).unwrap();
        assert!(reflect_in_place(&mut bits, 0, 1, &order));
        assert_eq!(bits, two_columns(&[(true, false), (false, true), (true, false), (false, true)]));
        assert!(reflect_in_place(&mut bits, 0, 1, &order));
        assert_eq!(bits, two_columns(&[(true, false), (true, false), (false, true), (false, true)]));
    }

    #[test]
    fn switch_examples() {
        let m = BiregularBitMatrix::from_row_supports(2, &[vec![0], vec![1]]).unwrap();
        let site = SwitchSite::new(0, 1, 0, 1);
        assert_eq!(site.minor_class(m.bits()), MinorClass::I);
        let s = simple_switch(&m, &site).unwrap();
        assert_eq!(site.minor_class(s.bits()), MinorClass::J);
        assert_eq!(simple_switch(&s, &site).unwrap(), m);
        assert!(simple_switch(&m, &SwitchSite::new(0, 0, 0, 1)).is_err());

        let blocks = BiregularBitMatrix::from_row_supports(4, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap();
        // Minor rows (0,1) × cols (0,1) = [[1,1],[0,1]]: not switchable.
        assert_eq!(simple_switch(&blocks, &site).unwrap(), blocks);
    }

    #[test]
    fn k_minors_are_reflecting() {
        let mut rng = stream_rng(11, 0);
        for _ in 0..50 {
            let m = sample_switch_mcmc(Shape::square(12, 5), 600, &mut rng).unwrap();
            let order = RowOrder::new(3, 7, 12).unwrap();
            for j1 in 0..12 {
                for j2 in 0..12 {
                    let k = m.get(3, j1) && !m.get(3, j2) && m.get(7, j1) && !m.get(7, j2);
                    if k {
                        assert!(column_walk(&m, j1, j2, &order).unwrap().reflecting);
                    }
                }
            }
        }
    }

    /// Naive oracle: classify every ordered column pair from scratch.
    fn naive_counts(m: &BiregularBitMatrix, order: &RowOrder) -> MinorCounts {
        let (i1, i2) = (order.i1(), order.i2());
        let mut c = MinorCounts { n_k: 0, n_i_reflecting: 0, n_i_bad: 0 };
        for j1 in 0..m.n() {
            for j2 in 0..m.n() {
                if j1 == j2 {
                    continue;
                }
                let minor = (m.get(i1, j1), m.get(i1, j2), m.get(i2, j1), m.get(i2, j2));
                let walk = column_walk(m, j1, j2, order).unwrap();
                match minor {
                    (true, false, true, false) => c.n_k += 1,
                    (true, false, false, true) if walk.reflecting => c.n_i_reflecting += 1,
                    (true, false, false, true) => c.n_i_bad += 1,
                    _ => {}
                }
            }
        }
        c
    }

    #[test]
    fn minor_counts_match_naive_scan() {
        let mut rng = stream_rng(12, 0);
        for t in 0..200 {
            let n = 6 + t % 7;
            let d = 1 + t % (n - 1);
            let m = sample_switch_mcmc(Shape::square(n, d), 40 * n as u64 * d as u64, &mut rng).unwrap();
            let order = RowOrder::new(t % n, (t + 1 + t % (n - 1)) % n, n).unwrap();
            let fast = count_minor_classes(&m, &order).unwrap();
            assert_eq!(fast, naive_counts(&m, &order));
            let rec = codegree(&m, order.i1(), order.i2(), Direction::Out).unwrap();
            assert_eq!(fast.n_i_reflecting + fast.n_i_bad, rec.ex * rec.ex);
        }
    }

    #[test]
    fn identical_rows_have_no_bad_pairs() {
        let m = BiregularBitMatrix::from_row_supports(4, &[vec![0, 1], vec![0, 1], vec![2, 3], vec![2, 3]]).unwrap();
        let order = RowOrder::new(0, 1, 4).unwrap();
        assert_eq!(bad_pair_count(&m, &order).unwrap(), 0);
        let c = count_minor_classes(&m, &order).unwrap();
        assert_eq!(c.n_k, 2 * 2);
    }

    #[test]
    fn bad_pairs_follow_trailing_relabeling() {
        // Reading M in order (i1, i2, t) is the same as reading the matrix
        // with the trailing rows physically moved into natural order.
        let mut rng = stream_rng(13, 0);
        let mut differs = false;
        for _ in 0..100 {
            let m = sample_switch_mcmc(Shape::square(10, 4), 1000, &mut rng).unwrap();
            let natural = RowOrder::new(2, 5, 10).unwrap();
            let mut trailing: Vec<usize> = natural.rows()[2..].to_vec();
            trailing.shuffle(&mut rng);
            let shuffled = RowOrder::with_trailing(2, 5, &trailing).unwrap();
            let supports: Vec<Vec<usize>> = (0..10)
                .map(|i| {
                    let src = natural.rows()[2..].iter().position(|&r| r == i).map_or(i, |k| trailing[k]);
                    m.bits().row_support(src).collect()
                })
                .collect();
            let moved = BiregularBitMatrix::from_row_supports(10, &supports).unwrap();
            let b_shuffled = bad_pair_count(&m, &shuffled).unwrap();
            assert_eq!(b_shuffled, bad_pair_count(&moved, &natural).unwrap());
            differs |= b_shuffled != bad_pair_count(&m, &natural).unwrap();
        }
        // The count itself does depend on the trailing order.
        assert!(differs);
    }

    #[test]
    fn reflection_pairs_plus_and_minus_on_class() {
        let class = enumerate_class(Shape::square(4, 2)).unwrap();
        let order = RowOrder::new(0, 1, 4).unwrap();
        for j1 in 0..4 {
            for j2 in 0..4 {
                if j1 == j2 {
                    continue;
                }
                let (mut plus, mut minus) = (Vec::new(), Vec::new());
                for m in &class {
                    let w = column_walk(m, j1, j2, &order).unwrap();
                    if w.reflecting {
                        if w.positions[2] == 2 { plus.push(m) } else { minus.push(m) }
                    }
                }
                assert_eq!(plus.len(), minus.len());
                let mut images: Vec<_> = plus.iter().map(|m| reflect(m, j1, j2, &order).unwrap()).collect();
                images.sort_by_key(|m| format!("{m:?}"));
                let mut minus_sorted: Vec<_> = minus.into_iter().cloned().collect();
                minus_sorted.sort_by_key(|m| format!("{m:?}"));
                assert_eq!(images, minus_sorted);
            }
        }
    }
}
