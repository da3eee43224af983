use serde::{Deserialize, Serialize};

use super::matrix::{tail_mask, words_for, BitIter, WORD};
use crate::error::{Error, Result};

/// A subset of `[universe]` packed in the same word layout as a matrix row.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VertexSet {
    universe: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        Self { universe, words: vec![0; words_for(universe)] }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        s.words.fill(u64::MAX);
        if let Some(last) = s.words.last_mut() {
            *last &= tail_mask(universe);
        }
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(universe);
        for i in indices {
            if i >= universe {
                return Err(Error::IndexOutOfRange { index: i, len: universe });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// `{0, 1, …, k−1}`.
    pub fn prefix(universe: usize, k: usize) -> Self {
        assert!(k <= universe);
        let mut s = Self::empty(universe);
        for i in 0..k {
            s.insert(i);
        }
        s
    }

    /// The set whose membership is the low `universe` bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= WORD);
        let mut s = Self::empty(universe);
        if universe > 0 {
            s.words[0] = mask & tail_mask(universe);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / WORD] |= 1u64 << (i % WORD);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        for w in c.words.iter_mut() {
            *w = !*w;
        }
        if let Some(last) = c.words.last_mut() {
            *last &= tail_mask(self.universe);
        }
        c
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| BitIter { word }.map(move |b| w * WORD + b))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// A row set `A ⊆ [m]` and a column set `B ⊆ [n]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexSetPair {
    pub rows: VertexSet,
    pub cols: VertexSet,
}

impl VertexSetPair {
    pub fn new(rows: VertexSet, cols: VertexSet) -> Self {
        Self { rows, cols }
    }

    pub fn from_indices(m: usize, n: usize, a: &[usize], b: &[usize]) -> Result<Self> {
        Ok(Self::new(VertexSet::from_indices(m, a.iter().copied())?, VertexSet::from_indices(n, b.iter().copied())?))
    }

    /// `A = {0..a}`, `B = {0..b}`.
    pub fn prefixes(m: usize, n: usize, a: usize, b: usize) -> Self {
        Self::new(VertexSet::prefix(m, a), VertexSet::prefix(n, b))
    }

    pub fn a(&self) -> usize {
        self.rows.len()
    }

    pub fn b(&self) -> usize {
        self.cols.len()
    }

    pub fn m(&self) -> usize {
        self.rows.universe()
    }

    pub fn n(&self) -> usize {
        self.cols.universe()
    }

    /// `(Aᶜ, Bᶜ)`.
    pub fn complement(&self) -> Self {
        Self::new(self.rows.complement(), self.cols.complement())
    }

    /// `n · μ(A,B) = d·a·b`.
    pub fn mu_scaled(&self, d: usize) -> i64 {
        (d * self.a() * self.b()) as i64
    }

    pub fn mu(&self, d: usize) -> f64 {
        self.mu_scaled(d) as f64 / self.n() as f64
    }

    /// `n · μ̂(A,B) = d · min(a·b, (m−a)(n−b))`.
    pub fn mu_hat_scaled(&self, d: usize) -> i64 {
        let (a, b) = (self.a(), self.b());
        let (ca, cb) = (self.m() - a, self.n() - b);
        (d * (a * b).min(ca * cb)) as i64
    }

    pub fn mu_hat(&self, d: usize) -> f64 {
        self.mu_hat_scaled(d) as f64 / self.n() as f64
    }

    /// The orientation with `μ = μ̂`: `(A,B)` itself when `a·b ≤ (m−a)(n−b)`,
    /// otherwise `(Aᶜ,Bᶜ)`. In the square case this is the `a + b ≤ n`
    /// reduction.
    pub fn reduced(&self) -> Self {
        let (a, b) = (self.a(), self.b());
        if a * b <= (self.m() - a) * (self.n() - b) {
            self.clone()
        } else {
            self.complement()
        }
    }
}

/// Serializable description of a set pair: explicit index lists or prefix sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetPairSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<Vec<usize>>,
}

impl SetPairSpec {
    pub fn sizes(a: usize, b: usize) -> Self {
        Self { a: Some(a), b: Some(b), rows: None, cols: None }
    }

    pub fn resolve(&self, m: usize, n: usize) -> Result<VertexSetPair> {
        let rows = match (&self.rows, self.a) {
            (Some(r), _) => VertexSet::from_indices(m, r.iter().copied())?,
            (None, Some(a)) if a <= m => VertexSet::prefix(m, a),
            (None, Some(a)) => return Err(Error::invalid(format!("|A| = {a} exceeds m = {m}"))),
            (None, None) => return Err(Error::invalid("set pair needs `rows` or `a`")),
        };
        let cols = match (&self.cols, self.b) {
            (Some(c), _) => VertexSet::from_indices(n, c.iter().copied())?,
            (None, Some(b)) if b <= n => VertexSet::prefix(n, b),
            (None, Some(b)) => return Err(Error::invalid(format!("|B| = {b} exceeds n = {n}"))),
            (None, None) => return Err(Error::invalid("set pair needs `cols` or `b`")),
        };
        Ok(VertexSetPair::new(rows, cols))
    }
}
