//! Samplers for the matrix classes and the two comparison models.
//!
//! * [`sample_rejection`]: exactly uniform on `𝓜` via the configuration
//!   model conditioned on simplicity.
//! * [`sample_switch_mcmc`]: approximately uniform; a lazy simple-switching
//!   chain started from a circulant.
//! * [`sample_permutation_model`]: `d` independent uniform permutations.
//! * [`sample_er`]: independent Bernoulli entries.
//! * [`enumerate_all`]: every matrix of a tiny class, in lexicographic order.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BiregularBitMatrix, BitMatrix, VertexSetPair};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;
pub const DEFAULT_ENUMERATION_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Rejection,
    SwitchMcmc,
    PermutationModel,
    ErdosRenyi,
    Enumerate,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Rejection => "rejection",
            SamplerKind::SwitchMcmc => "switch_mcmc",
            SamplerKind::PermutationModel => "permutation_model",
            SamplerKind::ErdosRenyi => "erdos_renyi",
            SamplerKind::Enumerate => "enumerate",
        }
    }

    /// Whether samples are exactly uniform on their class.
    pub fn is_exact(&self) -> bool {
        !matches!(self, SamplerKind::SwitchMcmc)
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rejection" => SamplerKind::Rejection,
            "switch_mcmc" => SamplerKind::SwitchMcmc,
            "permutation_model" => SamplerKind::PermutationModel,
            "erdos_renyi" => SamplerKind::ErdosRenyi,
            "enumerate" => SamplerKind::Enumerate,
            other => return Err(Error::invalid(format!("unknown sampler kind `{other}`"))),
        })
    }
}

/// Margins of a biregular class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub dp: usize,
}

impl Shape {
    pub fn square(n: usize, d: usize) -> Self {
        Self { m: n, n, d, dp: d }
    }

    pub fn new(m: usize, n: usize, d: usize, dp: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if d > n || dp > m || m * d != n * dp {
            return Err(Error::invalid(format!("no biregular matrix with m={m} n={n} d={d} dp={dp}")));
        }
        Ok(Self { m, n, d, dp })
    }

    pub fn complement(&self) -> Self {
        Self { m: self.m, n: self.n, d: self.n - self.d, dp: self.m - self.dp }
    }

    pub fn is_square(&self) -> bool {
        self.m == self.n
    }
}

/// Which sampler to run, its parameters and its random stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, n: usize, d: usize) -> Self {
        Self { kind, n, m: None, d: Some(d), dp: None, p: None, steps: None, max_attempts: None, seed: 0, stream: 0 }
    }

    pub fn erdos_renyi(n: usize, p: f64) -> Self {
        Self { p: Some(p), d: None, ..Self::new(SamplerKind::ErdosRenyi, n, 0) }
    }

    pub fn bipartite(kind: SamplerKind, m: usize, n: usize, d: usize, dp: usize) -> Self {
        Self { m: Some(m), dp: Some(dp), ..Self::new(kind, n, d) }
    }

    pub fn with_steps(mut self, steps: u64) -> Self {
        self.steps = Some(steps);
        self
    }

    pub fn with_seed(mut self, seed: u64, stream: u64) -> Self {
        self.seed = seed;
        self.stream = stream;
        self
    }

    /// Margins, with `m` defaulting to `n` and `dp` to `d·m/n`.
    pub fn shape(&self) -> Result<Shape> {
        let m = self.m.unwrap_or(self.n);
        let d = self.d.ok_or_else(|| Error::invalid("sampler needs `d`"))?;
        let dp = match self.dp {
            Some(dp) => dp,
            None if (m * d) % self.n == 0 => m * d / self.n,
            None => return Err(Error::invalid(format!("m·d = {} not divisible by n = {}", m * d, self.n))),
        };
        Shape::new(m, self.n, d, dp)
    }

    /// Chain length: the explicit value or `100·n·d`.
    pub fn steps_or_default(&self) -> u64 {
        self.steps.unwrap_or_else(|| 100 * self.n as u64 * self.d.unwrap_or(1).max(1) as u64)
    }

    pub fn max_attempts_or_default(&self) -> u64 {
        self.max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS)
    }

    /// A copy with every default written out, for configuration echoes.
    pub fn resolved(&self) -> Result<Self> {
        let mut s = self.clone();
        match self.kind {
            SamplerKind::ErdosRenyi => {
                let p = self.p.ok_or_else(|| Error::invalid("erdos_renyi needs `p`"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
                }
            }
            SamplerKind::PermutationModel => {
                s.d = Some(self.d.ok_or_else(|| Error::invalid("permutation_model needs `d`"))?);
            }
            _ => {
                let shape = self.shape()?;
                s.m = Some(shape.m);
                s.dp = Some(shape.dp);
                match self.kind {
                    SamplerKind::SwitchMcmc => s.steps = Some(self.steps_or_default()),
                    SamplerKind::Rejection => s.max_attempts = Some(self.max_attempts_or_default()),
                    _ => {}
                }
            }
        }
        Ok(s)
    }

    /// Draw one sample.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sample> {
        match self.kind {
            SamplerKind::Rejection => sample_rejection(self.shape()?, self.max_attempts_or_default(), rng).map(Sample::Matrix),
            SamplerKind::SwitchMcmc => sample_switch_mcmc(self.shape()?, self.steps_or_default(), rng).map(Sample::Matrix),
            SamplerKind::PermutationModel => {
                let d = self.d.ok_or_else(|| Error::invalid("permutation_model needs `d`"))?;
                Ok(Sample::Permutations(sample_permutation_model(self.n, d, rng)))
            }
            SamplerKind::ErdosRenyi => {
                let p = self.p.ok_or_else(|| Error::invalid("erdos_renyi needs `p`"))?;
                sample_er(self.n, p, rng).map(Sample::Plain)
            }
            SamplerKind::Enumerate => Err(Error::invalid("`enumerate` yields a whole class; use enumerate_all")),
        }
    }
}

/// One draw from any sampler.
#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    Matrix(BiregularBitMatrix),
    Permutations(PermutationTuple),
    Plain(BitMatrix),
}

impl Sample {
    pub fn into_matrix(self) -> Option<BiregularBitMatrix> {
        match self {
            Sample::Matrix(m) => Some(m),
            _ => None,
        }
    }
}

/// Uniform sample from `𝓜(m, n, d, dp)` by configuration-model rejection.
///
/// Out-stubs (row `i` repeated `d` times) are matched to a uniformly shuffled
/// list of in-stubs (column `j` repeated `dp` times). The attempt is accepted
/// iff no row receives the same column twice. The shuffle is drawn lazily so
/// an attempt stops at its first repeated entry; acceptance depends only on
/// the collapsed multigraph.
///
/// When `n − d < d` the complement class is sampled instead and complemented,
/// which is a bijection between the two classes. Classes with `d ∈ {0, n}`
/// have one element and are returned directly.
pub fn sample_rejection<R: Rng + ?Sized>(shape: Shape, max_attempts: u64, rng: &mut R) -> Result<BiregularBitMatrix> {
    let Shape { m, n, d, .. } = shape;
    if d == 0 {
        return Ok(BiregularBitMatrix::zeros(m, n));
    }
    if d == n {
        return Ok(BiregularBitMatrix::all_ones(m, n));
    }
    if n - d < d {
        return sample_rejection(shape.complement(), max_attempts, rng).map(|c| c.complement());
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|j| std::iter::repeat_n(j, shape.dp)).collect();
    let mut bits = BitMatrix::zeros(m, n);
    for _ in 0..max_attempts {
        if configuration_attempt(d, &mut stubs, &mut bits, rng) {
            return Ok(BiregularBitMatrix::new_unchecked(bits, d, shape.dp));
        }
    }
    Err(Error::RejectionBudgetExhausted { attempts: max_attempts })
}

fn configuration_attempt<R: Rng + ?Sized>(d: usize, stubs: &mut [usize], bits: &mut BitMatrix, rng: &mut R) -> bool {
    bits.clear();
    let total = stubs.len();
    for pos in 0..total {
        let k = rng.random_range(pos..total);
        stubs.swap(pos, k);
        let (i, j) = (pos / d, stubs[pos]);
        if bits.get(i, j) {
            return false;
        }
        bits.set(i, j, true);
    }
    true
}

/// The chain's start state: the circulant in the square case, the block
/// circulant otherwise.
pub fn chain_start(shape: Shape) -> Result<BiregularBitMatrix> {
    if shape.m == shape.n {
        BiregularBitMatrix::circulant(shape.n, shape.d)
    } else {
        BiregularBitMatrix::block_circulant(shape.m, shape.n, shape.d, shape.dp)
    }
}

/// Run `steps` moves of the lazy switching chain from [`chain_start`].
///
/// Each move draws `(i1, i2, j1, j2)` uniformly from `[m]² × [n]²` and
/// performs a simple switching there (a no-op unless the minor is switchable).
/// The move kernel is symmetric, so the chain is reversible with respect to
/// the uniform distribution.
pub fn sample_switch_mcmc<R: Rng + ?Sized>(shape: Shape, steps: u64, rng: &mut R) -> Result<BiregularBitMatrix> {
    let start = chain_start(shape)?;
    let mut bits = start.into_bits();
    run_switch_chain(&mut bits, steps, rng);
    Ok(BiregularBitMatrix::new_unchecked(bits, shape.d, shape.dp))
}

pub(crate) fn run_switch_chain<R: Rng + ?Sized>(bits: &mut BitMatrix, steps: u64, rng: &mut R) {
    let (m, n) = (bits.rows(), bits.cols());
    for _ in 0..steps {
        let i1 = rng.random_range(0..m);
        let i2 = rng.random_range(0..m);
        let j1 = rng.random_range(0..n);
        let j2 = rng.random_range(0..n);
        let a = bits.get(i1, j1);
        if a == bits.get(i1, j2) || a == bits.get(i2, j1) || a != bits.get(i2, j2) {
            continue;
        }
        // Minor is [[a, !a], [!a, a]]: exchange I and J.
        bits.flip(i1, j1);
        bits.flip(i1, j2);
        bits.flip(i2, j1);
        bits.flip(i2, j2);
    }
}

/// `d` permutations of `[n]`; the multigraph adjacency matrix is the sum of
/// their permutation matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationTuple {
    n: usize,
    perms: Vec<Vec<usize>>,
}

impl PermutationTuple {
    pub fn new(n: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        for (k, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(Error::invalid(format!("permutation {k} has length {}, expected {n}", p.len())));
            }
            let mut seen = vec![false; n];
            for &x in p {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::invalid(format!("permutation {k} is not a bijection")));
                }
            }
        }
        Ok(Self { n, perms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.perms.len()
    }

    pub fn perm(&self, k: usize) -> &[usize] {
        &self.perms[k]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// Entry `(i, j)` counts the permutations with `π_k(i) = j`.
    pub fn multiplicity(&self) -> Vec<Vec<u32>> {
        let mut mult = vec![vec![0u32; self.n]; self.n];
        for p in &self.perms {
            for (i, &j) in p.iter().enumerate() {
                mult[i][j] += 1;
            }
        }
        mult
    }

    /// `e_σ(A,B) = |{i ∈ A : σ(i) ∈ B}|` for permutation `k`.
    pub fn edge_count_of(&self, k: usize, sets: &VertexSetPair) -> usize {
        sets.rows.iter().filter(|&i| sets.cols.contains(self.perms[k][i])).count()
    }

    /// `e_π(A,B)`, counting multiplicity.
    pub fn edge_count(&self, sets: &VertexSetPair) -> usize {
        (0..self.d()).map(|k| self.edge_count_of(k, sets)).sum()
    }

    /// `(π_1 ∘ τ, …)` with `τ` transposing `i1, i2` in permutation `k`:
    /// the images of `i1` and `i2` are exchanged.
    pub fn with_transposed_inputs(&self, k: usize, i1: usize, i2: usize) -> Self {
        let mut out = self.clone();
        out.perms[k].swap(i1, i2);
        out
    }
}

pub fn sample_permutation_model<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> PermutationTuple {
    let perms = (0..d)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    PermutationTuple { n, perms }
}

/// Erdős–Rényi digraph: `n²` independent Bernoulli(`p`) entries.
pub fn sample_er<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<BitMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    Ok(BitMatrix::from_fn(n, n, |_, _| rng.random_bool(p)))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All matrices of a class, lexicographic in the packed rows (row 0 most
/// significant, column `j` as bit `j`).
///
/// Guarded by the naive search-space estimate `C(n, d)^m ≤ cap`.
pub fn enumerate_all(shape: Shape, cap: f64) -> Result<Enumerator> {
    if shape.n > 64 {
        return Err(Error::SearchSpaceTooLarge { estimate: f64::INFINITY, cap });
    }
    let estimate = binomial(shape.n, shape.d).powi(shape.m as i32);
    if estimate > cap {
        return Err(Error::SearchSpaceTooLarge { estimate, cap });
    }
    let mut subsets: Vec<u64> = (0u64..(1u64 << shape.n)).filter(|s| s.count_ones() as usize == shape.d).collect();
    subsets.sort_unstable();
    Ok(Enumerator {
        shape,
        subsets,
        choice: vec![0; shape.m],
        col_count: vec![0; shape.n],
        state: EnumState::Fresh,
    })
}

/// Convenience: collect a whole class.
pub fn enumerate_class(shape: Shape) -> Result<Vec<BiregularBitMatrix>> {
    Ok(enumerate_all(shape, DEFAULT_ENUMERATION_CAP)?.collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EnumState {
    Fresh,
    Running,
    Done,
}

/// Depth-first enumeration over rows with column-capacity pruning.
pub struct Enumerator {
    shape: Shape,
    subsets: Vec<u64>,
    choice: Vec<usize>,
    col_count: Vec<usize>,
    state: EnumState,
}

impl Enumerator {
    fn apply(&mut self, subset: u64, delta: isize) {
        let mut s = subset;
        while s != 0 {
            let j = s.trailing_zeros() as usize;
            self.col_count[j] = (self.col_count[j] as isize + delta) as usize;
            s &= s - 1;
        }
    }

    /// Can `subset` be row `r` without any column overflowing now or being
    /// unable to reach `dp` with the rows that remain?
    fn fits(&self, r: usize, subset: u64) -> bool {
        let remaining_after = self.shape.m - r - 1;
        (0..self.shape.n).all(|j| {
            let c = self.col_count[j] + ((subset >> j) & 1) as usize;
            c <= self.shape.dp && c + remaining_after >= self.shape.dp
        })
    }

    fn emit(&self) -> BiregularBitMatrix {
        let mut bits = BitMatrix::zeros(self.shape.m, self.shape.n);
        for (i, &c) in self.choice.iter().enumerate() {
            let s = self.subsets[c];
            for j in 0..self.shape.n {
                if (s >> j) & 1 == 1 {
                    bits.set(i, j, true);
                }
            }
        }
        BiregularBitMatrix::new_unchecked(bits, self.shape.d, self.shape.dp)
    }
}

impl Iterator for Enumerator {
    type Item = BiregularBitMatrix;

    fn next(&mut self) -> Option<BiregularBitMatrix> {
        let m = self.shape.m;
        let (mut r, mut start) = match self.state {
            EnumState::Done => return None,
            EnumState::Fresh => {
                self.state = EnumState::Running;
                (0, 0)
            }
            EnumState::Running => {
                let r = m - 1;
                self.apply(self.subsets[self.choice[r]], -1);
                (r, self.choice[r] + 1)
            }
        };
        loop {
            let found = (start..self.subsets.len()).find(|&k| self.fits(r, self.subsets[k]));
            match found {
                Some(k) => {
                    self.choice[r] = k;
                    self.apply(self.subsets[k], 1);
                    if r + 1 == m {
                        return Some(self.emit());
                    }
                    r += 1;
                    start = 0;
                }
                None => {
                    if r == 0 {
                        self.state = EnumState::Done;
                        return None;
                    }
                    r -= 1;
                    self.apply(self.subsets[self.choice[r]], -1);
                    start = self.choice[r] + 1;
                }
            }
        }
    }
}
