//! Closed-form tail bounds and the deterministic pseudorandomness check.
//!
//! Constants: `c1 = 64`, `c2 = 8` in the edge-count bounds are the values the
//! paper states may be taken. The absolute constants `c` and `big_c` of the
//! uniform codegree bounds and the Bernstein baselines are never pinned down
//! by the paper; their defaults (`1/64` and `1`) are placeholders and every
//! report labels them as chosen.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{le_scaled, ratio_from_f64};
use crate::graph::{BiregularBitMatrix, VertexSet, VertexSetPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    CodegreeUpper,
    CodegreeUniform,
    EdgeUpper,
    EdgeLower,
    EdgeTwosided,
    PermEdge,
    ErCodegree,
    ErEdge,
    BipartiteCodegreeUniform,
    BipartiteEdge,
}

impl Theorem {
    pub const ALL: [Theorem; 10] = [
        Theorem::CodegreeUpper,
        Theorem::CodegreeUniform,
        Theorem::EdgeUpper,
        Theorem::EdgeLower,
        Theorem::EdgeTwosided,
        Theorem::PermEdge,
        Theorem::ErCodegree,
        Theorem::ErEdge,
        Theorem::BipartiteCodegreeUniform,
        Theorem::BipartiteEdge,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::CodegreeUpper => "codegree_upper",
            Theorem::CodegreeUniform => "codegree_uniform",
            Theorem::EdgeUpper => "edge_upper",
            Theorem::EdgeLower => "edge_lower",
            Theorem::EdgeTwosided => "edge_twosided",
            Theorem::PermEdge => "perm_edge",
            Theorem::ErCodegree => "er_codegree",
            Theorem::ErEdge => "er_edge",
            Theorem::BipartiteCodegreeUniform => "bipartite_codegree_uniform",
            Theorem::BipartiteEdge => "bipartite_edge",
        }
    }

    /// Name of the deviation parameter.
    pub fn deviation_name(&self) -> &'static str {
        match self {
            Theorem::CodegreeUpper | Theorem::CodegreeUniform | Theorem::ErCodegree | Theorem::ErEdge => "eps",
            Theorem::BipartiteCodegreeUniform => "eta",
            _ => "tau",
        }
    }

    fn uses_edge_constants(&self) -> bool {
        matches!(self, Theorem::EdgeUpper | Theorem::EdgeLower | Theorem::EdgeTwosided | Theorem::BipartiteEdge)
    }

    fn uses_absolute_constants(&self) -> bool {
        matches!(
            self,
            Theorem::CodegreeUniform | Theorem::ErCodegree | Theorem::ErEdge | Theorem::BipartiteCodegreeUniform
        )
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown theorem `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    pub big_c: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c1: 64.0, c2: 8.0, c: 1.0 / 64.0, big_c: 1.0 }
    }
}

/// A bound to evaluate. Size parameters are optional so that vacuous
/// evaluations (deviation 0) need none; `mu` overrides the value derived
/// from `(d, a, b)` for the edge bounds (it is taken as `μ̂` for the regular
/// bounds and `μ` for the permutation bound).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBoundSpec {
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// The theorem's deviation parameter (`ε`, `τ` or `η`).
    pub deviation: f64,
    /// Good-event tolerance for the edge bounds' side conditions.
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub constants: Constants,
}

impl TailBoundSpec {
    pub fn new(theorem: Theorem, deviation: f64) -> Self {
        Self { theorem, m: None, n: None, d: None, p: None, a: None, b: None, mu: None, deviation, eta: 0.0, constants: Constants::default() }
    }

    pub fn square(theorem: Theorem, n: usize, d: usize, deviation: f64) -> Self {
        Self { n: Some(n), d: Some(d), ..Self::new(theorem, deviation) }
    }

    pub fn with_sets(mut self, a: usize, b: usize) -> Self {
        self.a = Some(a);
        self.b = Some(b);
        self
    }

    fn need<T: Copy>(v: Option<T>, name: &str, th: Theorem) -> Result<T> {
        v.ok_or_else(|| Error::invalid(format!("{} needs `{name}`", th.as_str())))
    }

    fn n(&self) -> Result<usize> {
        Self::need(self.n, "n", self.theorem)
    }

    fn d(&self) -> Result<usize> {
        let d = Self::need(self.d, "d", self.theorem)?;
        if d > self.n()? {
            return Err(Error::invalid(format!("d = {d} exceeds n")));
        }
        Ok(d)
    }

    fn d_hat(&self) -> Result<f64> {
        let (n, d) = (self.n()?, self.d()?);
        Ok(d.min(n - d) as f64)
    }

    fn density(&self) -> Result<f64> {
        match (self.p, self.d) {
            (Some(p), _) => Ok(p),
            (None, Some(d)) => Ok(d as f64 / self.n()? as f64),
            (None, None) => Err(Error::invalid(format!("{} needs `p` or `d`", self.theorem.as_str()))),
        }
    }

    fn rows(&self) -> Result<usize> {
        match (self.theorem, self.m) {
            (Theorem::BipartiteCodegreeUniform | Theorem::BipartiteEdge, None) => Self::need(self.m, "m", self.theorem),
            (_, m) => Ok(m.unwrap_or(self.n()?)),
        }
    }

    /// `μ̂ = p·min(ab, (m−a)(n−b))`, or the override.
    fn mu_hat(&self) -> Result<f64> {
        if let Some(mu) = self.mu {
            return Ok(mu);
        }
        let (m, n, d) = (self.rows()?, self.n()?, self.d()?);
        let a = Self::need(self.a, "a", self.theorem)?;
        let b = Self::need(self.b, "b", self.theorem)?;
        if a > m || b > n {
            return Err(Error::invalid("set sizes exceed the matrix dimensions"));
        }
        Ok(d as f64 * (a * b).min((m - a) * (n - b)) as f64 / n as f64)
    }

    fn mu(&self) -> Result<f64> {
        if let Some(mu) = self.mu {
            return Ok(mu);
        }
        let a = Self::need(self.a, "a", self.theorem)?;
        let b = Self::need(self.b, "b", self.theorem)?;
        Ok(self.density()? * a as f64 * b as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub value: f64,
    /// Side conditions of the theorem hold for the given parameters.
    pub valid: bool,
    pub side_condition: &'static str,
    pub constants: Constants,
    pub paper_fixed_constants: Vec<&'static str>,
    pub chosen_constants: Vec<&'static str>,
}

/// Evaluate the displayed bound.
pub fn eval_bound(spec: &TailBoundSpec) -> Result<BoundReport> {
    let x = spec.deviation;
    if x.is_nan() || x < 0.0 {
        return Err(Error::invalid(format!("deviation parameter must be non-negative, got {x}")));
    }
    if spec.eta.is_nan() || spec.eta < 0.0 {
        return Err(Error::invalid("eta must be non-negative"));
    }
    let k = spec.constants;
    let th = spec.theorem;
    let (value, valid, side_condition) = match th {
        Theorem::CodegreeUpper => {
            let (n, p_hat) = (spec.n()? as f64, spec.d_hat()? / spec.n()? as f64);
            ((-(x * x) / (4.0 + 2.0 * x) * p_hat * p_hat * n).exp(), true, "none")
        }
        Theorem::CodegreeUniform => {
            let (n, d_hat) = (spec.n()? as f64, spec.d_hat()?);
            let first = if x >= 1.0 { 0.0 } else { k.big_c * n * n * d_hat * d_hat * (-k.c * x * d_hat).exp() };
            let second = k.big_c * n * n * (-k.c * x * x / (1.0 + x) * d_hat * d_hat / n).exp();
            (first + second, true, "none (first term dropped for eps >= 1)")
        }
        Theorem::EdgeUpper | Theorem::EdgeTwosided | Theorem::BipartiteEdge => {
            let valid = spec.eta <= (0.25f64).min(x / 8.0);
            let factor = if th == Theorem::EdgeUpper { 1.0 } else { 2.0 };
            let value = if x == 0.0 { factor } else { factor * (-(x * x) * spec.mu_hat()? / (k.c1 + k.c2 * x)).exp() };
            (value, valid, "eta <= min(1/4, tau/8)")
        }
        Theorem::EdgeLower => {
            let value = if x == 0.0 { 1.0 } else { (-(x * x) * spec.mu_hat()? / k.c1).exp() };
            (value, spec.eta <= x / 4.0, "eta <= tau/4")
        }
        Theorem::PermEdge => {
            let value = if x == 0.0 { 2.0 } else { 2.0 * (-(x * x) * spec.mu()? / (2.0 + x)).exp() };
            (value, true, "none")
        }
        Theorem::ErCodegree => {
            let (n, p) = (spec.n()? as f64, spec.density()?);
            (2.0 * (-k.c * x * x / (1.0 + x) * p * p * n).exp(), true, "none")
        }
        Theorem::ErEdge => {
            let value = if x == 0.0 { 2.0 } else { 2.0 * (-k.c * x * x / (1.0 + x) * spec.mu()?).exp() };
            (value, true, "none")
        }
        Theorem::BipartiteCodegreeUniform => {
            let (m, n, d_hat) = (spec.rows()? as f64, spec.n()? as f64, spec.d_hat()?);
            let first = k.big_c * m * m * d_hat * d_hat * (-k.c * x * n * n / m).exp();
            let second = k.big_c * m * m * (-k.c * x * d_hat.min(x * n)).exp();
            (first + second, true, "none")
        }
    };
    let mut paper_fixed = Vec::new();
    let mut chosen = Vec::new();
    if th.uses_edge_constants() {
        let default = Constants::default();
        for (name, v, dv) in [("c1", k.c1, default.c1), ("c2", k.c2, default.c2)] {
            if v == dv { paper_fixed.push(name) } else { chosen.push(name) }
        }
    }
    if th.uses_absolute_constants() {
        chosen.push("c");
        if th != Theorem::ErCodegree && th != Theorem::ErEdge {
            chosen.push("big_c");
        }
    }
    Ok(BoundReport {
        theorem: th,
        value,
        valid,
        side_condition,
        constants: k,
        paper_fixed_constants: paper_fixed,
        chosen_constants: chosen,
    })
}

/// The edge upper bound obtained directly from the exchangeable-pair
/// evaluator with `K1 = 2n²d̂²μ`, `K2 = n·d̂`, `t = ½τ·p(1−p)n²μ`.
pub fn edge_upper_via_exchangeable_pair(n: usize, d: usize, a: usize, b: usize, tau: f64) -> Result<f64> {
    let (nf, df) = (n as f64, d as f64);
    let d_hat = d.min(n - d) as f64;
    let p = df / nf;
    let mu = df * a as f64 * b as f64 / nf;
    let t = 0.5 * tau * p * (1.0 - p) * nf * nf * mu;
    Ok(crate::chatterjee::chatterjee_tail(2.0 * nf * nf * d_hat * d_hat * mu, nf * d_hat, t)?.0)
}

// ------------------------------------------------------------ Lemma checker

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseudorandomReport {
    pub eps: f64,
    /// Every out- and in-codegree is at most `(1+ε)p²n`.
    pub hypothesis_holds: bool,
    /// Largest `n·co` over both directions, with `d²` for comparison.
    pub max_co_scaled: i64,
    pub d_squared: i64,
    pub pairs_checked: u64,
    pub violations: u64,
    /// Largest `lhs / rhs` of the squared conclusion over checked pairs.
    pub worst_ratio: f64,
}

/// Maximum `n` for which every `(A, B)` is enumerated.
pub const PSEUDORANDOM_ENUMERATION_CAP: usize = 10;

fn max_codegree_both(m: &BiregularBitMatrix) -> i64 {
    let n = m.n() as i64;
    let t = m.bits().transpose();
    let mut best = 0i64;
    for bits in [m.bits(), &t] {
        for i1 in 0..bits.rows() {
            for i2 in (i1 + 1)..bits.rows() {
                best = best.max(n * bits.and_count(i1, i2) as i64);
            }
        }
    }
    best
}

/// For one pair, `(qualifies, holds, lhs/rhs)` of the squared conclusion
/// `(n·e − d·a·b)²·max(a,b) ≤ 2ε·n·(d·a·b)²` with size condition
/// `ε·d·a ≥ n`, `ε·d·b ≥ n`.
fn lemma_conclusion(m: &BiregularBitMatrix, sets: &VertexSetPair, eps: f64) -> (bool, bool, f64) {
    let (n, d) = (m.n() as i128, m.d() as i128);
    let (a, b) = (sets.a() as i128, sets.b() as i128);
    let r = ratio_from_f64(eps);
    if !(le_scaled(n, r, d * a) && le_scaled(n, r, d * b)) {
        return (false, true, 0.0);
    }
    let e = crate::graph::edge_count(m, sets) as i128;
    let dev = n * e - d * a * b;
    let lhs = dev * dev * a.max(b);
    let rhs = n * (d * a * b) * (d * a * b);
    let holds = le_scaled(lhs, r * 2, rhs);
    let ratio = if rhs == 0 { 0.0 } else { lhs as f64 / (2.0 * eps * rhs as f64) };
    (true, holds, ratio)
}

/// Check the codegree hypothesis and, when it holds, the discrepancy
/// conclusion on every qualifying `(A, B)` (all pairs for small `n`, or the
/// supplied family).
pub fn check_pseudorandom_implication(
    m: &BiregularBitMatrix,
    eps: f64,
    family: Option<&[VertexSetPair]>,
) -> Result<PseudorandomReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if !m.is_square() {
        return Err(Error::invalid("the pseudorandomness check is for square matrices"));
    }
    let (n, d) = (m.n(), m.d() as i64);
    let max_co = max_codegree_both(m);
    let hypothesis_holds = le_scaled(max_co as i128, ratio_from_f64(1.0 + eps), (d * d) as i128);
    let mut report = PseudorandomReport {
        eps,
        hypothesis_holds,
        max_co_scaled: max_co,
        d_squared: d * d,
        pairs_checked: 0,
        violations: 0,
        worst_ratio: 0.0,
    };
    if !hypothesis_holds {
        return Ok(report);
    }
    let mut visit = |sets: &VertexSetPair| {
        let (qualifies, holds, ratio) = lemma_conclusion(m, sets, eps);
        if qualifies {
            report.pairs_checked += 1;
            report.violations += (!holds) as u64;
            report.worst_ratio = report.worst_ratio.max(ratio);
        }
    };
    match family {
        Some(f) => f.iter().for_each(visit),
        None => {
            if n > PSEUDORANDOM_ENUMERATION_CAP {
                let estimate = 4f64.powi(n as i32);
                return Err(Error::SearchSpaceTooLarge { estimate, cap: 4f64.powi(PSEUDORANDOM_ENUMERATION_CAP as i32) });
            }
            for am in 1u64..(1 << n) {
                for bm in 1u64..(1 << n) {
                    visit(&VertexSetPair::new(VertexSet::from_mask(n, am), VertexSet::from_mask(n, bm)));
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------- corollary report

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub eps: f64,
    pub c0: f64,
    /// Minimum set size `C0·log n / (ε²p)`.
    pub threshold: f64,
    pub pairs_checked: u64,
    /// Pairs with `disc > ε·μ̂`.
    pub violations: u64,
    pub max_normalized: f64,
    pub exhaustive: bool,
}

/// Discrepancy against `ε·μ̂` over pairs with `|A|, |B| ≥ C0·log n/(ε²p)`:
/// all pairs when `n` is small, otherwise `samples` random pairs with
/// uniformly chosen qualifying sizes.
pub fn corollary_good_event<R: Rng + ?Sized>(
    m: &BiregularBitMatrix,
    eps: f64,
    c0: f64,
    samples: u64,
    rng: &mut R,
) -> Result<CorollaryReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let (rows, n) = (m.m(), m.n());
    let threshold = c0 * (n as f64).ln() / (eps * eps * m.p());
    let mut report = CorollaryReport { eps, c0, threshold, pairs_checked: 0, violations: 0, max_normalized: 0.0, exhaustive: false };
    let min_size = threshold.ceil().max(1.0);
    if min_size > rows.min(n) as f64 {
        report.exhaustive = true;
        return Ok(report);
    }
    let min_size = min_size as usize;
    let r = ratio_from_f64(eps);
    let mut visit = |sets: &VertexSetPair| {
        if sets.a() < min_size || sets.b() < min_size {
            return;
        }
        let disc = crate::graph::discrepancy(m, sets);
        report.pairs_checked += 1;
        if !le_scaled(disc.deviation_scaled.abs() as i128, r, disc.mu_hat_scaled as i128) {
            report.violations += 1;
        }
        if let Ok(x) = disc.normalized() {
            report.max_normalized = report.max_normalized.max(x);
        }
    };
    if rows <= PSEUDORANDOM_ENUMERATION_CAP && n <= PSEUDORANDOM_ENUMERATION_CAP {
        report.exhaustive = true;
        for am in 1u64..(1 << rows) {
            for bm in 1u64..(1 << n) {
                visit(&VertexSetPair::new(VertexSet::from_mask(rows, am), VertexSet::from_mask(n, bm)));
            }
        }
    } else {
        for _ in 0..samples {
            let a = rng.random_range(min_size..=rows);
            let b = rng.random_range(min_size..=n);
            let pick = |universe: usize, k: usize, rng: &mut R| {
                let idx = rand::seq::index::sample(rng, universe, k);
                VertexSet::from_indices(universe, idx.into_iter()).expect("indices in range")
            };
            let sets = VertexSetPair::new(pick(rows, a, rng), pick(n, b, rng));
            visit(&sets);
        }
    }
    Ok(report)
}
