//! Monte Carlo tail harness, the Catalan walk ratio and sampler uniformity
//! tests.
//!
//! Samples are split into fixed-size shards; shard `s` draws from stream
//! `shard_stream(sampler.stream, s)` of the configured seed, and counters are
//! merged by summation, so results do not depend on the worker count.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

use crate::bounds::{eval_bound, Constants, TailBoundSpec, Theorem};
use crate::chatterjee::good_event_co;
use crate::error::{Error, Result};
use crate::exact::{ratio_from_f64, Rational};
use crate::graph::{BitMatrix, SetPairSpec, VertexSetPair};
use crate::rng::{shard_stream, stream_rng};
use crate::samplers::{enumerate_class, Sample, SamplerKind, SamplerSpec, Shape};

pub const DEFAULT_SHARD_SIZE: u64 = 500;
/// Confidence level of the reported intervals.
pub const CONFIDENCE: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Codegree,
    CodegreeUniform,
    EdgeCount,
    PermEdgeCount,
    ErCodegree,
    ErEdge,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Upper,
    Lower,
    #[default]
    TwoSided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sampler: SamplerSpec,
    pub statistic: Statistic,
    /// Row pair for the single-pair codegree statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    /// Vertex sets for the edge statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<SetPairSpec>,
    /// Edge-count tail direction.
    #[serde(default)]
    pub tail: Tail,
    /// Deviation grid (`ε`, `τ` or `η` depending on the statistic).
    pub grid: Vec<f64>,
    #[serde(rename = "N")]
    pub samples: u64,
    /// Restrict edge-count events to `𝒢^co(η)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_event_eta: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shard_size: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(sampler: SamplerSpec, statistic: Statistic, grid: Vec<f64>, samples: u64, seed: u64) -> Self {
        Self {
            sampler,
            statistic,
            pair: None,
            sets: None,
            tail: Tail::default(),
            grid,
            samples,
            good_event_eta: None,
            seed,
            constants: Constants::default(),
            shard_size: None,
        }
    }

    pub fn with_sets(mut self, a: usize, b: usize) -> Self {
        self.sets = Some(SetPairSpec::sizes(a, b));
        self
    }

    /// Copy with every default filled in.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        c.sampler = self.sampler.resolved()?;
        c.sampler.seed = self.seed;
        c.shard_size = Some(self.shard_size.unwrap_or(DEFAULT_SHARD_SIZE));
        if matches!(c.statistic, Statistic::Codegree | Statistic::ErCodegree) && c.pair.is_none() {
            c.pair = Some((0, 1));
        }
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if self.grid.is_empty() || self.grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("grid values must be finite and non-negative"));
        }
        if self.shard_size == Some(0) {
            return Err(Error::invalid("shard_size must be positive"));
        }
        if let Some(eta) = self.good_event_eta {
            if self.statistic != Statistic::EdgeCount {
                return Err(Error::invalid("good_event_eta applies only to edge_count"));
            }
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(Error::invalid("good_event_eta must be non-negative"));
            }
        }
        let kind = self.sampler.kind;
        let ok = match self.statistic {
            Statistic::Codegree | Statistic::CodegreeUniform | Statistic::EdgeCount => {
                matches!(kind, SamplerKind::Rejection | SamplerKind::SwitchMcmc)
            }
            Statistic::PermEdgeCount => kind == SamplerKind::PermutationModel,
            Statistic::ErCodegree | Statistic::ErEdge => kind == SamplerKind::ErdosRenyi,
        };
        if !ok {
            return Err(Error::invalid(format!(
                "statistic {:?} is incompatible with sampler {}",
                self.statistic,
                kind.as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub grid_value: f64,
    pub hits: u64,
    pub empirical: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: f64,
    pub valid: bool,
    pub verdict: Verdict,
}

impl TailPoint {
    /// A valid point whose whole confidence interval lies above the bound.
    pub fn is_defect(&self) -> bool {
        self.valid && self.verdict == Verdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailExperimentResult {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub sampler_kind: SamplerKind,
    pub theorem: Theorem,
    pub samples: u64,
    /// Samples on which `𝒢^co(η)` held, when the joint form is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub good_event_hits: Option<u64>,
    pub points: Vec<TailPoint>,
    pub wall_time_s: f64,
}

impl TailExperimentResult {
    pub fn defects(&self) -> usize {
        self.points.iter().filter(|p| p.is_defect()).count()
    }

    pub fn csv_header() -> &'static str {
        "grid_value,empirical,ci_lo,ci_hi,bound,valid,verdict"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.grid_value,
                p.empirical,
                p.ci_lo,
                p.ci_hi,
                p.bound,
                p.valid,
                p.verdict.as_str()
            ));
        }
        out
    }

    /// Sidecar metadata: everything except the per-point rows.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": self.schema_version,
            "config": self.config,
            "sampler_kind": self.sampler_kind,
            "theorem": self.theorem,
            "samples": self.samples,
            "good_event_hits": self.good_event_hits,
            "defects": self.defects(),
            "wall_time_s": self.wall_time_s,
        })
    }
}

/// Exact two-sided Clopper–Pearson interval at [`CONFIDENCE`].
pub fn clopper_pearson(hits: u64, n: u64) -> (f64, f64) {
    assert!(n > 0 && hits <= n);
    let alpha = 1.0 - CONFIDENCE;
    let (k, nf) = (hits as f64, n as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(k, nf - k + 1.0).expect("beta parameters").inverse_cdf(alpha / 2.0)
    };
    let hi = if hits == n {
        1.0
    } else {
        Beta::new(k + 1.0, nf - k).expect("beta parameters").inverse_cdf(1.0 - alpha / 2.0)
    };
    let p = k / nf;
    (lo.min(p), hi.max(p))
}

fn verdict(ci_lo: f64, ci_hi: f64, bound: f64) -> Verdict {
    if ci_hi <= bound {
        Verdict::Pass
    } else if ci_lo <= bound {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    }
}

/// One sample's deviation against the grid: the event at `x` is
/// `x·unit ≤ dev`.
enum Observation {
    Exact { dev: i128, unit: i128 },
    Float { dev: f64, unit: f64 },
}

impl Observation {
    fn event(&self, x: &Rational, xf: f64) -> bool {
        match self {
            Observation::Exact { dev, unit } => x.numer() * unit <= x.denom() * dev,
            Observation::Float { dev, unit } => xf * unit <= *dev,
        }
    }
}

fn directed(dev: i128, tail: Tail) -> i128 {
    match tail {
        Tail::Upper => dev,
        Tail::Lower => -dev,
        Tail::TwoSided => dev.abs(),
    }
}

struct Plan {
    statistic: Statistic,
    tail: Tail,
    pair: (usize, usize),
    sets: Option<VertexSetPair>,
    eta: Option<f64>,
    er_p: f64,
}

impl Plan {
    /// `(observation, good event held)`.
    fn observe(&self, sample: Sample) -> (Observation, bool) {
        match (self.statistic, sample) {
            (Statistic::Codegree, Sample::Matrix(m)) => {
                let (n, d, dh) = (m.n() as i128, m.d() as i128, m.d_hat() as i128);
                let co = m.bits().and_count(self.pair.0, self.pair.1) as i128;
                (Observation::Exact { dev: n * co - d * d, unit: dh * dh }, true)
            }
            (Statistic::CodegreeUniform, Sample::Matrix(m)) => {
                let dh = m.d_hat() as i128;
                let dev = crate::graph::max_codegree_deviation(&m).map_or(0, |(x, _)| x as i128);
                (Observation::Exact { dev, unit: dh * dh }, true)
            }
            (Statistic::EdgeCount, Sample::Matrix(m)) => {
                let sets = self.sets.as_ref().expect("sets resolved");
                let disc = crate::graph::discrepancy(&m, sets);
                let good = self.eta.is_none_or(|eta| good_event_co(&m, eta).holds);
                let obs = Observation::Exact {
                    dev: directed(disc.deviation_scaled as i128, self.tail),
                    unit: disc.mu_hat_scaled as i128,
                };
                (obs, good)
            }
            (Statistic::PermEdgeCount, Sample::Permutations(pi)) => {
                let sets = self.sets.as_ref().expect("sets resolved");
                let (n, d) = (pi.n() as i128, pi.d() as i128);
                let mu = d * sets.a() as i128 * sets.b() as i128;
                let dev = n * pi.edge_count(sets) as i128 - mu;
                (Observation::Exact { dev: dev.abs(), unit: mu }, true)
            }
            (Statistic::ErCodegree, Sample::Plain(bits)) => {
                let (n, p) = (bits.cols() as f64, self.er_p);
                let co = bits.and_count(self.pair.0, self.pair.1) as f64;
                (Observation::Float { dev: (co - p * p * n).abs(), unit: p * p * n }, true)
            }
            (Statistic::ErEdge, Sample::Plain(bits)) => {
                let sets = self.sets.as_ref().expect("sets resolved");
                let p = self.er_p;
                let e = crate::graph::edge_count_bits(&bits, sets) as f64;
                let mu = p * sets.a() as f64 * sets.b() as f64;
                (Observation::Float { dev: (e - mu).abs(), unit: mu }, true)
            }
            _ => unreachable!("sampler/statistic compatibility is validated"),
        }
    }
}

fn bound_spec(cfg: &ExperimentConfig, x: f64) -> Result<(TailBoundSpec, bool)> {
    let s = &cfg.sampler;
    let shape = match s.kind {
        SamplerKind::ErdosRenyi | SamplerKind::PermutationModel => None,
        _ => Some(s.shape()?),
    };
    let sizes = match &cfg.sets {
        Some(sp) => {
            let m = shape.map_or(s.n, |sh| sh.m);
            let sets = sp.resolve(m, s.n)?;
            (Some(sets.a()), Some(sets.b()))
        }
        None => (None, None),
    };
    let bipartite = shape.is_some_and(|sh| sh.m != sh.n);
    let theorem = match cfg.statistic {
        Statistic::Codegree => Theorem::CodegreeUpper,
        Statistic::CodegreeUniform => Theorem::CodegreeUniform,
        Statistic::EdgeCount => match cfg.tail {
            Tail::Upper => Theorem::EdgeUpper,
            Tail::Lower => Theorem::EdgeLower,
            Tail::TwoSided if bipartite => Theorem::BipartiteEdge,
            Tail::TwoSided => Theorem::EdgeTwosided,
        },
        Statistic::PermEdgeCount => Theorem::PermEdge,
        Statistic::ErCodegree => Theorem::ErCodegree,
        Statistic::ErEdge => Theorem::ErEdge,
    };
    let mut spec = TailBoundSpec::new(theorem, x);
    spec.n = Some(s.n);
    spec.m = shape.map(|sh| sh.m);
    spec.d = s.d;
    spec.p = s.p;
    spec.a = sizes.0;
    spec.b = sizes.1;
    spec.eta = cfg.good_event_eta.unwrap_or(0.0);
    spec.constants = cfg.constants;
    // The edge-count bounds control the joint event only.
    let joint_required = cfg.statistic == Statistic::EdgeCount;
    Ok((spec, joint_required && cfg.good_event_eta.is_none()))
}

/// Estimate the tail at every grid point and compare with the bound.
pub fn run_tail_experiment(cfg: &ExperimentConfig) -> Result<TailExperimentResult> {
    let start = Instant::now();
    cfg.validate()?;
    let cfg = cfg.resolved()?;
    let shard_size = cfg.shard_size.unwrap_or(DEFAULT_SHARD_SIZE);
    let sampler = &cfg.sampler;

    let mut bounds = Vec::with_capacity(cfg.grid.len());
    let mut theorem = None;
    for &x in &cfg.grid {
        let (spec, unrestricted) = bound_spec(&cfg, x)?;
        let report = eval_bound(&spec)?;
        theorem = Some(report.theorem);
        let valid = if unrestricted { report.value >= 1.0 } else { report.valid };
        bounds.push((report.value, valid));
    }

    let sets = match (&cfg.sets, cfg.statistic) {
        (Some(sp), _) => {
            let m = match sampler.kind {
                SamplerKind::Rejection | SamplerKind::SwitchMcmc => sampler.shape()?.m,
                _ => sampler.n,
            };
            Some(sp.resolve(m, sampler.n)?)
        }
        (None, Statistic::EdgeCount | Statistic::PermEdgeCount | Statistic::ErEdge) => {
            return Err(Error::invalid("edge statistics need `sets`"));
        }
        (None, _) => None,
    };
    let pair = cfg.pair.unwrap_or((0, 1));
    if matches!(cfg.statistic, Statistic::Codegree | Statistic::ErCodegree) {
        let rows = match sampler.kind {
            SamplerKind::ErdosRenyi => sampler.n,
            _ => sampler.shape()?.m,
        };
        if pair.0 == pair.1 || pair.0 >= rows || pair.1 >= rows {
            return Err(Error::invalid(format!("invalid row pair {pair:?}")));
        }
    }
    if matches!(cfg.statistic, Statistic::Codegree | Statistic::CodegreeUniform) && !sampler.shape()?.is_square() {
        return Err(Error::invalid("codegree statistics need a square class"));
    }
    let plan = Plan { statistic: cfg.statistic, tail: cfg.tail, pair, sets, eta: cfg.good_event_eta, er_p: sampler.p.unwrap_or(0.0) };
    let grid: Vec<(Rational, f64)> = cfg.grid.iter().map(|&x| (ratio_from_f64(x), x)).collect();

    let shards = cfg.samples.div_ceil(shard_size);
    let counts = (0..shards)
        .into_par_iter()
        .map(|shard| -> Result<(Vec<u64>, u64)> {
            let mut rng = stream_rng(cfg.seed, shard_stream(sampler.stream, shard));
            let len = shard_size.min(cfg.samples - shard * shard_size);
            let mut hits = vec![0u64; grid.len()];
            let mut good = 0u64;
            for _ in 0..len {
                let (obs, held) = plan.observe(sampler.draw(&mut rng)?);
                if !held {
                    continue;
                }
                good += 1;
                for (h, (x, xf)) in hits.iter_mut().zip(&grid) {
                    *h += obs.event(x, *xf) as u64;
                }
            }
            Ok((hits, good))
        })
        .try_reduce(
            || (vec![0u64; grid.len()], 0u64),
            |(mut a, ga), (b, gb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok((a, ga + gb))
            },
        )?;

    let (hits, good) = counts;
    let points = cfg
        .grid
        .iter()
        .zip(&hits)
        .zip(&bounds)
        .map(|((&x, &h), &(bound, valid))| {
            let (ci_lo, ci_hi) = clopper_pearson(h, cfg.samples);
            TailPoint {
                grid_value: x,
                hits: h,
                empirical: h as f64 / cfg.samples as f64,
                ci_lo,
                ci_hi,
                bound,
                valid,
                verdict: verdict(ci_lo, ci_hi, bound),
            }
        })
        .collect();
    Ok(TailExperimentResult {
        schema_version: crate::SCHEMA_VERSION,
        sampler_kind: sampler.kind,
        theorem: theorem.expect("grid is nonempty"),
        samples: cfg.samples,
        good_event_hits: cfg.good_event_eta.map(|_| good),
        config: cfg,
        points,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

// ------------------------------------------------------------ Catalan ratio

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalanCheck {
    pub r: usize,
    pub non_crossing: u64,
    pub orderings: u64,
    pub fraction_numer: i128,
    pub fraction_denom: i128,
}

impl CatalanCheck {
    pub fn fraction(&self) -> Rational {
        Rational::new(self.fraction_numer, self.fraction_denom)
    }
}

/// Over all orderings of `r−1` up and `r−1` down steps started at `0` (after
/// the initial `+1, −1`), the fraction that never reach `+1`.
pub fn catalan_walk_check(r: usize) -> Result<CatalanCheck> {
    if !(1..=10).contains(&r) {
        return Err(Error::invalid(format!("r must lie in 1..=10, got {r}")));
    }
    let k = r - 1;
    let len = 2 * k;
    let (mut total, mut good) = (0u64, 0u64);
    for mask in 0u32..(1u32 << len) {
        if mask.count_ones() as usize != k {
            continue;
        }
        total += 1;
        let mut pos = 0i32;
        let mut crossed = false;
        for s in 0..len {
            pos += if mask >> s & 1 == 1 { 1 } else { -1 };
            if pos >= 1 {
                crossed = true;
                break;
            }
        }
        good += (!crossed) as u64;
    }
    let f = Rational::new(good as i128, total as i128);
    Ok(CatalanCheck { r, non_crossing: good, orderings: total, fraction_numer: *f.numer(), fraction_denom: *f.denom() })
}

// --------------------------------------------------------------- uniformity

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformityReport {
    pub schema_version: u32,
    pub sampler: SamplerSpec,
    pub class_size: usize,
    pub samples: u64,
    pub tv_distance: f64,
    pub chi_sq_stat: f64,
    pub chi_sq_p: f64,
}

/// Empirical distribution of `samples` draws over the enumerated class
/// against uniform.
pub fn uniformity_test(sampler: &SamplerSpec, samples: u64) -> Result<UniformityReport> {
    if samples == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if !matches!(sampler.kind, SamplerKind::Rejection | SamplerKind::SwitchMcmc) {
        return Err(Error::invalid("uniformity_test needs a matrix sampler"));
    }
    let sampler = sampler.resolved()?;
    let shape: Shape = sampler.shape()?;
    let class = enumerate_class(shape)?;
    let index: HashMap<BitMatrix, usize> = class.iter().enumerate().map(|(i, m)| (m.bits().clone(), i)).collect();
    let k = class.len();
    let shards = samples.div_ceil(DEFAULT_SHARD_SIZE);
    let counts = (0..shards)
        .into_par_iter()
        .map(|shard| -> Result<Vec<u64>> {
            let mut rng = stream_rng(sampler.seed, shard_stream(sampler.stream, shard));
            let len = DEFAULT_SHARD_SIZE.min(samples - shard * DEFAULT_SHARD_SIZE);
            let mut c = vec![0u64; k];
            for _ in 0..len {
                let m = sampler.draw(&mut rng)?.into_matrix().expect("matrix sampler");
                let i = index.get(m.bits()).ok_or_else(|| Error::invalid("sample outside the enumerated class"))?;
                c[*i] += 1;
            }
            Ok(c)
        })
        .try_reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let (nf, kf) = (samples as f64, k as f64);
    let expected = nf / kf;
    let tv = 0.5 * counts.iter().map(|&c| (c as f64 / nf - 1.0 / kf).abs()).sum::<f64>();
    let chi = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
    let p = if k < 2 {
        1.0
    } else {
        1.0 - ChiSquared::new(kf - 1.0).expect("degrees of freedom").cdf(chi)
    };
    Ok(UniformityReport {
        schema_version: crate::SCHEMA_VERSION,
        sampler,
        class_size: k,
        samples,
        tv_distance: tv,
        chi_sq_stat: chi,
        chi_sq_p: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{column_walk, RowOrder};
    use rand::seq::SliceRandom;

    #[test]
    fn catalan_examples() {
        let one = catalan_walk_check(1).unwrap();
        assert_eq!((one.non_crossing, one.orderings), (1, 1));
        let three = catalan_walk_check(3).unwrap();
        assert_eq!((three.non_crossing, three.orderings), (2, 6));
        assert_eq!(three.fraction(), Rational::new(1, 3));
        let five = catalan_walk_check(5).unwrap();
        assert_eq!((five.non_crossing, five.orderings), (14, 70));
        assert!(catalan_walk_check(0).is_err() && catalan_walk_check(11).is_err());
    }

    #[test]
    fn bad_fraction_over_random_trailing_orders() {
        let mut rng = stream_rng(12, 0);
        let m = crate::samplers::sample_switch_mcmc(Shape::square(12, 6), 5000, &mut rng).unwrap();
        let bits = m.bits();
        let (j1, j2) = (0, 1);
        let plus: Vec<usize> = (0..12).filter(|&i| bits.get(i, j1) && !bits.get(i, j2)).collect();
        let minus: Vec<usize> = (0..12).filter(|&i| !bits.get(i, j1) && bits.get(i, j2)).collect();
        let r = plus.len();
        assert!(r >= 2, "pick another seed");
        let mut trailing: Vec<usize> = (0..12).filter(|&i| i != plus[0] && i != minus[0]).collect();
        let trials = 20_000;
        let mut bad = 0;
        for _ in 0..trials {
            trailing.shuffle(&mut rng);
            let order = RowOrder::with_trailing(plus[0], minus[0], &trailing).unwrap();
            let w = column_walk(&m, j1, j2, &order).unwrap();
            assert_eq!(w.r, r);
            bad += (!w.reflecting) as u32;
        }
        let frac = bad as f64 / trials as f64;
        assert!((frac - 1.0 / r as f64).abs() < 0.02, "{frac} vs 1/{r}");
    }

    #[test]
    fn clopper_pearson_contains_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 100), (50, 100)] {
            let (lo, hi) = clopper_pearson(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
        }
        let (lo, hi) = clopper_pearson(0, 20_000);
        assert_eq!(lo, 0.0);
        assert!((hi - 1.844e-4).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn tau_zero_is_vacuous_pass() {
        let cfg = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 8, 3), Statistic::EdgeCount, vec![0.0], 200, 1)
            .with_sets(3, 3);
        let r = run_tail_experiment(&cfg).unwrap();
        assert_eq!(r.points[0].bound, 2.0);
        assert!(r.points[0].valid);
        assert_eq!(r.points[0].verdict, Verdict::Pass);
        assert!(r.points[0].empirical >= 0.5);
    }

    #[test]
    fn deterministic_and_shard_independent_of_threads() {
        let cfg = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 12, 3), Statistic::Codegree, vec![0.5, 1.0], 1200, 9);
        let a = run_tail_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_tail_experiment(&cfg).unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn incompatible_configs_rejected() {
        let base = ExperimentConfig::new(SamplerSpec::erdos_renyi(10, 0.3), Statistic::Codegree, vec![1.0], 10, 0);
        assert!(run_tail_experiment(&base).is_err());
        let mut c = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 10, 3), Statistic::Codegree, vec![1.0], 10, 0);
        c.good_event_eta = Some(0.1);
        assert!(run_tail_experiment(&c).is_err());
        let e = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 10, 3), Statistic::EdgeCount, vec![1.0], 10, 0);
        assert!(run_tail_experiment(&e).is_err());
        let neg = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 10, 3), Statistic::Codegree, vec![-1.0], 10, 0);
        assert!(run_tail_experiment(&neg).is_err());
    }

    #[test]
    fn unrestricted_edge_tail_marked_invalid() {
        let mut cfg = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 10, 3), Statistic::EdgeCount, vec![0.0, 0.5], 100, 3)
            .with_sets(4, 4);
        cfg.tail = Tail::Upper;
        let r = run_tail_experiment(&cfg).unwrap();
        assert!(r.points[0].valid && !r.points[1].valid);
    }

    #[test]
    fn statistics_run_on_their_samplers() {
        let er = ExperimentConfig::new(SamplerSpec::erdos_renyi(20, 0.3), Statistic::ErEdge, vec![0.5], 300, 2).with_sets(10, 10);
        let r = run_tail_experiment(&er).unwrap();
        assert_eq!(r.theorem, Theorem::ErEdge);
        let pe = ExperimentConfig::new(SamplerSpec::new(SamplerKind::PermutationModel, 20, 2), Statistic::PermEdgeCount, vec![1.0], 300, 2)
            .with_sets(5, 5);
        assert_eq!(run_tail_experiment(&pe).unwrap().theorem, Theorem::PermEdge);
        let mut joint = ExperimentConfig::new(
            SamplerSpec::bipartite(SamplerKind::SwitchMcmc, 6, 9, 3, 2),
            Statistic::EdgeCount,
            vec![1.0],
            100,
            2,
        )
        .with_sets(3, 3);
        joint.good_event_eta = Some(0.1);
        let r = run_tail_experiment(&joint).unwrap();
        assert_eq!(r.theorem, Theorem::BipartiteEdge);
        assert!(r.good_event_hits.unwrap() <= 100);
    }

    #[test]
    fn small_uniformity() {
        let r = uniformity_test(&SamplerSpec::new(SamplerKind::Rejection, 3, 1).with_seed(5, 0), 6000).unwrap();
        assert_eq!(r.class_size, 6);
        assert!(r.tv_distance < 0.05 && r.chi_sq_p > 1e-4);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig::new(SamplerSpec::new(SamplerKind::Rejection, 60, 4), Statistic::Codegree, vec![0.5, 1.0, 2.0], 20_000, 7);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"N\":20000"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<ExperimentConfig>(&text.replace("\"seed\"", "\"sede\"")).is_err());
    }
}
