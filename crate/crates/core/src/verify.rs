//! Sampled verification suites for the coupling identities and
//! self-bounding inequalities.
//!
//! Instance `k` of a suite draws from stream `shard_stream(suite, k)` of the
//! configured seed, so reports are identical for any worker count.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chatterjee::{
    permutation_f, reflection_vf_exact, reflection_vf_mc, switching_f, switching_f2_bound, switching_vf_exact,
    switching_vf_mc, CouplingDiagnostics, REFLECTION_EXACT_CAP, SWITCHING_EXACT_CAP,
};
use crate::couplings::{reflect_in_place, RowOrder};
use crate::error::{Error, Result};
use crate::graph::{BiregularBitMatrix, VertexSet, VertexSetPair};
use crate::rng::{shard_stream, stream_rng, StreamRng};
use crate::samplers::{sample_permutation_model, SamplerKind, SamplerSpec, Shape};

/// Monte Carlo pair/site draws per instance beyond the exact caps.
pub const DEFAULT_MC_SAMPLES: u64 = 2_000;
/// Default `η` for the switching error-term check.
pub const DEFAULT_ETA: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Reflection,
    Switching,
    Permutation,
    All,
}

impl Suite {
    fn id(&self) -> u64 {
        match self {
            Suite::Reflection => 1,
            Suite::Switching => 2,
            Suite::Permutation => 3,
            Suite::All => 0,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflection" => Ok(Suite::Reflection),
            "switching" => Ok(Suite::Switching),
            "permutation" => Ok(Suite::Permutation),
            "all" => Ok(Suite::All),
            _ => Err(Error::invalid(format!("unknown suite `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp: Option<usize>,
    /// Matrix instances per suite.
    pub samples: u64,
    /// Reflection exact mode runs when `n` is at most this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<u64>,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    pub seed: u64,
}

fn default_sampler() -> SamplerKind {
    SamplerKind::SwitchMcmc
}

impl VerifyConfig {
    pub fn new(suite: Suite, n: usize, d: usize, samples: u64, seed: u64) -> Self {
        Self {
            suite,
            n,
            d,
            m: None,
            dp: None,
            samples,
            exact_cap: None,
            eta: None,
            mc_samples: None,
            sampler: default_sampler(),
            steps: None,
            seed,
        }
    }

    pub fn resolved(&self) -> Result<Self> {
        if self.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        if !matches!(self.sampler, SamplerKind::Rejection | SamplerKind::SwitchMcmc) {
            return Err(Error::invalid("verify draws matrices with `rejection` or `switch_mcmc`"));
        }
        let mut c = self.clone();
        let spec = self.sampler_spec();
        let shape = spec.shape()?;
        Shape::new(shape.m, shape.n, shape.d, shape.dp)?;
        if self.suite == Suite::Permutation || self.suite == Suite::All {
            if shape.m != shape.n {
                return Err(Error::invalid("the permutation suite is square only"));
            }
            if self.n < 2 {
                return Err(Error::invalid("the permutation suite needs n >= 2"));
            }
        }
        c.m = Some(shape.m);
        c.dp = Some(shape.dp);
        c.exact_cap = Some(self.exact_cap.unwrap_or(REFLECTION_EXACT_CAP));
        c.eta = Some(self.eta.unwrap_or(DEFAULT_ETA));
        c.mc_samples = Some(self.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES));
        if self.sampler == SamplerKind::SwitchMcmc {
            c.steps = Some(spec.steps_or_default());
        }
        Ok(c)
    }

    fn sampler_spec(&self) -> SamplerSpec {
        let mut s = SamplerSpec::new(self.sampler, self.n, self.d);
        s.m = self.m;
        s.dp = self.dp;
        s.steps = self.steps;
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// No instance met the check's precondition.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantRecord {
    pub invariant: &'static str,
    pub status: Status,
    pub checked: u64,
    pub violations: u64,
    /// Smallest `rhs − lhs` seen, for inequalities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub config: VerifyConfig,
    pub records: Vec<InvariantRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }
}

/// Running tally for one invariant.
#[derive(Clone, Debug)]
struct Tally {
    name: &'static str,
    checked: u64,
    violations: u64,
    margin: Option<f64>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, checked: 0, violations: 0, margin: None }
    }

    fn record(&mut self, ok: bool, margin: Option<f64>) {
        self.checked += 1;
        self.violations += (!ok) as u64;
        if let Some(x) = margin {
            self.margin = Some(self.margin.map_or(x, |m: f64| m.min(x)));
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.checked += other.checked;
        self.violations += other.violations;
        if let Some(x) = other.margin {
            self.margin = Some(self.margin.map_or(x, |m: f64| m.min(x)));
        }
    }

    fn finish(&self) -> InvariantRecord {
        let status = if self.violations > 0 {
            Status::Fail
        } else if self.checked == 0 {
            Status::Skipped
        } else {
            Status::Pass
        };
        InvariantRecord { invariant: self.name, status, checked: self.checked, violations: self.violations, worst_margin: self.margin }
    }
}

fn vf_margin(diag: &CouplingDiagnostics) -> Option<f64> {
    match (diag.vf_bound, &diag.v_f) {
        (Some(b), Some(v)) => Some(b - v.value()),
        _ => None,
    }
}

fn random_proper_subset(rng: &mut StreamRng, universe: usize) -> VertexSet {
    let k = rng.random_range(1..universe);
    VertexSet::from_indices(universe, sample_indices(rng, universe, k).into_iter()).expect("in range")
}

fn draw_matrix(spec: &SamplerSpec, rng: &mut StreamRng) -> Result<BiregularBitMatrix> {
    Ok(spec.draw(rng)?.into_matrix().expect("matrix sampler"))
}

const REFLECTION: [&str; 4] = ["reflection_identity", "reflection_involution", "reflection_membership", "reflection_vf_bound"];

fn reflection_instance(cfg: &VerifyConfig, rng: &mut StreamRng) -> Result<Vec<Tally>> {
    let mut t: Vec<Tally> = REFLECTION.iter().map(|&n| Tally::new(n)).collect();
    let m = draw_matrix(&cfg.sampler_spec(), rng)?;
    let rows = m.m();
    if rows < 2 {
        return Ok(t);
    }
    let pick = sample_indices(rng, rows, 2);
    let order = RowOrder::new(pick.index(0), pick.index(1), rows)?;
    let diag = if m.n() <= cfg.exact_cap.unwrap_or(REFLECTION_EXACT_CAP) {
        reflection_vf_exact(&m, &order, usize::MAX)?
    } else {
        reflection_vf_mc(&m, &order, cfg.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES), rng)?
    };
    t[0].record(diag.identity_ok, None);
    // One random column pair, reflected twice.
    let n = m.n();
    if n >= 2 {
        let cols = sample_indices(rng, n, 2);
        let (j1, j2) = (cols.index(0), cols.index(1));
        let mut bits = m.bits().clone();
        if reflect_in_place(&mut bits, j1, j2, &order) {
            let member = BiregularBitMatrix::new(bits.clone(), m.d(), m.dp()).is_ok();
            t[2].record(member, None);
            reflect_in_place(&mut bits, j1, j2, &order);
            t[1].record(bits == *m.bits(), None);
        }
    }
    if let Some(ok) = diag.involution_ok {
        t[1].record(ok, None);
    }
    t[3].record(diag.bound_ok.unwrap_or(false), vf_margin(&diag));
    Ok(t)
}

const SWITCHING: [&str; 5] =
    ["switching_identity", "switching_vf_bound", "switching_site_delta", "switching_involution", "switching_f2_bound"];

fn switching_instance(cfg: &VerifyConfig, rng: &mut StreamRng) -> Result<Vec<Tally>> {
    let mut t: Vec<Tally> = SWITCHING.iter().map(|&n| Tally::new(n)).collect();
    let m = draw_matrix(&cfg.sampler_spec(), rng)?;
    if m.m() < 2 || m.n() < 2 {
        return Ok(t);
    }
    let sets = VertexSetPair::new(random_proper_subset(rng, m.m()), random_proper_subset(rng, m.n()));
    let diag = match switching_vf_exact(&m, &sets, SWITCHING_EXACT_CAP) {
        Ok(d) => d,
        Err(Error::ExactCapExceeded { .. }) => switching_vf_mc(&m, &sets, cfg.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES), rng)?,
        Err(e) => return Err(e),
    };
    t[0].record(diag.identity_ok, None);
    t[1].record(diag.bound_ok.unwrap_or(false), vf_margin(&diag));
    if let Some(ok) = diag.site_delta_ok {
        t[2].record(ok, None);
    }
    if let Some(ok) = diag.involution_ok {
        t[3].record(ok, None);
    }
    let f_diag = switching_f(&m, &sets)?;
    if let Some(ok) = switching_f2_bound(&m, &sets, &f_diag, cfg.eta.unwrap_or(DEFAULT_ETA)) {
        t[4].record(ok, None);
    }
    Ok(t)
}

const PERMUTATION: [&str; 2] = ["permutation_identity", "permutation_vf_bound"];

fn permutation_instance(cfg: &VerifyConfig, rng: &mut StreamRng) -> Result<Vec<Tally>> {
    let mut t: Vec<Tally> = PERMUTATION.iter().map(|&n| Tally::new(n)).collect();
    let n = cfg.n;
    let pi = sample_permutation_model(n, cfg.d, rng);
    let bk = rng.random_range(1..=n);
    let cols = VertexSet::from_indices(n, sample_indices(rng, n, bk).into_iter()).expect("in range");
    let sets = VertexSetPair::new(random_proper_subset(rng, n), cols);
    let diag = permutation_f(&pi, &sets)?;
    t[0].record(diag.identity_ok, None);
    t[1].record(diag.bound_ok.unwrap_or(false), vf_margin(&diag));
    Ok(t)
}

type Instance = fn(&VerifyConfig, &mut StreamRng) -> Result<Vec<Tally>>;

fn run_suite(cfg: &VerifyConfig, suite: Suite, names: &[&'static str], f: Instance) -> Result<Vec<InvariantRecord>> {
    let per_instance: Vec<Vec<Tally>> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, shard_stream(suite.id(), k));
            f(cfg, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut total: Vec<Tally> = names.iter().map(|&n| Tally::new(n)).collect();
    for inst in &per_instance {
        for (acc, t) in total.iter_mut().zip(inst) {
            acc.merge(t);
        }
    }
    Ok(total.iter().map(Tally::finish).collect())
}

/// Run the selected suite(s).
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let cfg = cfg.resolved()?;
    let mut records = Vec::new();
    let wants = |s: Suite| cfg.suite == s || cfg.suite == Suite::All;
    if wants(Suite::Reflection) {
        records.extend(run_suite(&cfg, Suite::Reflection, &REFLECTION, reflection_instance)?);
    }
    if wants(Suite::Switching) {
        records.extend(run_suite(&cfg, Suite::Switching, &SWITCHING, switching_instance)?);
    }
    if wants(Suite::Permutation) {
        records.extend(run_suite(&cfg, Suite::Permutation, &PERMUTATION, permutation_instance)?);
    }
    Ok(VerifyReport { schema_version: crate::SCHEMA_VERSION, config: cfg, records })
}
