//! `rrd`: samplers, couplings, verification suites and tail experiments for
//! random regular digraphs.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a suite or experiment
//! found a violated identity or bound, 3 a resource guard tripped, 4 a
//! `couple` operation was a no-op.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use rrd_core::bounds::{eval_bound, Constants, TailBoundSpec, Theorem};
use rrd_core::chatterjee::good_event_co;
use rrd_core::couplings::{reflect, simple_switch, RowOrder, SwitchSite};
use rrd_core::experiments::{run_tail_experiment, ExperimentConfig, TailExperimentResult};
use rrd_core::graph::text::{format_matrices, format_matrix, format_multiplicity, format_plain, parse_matrices};
use rrd_core::graph::{codegree, discrepancy, edge_count, max_codegree_deviation, SetPairSpec};
use rrd_core::rng::stream_rng;
use rrd_core::samplers::{enumerate_all, Sample, SamplerKind, SamplerSpec, Shape, DEFAULT_ENUMERATION_CAP};
use rrd_core::spectral::{sigma2, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use rrd_core::verify::{run_verify, Suite, VerifyConfig};
use rrd_core::{BiregularBitMatrix, Direction, Error, SCHEMA_VERSION};

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_NOOP: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "rrd", version, about = "Random regular digraph toolkit")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw matrices from a sampler.
    Sample(SampleArgs),
    /// Codegree, edge-count and good-event statistics of matrices in a file.
    Stats(StatsArgs),
    /// Apply a simple switching or a reflection.
    Couple(CoupleArgs),
    /// Run the coupling verification suites.
    Verify(VerifyArgs),
    /// Evaluate a closed-form tail bound.
    Bound(BoundArgs),
    /// Run a Monte Carlo tail experiment from a JSON config.
    Tail(TailArgs),
    /// Second singular value and exact jumbledness.
    Sigma2(Sigma2Args),
    /// Enumerate a tiny class.
    Enumerate(EnumerateArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    kind: SamplerKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dp: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    max_attempts: Option<u64>,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Row pair for a codegree record (0-based).
    #[arg(long, requires = "i2")]
    i1: Option<usize>,
    #[arg(long, requires = "i1")]
    i2: Option<usize>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Out)]
    direction: DirectionArg,
    /// Leading row set size, or explicit rows via `--rows`.
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    cols: Option<Vec<usize>>,
    /// Evaluate the codegree good event at this tolerance.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Out,
    In,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoupleOp {
    Switch,
    Reflect,
}

#[derive(Args, Debug)]
struct CoupleArgs {
    #[arg(long, value_enum)]
    op: CoupleOp,
    #[arg(long)]
    i1: usize,
    #[arg(long)]
    i2: usize,
    #[arg(long)]
    j1: usize,
    #[arg(long)]
    j2: usize,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dp: Option<usize>,
    #[arg(long, default_value_t = 100)]
    samples: u64,
    #[arg(long)]
    exact_cap: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    mc_samples: Option<u64>,
    #[arg(long, default_value = "switch_mcmc")]
    sampler: SamplerKind,
    #[arg(long)]
    steps: Option<u64>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    theorem: Theorem,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Override the derived `μ̂` (edge bounds) or `μ` (permutation, ER).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    big_c: Option<f64>,
}

#[derive(Args, Debug)]
struct TailArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Sigma2Source {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Inline JSON sampler spec, e.g. `{"kind":"switch_mcmc","n":40,"d":10}`.
    #[arg(long)]
    sample: Option<String>,
}

#[derive(Args, Debug)]
struct Sigma2Args {
    #[command(flatten)]
    source: Sigma2Source,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dp: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: f64,
    /// Print only the class size.
    #[arg(long)]
    count_only: bool,
}

/// Failure of one run, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_resource_guard() { EXIT_RESOURCE } else { EXIT_USAGE };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_USAGE, msg: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: EXIT_USAGE, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

type Outcome = Result<u8, Failure>;

struct Io<'a> {
    out: Option<&'a Path>,
}

impl Io<'_> {
    fn write(&self, text: &str) -> Result<(), Failure> {
        match self.out {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    /// Resolved configuration: `<out>.meta.json` next to the output, or
    /// standard error when writing to standard output.
    fn meta(&self, value: &serde_json::Value) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        match self.out {
            Some(p) => fs::write(meta_path(p), text)?,
            None => eprint!("{text}"),
        }
        Ok(())
    }
}

fn meta_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_matrices(path: &Path) -> Result<Vec<BiregularBitMatrix>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(parse_matrices(&text)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let io = Io { out: cli.out.as_deref() };
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, seed, &io),
        Command::Stats(a) => cmd_stats(a, cli.format, &io),
        Command::Couple(a) => cmd_couple(a, &io),
        Command::Verify(a) => cmd_verify(a, seed, cli.format, &io),
        Command::Bound(a) => cmd_bound(a, cli.format, &io),
        Command::Tail(a) => cmd_tail(a, cli.seed, cli.format, &io),
        Command::Sigma2(a) => cmd_sigma2(a, seed, &io),
        Command::Enumerate(a) => cmd_enumerate(a, cli.format, &io),
    }
}

fn cmd_sample(a: &SampleArgs, seed: u64, io: &Io) -> Outcome {
    if a.kind == SamplerKind::Enumerate {
        return Err(usage("use the `enumerate` subcommand for whole classes"));
    }
    let spec = SamplerSpec {
        kind: a.kind,
        n: a.n,
        m: a.m,
        d: a.d,
        dp: a.dp,
        p: a.p,
        steps: a.steps,
        max_attempts: a.max_attempts,
        seed,
        stream: a.stream,
    }
    .resolved()?;
    let mut rng = stream_rng(spec.seed, spec.stream);
    let mut blocks = Vec::with_capacity(a.count);
    for _ in 0..a.count {
        blocks.push(match spec.draw(&mut rng)? {
            Sample::Matrix(m) => format_matrix(&m),
            Sample::Permutations(p) => format_multiplicity(&p),
            Sample::Plain(b) => format_plain(&b),
        });
    }
    io.write(&blocks.join("\n"))?;
    io.meta(&json!({ "schema_version": SCHEMA_VERSION, "command": "sample", "sampler": spec, "count": a.count }))?;
    Ok(0)
}

fn cmd_stats(a: &StatsArgs, format: Format, io: &Io) -> Outcome {
    if format != Format::Json {
        return Err(usage("stats writes JSON only"));
    }
    let matrices = read_matrices(&a.input)?;
    let set_spec = SetPairSpec { a: a.a, b: a.b, rows: a.rows.clone(), cols: a.cols.clone() };
    let want_sets = a.a.is_some() || a.b.is_some() || a.rows.is_some() || a.cols.is_some();
    let mut reports = Vec::new();
    for m in &matrices {
        let mut r = json!({
            "m": m.m(),
            "n": m.n(),
            "d": m.d(),
            "dp": m.dp(),
            "text": format_matrix(m),
            "max_codegree_deviation": max_codegree_deviation(m).map(|(dev, pair)| json!({ "scaled": dev, "pair": pair })),
        });
        if let (Some(i1), Some(i2)) = (a.i1, a.i2) {
            let dir = match a.direction {
                DirectionArg::Out => Direction::Out,
                DirectionArg::In => Direction::In,
            };
            r["codegree"] = serde_json::to_value(codegree(m, i1, i2, dir)?)?;
        }
        if want_sets {
            let sets = set_spec.resolve(m.m(), m.n())?;
            let disc = discrepancy(m, &sets);
            r["edge_count"] = json!(edge_count(m, &sets));
            r["discrepancy"] = serde_json::to_value(disc)?;
            r["disc"] = json!(disc.disc());
        }
        if let Some(eta) = a.eta {
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(usage("--eta must be non-negative"));
            }
            r["good_event"] = serde_json::to_value(good_event_co(m, eta))?;
        }
        reports.push(r);
    }
    io.write(&to_json(&json!({ "schema_version": SCHEMA_VERSION, "matrices": reports }))?)?;
    Ok(0)
}

fn cmd_couple(a: &CoupleArgs, io: &Io) -> Outcome {
    let mut ms = read_matrices(&a.input)?;
    if ms.len() != 1 {
        return Err(usage(format!("expected one matrix, found {}", ms.len())));
    }
    let m = ms.pop().unwrap();
    let result = match a.op {
        CoupleOp::Switch => simple_switch(&m, &SwitchSite::new(a.i1, a.i2, a.j1, a.j2))?,
        CoupleOp::Reflect => {
            let order = RowOrder::new(a.i1, a.i2, m.m())?;
            reflect(&m, a.j1, a.j2, &order)?
        }
    };
    io.write(&format_matrix(&result))?;
    if result == m {
        eprintln!("no-op: the selected minor is not switchable/reflecting");
        return Ok(EXIT_NOOP);
    }
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, seed: u64, format: Format, io: &Io) -> Outcome {
    let cfg = VerifyConfig {
        suite: a.suite,
        n: a.n,
        d: a.d,
        m: a.m,
        dp: a.dp,
        samples: a.samples,
        exact_cap: a.exact_cap,
        eta: a.eta,
        mc_samples: a.mc_samples,
        sampler: a.sampler,
        steps: a.steps,
        seed,
    };
    let report = run_verify(&cfg)?;
    match format {
        Format::Json => io.write(&to_json(&report)?)?,
        Format::Csv => {
            let mut s = String::from("invariant,status,checked,violations,worst_margin\n");
            for r in &report.records {
                let margin = r.worst_margin.map(|x| x.to_string()).unwrap_or_default();
                let status = serde_json::to_value(r.status)?;
                s.push_str(&format!("{},{},{},{},{}\n", r.invariant, status.as_str().unwrap_or(""), r.checked, r.violations, margin));
            }
            io.write(&s)?;
        }
    }
    Ok(if report.passed() { 0 } else { EXIT_VIOLATION })
}

fn cmd_bound(a: &BoundArgs, format: Format, io: &Io) -> Outcome {
    let name = a.theorem.deviation_name();
    let deviation = match name {
        "eps" => a.eps,
        "tau" => a.tau,
        _ => a.eta,
    }
    .ok_or_else(|| usage(format!("{} needs --{name}", a.theorem.as_str())))?;
    let defaults = Constants::default();
    let spec = TailBoundSpec {
        theorem: a.theorem,
        m: a.m,
        n: a.n,
        d: a.d,
        p: a.p,
        a: a.a,
        b: a.b,
        mu: a.mu,
        deviation,
        eta: if name == "tau" { a.eta.unwrap_or(0.0) } else { 0.0 },
        constants: Constants {
            c1: a.c1.unwrap_or(defaults.c1),
            c2: a.c2.unwrap_or(defaults.c2),
            c: a.c.unwrap_or(defaults.c),
            big_c: a.big_c.unwrap_or(defaults.big_c),
        },
    };
    let report = eval_bound(&spec)?;
    match format {
        Format::Json => io.write(&to_json(&json!({ "schema_version": SCHEMA_VERSION, "spec": spec, "report": report }))?)?,
        Format::Csv => io.write(&format!("theorem,value,valid\n{},{},{}\n", report.theorem.as_str(), report.value, report.valid))?,
    }
    Ok(0)
}

fn cmd_tail(a: &TailArgs, seed: Option<u64>, format: Format, io: &Io) -> Outcome {
    let text = fs::read_to_string(&a.config).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| usage(format!("config: {e}")))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let result: TailExperimentResult = run_tail_experiment(&cfg)?;
    match format {
        Format::Csv => io.write(&result.to_csv())?,
        Format::Json => io.write(&to_json(&json!({ "schema_version": SCHEMA_VERSION, "points": result.points }))?)?,
    }
    io.meta(&result.metadata_json())?;
    Ok(if result.defects() == 0 { 0 } else { EXIT_VIOLATION })
}

fn cmd_sigma2(a: &Sigma2Args, seed: u64, io: &Io) -> Outcome {
    let matrices = match (&a.source.input, &a.source.sample) {
        (Some(p), _) => read_matrices(p)?,
        (None, Some(s)) => {
            let mut spec: SamplerSpec = serde_json::from_str(s).map_err(|e| usage(format!("--sample: {e}")))?;
            spec.seed = seed;
            let spec = spec.resolved()?;
            let mut rng = stream_rng(spec.seed, spec.stream);
            let m = spec.draw(&mut rng)?.into_matrix().ok_or_else(|| usage("--sample needs a matrix sampler"))?;
            vec![m]
        }
        (None, None) => return Err(usage("pass --in or --sample")),
    };
    let reports = matrices.iter().map(|m| sigma2(m, a.tol, a.max_iters)).collect::<Result<Vec<_>, _>>()?;
    io.write(&to_json(&json!({ "schema_version": SCHEMA_VERSION, "reports": reports }))?)?;
    Ok(0)
}

fn cmd_enumerate(a: &EnumerateArgs, format: Format, io: &Io) -> Outcome {
    let (m, dp) = (a.m.unwrap_or(a.n), a.dp.unwrap_or(a.d));
    let shape = Shape::new(m, a.n, a.d, dp)?;
    let all: Vec<BiregularBitMatrix> = enumerate_all(shape, a.cap)?.collect();
    if a.count_only || format == Format::Csv {
        io.write(&format!("{}\n", all.len()))?;
    } else {
        io.write(&format_matrices(&all))?;
    }
    Ok(0)
}
