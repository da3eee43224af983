//! Second singular value and exact jumbledness for small square matrices.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BiregularBitMatrix;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Largest `n` for which `alpha_exact` enumerates every row set.
pub const ALPHA_EXACT_MAX_N: usize = 14;
const START_SEED: u64 = 0x5eed_5157;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub sigma1: f64,
    pub sigma2: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_exact: Option<f64>,
}

struct Operator {
    n: usize,
    supports: Vec<Vec<usize>>,
}

impl Operator {
    fn new(m: &BiregularBitMatrix) -> Self {
        let bits = m.bits();
        let supports = (0..bits.rows()).map(|i| bits.row_support(i).collect()).collect();
        Self { n: m.n(), supports }
    }

    /// `out = MᵀM v`.
    fn gram_apply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for row in &self.supports {
            let w: f64 = row.iter().map(|&j| v[j]).sum();
            for &j in row {
                out[j] += w;
            }
        }
    }

    fn row_norm_of_ones(&self) -> f64 {
        let s: f64 = self.supports.iter().map(|r| (r.len() as f64).powi(2)).sum();
        (s / self.n as f64).sqrt()
    }
}

fn project_out_ones(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Deterministic start vector from a fixed-seed stream. Structured choices
/// (alternating signs, low-discrepancy sequences) are orthogonal to the
/// second singular vector of some block matrices.
fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = crate::rng::stream_rng(START_SEED, 0);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project_out_ones(&mut v);
    v
}

/// `σ₁ = ‖M·1‖/‖1‖` and `σ₂` by power iteration on `MᵀM` restricted to the
/// complement of the all-ones vector.
pub fn sigma2(m: &BiregularBitMatrix, tol: f64, max_iters: usize) -> Result<SpectralReport> {
    if !m.is_square() {
        return Err(Error::invalid("sigma2 needs a square matrix"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let n = m.n();
    let op = Operator::new(m);
    let sigma1 = op.row_norm_of_ones();
    let alpha_exact = if n <= ALPHA_EXACT_MAX_N { Some(alpha_exact(m)?) } else { None };
    if n < 2 {
        return Ok(SpectralReport { sigma1, sigma2: 0.0, iterations: 0, residual: 0.0, alpha_exact });
    }
    let mut v = start_vector(n);
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut w = vec![0.0; n];
    let mut lambda_prev = f64::NAN;
    for it in 1..=max_iters {
        op.gram_apply(&v, &mut w);
        project_out_ones(&mut w);
        let lambda: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let residual = v.iter().zip(&w).map(|(a, b)| (b - lambda * a).powi(2)).sum::<f64>().sqrt();
        let wn = norm(&w);
        if wn <= f64::MIN_POSITIVE {
            return Ok(SpectralReport { sigma1, sigma2: 0.0, iterations: it, residual: 0.0, alpha_exact });
        }
        if (lambda - lambda_prev).abs() < tol * lambda.max(1.0) {
            return Ok(SpectralReport { sigma1, sigma2: lambda.max(0.0).sqrt(), iterations: it, residual, alpha_exact });
        }
        lambda_prev = lambda;
        v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / wn);
        if it == max_iters {
            return Err(Error::NonConvergence { iterations: it, residual });
        }
    }
    Err(Error::NonConvergence { iterations: max_iters, residual: f64::NAN })
}

pub fn sigma2_default(m: &BiregularBitMatrix) -> Result<SpectralReport> {
    sigma2(m, DEFAULT_TOL, DEFAULT_MAX_ITERS)
}

/// `max |e(A,B) − d|A||B|/n| / √(|A||B|)` over nonempty `A, B`.
///
/// For each row set the best column set of each size is a prefix of the
/// column excesses sorted in either direction.
pub fn alpha_exact(m: &BiregularBitMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::invalid("alpha_exact needs a square matrix"));
    }
    let n = m.n();
    if n > ALPHA_EXACT_MAX_N {
        return Err(Error::SearchSpaceTooLarge {
            estimate: 2f64.powi(n as i32) * n as f64,
            cap: 2f64.powi(ALPHA_EXACT_MAX_N as i32) * ALPHA_EXACT_MAX_N as f64,
        });
    }
    let d = m.d() as i64;
    let bits = m.bits();
    let mut best = 0.0f64;
    let mut c = vec![0i64; n];
    for mask in 1u64..(1u64 << n) {
        let a = mask.count_ones() as i64;
        c.iter_mut().for_each(|x| *x = -d * a);
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            for j in bits.row_support(i) {
                c[j] += n as i64;
            }
        }
        c.sort_unstable();
        let (mut lo, mut hi) = (0i64, 0i64);
        for b in 1..=n {
            lo += c[b - 1];
            hi += c[n - b];
            let dev = lo.abs().max(hi.abs()) as f64 / n as f64;
            best = best.max(dev / ((a as usize * b) as f64).sqrt());
        }
    }
    Ok(best)
}
