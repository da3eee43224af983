//! Exchangeable-pair quantities `f`, `v_f` for the reflection, switching and
//! permutation couplings, kept in exact integer scale wherever the paper's
//! identities are algebraic.

use rand::Rng;
use serde::Serialize;

use crate::couplings::{first_return, minor_counts_bits, reflect_in_place, switch_in_place, RowOrder, SwitchSite};
use crate::error::{Error, Result};
use crate::exact::{le_scaled, ratio_from_f64, Rational};
use crate::graph::{edge_count_bits, BiregularBitMatrix, BitMatrix, VertexSet, VertexSetPair};
use crate::samplers::PermutationTuple;

/// Default exact-mode cap on `n` for the reflection `v_f`.
pub const REFLECTION_EXACT_CAP: usize = 20;
/// Default exact-mode cap on `K_ab · n` for the switching `v_f`.
pub const SWITCHING_EXACT_CAP: f64 = 1e8;
/// Above this many sites the brute-force site count is skipped.
const SITE_SCAN_CAP: u128 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Reflection,
    Switching,
    Permutation,
}

/// `v_f(M)`, exact or estimated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VfEstimate {
    Exact { numer: i128, denom: i128, value: f64 },
    MonteCarlo { estimate: f64, std_error: f64, samples: u64 },
}

impl VfEstimate {
    fn exact(r: Rational) -> Self {
        VfEstimate::Exact { numer: *r.numer(), denom: *r.denom(), value: *r.numer() as f64 / *r.denom() as f64 }
    }

    pub fn value(&self) -> f64 {
        match self {
            VfEstimate::Exact { value, .. } => *value,
            VfEstimate::MonteCarlo { estimate, .. } => *estimate,
        }
    }

    pub fn rational(&self) -> Option<Rational> {
        match self {
            VfEstimate::Exact { numer, denom, .. } => Some(Rational::new(*numer, *denom)),
            VfEstimate::MonteCarlo { .. } => None,
        }
    }
}

/// One evaluated coupling instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingDiagnostics {
    pub coupling: Coupling,
    /// `scale · f(M)`.
    pub f_scaled: i128,
    pub scale: i128,
    /// The coupling's exact identity for `f` (see each constructor).
    pub identity_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_f: Option<VfEstimate>,
    /// Right-hand side of the self-bounding inequality `v_f ≤ K1 + K2·f`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vf_bound: Option<f64>,
    /// Whether the self-bounding inequality holds (exactly, or within 3
    /// standard errors for Monte Carlo estimates).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_ok: Option<bool>,
    /// Reflection: bad-pair count `b(M)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    /// Switching: `scale · f₁`, `scale · f₂`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1_scaled: Option<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2_scaled: Option<i128>,
    /// Switching: whether `(A,B)` was replaced by `(Aᶜ,Bᶜ)` to get `μ = μ̂`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complemented: Option<bool>,
    /// Switching: every evaluated site had `|f(M) − f(M̃)| ≤ 2·m·d̂`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site_delta_ok: Option<bool>,
    /// The map applied twice returned the input on every evaluated pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub involution_ok: Option<bool>,
    pub k1: f64,
    pub k2: f64,
}

impl CouplingDiagnostics {
    fn new(coupling: Coupling, f_scaled: i128, scale: i128, identity_ok: bool, k1: f64, k2: f64) -> Self {
        Self {
            coupling,
            f_scaled,
            scale,
            identity_ok,
            v_f: None,
            vf_bound: None,
            bound_ok: None,
            b: None,
            f1_scaled: None,
            f2_scaled: None,
            complemented: None,
            site_delta_ok: None,
            involution_ok: None,
            k1,
            k2,
        }
    }

    pub fn f(&self) -> f64 {
        self.f_scaled as f64 / self.scale as f64
    }

    pub fn f_exact(&self) -> Rational {
        Rational::new(self.f_scaled, self.scale)
    }
}

fn mc_summary(sum: f64, sum_sq: f64, samples: u64) -> (f64, f64) {
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

// ---------------------------------------------------------------- reflection

fn reflection_fs(bits: &BitMatrix, order: &RowOrder) -> i128 {
    let c = minor_counts_bits(bits, order);
    c.n_k as i128 - c.n_i_reflecting as i128
}

fn check_order(m: &BiregularBitMatrix, order: &RowOrder) -> Result<()> {
    if order.len() != m.m() {
        return Err(Error::invalid(format!("row order has {} rows, matrix has {}", order.len(), m.m())));
    }
    Ok(())
}

/// `n·f(M) = #K − #I_reflecting` at rows `(i1, i2)` of `order`, checked
/// against `n·co − d² + b`.
pub fn reflection_f(m: &BiregularBitMatrix, order: &RowOrder) -> Result<CouplingDiagnostics> {
    check_order(m, order)?;
    let bits = m.bits();
    let counts = minor_counts_bits(bits, order);
    let f_scaled = counts.n_k as i128 - counts.n_i_reflecting as i128;
    let (n, d) = (m.n() as i128, m.d() as i128);
    let co = bits.and_count(order.i1(), order.i2()) as i128;
    let identity_ok = f_scaled == n * co - d * d + counts.n_i_bad as i128;
    let d_hat = m.d_hat() as f64;
    let mut diag = CouplingDiagnostics::new(Coupling::Reflection, f_scaled, n, identity_ok, 2.0 * d_hat * d_hat / n as f64, 1.0);
    diag.b = Some(counts.n_i_bad);
    Ok(diag)
}

/// Exact `v_f`: `Σ |n·f(M) − n·f(Ψ(M))| / (2n²)` over the active column
/// pairs, with `v_f ≤ f + 2d̂²/n` checked exactly.
pub fn reflection_vf_exact(m: &BiregularBitMatrix, order: &RowOrder, cap: usize) -> Result<CouplingDiagnostics> {
    if m.n() > cap {
        return Err(Error::ExactCapExceeded { cost: m.n() as f64, cap: cap as f64 });
    }
    let mut diag = reflection_f(m, order)?;
    let n = m.n();
    let mut bits = m.bits().clone();
    let (mut total, mut involution_ok) = (0i128, true);
    for j1 in 0..n {
        for j2 in 0..n {
            if j1 == j2 || !reflect_in_place(&mut bits, j1, j2, order) {
                continue;
            }
            total += (diag.f_scaled - reflection_fs(&bits, order)).abs();
            reflect_in_place(&mut bits, j1, j2, order);
            involution_ok &= bits == *m.bits();
        }
    }
    let (n, d_hat) = (n as i128, m.d_hat() as i128);
    let vf = Rational::new(total, 2 * n * n);
    diag.v_f = Some(VfEstimate::exact(vf));
    diag.vf_bound = Some(diag.f() + diag.k1);
    diag.bound_ok = Some(total <= 2 * n * (diag.f_scaled + 2 * d_hat * d_hat));
    diag.involution_ok = Some(involution_ok);
    Ok(diag)
}

/// Monte Carlo `v_f` from `samples` uniform column pairs.
pub fn reflection_vf_mc<R: Rng + ?Sized>(
    m: &BiregularBitMatrix,
    order: &RowOrder,
    samples: u64,
    rng: &mut R,
) -> Result<CouplingDiagnostics> {
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo mode needs at least one sample"));
    }
    let mut diag = reflection_f(m, order)?;
    let n = m.n();
    let mut bits = m.bits().clone();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let (j1, j2) = (rng.random_range(0..n), rng.random_range(0..n));
        if j1 == j2 || first_return(&bits, j1, j2, order).is_none() {
            continue;
        }
        reflect_in_place(&mut bits, j1, j2, order);
        let x = (diag.f_scaled - reflection_fs(&bits, order)).abs() as f64 / 2.0;
        reflect_in_place(&mut bits, j1, j2, order);
        sum += x;
        sum_sq += x * x;
    }
    let (estimate, std_error) = mc_summary(sum, sum_sq, samples);
    let bound = diag.f() + diag.k1;
    diag.v_f = Some(VfEstimate::MonteCarlo { estimate, std_error, samples });
    diag.vf_bound = Some(bound);
    diag.bound_ok = Some(estimate - 3.0 * std_error <= bound);
    Ok(diag)
}

// ----------------------------------------------------------------- switching

fn masked_and_not(bits: &BitMatrix, i1: usize, i2: usize, mask: &VertexSet) -> usize {
    bits.row(i1)
        .iter()
        .zip(bits.row(i2))
        .zip(mask.words())
        .map(|((&x, &y), &w)| (x & !y & w).count_ones() as usize)
        .sum()
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest integer `S` making both `S·f₁` and `S·f₂` integers; `n` in the
/// square case.
pub fn switching_scale(m: usize, n: usize) -> i128 {
    let (m, n) = (m as u128, n as u128);
    let q = n * n / gcd(m, n * n);
    (n / gcd(n, q) * q) as i128
}

struct SwitchingParts {
    fd2: i128,
    fd3: i128,
    f1_scaled: i128,
    f2_scaled: i128,
}

fn switching_parts(m: &BiregularBitMatrix, sets: &VertexSetPair, scale: i128) -> SwitchingParts {
    let bits = m.bits();
    let (n, d) = (m.n() as i128, m.d() as i128);
    let (a_rows, ac_rows) = (sets.rows.to_vec(), sets.rows.complement().to_vec());
    let bc = sets.cols.complement();
    let nb: Vec<i128> = (0..m.m()).map(|i| bits.masked_row_count(i, &sets.cols) as i128).collect();
    let (mut fd2, mut fd3, mut f2_sum) = (0i128, 0i128, 0i128);
    for &i1 in &a_rows {
        for &i2 in &ac_rows {
            let ex = bits.and_not_count(i1, i2) as i128;
            let ex12_b = masked_and_not(bits, i1, i2, &sets.cols) as i128;
            let ex21_b = masked_and_not(bits, i2, i1, &sets.cols) as i128;
            let ex12_bc = masked_and_not(bits, i1, i2, &bc) as i128;
            let ex21_bc = masked_and_not(bits, i2, i1, &bc) as i128;
            fd2 += ex12_b * ex21_bc - ex21_b * ex12_bc;
            let diff = nb[i1] - nb[i2];
            fd3 += ex * diff;
            f2_sum += (n * ex - d * (n - d)) * diff;
        }
    }
    let e = edge_count_bits(bits, sets) as i128;
    let (rows, a, b) = (m.m() as i128, sets.a() as i128, sets.b() as i128);
    // f₁ = d(n−d)·m·(n·e − d·a·b)/n², f₂ = Σ (n·ex − d(n−d))·Δ / n.
    let f1_scaled = scale * rows / (n * n) * d * (n - d) * (n * e - d * a * b);
    let f2_scaled = scale / n * f2_sum;
    SwitchingParts { fd2, fd3, f1_scaled, f2_scaled }
}

/// `#I − #J` over all sites in `A × Aᶜ × B × Bᶜ`, by direct scan.
pub fn switching_site_count(bits: &BitMatrix, sets: &VertexSetPair) -> i128 {
    let (rows, ac) = (sets.rows.to_vec(), sets.rows.complement().to_vec());
    let (cols, bc) = (sets.cols.to_vec(), sets.cols.complement().to_vec());
    let mut f = 0i128;
    for &i1 in &rows {
        for &i2 in &ac {
            for &j1 in &cols {
                for &j2 in &bc {
                    match SwitchSite::new(i1, i2, j1, j2).minor_class(bits) {
                        crate::couplings::MinorClass::I => f += 1,
                        crate::couplings::MinorClass::J => f -= 1,
                        crate::couplings::MinorClass::Other => {}
                    }
                }
            }
        }
    }
    f
}

fn k_ab(m: usize, n: usize, sets: &VertexSetPair) -> u128 {
    let (a, b) = (sets.a() as u128, sets.b() as u128);
    a * (m as u128 - a) * b * (n as u128 - b)
}

fn check_sets(m: &BiregularBitMatrix, sets: &VertexSetPair) -> Result<()> {
    if sets.m() != m.m() || sets.n() != m.n() {
        return Err(Error::invalid(format!(
            "set universes {}×{} do not match matrix {}×{}",
            sets.m(),
            sets.n(),
            m.m(),
            m.n()
        )));
    }
    Ok(())
}

/// `f(M) = #I − #J` over `A × Aᶜ × B × Bᶜ` after reducing `(A,B)` so that
/// `μ = μ̂`. `f_scaled` comes from the ex-weighted row-degree form; the
/// identity flag asserts it equals the `Ex ∩ B` double-sum form, the split
/// `f = f₁ + f₂`, and (for moderate sizes) the direct site count.
pub fn switching_f(m: &BiregularBitMatrix, sets: &VertexSetPair) -> Result<CouplingDiagnostics> {
    check_sets(m, sets)?;
    let reduced = sets.reduced();
    let complemented = reduced != *sets;
    let scale = switching_scale(m.m(), m.n());
    let parts = switching_parts(m, &reduced, scale);
    let mut identity_ok = parts.fd2 == parts.fd3 && scale * parts.fd3 == parts.f1_scaled + parts.f2_scaled;
    if k_ab(m.m(), m.n(), &reduced) <= SITE_SCAN_CAP {
        identity_ok &= switching_site_count(m.bits(), &reduced) == parts.fd3;
    }
    let (rows, d_hat) = (m.m() as f64, m.d_hat() as f64);
    let mu = reduced.mu(m.d());
    let mut diag = CouplingDiagnostics::new(
        Coupling::Switching,
        scale * parts.fd3,
        scale,
        identity_ok,
        2.0 * rows * rows * d_hat * d_hat * mu,
        rows * d_hat,
    );
    diag.f1_scaled = Some(parts.f1_scaled);
    diag.f2_scaled = Some(parts.f2_scaled);
    diag.complemented = Some(complemented);
    Ok(diag)
}

/// Incremental `f` over the affected pairs `ℐ`.
struct SwitchingState<'a> {
    a_rows: Vec<usize>,
    ac_rows: Vec<usize>,
    cols: &'a VertexSet,
    nb: Vec<i128>,
}

impl SwitchingState<'_> {
    fn term(&self, bits: &BitMatrix, i1: usize, i2: usize) -> i128 {
        bits.and_not_count(i1, i2) as i128 * (self.nb[i1] - self.nb[i2])
    }

    /// Sum of the fd3 terms over pairs sharing `i1 = r1` or `i2 = r2`.
    fn affected(&self, bits: &BitMatrix, r1: usize, r2: usize) -> i128 {
        let mut s: i128 = self.ac_rows.iter().map(|&i2| self.term(bits, r1, i2)).sum();
        s += self.a_rows.iter().filter(|&&i1| i1 != r1).map(|&i1| self.term(bits, i1, r2)).sum::<i128>();
        s
    }

    /// `f(M) − f(Φ_site(M))` for a switchable site; `bits` is restored.
    fn delta(&mut self, bits: &mut BitMatrix, site: &SwitchSite) -> i128 {
        let before = self.affected(bits, site.i1, site.i2);
        switch_in_place(bits, site);
        let (o1, o2) = (self.nb[site.i1], self.nb[site.i2]);
        self.nb[site.i1] = bits.masked_row_count(site.i1, self.cols) as i128;
        self.nb[site.i2] = bits.masked_row_count(site.i2, self.cols) as i128;
        let after = self.affected(bits, site.i1, site.i2);
        switch_in_place(bits, site);
        self.nb[site.i1] = o1;
        self.nb[site.i2] = o2;
        before - after
    }
}

fn switching_bound_holds(m: &BiregularBitMatrix, sets: &VertexSetPair, f: i128, sum_abs: i128) -> bool {
    // n·Σ|Δf| ≤ 2·n·m·d̂·f + 4·m²·d̂²·d·a·b, i.e. v_f ≤ m·d̂·(f + 2·m·d̂·μ).
    let (rows, n, d) = (m.m() as i128, m.n() as i128, m.d() as i128);
    let d_hat = m.d_hat() as i128;
    let (a, b) = (sets.a() as i128, sets.b() as i128);
    n * sum_abs <= 2 * n * rows * d_hat * f + 4 * rows * rows * d_hat * d_hat * d * a * b
}

/// Exact `v_f = ½ Σ |f(M) − f(Φ(M))|` over switchable sites, with the
/// self-bounding inequality and the per-site bound `2·m·d̂` checked exactly.
pub fn switching_vf_exact(m: &BiregularBitMatrix, sets: &VertexSetPair, cap: f64) -> Result<CouplingDiagnostics> {
    let mut diag = switching_f(m, sets)?;
    let reduced = if diag.complemented == Some(true) { sets.complement() } else { sets.clone() };
    let cost = k_ab(m.m(), m.n(), &reduced) as f64 * m.n() as f64;
    if cost > cap {
        return Err(Error::ExactCapExceeded { cost, cap });
    }
    let bits0 = m.bits();
    let mut state = SwitchingState {
        a_rows: reduced.rows.to_vec(),
        ac_rows: reduced.rows.complement().to_vec(),
        cols: &reduced.cols,
        nb: (0..m.m()).map(|i| bits0.masked_row_count(i, &reduced.cols) as i128).collect(),
    };
    let (b_list, bc_list) = (reduced.cols.to_vec(), reduced.cols.complement().to_vec());
    let per_site = 2 * m.m() as i128 * m.d_hat() as i128;
    let mut bits = bits0.clone();
    let f = diag.f_scaled / diag.scale;
    let (mut sum_abs, mut site_ok, mut involution_ok) = (0i128, true, true);
    let (a_rows, ac_rows) = (state.a_rows.clone(), state.ac_rows.clone());
    for &i1 in &a_rows {
        for &i2 in &ac_rows {
            for &j1 in &b_list {
                for &j2 in &bc_list {
                    let site = SwitchSite::new(i1, i2, j1, j2);
                    if site.minor_class(&bits) == crate::couplings::MinorClass::Other {
                        continue;
                    }
                    let delta = state.delta(&mut bits, &site);
                    site_ok &= delta.abs() <= per_site;
                    sum_abs += delta.abs();
                }
            }
        }
        involution_ok &= bits == *bits0;
    }
    diag.v_f = Some(VfEstimate::exact(Rational::new(sum_abs, 2)));
    diag.vf_bound = Some(diag.k1 + diag.k2 * f as f64);
    diag.bound_ok = Some(switching_bound_holds(m, &reduced, f, sum_abs));
    diag.site_delta_ok = Some(site_ok);
    diag.involution_ok = Some(involution_ok);
    Ok(diag)
}

/// Monte Carlo `v_f` from `samples` uniform sites in `A × Aᶜ × B × Bᶜ`.
pub fn switching_vf_mc<R: Rng + ?Sized>(
    m: &BiregularBitMatrix,
    sets: &VertexSetPair,
    samples: u64,
    rng: &mut R,
) -> Result<CouplingDiagnostics> {
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo mode needs at least one sample"));
    }
    let mut diag = switching_f(m, sets)?;
    let reduced = if diag.complemented == Some(true) { sets.complement() } else { sets.clone() };
    let kab = k_ab(m.m(), m.n(), &reduced);
    let f = diag.f_scaled / diag.scale;
    let bound = diag.k1 + diag.k2 * f as f64;
    diag.vf_bound = Some(bound);
    if kab == 0 {
        diag.v_f = Some(VfEstimate::MonteCarlo { estimate: 0.0, std_error: 0.0, samples });
        diag.bound_ok = Some(0.0 <= bound);
        return Ok(diag);
    }
    let bits0 = m.bits();
    let mut state = SwitchingState {
        a_rows: reduced.rows.to_vec(),
        ac_rows: reduced.rows.complement().to_vec(),
        cols: &reduced.cols,
        nb: (0..m.m()).map(|i| bits0.masked_row_count(i, &reduced.cols) as i128).collect(),
    };
    let (b_list, bc_list) = (reduced.cols.to_vec(), reduced.cols.complement().to_vec());
    let mut bits = bits0.clone();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let site = SwitchSite::new(
            state.a_rows[rng.random_range(0..state.a_rows.len())],
            state.ac_rows[rng.random_range(0..state.ac_rows.len())],
            b_list[rng.random_range(0..b_list.len())],
            bc_list[rng.random_range(0..bc_list.len())],
        );
        if site.minor_class(&bits) == crate::couplings::MinorClass::Other {
            continue;
        }
        let x = 0.5 * kab as f64 * state.delta(&mut bits, &site).abs() as f64;
        sum += x;
        sum_sq += x * x;
    }
    let (estimate, std_error) = mc_summary(sum, sum_sq, samples);
    diag.v_f = Some(VfEstimate::MonteCarlo { estimate, std_error, samples });
    diag.bound_ok = Some(estimate - 3.0 * std_error <= bound);
    Ok(diag)
}

/// `|f₂| ≤ η·(f₁ + 2·p(1−p)·n·m·μ)`, checked exactly when `𝒢^co(η)` holds;
/// `None` when the good event fails. `diag` must come from
/// [`switching_f`] on the same `(M, A, B)`.
pub fn switching_f2_bound(
    m: &BiregularBitMatrix,
    sets: &VertexSetPair,
    diag: &CouplingDiagnostics,
    eta: f64,
) -> Option<bool> {
    if !good_event_co(m, eta).holds {
        return None;
    }
    let reduced = if diag.complemented == Some(true) { sets.complement() } else { sets.clone() };
    let (rows, n, d) = (m.m() as i128, m.n() as i128, m.d() as i128);
    let (a, b) = (reduced.a() as i128, reduced.b() as i128);
    let scale = diag.scale;
    // scale · 2·p(1−p)·n·m·μ = 2·d(n−d)·m·d·a·b·scale / n².
    let extra = 2 * d * (n - d) * d * a * b * (scale * rows / (n * n));
    let rhs = diag.f1_scaled? + extra;
    Some(le_scaled(diag.f2_scaled?.abs(), ratio_from_f64(eta), rhs))
}

// --------------------------------------------------------------- permutation

/// `f(π) = E[F(π, π̃) | π]` by enumerating every `(J, I1, I2) ∈ [d]×A×Aᶜ`,
/// where `π̃` exchanges the images of `I1, I2` under `π_J`. With
/// `K = (d/n)·a(n−a)`, `n·f = Σ Δe`; the identity flag asserts
/// `n·f = n·e_π − d·a·b`, and `v_f = Σ Δe² / (2n) ≤ ½f + (d/n)·a·b` is
/// checked exactly.
pub fn permutation_f(pi: &PermutationTuple, sets: &VertexSetPair) -> Result<CouplingDiagnostics> {
    let n = pi.n();
    if sets.m() != n || sets.n() != n {
        return Err(Error::invalid("set universes must match the permutation size"));
    }
    if sets.rows.is_empty() || sets.a() == n {
        return Err(Error::invalid("A must be a nonempty proper subset"));
    }
    let (a_rows, ac_rows) = (sets.rows.to_vec(), sets.rows.complement().to_vec());
    let (mut sum, mut sum_sq) = (0i128, 0i128);
    for k in 0..pi.d() {
        let before = pi.edge_count_of(k, sets) as i128;
        for &i1 in &a_rows {
            for &i2 in &ac_rows {
                let after = pi.with_transposed_inputs(k, i1, i2).edge_count_of(k, sets) as i128;
                let delta = before - after;
                sum += delta;
                sum_sq += delta * delta;
            }
        }
    }
    let (n, d) = (n as i128, pi.d() as i128);
    let (a, b) = (sets.a() as i128, sets.b() as i128);
    let e = pi.edge_count(sets) as i128;
    let identity_ok = sum == n * e - d * a * b;
    let mu = (d * a * b) as f64 / n as f64;
    let mut diag = CouplingDiagnostics::new(Coupling::Permutation, sum, n, identity_ok, mu, 0.5);
    diag.v_f = Some(VfEstimate::exact(Rational::new(sum_sq, 2 * n)));
    diag.vf_bound = Some(0.5 * diag.f() + mu);
    diag.bound_ok = Some(sum_sq <= sum + 2 * d * a * b);
    Ok(diag)
}

// ------------------------------------------------------------------ evaluator

/// The two tail bounds `exp(−t²/(2(K1 + K2·t)))` and `exp(−t²/(2K1))` from
/// `v_f ≤ K1 + K2·f`.
pub fn chatterjee_tail(k1: f64, k2: f64, t: f64) -> Result<(f64, f64)> {
    if k1.is_nan() || k1 <= 0.0 {
        return Err(Error::invalid(format!("K1 must be positive, got {k1}")));
    }
    if k2.is_nan() || k2 < 0.0 || t.is_nan() || t < 0.0 {
        return Err(Error::invalid("K2 and t must be non-negative"));
    }
    let t2 = t * t;
    Ok(((-t2 / (2.0 * (k1 + k2 * t))).exp(), (-t2 / (2.0 * k1)).exp()))
}

/// The codegree good event `|co(i1,i2) − p²n| ≤ η·p(1−p)·n` for all row pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodEventCo {
    pub eta: f64,
    pub holds: bool,
    /// Pair with the largest `|n·co − d²|`.
    pub worst_pair: Option<(usize, usize)>,
    /// `max |n·co − d²|`.
    pub max_deviation_scaled: i64,
}

/// Evaluated exactly as `|n·co − d²| ≤ η·d(n−d)`.
pub fn good_event_co(m: &BiregularBitMatrix, eta: f64) -> GoodEventCo {
    assert!(eta >= 0.0, "η must be non-negative");
    let (n, d) = (m.n() as i128, m.d() as i128);
    match crate::graph::max_codegree_deviation(m) {
        None => GoodEventCo { eta, holds: true, worst_pair: None, max_deviation_scaled: 0 },
        Some((dev, pair)) => GoodEventCo {
            eta,
            holds: le_scaled(dev as i128, ratio_from_f64(eta), d * (n - d)),
            worst_pair: Some(pair),
            max_deviation_scaled: dev,
        },
    }
}
