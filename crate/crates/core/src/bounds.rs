//! Certified upper bounds and the bracket report.
//!
//! Four families of upper bounds on the spectral norm are computed here:
//!
//! - `rho1`: `‖f^k‖_HS^{1/k}` over a doubling schedule. Every term is an
//!   upper bound on `‖f‖_σ`, the doubling subsequence is nonincreasing, and
//!   the sequence converges to its infimum.
//! - `rho2`: `‖F^{∘k}‖_HS^{(p−1)/(p^k−1)}` for iterates of a degree-`p ≥ 2`
//!   square polynomial map. For the gradient map of a symmetric input every
//!   term is an upper bound on `‖f‖_σ`.
//! - `rho3`: the same exponents applied to heuristic σ estimates of the
//!   iterates. Diagnostic only — the estimates are lower bounds of each
//!   iterate's norm, so the sequence certifies nothing and never enters the
//!   bracket.
//! - matrix-style bounds: the `d = 2` power sequence `‖S^k‖_HS^{1/k}`, the
//!   `d = 3` quadratic-form bound, the sum-of-squares `τ̃` bound for
//!   symmetric `d ≥ 3`, and Collatz–Wielandt quotients of `|T|` (attached
//!   to the bracket for even `d` only).
//!
//! Reported estimates are always the last (or minimum) *computed* term;
//! nothing is extrapolated past what the monotonicity statements certify.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::oracle::{self, ShopmOptions};
use crate::poly::{HomoPoly, PolyMap};
use crate::serialize::{ser_f17, ser_f17_opt, ser_f17_vec};
use crate::tensor::{count_vector, poly_to_tensor, tensor_to_poly, DenseTensor, HopmOptions};
use crate::util::{for_each_index, norm2, Accum};
use crate::{Error, Result, DEFAULT_TERM_BUDGET};

/// Which bound sequence produced a [`BoundSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rho1,
    Rho2,
    Rho3,
    MatrixPower,
}

/// Why a sequence stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    Budget,
    Kmax,
}

/// One bound sequence: the value at each computed iterate index. Values
/// along the doubling subsequence `k, 2k, 4k, …` are nonincreasing (up to
/// floating-point slack) and nonnegative.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSequence {
    pub method: Method,
    /// False for heuristic sequences (`rho3`), whose values must not enter
    /// a certified bracket.
    pub certified: bool,
    /// True when the input was identically zero.
    pub degenerate: bool,
    pub ks: Vec<u32>,
    #[serde(serialize_with = "ser_f17_vec")]
    pub values: Vec<f64>,
    pub terminated_by: Termination,
    /// Stored term count of the iterate behind each value.
    pub budget_used: Vec<usize>,
}

impl BoundSequence {
    /// Smallest computed value; `None` for an empty or degenerate-zero
    /// sequence is never needed since at least one value is always present.
    pub fn best(&self) -> Option<f64> {
        self.values
            .iter()
            .copied()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

/// Options for [`rho1_bounds`].
#[derive(Debug, Clone, Serialize)]
pub struct Rho1Options {
    /// Largest power in the doubling schedule `1, 2, 4, …`.
    pub max_k: u32,
    pub budget: usize,
    /// Early-stop threshold on the relative improvement between consecutive
    /// schedule points; 0 disables early stopping.
    #[serde(serialize_with = "ser_f17")]
    pub tol: f64,
}

impl Default for Rho1Options {
    fn default() -> Self {
        Self {
            max_k: 32,
            budget: DEFAULT_TERM_BUDGET,
            tol: 0.0,
        }
    }
}

/// The power sequence `‖f^k‖_HS^{1/k}` over `k = 1, 2, 4, …, max_k`. Every
/// value is an upper bound on `‖f‖_σ`; the reported estimate is the last
/// computed value, never an extrapolation. Powers are built by repeated
/// squaring, so each schedule point reuses the previous iterate.
pub fn rho1_bounds(f: &HomoPoly, opts: &Rho1Options) -> BoundSequence {
    let mut ks = Vec::new();
    let mut values = Vec::new();
    let mut budget_used = Vec::new();
    if f.is_zero() {
        let mut k = 1;
        while k <= opts.max_k.max(1) {
            ks.push(k);
            values.push(0.0);
            budget_used.push(0);
            k *= 2;
        }
        return BoundSequence {
            method: Method::Rho1,
            certified: true,
            degenerate: true,
            ks,
            values,
            terminated_by: Termination::Kmax,
            budget_used,
        };
    }
    let mut terminated_by = Termination::Kmax;
    let mut cur = f.clone();
    let mut k = 1u32;
    loop {
        let value = cur.hs_norm().powf(1.0 / k as f64);
        ks.push(k);
        budget_used.push(cur.term_count());
        if opts.tol > 0.0 {
            if let Some(&prev) = values.last() {
                if prev - value <= opts.tol * value.max(1.0) {
                    values.push(value);
                    terminated_by = Termination::Converged;
                    break;
                }
            }
        }
        values.push(value);
        if k.saturating_mul(2) > opts.max_k {
            break;
        }
        match cur.multiply_budgeted(&cur, opts.budget) {
            Ok(next) => cur = next,
            Err(Error::TermBudgetExceeded { .. }) => {
                terminated_by = Termination::Budget;
                break;
            }
            Err(_) => unreachable!("squaring preserves dimensions"),
        }
        k *= 2;
    }
    BoundSequence {
        method: Method::Rho1,
        certified: true,
        degenerate: false,
        ks,
        values,
        terminated_by,
        budget_used,
    }
}

/// Options for [`rho2_bounds`] and [`rho3_diagnostic`].
#[derive(Debug, Clone, Serialize)]
pub struct Rho2Options {
    /// Iterates are computed for `k = 1, …, kmax`; the degree grows like
    /// `p^k`, so this stays small.
    pub kmax: u32,
    pub budget: usize,
}

impl Default for Rho2Options {
    fn default() -> Self {
        Self {
            kmax: 4,
            budget: DEFAULT_TERM_BUDGET,
        }
    }
}

fn iterate_exponent(p: u32, k: u32) -> f64 {
    let p = p as f64;
    (p - 1.0) / (p.powi(k as i32) - 1.0)
}

fn check_square_map(map: &PolyMap) -> Result<()> {
    if map.input_dimension() != map.output_dimension() {
        return Err(Error::ShapeMismatch(format!(
            "iterate bounds need a square map, got {} -> {}",
            map.input_dimension(),
            map.output_dimension()
        )));
    }
    if map.degree() < 2 {
        return Err(Error::InvalidInput(format!(
            "iterate bounds need coordinate degree ≥ 2, got {} (degree 1 is the matrix power sequence)",
            map.degree()
        )));
    }
    Ok(())
}

/// The iterate sequence `‖F^{∘k}‖_HS^{(p−1)/(p^k−1)}` for a square map of
/// degree `p ≥ 2`, for `k = 1, …, kmax`. Every term bounds the sequence
/// limit from above; for gradient maps of symmetric inputs every term
/// bounds `‖f‖_σ`. Iterates are built as `F ∘ F^{∘(k−1)}`.
pub fn rho2_bounds(map: &PolyMap, opts: &Rho2Options) -> Result<BoundSequence> {
    check_square_map(map)?;
    let degenerate = map.is_zero();
    let mut ks = Vec::new();
    let mut values = Vec::new();
    let mut budget_used = Vec::new();
    let mut terminated_by = Termination::Kmax;
    let mut iterate = map.clone();
    let mut k = 1u32;
    loop {
        let hs = iterate.hs_norm();
        let value = if hs == 0.0 {
            0.0
        } else {
            hs.powf(iterate_exponent(map.degree(), k))
        };
        ks.push(k);
        values.push(value);
        budget_used.push(iterate.term_count());
        if k >= opts.kmax.max(1) {
            break;
        }
        match map.compose_budgeted(&iterate, opts.budget) {
            Ok(next) => iterate = next,
            Err(Error::TermBudgetExceeded { .. }) => {
                terminated_by = Termination::Budget;
                break;
            }
            Err(e) => return Err(e),
        }
        k += 1;
    }
    Ok(BoundSequence {
        method: Method::Rho2,
        certified: true,
        degenerate,
        ks,
        values,
        terminated_by,
        budget_used,
    })
}

/// Settings for the σ estimates inside [`rho3_diagnostic`].
#[derive(Debug, Clone)]
pub struct Rho3Options {
    pub iterates: Rho2Options,
    pub starts: u32,
    pub iters: u32,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Rho3Options {
    fn default() -> Self {
        Self {
            iterates: Rho2Options::default(),
            starts: 16,
            iters: 200,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// The σ-norm analog of [`rho2_bounds`]: the same exponents applied to
/// heuristic spectral-norm estimates of each iterate. The estimates are
/// attained values (lower bounds of each iterate's norm), so this sequence
/// is *not* certified and is flagged accordingly; it exists to compare the
/// two sequences side by side.
pub fn rho3_diagnostic(map: &PolyMap, opts: &Rho3Options) -> Result<BoundSequence> {
    check_square_map(map)?;
    let degenerate = map.is_zero();
    let mut ks = Vec::new();
    let mut values = Vec::new();
    let mut budget_used = Vec::new();
    let mut terminated_by = Termination::Kmax;
    let mut iterate = map.clone();
    let mut k = 1u32;
    loop {
        let sigma = oracle::map_sigma_estimate(
            &iterate,
            &ShopmOptions {
                starts: opts.starts,
                iters: opts.iters,
                tol: opts.tol,
                damping: None,
                seed: opts.seed.wrapping_add(k as u64),
            },
        )?
        .value;
        let value = if sigma == 0.0 {
            0.0
        } else {
            sigma.powf(iterate_exponent(map.degree(), k))
        };
        ks.push(k);
        values.push(value);
        budget_used.push(iterate.term_count());
        if k >= opts.iterates.kmax.max(1) {
            break;
        }
        match map.compose_budgeted(&iterate, opts.iterates.budget) {
            Ok(next) => iterate = next,
            Err(Error::TermBudgetExceeded { .. }) => {
                terminated_by = Termination::Budget;
                break;
            }
            Err(e) => return Err(e),
        }
        k += 1;
    }
    Ok(BoundSequence {
        method: Method::Rho3,
        certified: false,
        degenerate,
        ks,
        values,
        terminated_by,
        budget_used,
    })
}

// ---------------------------------------------------------------------------
// Matrix helpers (desk scale, hand-rolled power iteration)
// ---------------------------------------------------------------------------

fn max_abs_entry(t: &DenseTensor) -> f64 {
    t.data().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn check_symmetric_matrix(s: &DenseTensor) -> Result<usize> {
    if s.modes() != 2 || s.dims()[0] != s.dims()[1] {
        return Err(Error::ShapeMismatch(format!(
            "expected a square matrix, got {:?}",
            s.dims()
        )));
    }
    let n = s.dims()[0];
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            dev = dev.max((s.get(&[i, j]) - s.get(&[j, i])).abs());
        }
    }
    if dev > 1e-12 * max_abs_entry(s).max(1.0) {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    Ok(n)
}

/// Largest eigenvalue of a positive semidefinite matrix by power iteration
/// with Rayleigh-quotient stopping at 1e-12. The Rayleigh quotient converges
/// from below, so the residual norm is added back before returning; the
/// inflation is far below every tolerance used by the callers.
fn lambda_max_psd(m: &DenseTensor) -> f64 {
    let n = m.dims()[0];
    // deterministic generic start
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.001 * (i as f64 + 1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut rho_prev = f64::NEG_INFINITY;
    for _ in 0..20_000 {
        let w = m.contract_power(&v).expect("square matrix");
        let wn = norm2(&w);
        if wn == 0.0 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / wn).collect();
        let mw = m.contract_power(&next).expect("square matrix");
        let rho: f64 = next.iter().zip(&mw).map(|(a, b)| a * b).sum();
        v = next;
        if (rho - rho_prev).abs() <= 1e-12 * rho.abs().max(1.0) {
            let resid: f64 = mw
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - rho * b) * (a - rho * b))
                .sum::<f64>()
                .sqrt();
            return rho + resid;
        }
        rho_prev = rho;
    }
    rho_prev
}

/// Largest `|eigenvalue|` of a symmetric matrix, via power iteration on
/// `S²` (positive semidefinite) and a square root.
pub fn dominant_abs_eigenvalue(s: &DenseTensor) -> Result<f64> {
    check_symmetric_matrix(s)?;
    let sq = s.matmul(s)?;
    Ok(lambda_max_psd(&sq).max(0.0).sqrt())
}

/// The matrix power sequence `‖S^k‖_HS^{1/k}` over the doubling schedule,
/// built by repeated squaring. Nonincreasing, and convergent to the largest
/// `|eigenvalue|` (the spectral norm of the symmetric matrix).
pub fn matrix_power_bounds(s: &DenseTensor, kmax: u32) -> Result<BoundSequence> {
    let n = check_symmetric_matrix(s)?;
    let degenerate = s.is_zero();
    let mut ks = Vec::new();
    let mut values = Vec::new();
    let mut budget_used = Vec::new();
    let mut cur = s.clone();
    let mut k = 1u32;
    loop {
        ks.push(k);
        values.push(if degenerate {
            0.0
        } else {
            cur.hs_norm().powf(1.0 / k as f64)
        });
        budget_used.push(n * n);
        if k.saturating_mul(2) > kmax.max(1) {
            break;
        }
        cur = cur.matmul(&cur)?;
        k *= 2;
    }
    Ok(BoundSequence {
        method: Method::MatrixPower,
        certified: true,
        degenerate,
        ks,
        values,
        terminated_by: Termination::Kmax,
        budget_used,
    })
}

/// Upper bound for 3-tensors: the Gram matrix `M_{k,k'} = Σ_{i,j}
/// t_{i,j,k} t_{i,j,k'}` of the slice quadratic form is positive
/// semidefinite, and `‖T‖_σ ≤ √λ_max(M) ≤ ‖T‖_HS`.
pub fn matrix_bound_d3(t: &DenseTensor) -> Result<f64> {
    if t.modes() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "the quadratic-form bound needs d = 3, got {}",
            t.modes()
        )));
    }
    let (n1, n2, n3) = (t.dims()[0], t.dims()[1], t.dims()[2]);
    let mut m = DenseTensor::zeros(vec![n3, n3])?;
    for k in 0..n3 {
        for kp in k..n3 {
            let mut acc = Accum::new();
            for i in 0..n1 {
                for j in 0..n2 {
                    acc.add(t.get(&[i, j, k]) * t.get(&[i, j, kp]));
                }
            }
            let v = acc.value();
            m.set(&[k, kp], v);
            m.set(&[kp, k], v);
        }
    }
    Ok(lambda_max_psd(&m).max(0.0).sqrt())
}

/// Sum-of-squares sphere bound for symmetric `d ≥ 3` tensors. The entries
/// of the slice matrix `S(x,…,x)` are degree `d−2` polynomials; their sum
/// of squares `τ̃` is nonnegative, so its sphere maximum equals `‖τ̃‖_σ`
/// and is bounded above by `‖τ̃^k‖_HS^{1/k}` for every `k`. Returns
/// `√(min_{k ≤ 4} ‖τ̃^k‖_HS^{1/k})`.
pub fn tau_tilde_bound(t: &DenseTensor) -> Result<f64> {
    tau_tilde_bound_budgeted(t, DEFAULT_TERM_BUDGET)
}

pub fn tau_tilde_bound_budgeted(t: &DenseTensor, budget: usize) -> Result<f64> {
    let d = t.modes();
    if d < 3 {
        return Err(Error::ShapeMismatch(format!(
            "the sum-of-squares bound needs d ≥ 3, got {d}"
        )));
    }
    let n = t.dims()[0];
    if t.dims().iter().any(|&x| x != n) {
        return Err(Error::ShapeMismatch(format!(
            "expected equal mode sizes, got {:?}",
            t.dims()
        )));
    }
    let dev = t.max_asymmetry()?;
    if dev > 1e-12 * max_abs_entry(t).max(1.0) {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    if t.is_zero() {
        return Ok(0.0);
    }
    let deg = (d - 2) as u32;
    // entry polynomials of the tied slice matrix S(x,…,x)
    let mut tau = HomoPoly::zero(n, 2 * deg);
    let trailing = vec![n; d - 2];
    for a in 0..n {
        for b in 0..n {
            let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
            let mut idx = vec![0usize; d];
            idx[0] = a;
            idx[1] = b;
            for_each_index(&trailing, |rest| {
                idx[2..].copy_from_slice(rest);
                let v = t.get(&idx);
                if v != 0.0 {
                    terms.push((count_vector(rest, n).exponents().to_vec(), v));
                }
            });
            let entry = HomoPoly::from_terms(n, deg, terms)?;
            if !entry.is_zero() {
                tau = tau.add(&entry.multiply_budgeted(&entry, budget)?)?;
            }
        }
    }
    if tau.is_zero() {
        return Ok(0.0);
    }
    // bound max_sphere τ̃ by the power sequence of τ̃ at k ≤ 4
    let mut best = f64::INFINITY;
    let mut powk = tau.clone();
    for k in 1..=4u32 {
        best = best.min(powk.hs_norm().powf(1.0 / k as f64));
        if k == 4 {
            break;
        }
        match powk.multiply_budgeted(&tau, budget) {
            Ok(next) => powk = next,
            Err(Error::TermBudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best.max(0.0).sqrt())
}

/// Result of the Collatz–Wielandt iteration.
#[derive(Debug, Clone, Serialize)]
pub struct CwOutcome {
    /// Smallest observed quotient maximum: a certified upper bound on the
    /// spectral radius of `|T|`.
    #[serde(serialize_with = "ser_f17")]
    pub bound: f64,
    /// Final max/min quotient ratio; near 1 at convergence.
    #[serde(serialize_with = "ser_f17")]
    pub spread: f64,
    pub iterations: u32,
    /// Final (entrywise) normalized positive iterate.
    #[serde(serialize_with = "ser_f17_vec")]
    pub vector: Vec<f64>,
}

/// Collatz–Wielandt upper bound on the spectral radius of the entrywise
/// absolute tensor: for any positive `x`, `max_i (|T|×⊗^{d−1}x)_i /
/// x_i^{d−1} ≥ ρ(|T|)`. Runs the normalized entrywise-root iteration from
/// `x0` and returns the smallest quotient maximum observed over iterates
/// with strictly positive `x`. For even `d` this also bounds the spectral
/// norm of the associated polynomial.
pub fn collatz_wielandt_bound(
    t: &DenseTensor,
    x0: &[f64],
    iters: u32,
    tol: f64,
) -> Result<CwOutcome> {
    let n = t.dims()[0];
    if t.dims().iter().any(|&x| x != n) {
        return Err(Error::ShapeMismatch(format!(
            "Collatz–Wielandt needs an equidimensional tensor, got {:?}",
            t.dims()
        )));
    }
    let d = t.modes();
    if d < 2 {
        return Err(Error::ShapeMismatch(
            "Collatz–Wielandt needs d ≥ 2".into(),
        ));
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if x0.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "the starting vector must be strictly positive".to_string(),
        ));
    }
    let a = t.abs();
    let root = 1.0 / (d as f64 - 1.0);
    let mut x = x0.to_vec();
    let mut bound = f64::INFINITY;
    let mut spread = f64::INFINITY;
    let mut iterations = 0u32;
    for _ in 0..iters.max(1) {
        iterations += 1;
        let w = a.contract_power(&x)?;
        let positive = x.iter().all(|&v| v > 0.0);
        let mut maxq = 0.0f64;
        let mut minq = f64::INFINITY;
        for (wi, xi) in w.iter().zip(&x) {
            let q = if *xi > 0.0 {
                wi / xi.powi(d as i32 - 1)
            } else if *wi == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            maxq = maxq.max(q);
            minq = minq.min(q);
        }
        // quotient maxima certify only over strictly positive iterates
        if positive {
            bound = bound.min(maxq);
        }
        if maxq == 0.0 {
            bound = 0.0;
            spread = 1.0;
            break;
        }
        spread = if minq > 0.0 {
            maxq / minq
        } else {
            f64::INFINITY
        };
        if spread - 1.0 <= tol {
            break;
        }
        let y: Vec<f64> = w.iter().map(|wi| wi.max(0.0).powf(root)).collect();
        let s: f64 = y.iter().sum();
        if s == 0.0 || !s.is_finite() {
            break;
        }
        x = y.iter().map(|v| v / s).collect();
    }
    if !bound.is_finite() {
        bound = 0.0;
    }
    Ok(CwOutcome {
        bound,
        spread,
        iterations,
        vector: x,
    })
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

/// What a report run bounds: a polynomial or a dense tensor.
#[derive(Debug, Clone)]
pub enum ProblemInput {
    Poly(HomoPoly),
    Tensor(DenseTensor),
}

/// Full configuration of a report run; echoed verbatim into the report so
/// identical inputs reproduce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub seed: u64,
    pub rho1_max_k: u32,
    pub rho2_kmax: u32,
    pub matrix_kmax: u32,
    pub budget: usize,
    pub starts: u32,
    pub iters: u32,
    #[serde(serialize_with = "ser_f17")]
    pub tol: f64,
    /// Run the grid oracle for n ≤ 3 (0 resolution = per-n default).
    pub grid: bool,
    pub grid_resolution: u32,
    /// Run the uncertified `rho3` diagnostic sequence.
    pub run_rho3: bool,
    pub source: Option<String>,
    pub input_sha256: Option<String>,
    /// Include wall-clock timings in the JSON report. Off by default so
    /// repeated runs stay byte-identical.
    pub include_timings: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            rho1_max_k: 32,
            rho2_kmax: 4,
            matrix_kmax: 64,
            budget: DEFAULT_TERM_BUDGET,
            starts: 32,
            iters: 500,
            tol: 1e-10,
            grid: true,
            grid_resolution: 0,
            run_rho3: true,
            source: None,
            input_sha256: None,
            include_timings: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDescriptor {
    pub kind: &'static str,
    pub n: usize,
    pub d: u32,
    pub dims: Vec<usize>,
    pub source: Option<String>,
    pub sha256: Option<String>,
    pub symmetric: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOutcome {
    pub method: &'static str,
    #[serde(serialize_with = "ser_f17")]
    pub value: f64,
    #[serde(serialize_with = "ser_f17_vec")]
    pub witness: Vec<f64>,
    #[serde(serialize_with = "ser_f17_opt")]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CwReportEntry {
    #[serde(serialize_with = "ser_f17")]
    pub bound: f64,
    #[serde(serialize_with = "ser_f17")]
    pub spread: f64,
    pub iterations: u32,
    #[serde(serialize_with = "ser_f17_vec")]
    pub vector: Vec<f64>,
    /// True when the quotient bound participates in the bracket (even d).
    pub attached: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bracket {
    #[serde(serialize_with = "ser_f17")]
    pub lower: f64,
    #[serde(serialize_with = "ser_f17")]
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodFailure {
    pub method: String,
    pub error: String,
}

/// Everything one run produced: sequences, scalar bounds, the oracle lower
/// bound, and the final bracket.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub version: String,
    pub input: InputDescriptor,
    pub config: ReportConfig,
    pub seed: u64,
    pub sequences: Vec<BoundSequence>,
    #[serde(serialize_with = "ser_f17_opt")]
    pub hs_trivial: Option<f64>,
    #[serde(serialize_with = "ser_f17_opt")]
    pub matrix_d3: Option<f64>,
    #[serde(serialize_with = "ser_f17_opt")]
    pub tau_tilde: Option<f64>,
    pub collatz_wielandt: Option<CwReportEntry>,
    pub oracle_lower: Option<OracleOutcome>,
    pub bracket: Bracket,
    pub warnings: Vec<String>,
    pub method_errors: Vec<MethodFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, u128>>,
}

impl BoundReport {
    /// Canonical JSON with 17-significant-digit floats; byte-identical for
    /// identical (input, config, seed, version).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// True when any sequence stopped on the term budget.
    pub fn budget_truncated(&self) -> bool {
        self.sequences
            .iter()
            .any(|s| s.terminated_by == Termination::Budget)
    }
}

fn validate_bracket(lower: f64, upper: f64) -> Result<()> {
    if lower > upper + 1e-9 * upper.abs().max(1.0) {
        return Err(Error::BracketViolation { lower, upper });
    }
    Ok(())
}

/// Tensors above this entry count are not materialized from polynomials.
const DENSE_MATERIALIZE_LIMIT: f64 = 2e7;

/// Runs every applicable method on the input and assembles the certified
/// bracket: `upper = min` over certified upper bounds, `lower = max` over
/// attained oracle values (never below 0, since `|f|` has 0 as a trivial
/// lower bound). A lower bound exceeding the upper bound beyond tolerance
/// is a correctness bug and fails the run; individual method failures are
/// recorded and skipped.
pub fn assemble_report(input: &ProblemInput, cfg: &ReportConfig) -> Result<BoundReport> {
    let mut warnings: Vec<String> = Vec::new();
    let mut method_errors: Vec<MethodFailure> = Vec::new();
    let mut timings: BTreeMap<String, u128> = BTreeMap::new();
    let mut sequences: Vec<BoundSequence> = Vec::new();
    let mut upper_candidates: Vec<f64> = Vec::new();
    let mut lower_candidates: Vec<f64> = vec![0.0];

    // normalize the two input shapes into (poly?, tensor?, descriptor)
    let (poly, tensor, descriptor) = match input {
        ProblemInput::Poly(f) => {
            let n = f.dimension();
            let d = f.degree();
            let dense_len = (n as f64).powi(d.max(1) as i32);
            let tensor = if d >= 1 && dense_len <= DENSE_MATERIALIZE_LIMIT {
                Some(poly_to_tensor(f)?)
            } else {
                if d >= 1 {
                    warnings.push(format!(
                        "dense tensor of {dense_len:.0} entries not materialized; tensor-side methods skipped"
                    ));
                }
                None
            };
            let desc = InputDescriptor {
                kind: "poly",
                n,
                d,
                dims: vec![n; d as usize],
                source: cfg.source.clone(),
                sha256: cfg.input_sha256.clone(),
                symmetric: true,
            };
            (Some(f.clone()), tensor, desc)
        }
        ProblemInput::Tensor(t) => {
            let equidim = t.dims().iter().all(|&x| x == t.dims()[0]);
            let symmetric = equidim
                && t.max_asymmetry()? <= 1e-12 * max_abs_entry(t).max(1.0)
                && t.modes() >= 1;
            let poly = if symmetric {
                match tensor_to_poly(t, f64::INFINITY) {
                    Ok(f) => Some(f),
                    Err(e) => {
                        method_errors.push(MethodFailure {
                            method: "tensor_to_poly".to_string(),
                            error: e.to_string(),
                        });
                        None
                    }
                }
            } else {
                None
            };
            let desc = InputDescriptor {
                kind: "tensor",
                n: t.dims().iter().copied().max().unwrap_or(0),
                d: t.modes() as u32,
                dims: t.dims().to_vec(),
                source: cfg.source.clone(),
                sha256: cfg.input_sha256.clone(),
                symmetric,
            };
            (poly, Some(t.clone()), desc)
        }
    };

    // trivial Hilbert-Schmidt bound (identical on both representations)
    let hs_trivial = match (&poly, &tensor) {
        (Some(f), _) => Some(f.hs_norm()),
        (None, Some(t)) => Some(t.hs_norm()),
        (None, None) => None,
    };
    if let Some(h) = hs_trivial {
        upper_candidates.push(h);
    }

    // rho1 power sequence
    if let Some(f) = &poly {
        if f.degree() >= 1 {
            let t0 = Instant::now();
            let seq = rho1_bounds(
                f,
                &Rho1Options {
                    max_k: cfg.rho1_max_k,
                    budget: cfg.budget,
                    tol: 0.0,
                },
            );
            timings.insert("rho1".into(), t0.elapsed().as_micros());
            if let Some(v) = seq.best() {
                upper_candidates.push(v);
            }
            sequences.push(seq);
        }
    }

    // matrix power sequence for d = 2
    if descriptor.d == 2 && descriptor.symmetric {
        if let Some(t) = &tensor {
            let t0 = Instant::now();
            match matrix_power_bounds(t, cfg.matrix_kmax) {
                Ok(seq) => {
                    if let Some(v) = seq.best() {
                        upper_candidates.push(v);
                    }
                    sequences.push(seq);
                }
                Err(e) => method_errors.push(MethodFailure {
                    method: "matrix_power".into(),
                    error: e.to_string(),
                }),
            }
            timings.insert("matrix_power".into(), t0.elapsed().as_micros());
        }
    }

    // gradient-map iterate sequences for degree ≥ 3 symmetric inputs
    if let Some(f) = &poly {
        if f.degree() >= 3 && !f.is_zero() {
            match f.gradient_map() {
                Ok(grad) => {
                    let t0 = Instant::now();
                    match rho2_bounds(
                        &grad,
                        &Rho2Options {
                            kmax: cfg.rho2_kmax,
                            budget: cfg.budget,
                        },
                    ) {
                        Ok(seq) => {
                            if let Some(v) = seq.best() {
                                upper_candidates.push(v);
                            }
                            sequences.push(seq);
                        }
                        Err(e) => method_errors.push(MethodFailure {
                            method: "rho2".into(),
                            error: e.to_string(),
                        }),
                    }
                    timings.insert("rho2".into(), t0.elapsed().as_micros());
                    if cfg.run_rho3 {
                        let t0 = Instant::now();
                        match rho3_diagnostic(
                            &grad,
                            &Rho3Options {
                                iterates: Rho2Options {
                                    kmax: cfg.rho2_kmax,
                                    budget: cfg.budget,
                                },
                                starts: cfg.starts.min(16),
                                iters: cfg.iters.min(200),
                                tol: cfg.tol,
                                seed: cfg.seed,
                            },
                        ) {
                            Ok(seq) => sequences.push(seq),
                            Err(e) => method_errors.push(MethodFailure {
                                method: "rho3".into(),
                                error: e.to_string(),
                            }),
                        }
                        timings.insert("rho3".into(), t0.elapsed().as_micros());
                    }
                }
                Err(e) => method_errors.push(MethodFailure {
                    method: "gradient_map".into(),
                    error: e.to_string(),
                }),
            }
        }
    }

    // d = 3 quadratic-form bound (valid for general 3-tensors)
    let mut matrix_d3 = None;
    if descriptor.d == 3 {
        if let Some(t) = &tensor {
            let t0 = Instant::now();
            match matrix_bound_d3(t) {
                Ok(v) => {
                    matrix_d3 = Some(v);
                    upper_candidates.push(v);
                }
                Err(e) => method_errors.push(MethodFailure {
                    method: "matrix_d3".into(),
                    error: e.to_string(),
                }),
            }
            timings.insert("matrix_d3".into(), t0.elapsed().as_micros());
        }
    }

    // sum-of-squares bound for symmetric d ≥ 3
    let mut tau_tilde = None;
    if descriptor.d >= 3 && descriptor.symmetric {
        if let Some(t) = &tensor {
            let t0 = Instant::now();
            match tau_tilde_bound_budgeted(t, cfg.budget) {
                Ok(v) => {
                    tau_tilde = Some(v);
                    upper_candidates.push(v);
                }
                Err(e) => method_errors.push(MethodFailure {
                    method: "tau_tilde".into(),
                    error: e.to_string(),
                }),
            }
            timings.insert("tau_tilde".into(), t0.elapsed().as_micros());
        }
    }

    // Collatz–Wielandt quotients; attached to the bracket for even d only
    let mut collatz_wielandt = None;
    if descriptor.d >= 2 && descriptor.symmetric {
        if let Some(t) = &tensor {
            let t0 = Instant::now();
            let x0 = vec![1.0; t.dims()[0]];
            match collatz_wielandt_bound(t, &x0, cfg.iters.max(1), cfg.tol) {
                Ok(outcome) => {
                    let attached = descriptor.d % 2 == 0;
                    if attached {
                        upper_candidates.push(outcome.bound);
                    }
                    collatz_wielandt = Some(CwReportEntry {
                        bound: outcome.bound,
                        spread: outcome.spread,
                        iterations: outcome.iterations,
                        vector: outcome.vector,
                        attached,
                    });
                }
                Err(e) => method_errors.push(MethodFailure {
                    method: "collatz_wielandt".into(),
                    error: e.to_string(),
                }),
            }
            timings.insert("collatz_wielandt".into(), t0.elapsed().as_micros());
        }
    }

    // oracle lower bound
    let mut oracle_lower: Option<OracleOutcome> = None;
    let t0 = Instant::now();
    if let Some(f) = &poly {
        if !f.is_zero() {
            let mut best: Option<OracleOutcome> = None;
            if f.degree() >= 2 {
                match oracle::shopm_lower_bound(
                    f,
                    &ShopmOptions {
                        starts: cfg.starts,
                        iters: cfg.iters,
                        tol: 1e-12,
                        damping: None,
                        seed: cfg.seed,
                    },
                ) {
                    Ok(w) => {
                        best = Some(OracleOutcome {
                            method: "shopm",
                            value: w.value,
                            witness: w.witness,
                            residual: Some(w.residual),
                        })
                    }
                    Err(e) => method_errors.push(MethodFailure {
                        method: "shopm".into(),
                        error: e.to_string(),
                    }),
                }
            } else if f.degree() == 1 {
                // a linear form peaks at its normalized coefficient vector
                let mut c = vec![0.0; f.dimension()];
                for (j, v) in f.terms() {
                    let i = j.exponents().iter().position(|&e| e == 1).unwrap();
                    c[i] = v;
                }
                let norm = norm2(&c);
                if norm > 0.0 {
                    let witness: Vec<f64> = c.iter().map(|v| v / norm).collect();
                    best = Some(OracleOutcome {
                        method: "direct",
                        value: f.eval(&witness)?.abs(),
                        witness,
                        residual: None,
                    });
                }
            } else {
                // constants take the same value everywhere on the sphere
                let mut witness = vec![0.0; f.dimension()];
                if let Some(first) = witness.first_mut() {
                    *first = 1.0;
                }
                best = Some(OracleOutcome {
                    method: "direct",
                    value: f.eval(&witness)?.abs(),
                    witness,
                    residual: None,
                });
            }
            if cfg.grid && f.dimension() <= 3 && f.degree() >= 1 {
                match oracle::grid_oracle(f, cfg.grid_resolution) {
                    Ok(w) => {
                        let replace = best.as_ref().map_or(true, |b| w.value > b.value);
                        if replace {
                            best = Some(OracleOutcome {
                                method: "grid",
                                value: w.value,
                                witness: w.witness,
                                residual: None,
                            });
                        }
                    }
                    Err(e) => method_errors.push(MethodFailure {
                        method: "grid".into(),
                        error: e.to_string(),
                    }),
                }
            }
            oracle_lower = best;
        }
    } else if let Some(t) = &tensor {
        if !t.is_zero() {
            let est = crate::tensor::hopm_spectral_estimate(
                t,
                &HopmOptions {
                    starts: cfg.starts,
                    iters: cfg.iters,
                    tol: cfg.tol,
                    seed: cfg.seed,
                },
            );
            let witness = est.factors.concat();
            oracle_lower = Some(OracleOutcome {
                method: "hopm",
                value: est.value,
                witness,
                residual: None,
            });
        }
    }
    timings.insert("oracle".into(), t0.elapsed().as_micros());

    if let Some(o) = &oracle_lower {
        lower_candidates.push(o.value);
    }

    let upper = upper_candidates
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let upper = if upper.is_finite() { upper } else { 0.0 };
    let lower = lower_candidates
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);

    // certified ordering: every certified upper bound must clear the lower
    // bound; a violation is a bug, not a numerical nuisance
    for v in &upper_candidates {
        validate_bracket(lower, *v)?;
    }
    validate_bracket(lower, upper)?;

    Ok(BoundReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: descriptor,
        config: cfg.clone(),
        seed: cfg.seed,
        sequences,
        hs_trivial,
        matrix_d3,
        tau_tilde,
        collatz_wielandt,
        oracle_lower,
        bracket: Bracket { lower, upper },
        warnings,
        method_errors,
        timings: if cfg.include_timings {
            Some(timings)
        } else {
            None
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, p: u32, terms: &[(&[u32], f64)]) -> HomoPoly {
        HomoPoly::from_terms(n, p, terms.iter().map(|(j, c)| (j.to_vec(), *c))).unwrap()
    }

    fn sum_of_squares() -> HomoPoly {
        poly(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)])
    }

    #[test]
    fn rho1_rank_one_constant() {
        let f = HomoPoly::linear_form(&[1.0, 1.0]).unwrap().power(2).unwrap();
        let seq = rho1_bounds(&f, &Rho1Options::default());
        assert_eq!(seq.ks, vec![1, 2, 4, 8, 16, 32]);
        for v in &seq.values {
            assert!((v - 2.0).abs() < 1e-9 * 2.0, "value {v}");
        }
    }

    #[test]
    fn rho1_diagonal_values_and_monotone() {
        let seq = rho1_bounds(&sum_of_squares(), &Rho1Options::default());
        assert!((seq.values[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((seq.values[1] - (8.0f64 / 3.0).powf(0.25)).abs() < 1e-12);
        for w in seq.values.windows(2) {
            assert!(w[1] < w[0] - 1e-10, "strictly decreasing along doubling");
        }
        // the paper-style sandwich at n = 2: values in [2^{1/2k}, (k+1)^{1/k}]
        for (k, v) in seq.ks.iter().zip(&seq.values) {
            let k = *k as f64;
            assert!(*v >= 2f64.powf(1.0 / (2.0 * k)) - 1e-12);
            assert!(*v <= (k + 1.0).powf(1.0 / k) + 1e-12);
        }
        assert_eq!(seq.terminated_by, Termination::Kmax);
    }

    #[test]
    fn rho1_zero_polynomial_degenerate() {
        let seq = rho1_bounds(&HomoPoly::zero(2, 3), &Rho1Options::default());
        assert!(seq.degenerate);
        assert!(seq.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rho1_budget_truncates() {
        let f = poly(3, 2, &[(&[2, 0, 0], 1.0), (&[0, 2, 0], 1.0), (&[1, 0, 1], 0.5)]);
        let seq = rho1_bounds(
            &f,
            &Rho1Options {
                max_k: 32,
                budget: 10,
                tol: 0.0,
            },
        );
        assert_eq!(seq.terminated_by, Termination::Budget);
        assert!(seq.ks.len() < 6);
    }

    #[test]
    fn rho2_diagonal_values() {
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[0, 3], 1.0)]);
        let grad = f.gradient_map().unwrap();
        let seq = rho2_bounds(&grad, &Rho2Options::default()).unwrap();
        assert_eq!(seq.ks, vec![1, 2, 3, 4]);
        for (k, v) in seq.ks.iter().zip(&seq.values) {
            let expect = 2f64.sqrt().powf(1.0 / (2f64.powi(*k as i32) - 1.0));
            assert!((v - expect).abs() < 1e-9, "k={k}: {v} vs {expect}");
        }
    }

    #[test]
    fn rho2_rank_one_constant() {
        // gradient map of a(cᵀx)^{p+1} has rank-one coefficient tensor; the
        // sequence is constant |a|·‖c‖^{p+1} for unit c
        let a = 0.7;
        let f = HomoPoly::linear_form(&[0.6, 0.8])
            .unwrap()
            .power(3)
            .unwrap()
            .scale(a);
        let grad = f.gradient_map().unwrap();
        let seq = rho2_bounds(&grad, &Rho2Options::default()).unwrap();
        for v in &seq.values {
            assert!((v - a).abs() < 1e-9, "value {v} vs {a}");
        }
    }

    #[test]
    fn rho2_rejects_linear_and_rectangular() {
        let id = PolyMap::identity(2);
        assert!(rho2_bounds(&id, &Rho2Options::default()).is_err());
        let rect = PolyMap::new(
            2,
            vec![poly(2, 2, &[(&[2, 0], 1.0)])],
        )
        .unwrap();
        assert!(rho2_bounds(&rect, &Rho2Options::default()).is_err());
    }

    #[test]
    fn rho3_below_rho2() {
        let mut rng = crate::util::stream_rng(31, 0);
        for trial in 0..5 {
            let coords: Vec<HomoPoly> = (0..2)
                .map(|_| {
                    HomoPoly::from_terms(
                        2,
                        2,
                        [
                            (vec![2, 0], crate::util::standard_normal(&mut rng)),
                            (vec![1, 1], crate::util::standard_normal(&mut rng)),
                            (vec![0, 2], crate::util::standard_normal(&mut rng)),
                        ],
                    )
                    .unwrap()
                })
                .collect();
            let map = PolyMap::new(2, coords).unwrap();
            let opts = Rho2Options {
                kmax: 3,
                budget: DEFAULT_TERM_BUDGET,
            };
            let r2 = rho2_bounds(&map, &opts).unwrap();
            let r3 = rho3_diagnostic(
                &map,
                &Rho3Options {
                    iterates: opts,
                    seed: trial,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(!r3.certified);
            for (a, b) in r3.values.iter().zip(&r2.values) {
                assert!(*a <= *b + 1e-9, "rho3 {a} vs rho2 {b}");
            }
        }
    }

    #[test]
    fn matrix_power_cases() {
        let s = DenseTensor::new(vec![2, 2], vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let seq = matrix_power_bounds(&s, 2).unwrap();
        assert!((seq.values[0] - 10f64.sqrt()).abs() < 1e-12);
        assert!((seq.values[1] - 82f64.powf(0.25)).abs() < 1e-12);

        // rank-one aaᵀ has constant sequence ‖a‖²
        let a = [0.6, 0.8];
        let mut data = vec![0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                data[i * 2 + j] = a[i] * a[j];
            }
        }
        let r1 = DenseTensor::new(vec![2, 2], data).unwrap();
        let seq = matrix_power_bounds(&r1, 16).unwrap();
        for v in &seq.values {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let z = DenseTensor::zeros(vec![3, 3]).unwrap();
        let seq = matrix_power_bounds(&z, 4).unwrap();
        assert!(seq.degenerate);
        assert!(seq.values.iter().all(|&v| v == 0.0));

        let asym = DenseTensor::new(vec![2, 2], vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            matrix_power_bounds(&asym, 4),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn dominant_eigenvalue_matches_closed_form() {
        let s = DenseTensor::new(vec![2, 2], vec![3.0, 0.0, 0.0, -4.0]).unwrap();
        let lam = dominant_abs_eigenvalue(&s).unwrap();
        assert!((lam - 4.0).abs() < 1e-10);
    }

    #[test]
    fn matrix_d3_cases() {
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        t.set(&[0, 0, 0], 1.0);
        t.set(&[1, 1, 1], 1.0);
        let b = matrix_bound_d3(&t).unwrap();
        assert!((b - 1.0).abs() < 1e-10);
        assert!((t.hs_norm() - 2f64.sqrt()).abs() < 1e-12);

        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        assert_eq!(matrix_bound_d3(&z).unwrap(), 0.0);

        let m = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert!(matrix_bound_d3(&m).is_err());
    }

    #[test]
    fn matrix_d3_between_oracle_and_hs() {
        let mut rng = crate::util::stream_rng(41, 0);
        for _ in 0..100 {
            let data: Vec<f64> = (0..8).map(|_| crate::util::standard_normal(&mut rng)).collect();
            let t = DenseTensor::new(vec![2, 2, 2], data).unwrap();
            let bound = matrix_bound_d3(&t).unwrap();
            let hs = t.hs_norm();
            assert!(bound <= hs + 1e-10, "bound {bound} vs hs {hs}");
            let est = crate::tensor::hopm_spectral_estimate(
                &t,
                &HopmOptions {
                    starts: 8,
                    ..Default::default()
                },
            );
            assert!(est.value <= bound + 1e-9 * bound.max(1.0));
        }
    }

    #[test]
    fn tau_tilde_cases() {
        // diagonal d=4, λ = (1,1): τ̃ max is 1, so the bound is ≥ the true
        // spectral norm 1 and ≤ the bound of τ̃'s own power sequence
        let mut t = DenseTensor::zeros(vec![2, 2, 2, 2]).unwrap();
        t.set(&[0, 0, 0, 0], 1.0);
        t.set(&[1, 1, 1, 1], 1.0);
        let b = tau_tilde_bound(&t).unwrap();
        assert!(b >= 1.0 - 1e-12, "bound {b}");
        assert!(b <= t.hs_norm() + 1e-12);

        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        assert_eq!(tau_tilde_bound(&z).unwrap(), 0.0);

        let mut asym = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        asym.set(&[0, 0, 1], 1.0);
        assert!(matches!(
            tau_tilde_bound(&asym),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn tau_tilde_weaker_or_equal_checks_against_d3_matrix_bound() {
        let mut rng = crate::util::stream_rng(43, 0);
        for _ in 0..100 {
            let f = HomoPoly::from_terms(
                2,
                3,
                [
                    (vec![3, 0], crate::util::standard_normal(&mut rng)),
                    (vec![2, 1], crate::util::standard_normal(&mut rng)),
                    (vec![1, 2], crate::util::standard_normal(&mut rng)),
                    (vec![0, 3], crate::util::standard_normal(&mut rng)),
                ],
            )
            .unwrap();
            let t = poly_to_tensor(&f).unwrap();
            let tau = tau_tilde_bound(&t).unwrap();
            let d3 = matrix_bound_d3(&t).unwrap();
            assert!(
                tau >= d3 - 1e-9,
                "observed ordering violated: tau {tau} vs d3 {d3}"
            );
        }
    }

    #[test]
    fn cw_cases() {
        // all-ones 2×2×2×2: positive eigenvector (1,1), quotient 8
        let ones = DenseTensor::new(vec![2; 4], vec![1.0; 16]).unwrap();
        let out = collatz_wielandt_bound(&ones, &[1.0, 1.0], 100, 1e-12).unwrap();
        assert!((out.bound - 8.0).abs() < 1e-9);
        assert!(out.spread - 1.0 < 1e-9);

        // diagonal nonnegative: bound is max λ
        let mut t = DenseTensor::zeros(vec![2, 2, 2, 2]).unwrap();
        t.set(&[0, 0, 0, 0], 1.0);
        t.set(&[1, 1, 1, 1], 0.5);
        let out = collatz_wielandt_bound(&t, &[1.0, 1.0], 200, 1e-12).unwrap();
        assert!((out.bound - 1.0).abs() < 1e-9, "bound {}", out.bound);

        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        let out = collatz_wielandt_bound(&z, &[1.0, 1.0], 10, 1e-12).unwrap();
        assert_eq!(out.bound, 0.0);

        let bad = collatz_wielandt_bound(&z, &[1.0, 0.0], 10, 1e-12);
        assert!(bad.is_err());
    }

    #[test]
    fn strictness_on_generic_cubics() {
        let mut rng = crate::util::stream_rng(47, 0);
        for trial in 0..100 {
            let f = HomoPoly::from_terms(
                2,
                3,
                [
                    (vec![3, 0], crate::util::standard_normal(&mut rng)),
                    (vec![2, 1], crate::util::standard_normal(&mut rng)),
                    (vec![1, 2], crate::util::standard_normal(&mut rng)),
                    (vec![0, 3], crate::util::standard_normal(&mut rng)),
                ],
            )
            .unwrap();
            let seq = rho1_bounds(
                &f,
                &Rho1Options {
                    max_k: 2,
                    ..Default::default()
                },
            );
            assert!(
                seq.values[1] < seq.values[0] - 1e-10,
                "trial {trial}: no strict decrease"
            );
        }
    }

    #[test]
    fn assemble_diagonal_quadratic() {
        let f = sum_of_squares();
        let report = assemble_report(
            &ProblemInput::Poly(f),
            &ReportConfig {
                rho1_max_k: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((report.bracket.lower - 1.0).abs() < 1e-9);
        // CW already certifies 1.0 for this input, so the bracket closes
        assert!(report.bracket.upper <= (8.0f64 / 3.0).powf(0.25) + 1e-12);
        assert!(report.bracket.upper >= report.bracket.lower - 1e-9);
        let rho1 = report
            .sequences
            .iter()
            .find(|s| s.method == Method::Rho1)
            .unwrap();
        assert!((rho1.values[1] - (8.0f64 / 3.0).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn assemble_rank_one_square() {
        let f = HomoPoly::linear_form(&[1.0, 1.0]).unwrap().power(2).unwrap();
        let report = assemble_report(&ProblemInput::Poly(f), &ReportConfig::default()).unwrap();
        assert!((report.bracket.lower - 2.0).abs() < 1e-9);
        assert!((report.bracket.upper - 2.0).abs() < 1e-9);
    }

    #[test]
    fn assemble_zero_input() {
        let report = assemble_report(
            &ProblemInput::Poly(HomoPoly::zero(2, 3)),
            &ReportConfig::default(),
        )
        .unwrap();
        assert_eq!(report.bracket.lower, 0.0);
        assert_eq!(report.bracket.upper, 0.0);
    }

    #[test]
    fn assemble_general_tensor() {
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        t.set(&[0, 0, 1], 1.0);
        t.set(&[1, 0, 0], -2.0);
        let report = assemble_report(&ProblemInput::Tensor(t), &ReportConfig::default()).unwrap();
        assert!(!report.input.symmetric);
        assert!(report.matrix_d3.is_some());
        assert!(report.oracle_lower.is_some());
        assert!(report.bracket.lower <= report.bracket.upper + 1e-9);
    }

    #[test]
    fn bracket_violation_is_hard_failure() {
        assert!(validate_bracket(1.0, 2.0).is_ok());
        assert!(validate_bracket(2.0, 2.0 - 1e-12).is_ok());
        assert!(matches!(
            validate_bracket(2.1, 2.0),
            Err(Error::BracketViolation { .. })
        ));
    }

    #[test]
    fn report_json_deterministic() {
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[2, 1], -0.5), (&[0, 3], 0.25)]);
        let cfg = ReportConfig {
            seed: 42,
            ..Default::default()
        };
        let a = assemble_report(&ProblemInput::Poly(f.clone()), &cfg)
            .unwrap()
            .to_json();
        let b = assemble_report(&ProblemInput::Poly(f), &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn map_submultiplicative_iterates() {
        let mut rng = crate::util::stream_rng(53, 0);
        for _ in 0..20 {
            let coords: Vec<HomoPoly> = (0..2)
                .map(|_| {
                    HomoPoly::from_terms(
                        2,
                        2,
                        [
                            (vec![2, 0], crate::util::standard_normal(&mut rng)),
                            (vec![1, 1], crate::util::standard_normal(&mut rng)),
                            (vec![0, 2], crate::util::standard_normal(&mut rng)),
                        ],
                    )
                    .unwrap()
                })
                .collect();
            let map = PolyMap::new(2, coords).unwrap();
            let p = map.degree();
            // ‖F^{∘(k+l)}‖ ≤ ‖F^{∘k}‖·‖F^{∘l}‖^{p^k} for k + l ≤ 4
            let mut iterates = vec![map.clone()];
            for _ in 1..4 {
                let next = map.compose(iterates.last().unwrap()).unwrap();
                iterates.push(next);
            }
            for k in 1..=3usize {
                for l in 1..=(4 - k) {
                    let lhs = iterates[k + l - 1].hs_norm();
                    let rhs = iterates[k - 1].hs_norm()
                        * iterates[l - 1].hs_norm().powi((p as i32).pow(k as u32));
                    assert!(lhs <= rhs * (1.0 + 1e-9), "k={k} l={l}: {lhs} vs {rhs}");
                }
            }
        }
    }
}
