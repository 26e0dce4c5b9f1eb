//! Quasi-Feynman propagation.
//!
//! The central object is the step operator `R(t) = exp(i a (S(|t|) - I) sign t)`
//! built from a tangent family `S`. Its n-fold product at `t/n` approximates
//! the unitary group, and expanding the bounded-operator exponential in
//! different ways yields six cross-checkable formula variants:
//!
//! * `F1Product`  - `(R(t/n))^n f`, the step product;
//! * `F1Merged`   - `exp(i a n (S(|t/n|) - I) sign t) f` in one exponential;
//! * `F2Taylor`   - partial power series of the merged exponent;
//! * `F3Binomial` - F2 re-expanded over powers of `S`;
//! * `F4Euler`    - `[(1 - ian sign(t)/k) I + (ian sign(t)/k) S]^k f`;
//! * `F5EulerBinomial`, `F6FullBinomial` - binomial re-expansions of F4.
//!
//! F3/F5/F6 exist to cross-check the algebra, not for production use: their
//! coefficients alternate in sign and blow up with `n` and `k`, so they are
//! guarded to `n <= 8`, `k <= 40` with explicit cancellation monitoring.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::{QfeyError, Result};
use crate::families::TangentFamily;
use crate::grid::WaveFunction;
use crate::operators::{exp_apply_with, exp_bounded, ExpMethod, LinearOperator};

/// Guards for the alternating-coefficient formulas F3/F5/F6.
pub const BINOMIAL_MAX_N: usize = 8;
pub const BINOMIAL_MAX_K: usize = 40;
/// Contributions larger than this multiple of `||f||` lose more than
/// 1e6 ulp to cancellation and are rejected.
const CANCELLATION_GUARD: f64 = 1e6;

/// Which formula variant to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaId {
    F1Product,
    F1Merged,
    F2Taylor,
    F3Binomial,
    F4Euler,
    F5EulerBinomial,
    F6FullBinomial,
}

impl FormulaId {
    pub const ALL: [FormulaId; 7] = [
        FormulaId::F1Product,
        FormulaId::F1Merged,
        FormulaId::F2Taylor,
        FormulaId::F3Binomial,
        FormulaId::F4Euler,
        FormulaId::F5EulerBinomial,
        FormulaId::F6FullBinomial,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FormulaId::F1Product => "F1_product",
            FormulaId::F1Merged => "F1_merged",
            FormulaId::F2Taylor => "F2_taylor",
            FormulaId::F3Binomial => "F3_binomial",
            FormulaId::F4Euler => "F4_euler",
            FormulaId::F5EulerBinomial => "F5_euler_binomial",
            FormulaId::F6FullBinomial => "F6_full_binomial",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        FormulaId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| QfeyError::InvalidParameter(format!("unknown formula id '{s}'")))
    }

    /// True for the variants that expand into alternating binomial sums.
    pub fn needs_guard(&self) -> bool {
        matches!(
            self,
            FormulaId::F3Binomial | FormulaId::F5EulerBinomial | FormulaId::F6FullBinomial
        )
    }
}

/// Parameters of one propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSpec {
    pub a: f64,
    pub t: f64,
    pub n: usize,
    pub exp_method: ExpMethod,
    pub formula: FormulaId,
}

impl PropagationSpec {
    pub fn new(a: f64, t: f64, n: usize) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(QfeyError::InvalidParameter(format!(
                "need a nonzero finite a, got {a}"
            )));
        }
        if !t.is_finite() {
            return Err(QfeyError::InvalidParameter("t must be finite".into()));
        }
        if n == 0 {
            return Err(QfeyError::InvalidParameter("need n >= 1".into()));
        }
        Ok(PropagationSpec {
            a,
            t,
            n,
            exp_method: ExpMethod::default(),
            formula: FormulaId::F1Product,
        })
    }

    pub fn with_method(mut self, method: ExpMethod) -> Self {
        self.exp_method = method;
        self
    }

    pub fn with_formula(mut self, formula: FormulaId) -> Self {
        self.formula = formula;
        self
    }
}

fn sign(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// The merged quasi-Feynman operator `exp(i a n (S(|t|/n) - I) sign t)`,
/// returned densely. For `t = 0` this is the identity. The single step of
/// the F1 product equals this operator with `n = 1` at `t/n`.
pub fn quasi_feynman_step(
    family: &TangentFamily,
    a: f64,
    t: f64,
    n: usize,
) -> Result<LinearOperator> {
    if a == 0.0 || n == 0 {
        return Err(QfeyError::InvalidParameter(
            "quasi_feynman_step needs a != 0 and n >= 1".into(),
        ));
    }
    let grid = family.grid();
    if t == 0.0 {
        return Ok(LinearOperator::identity(grid));
    }
    let s_op = family.build(t.abs() / n as f64)?;
    let c = Complex64::new(0.0, a * n as f64 * sign(t));
    let m = grid.len();
    let exponent = {
        let mut mat = s_op.densify() * c;
        for i in 0..m {
            mat[(i, i)] -= c;
        }
        LinearOperator::from_dense(grid, mat)?
    };
    exp_bounded(&exponent, ExpMethod::default())
}

/// One matrix-free application of the step `R(sign(t) |t|/n)` to `f`.
pub fn schrodinger_step(
    family: &TangentFamily,
    a: f64,
    t: f64,
    n: usize,
    f: &WaveFunction,
    method: ExpMethod,
) -> Result<WaveFunction> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    let s_op = family.build(t.abs() / n as f64)?;
    step_apply(&s_op, Complex64::new(0.0, a * sign(t)), f, method)
}

/// Apply `exp(c (S - I))` to `f` matrix-free.
fn step_apply(
    s_op: &LinearOperator,
    c: Complex64,
    f: &WaveFunction,
    method: ExpMethod,
) -> Result<WaveFunction> {
    let bound = c.norm() * (s_op.norm_bound() + 1.0);
    exp_apply_with(
        |v| {
            let mut sv = s_op.apply(v)?;
            sv = sv.sub(v)?;
            Ok(sv.scale(c))
        },
        bound,
        f,
        method,
    )
}

/// Quasi-Feynman approximation of `exp(i a t H) f` (formulas F1 only;
/// the expanded variants live in [`evaluate_formula`]).
pub fn evolve_schrodinger(
    family: &TangentFamily,
    spec: &PropagationSpec,
    f: &WaveFunction,
) -> Result<WaveFunction> {
    if f.grid() != family.grid() {
        return Err(QfeyError::GridMismatch);
    }
    if spec.t == 0.0 {
        return Ok(f.clone());
    }
    let with_n = |e: QfeyError| QfeyError::Propagation {
        n: spec.n,
        source: Box::new(e),
    };
    let s_op = family.build(spec.t.abs() / spec.n as f64)?;
    match spec.formula {
        FormulaId::F1Product => {
            let c = Complex64::new(0.0, spec.a * sign(spec.t));
            let mut state = f.clone();
            for _ in 0..spec.n {
                state = step_apply(&s_op, c, &state, spec.exp_method).map_err(with_n)?;
            }
            Ok(state)
        }
        FormulaId::F1Merged => {
            let c = Complex64::new(0.0, spec.a * spec.n as f64 * sign(spec.t));
            step_apply(&s_op, c, f, spec.exp_method).map_err(with_n)
        }
        other => Err(QfeyError::InvalidParameter(format!(
            "evolve_schrodinger handles F1 variants; use evaluate_formula for {}",
            other.name()
        ))),
    }
}

/// Chernoff product for the semigroup: `(S(t/n))^n f`, `t >= 0`.
pub fn evolve_heat(
    family: &TangentFamily,
    t: f64,
    n: usize,
    f: &WaveFunction,
) -> Result<WaveFunction> {
    if t < 0.0 {
        return Err(QfeyError::InvalidParameter(format!(
            "evolve_heat needs t >= 0, got {t}"
        )));
    }
    if n == 0 {
        return Err(QfeyError::InvalidParameter("need n >= 1".into()));
    }
    if f.grid() != family.grid() {
        return Err(QfeyError::GridMismatch);
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let s_op = family.build(t / n as f64)?;
    let mut state = f.clone();
    for _ in 0..n {
        state = s_op.apply(&state)?;
    }
    Ok(state)
}

/// Evaluate the inner finite-k expression of an expanded formula variant at
/// the given `(n, k)`. F2/F4 run matrix-free; F3/F5/F6 accumulate explicit
/// coefficients over powers of `S(|t|/n)` and are guarded against the
/// cancellation regime.
pub fn evaluate_formula(
    family: &TangentFamily,
    spec: &PropagationSpec,
    f: &WaveFunction,
    k: usize,
) -> Result<WaveFunction> {
    if f.grid() != family.grid() {
        return Err(QfeyError::GridMismatch);
    }
    if spec.formula.needs_guard() && (spec.n > BINOMIAL_MAX_N || k > BINOMIAL_MAX_K) {
        return Err(QfeyError::GuardViolation(format!(
            "{} requires n <= {BINOMIAL_MAX_N} and k <= {BINOMIAL_MAX_K}, got n = {}, k = {k}",
            spec.formula.name(),
            spec.n
        )));
    }
    if spec.t == 0.0 {
        // sign(0) = 0 makes every variant the identity
        return Ok(f.clone());
    }
    let s_op = family.build(spec.t.abs() / spec.n as f64)?;
    let z = Complex64::new(0.0, spec.a * spec.n as f64 * sign(spec.t));
    match spec.formula {
        FormulaId::F2Taylor => {
            // sum_{m=0}^{k} z^m / m! (S - I)^m f
            let mut acc = f.clone();
            let mut term = f.clone();
            for m in 1..=k {
                let sv = s_op.apply(&term)?;
                term = sv.sub(&term)?.scale(z / m as f64);
                acc.axpy(Complex64::new(1.0, 0.0), &term)?;
            }
            Ok(acc)
        }
        FormulaId::F4Euler => {
            if k == 0 {
                return Ok(f.clone());
            }
            let w = z / k as f64;
            let mut state = f.clone();
            for _ in 0..k {
                let sv = s_op.apply(&state)?;
                let delta = sv.sub(&state)?;
                state.axpy(w, &delta)?;
            }
            Ok(state)
        }
        FormulaId::F3Binomial => {
            let coeffs = f3_coefficients(z, k);
            accumulate_powers(&s_op, f, &coeffs)
        }
        FormulaId::F5EulerBinomial => {
            let coeffs = f5_coefficients(z, k);
            accumulate_powers(&s_op, f, &coeffs)
        }
        FormulaId::F6FullBinomial => {
            let coeffs = f6_coefficients(z, k);
            accumulate_powers(&s_op, f, &coeffs)
        }
        FormulaId::F1Product | FormulaId::F1Merged => Err(QfeyError::InvalidParameter(
            "evaluate_formula handles the expanded variants F2..F6".into(),
        )),
    }
}

/// A coefficient together with the peak magnitude reached while summing it,
/// used to detect catastrophic cancellation.
struct GuardedCoeff {
    value: Complex64,
    peak: f64,
}

/// `c_q = z^q / q! * sum_{j=0}^{k-q} (-z)^j / j!` for F3.
fn f3_coefficients(z: Complex64, k: usize) -> Vec<GuardedCoeff> {
    let mut coeffs = Vec::with_capacity(k + 1);
    let mut zq_over_q = Complex64::new(1.0, 0.0);
    for q in 0..=k {
        if q > 0 {
            zq_over_q *= z / q as f64;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut peak_inner: f64 = 1.0;
        for j in 0..=(k - q) {
            if j > 0 {
                term *= -z / j as f64;
            }
            inner += term;
            peak_inner = peak_inner.max(term.norm()).max(inner.norm());
        }
        coeffs.push(GuardedCoeff {
            value: zq_over_q * inner,
            peak: zq_over_q.norm() * peak_inner,
        });
    }
    coeffs
}

/// `c_q = C(k, q) (z/k)^q ((k - z)/k)^{k-q}` for F5.
fn f5_coefficients(z: Complex64, k: usize) -> Vec<GuardedCoeff> {
    let kf = k as f64;
    let base = (Complex64::new(kf, 0.0) - z) / kf;
    let ratio = z / (Complex64::new(kf, 0.0) - z);
    let mut c = base.powu(k as u32);
    let mut coeffs = Vec::with_capacity(k + 1);
    for q in 0..=k {
        if q > 0 {
            c *= ratio * ((k - q + 1) as f64 / q as f64);
        }
        coeffs.push(GuardedCoeff {
            value: c,
            peak: c.norm(),
        });
    }
    coeffs
}

/// `c_m = (k!/m!) w^m sum_{j=0}^{k-m} (-1)^j w^j / (j! (k-m-j)!)` with
/// `w = z/k`, for F6.
fn f6_coefficients(z: Complex64, k: usize) -> Vec<GuardedCoeff> {
    let w = z / k as f64;
    let mut ln_fact = vec![0.0f64; k + 1];
    for i in 1..=k {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut coeffs = Vec::with_capacity(k + 1);
    for m in 0..=k {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut peak: f64 = 0.0;
        let mut wj = Complex64::new(1.0, 0.0);
        for j in 0..=(k - m) {
            if j > 0 {
                wj *= -w;
            }
            let scale = (ln_fact[k] - ln_fact[m] - ln_fact[j] - ln_fact[k - m - j]).exp();
            let term = wj * scale;
            sum += term;
            peak = peak.max(term.norm()).max(sum.norm());
        }
        let wm = w.powu(m as u32);
        coeffs.push(GuardedCoeff {
            value: wm * sum,
            peak: wm.norm() * peak,
        });
    }
    coeffs
}

/// `sum_q c_q S^q f` with the powers applied iteratively; errors out if any
/// contribution dwarfs the input by more than the cancellation guard.
fn accumulate_powers(
    s_op: &LinearOperator,
    f: &WaveFunction,
    coeffs: &[GuardedCoeff],
) -> Result<WaveFunction> {
    let f_scale = f.l2_norm().max(f64::MIN_POSITIVE);
    let mut acc = WaveFunction::zeros(f.grid());
    let mut power = f.clone();
    let mut peak: f64 = 0.0;
    for (q, coeff) in coeffs.iter().enumerate() {
        if q > 0 {
            power = s_op.apply(&power)?;
        }
        let contribution = coeff.peak.max(coeff.value.norm()) * power.l2_norm();
        peak = peak.max(contribution);
        acc.axpy(coeff.value, &power)?;
    }
    let loss_factor = peak / f_scale;
    if loss_factor > CANCELLATION_GUARD {
        return Err(QfeyError::CancellationLoss { loss_factor });
    }
    Ok(acc)
}

/// Result of resolving the inner k-limit of an expanded formula.
#[derive(Debug, Clone)]
pub struct KResolution {
    pub state: WaveFunction,
    pub k: usize,
    pub converged: bool,
}

/// Run `k` upward (doubling) until successive outputs differ by less than
/// `1e-10 * ||f||`, or until a guard or the iteration cap stops the climb.
pub fn resolve_k(
    family: &TangentFamily,
    spec: &PropagationSpec,
    f: &WaveFunction,
) -> Result<KResolution> {
    let scale = f.l2_norm().max(f64::MIN_POSITIVE);
    let mut k = 8usize;
    let mut prev = evaluate_formula(family, spec, f, k)?;
    loop {
        let next_k = k * 2;
        if spec.formula.needs_guard() && next_k > BINOMIAL_MAX_K {
            return Ok(KResolution {
                state: prev,
                k,
                converged: false,
            });
        }
        if next_k > (1 << 22) {
            return Ok(KResolution {
                state: prev,
                k,
                converged: false,
            });
        }
        let next = evaluate_formula(family, spec, f, next_k)?;
        let diff = next.sub(&prev)?.l2_norm();
        if diff < 1e-10 * scale {
            return Ok(KResolution {
                state: next,
                k: next_k,
                converged: true,
            });
        }
        prev = next;
        k = next_k;
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l2_error: f64,
    pub sup_error: f64,
    pub runtime_ms: f64,
}

/// Errors of the F1 product against a reference state, per subdivision.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub reference_descriptor: String,
}

impl ConvergenceReport {
    /// Least-squares slope of `log error` vs `log n` (negative for decay).
    pub fn log_log_slope(&self) -> f64 {
        let ns: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        let errs: Vec<f64> = self.rows.iter().map(|r| r.l2_error).collect();
        crate::families::log_log_fit(&ns, &errs).0
    }
}

/// Propagate via F1 product for each `n` in `n_list` (strictly increasing)
/// and record L2 and sup errors against `reference`, with wall-clock timing.
pub fn run_convergence(
    family: &TangentFamily,
    a: f64,
    t: f64,
    n_list: &[usize],
    f: &WaveFunction,
    reference: &WaveFunction,
    descriptor: &str,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QfeyError::InvalidParameter(
            "n_list must be nonempty and strictly increasing".into(),
        ));
    }
    if reference.grid() != f.grid() {
        return Err(QfeyError::GridMismatch);
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let spec = PropagationSpec::new(a, t, n)?;
        let start = Instant::now();
        let psi = evolve_schrodinger(family, &spec, f)?;
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        let diff = psi.sub(reference)?;
        rows.push(ConvergenceRow {
            n,
            l2_error: diff.l2_norm(),
            sup_error: diff.sup_norm(),
            runtime_ms,
        });
    }
    Ok(ConvergenceReport {
        rows,
        reference_descriptor: descriptor.to_string(),
    })
}
