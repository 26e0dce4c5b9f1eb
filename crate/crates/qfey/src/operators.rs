//! Bounded linear operators on grid functions.
//!
//! Operators come in two representations: a dense matrix, and a structured
//! `diag o convolution o diag` pipeline whose action is
//! `f -> left_diag .* (h * circconv(kernel_row, right_diag .* f))`.
//! The structured form is applied through the FFT; a dense form is computed
//! lazily and cached when a matrix is needed (adjoint checks, spectra,
//! explicit exponentials).

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QfeyError, Result};
use crate::fft::{fft_in_place, ifft_in_place};
use crate::grid::{Grid, WaveFunction};

/// Dense complex matrix bound to a grid.
#[derive(Debug, Clone)]
pub struct DenseOp {
    grid: Grid,
    matrix: DMatrix<Complex64>,
}

/// Structured operator `left .* (h * circconv(kernel_row, right .* f))`.
#[derive(Debug, Clone)]
pub struct StructuredOp {
    grid: Grid,
    left_diag: Vec<Complex64>,
    kernel_row: Vec<f64>,
    right_diag: Vec<Complex64>,
    /// h * DFT(kernel_row), precomputed so each apply costs two transforms.
    kernel_spectrum: Vec<Complex64>,
    dense_cache: OnceLock<DMatrix<Complex64>>,
}

/// A bounded operator on grid functions, dense or structured.
#[derive(Debug, Clone)]
pub enum LinearOperator {
    Dense(DenseOp),
    Structured(StructuredOp),
}

impl LinearOperator {
    pub fn from_dense(grid: Grid, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != grid.len() || matrix.ncols() != grid.len() {
            return Err(QfeyError::DimensionMismatch {
                expected: grid.len(),
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(LinearOperator::Dense(DenseOp { grid, matrix }))
    }

    pub fn structured(
        grid: Grid,
        left_diag: Vec<Complex64>,
        kernel_row: Vec<f64>,
        right_diag: Vec<Complex64>,
    ) -> Result<Self> {
        let m = grid.len();
        for len in [left_diag.len(), kernel_row.len(), right_diag.len()] {
            if len != m {
                return Err(QfeyError::DimensionMismatch {
                    expected: m,
                    got: len,
                });
            }
        }
        let mut kernel_spectrum: Vec<Complex64> = kernel_row
            .iter()
            .map(|&k| Complex64::new(k * grid.h(), 0.0))
            .collect();
        fft_in_place(&mut kernel_spectrum);
        Ok(LinearOperator::Structured(StructuredOp {
            grid,
            left_diag,
            kernel_row,
            right_diag,
            kernel_spectrum,
            dense_cache: OnceLock::new(),
        }))
    }

    pub fn identity(grid: Grid) -> Self {
        LinearOperator::Dense(DenseOp {
            grid,
            matrix: DMatrix::identity(grid.len(), grid.len()),
        })
    }

    pub fn grid(&self) -> Grid {
        match self {
            LinearOperator::Dense(d) => d.grid,
            LinearOperator::Structured(s) => s.grid,
        }
    }

    /// Apply the operator to a state.
    pub fn apply(&self, f: &WaveFunction) -> Result<WaveFunction> {
        if f.grid() != self.grid() {
            return Err(QfeyError::GridMismatch);
        }
        match self {
            LinearOperator::Dense(d) => {
                let v = nalgebra::DVector::from_column_slice(f.values());
                let out = &d.matrix * v;
                WaveFunction::from_values(d.grid, out.iter().copied().collect())
            }
            LinearOperator::Structured(s) => {
                let mut buf: Vec<Complex64> = f
                    .values()
                    .iter()
                    .zip(&s.right_diag)
                    .map(|(&x, &r)| x * r)
                    .collect();
                fft_in_place(&mut buf);
                for (z, &k) in buf.iter_mut().zip(&s.kernel_spectrum) {
                    *z *= k;
                }
                ifft_in_place(&mut buf);
                for (z, &l) in buf.iter_mut().zip(&s.left_diag) {
                    *z *= l;
                }
                WaveFunction::from_values(s.grid, buf)
            }
        }
    }

    /// Dense form of the operator, computed once and cached.
    pub fn densify(&self) -> &DMatrix<Complex64> {
        match self {
            LinearOperator::Dense(d) => &d.matrix,
            LinearOperator::Structured(s) => s.dense_cache.get_or_init(|| {
                let m = s.grid.len();
                let h = s.grid.h();
                DMatrix::from_fn(m, m, |i, j| {
                    let k = s.kernel_row[(m + i - j) % m];
                    s.left_diag[i] * (h * k) * s.right_diag[j]
                })
            }),
        }
    }

    /// Adjoint with respect to the quadrature inner product.
    pub fn adjoint(&self) -> LinearOperator {
        match self {
            LinearOperator::Dense(d) => LinearOperator::Dense(DenseOp {
                grid: d.grid,
                matrix: d.matrix.adjoint(),
            }),
            LinearOperator::Structured(s) => {
                let m = s.grid.len();
                let reversed: Vec<f64> = (0..m).map(|j| s.kernel_row[(m - j) % m]).collect();
                let left: Vec<Complex64> = s.right_diag.iter().map(|z| z.conj()).collect();
                let right: Vec<Complex64> = s.left_diag.iter().map(|z| z.conj()).collect();
                LinearOperator::structured(s.grid, left, reversed, right)
                    .expect("adjoint preserves dimensions")
            }
        }
    }

    /// Hermitian part `(A + A*)/2`, returned densely.
    pub fn hermitize(&self) -> LinearOperator {
        let a = self.densify();
        let sym = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
        LinearOperator::Dense(DenseOp {
            grid: self.grid(),
            matrix: sym,
        })
    }

    /// Upper bound on the operator norm (exact 1-norm for dense,
    /// `max|l| * max|r| * h * sum|k|` for structured).
    pub fn norm_bound(&self) -> f64 {
        match self {
            LinearOperator::Dense(d) => one_norm(&d.matrix),
            LinearOperator::Structured(s) => {
                let lmax = s.left_diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let rmax = s.right_diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let ksum: f64 = s.kernel_row.iter().map(|k| k.abs()).sum();
                lmax * rmax * ksum * s.grid.h()
            }
        }
    }

    /// Largest entry of `|A - A*|`; zero for exactly Hermitian operators.
    pub fn hermiticity_deviation(&self) -> f64 {
        let a = self.densify();
        let adj = a.adjoint();
        a.iter()
            .zip(adj.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum())
        .fold(0.0, f64::max)
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Algorithm used to evaluate an operator exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpMethod {
    /// Truncated power series, stopped once the term norm stays below
    /// `tol` relative to the accumulated result for three consecutive terms
    /// (single-term smallness is unsafe before the series peak).
    Taylor { max_terms: usize, tol: f64 },
    /// Euler approximation `(I + A/k)^k`.
    Euler { k: usize },
    /// Scaling and squaring: `(exp(A/2^s))^(2^s)` with `s` chosen so the
    /// scaled norm is at most 1/2.
    ScalingSquaring { target_tol: f64 },
}

impl ExpMethod {
    pub fn taylor(tol: f64) -> Self {
        ExpMethod::Taylor {
            max_terms: 600,
            tol,
        }
    }

    pub fn scaling_squaring(target_tol: f64) -> Self {
        ExpMethod::ScalingSquaring { target_tol }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ExpMethod::Taylor { max_terms, tol } => {
                if max_terms < 1 || !(tol > 0.0) {
                    return Err(QfeyError::InvalidParameter(
                        "taylor needs max_terms >= 1 and tol > 0".into(),
                    ));
                }
            }
            ExpMethod::Euler { k } => {
                if k < 1 {
                    return Err(QfeyError::InvalidParameter("euler needs k >= 1".into()));
                }
            }
            ExpMethod::ScalingSquaring { target_tol } => {
                if !(target_tol > 0.0) {
                    return Err(QfeyError::InvalidParameter(
                        "scaling-squaring needs target_tol > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl Default for ExpMethod {
    fn default() -> Self {
        ExpMethod::scaling_squaring(1e-13)
    }
}

// Terms past this multiple of the result have destroyed the low digits;
// the series may still terminate numerically, so the peak is checked too.
const TAYLOR_PEAK_GUARD: f64 = 1e12;

fn taylor_exp_dense(
    a: &DMatrix<Complex64>,
    max_terms: usize,
    tol: f64,
) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut small = 0;
    let mut peak: f64 = 1.0;
    for j in 1..=max_terms {
        term = (&term * a) / Complex64::new(j as f64, 0.0);
        sum += &term;
        peak = peak.max(max_abs(&term));
        if max_abs(&term) <= tol * max_abs(&sum).max(1.0) {
            small += 1;
            if small == 3 {
                let loss_factor = peak / max_abs(&sum).max(1.0);
                if loss_factor > TAYLOR_PEAK_GUARD {
                    return Err(QfeyError::CancellationLoss { loss_factor });
                }
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(QfeyError::ExpNonConvergence { terms: max_terms })
}

fn matrix_power(base: &DMatrix<Complex64>, mut k: usize) -> DMatrix<Complex64> {
    let n = base.nrows();
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut sq = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &sq;
        }
        k >>= 1;
        if k > 0 {
            sq = &sq * &sq;
        }
    }
    result
}

/// Dense exponential `exp(A)` of a bounded operator.
pub fn exp_bounded(a: &LinearOperator, method: ExpMethod) -> Result<LinearOperator> {
    method.validate()?;
    let grid = a.grid();
    let dense = a.densify();
    let result = match method {
        ExpMethod::Taylor { max_terms, tol } => taylor_exp_dense(dense, max_terms, tol)?,
        ExpMethod::Euler { k } => {
            let n = dense.nrows();
            let base =
                DMatrix::<Complex64>::identity(n, n) + dense / Complex64::new(k as f64, 0.0);
            matrix_power(&base, k)
        }
        ExpMethod::ScalingSquaring { target_tol } => {
            let norm = one_norm(dense);
            let s = if norm <= 0.5 {
                0
            } else {
                (norm / 0.5).log2().ceil() as u32
            };
            let scaled = dense / Complex64::new(2f64.powi(s as i32), 0.0);
            let mut e = taylor_exp_dense(&scaled, 200, target_tol)?;
            for _ in 0..s {
                e = &e * &e;
            }
            e
        }
    };
    LinearOperator::from_dense(grid, result)
}

/// Matrix-free `exp(A) f` where the action of `A` is given by a closure and
/// `norm_bound` bounds `||A||`. Used by the propagator to exponentiate
/// scaled-and-shifted family operators without densifying them.
pub fn exp_apply_with<F>(
    apply: F,
    norm_bound: f64,
    f: &WaveFunction,
    method: ExpMethod,
) -> Result<WaveFunction>
where
    F: Fn(&WaveFunction) -> Result<WaveFunction>,
{
    method.validate()?;
    match method {
        ExpMethod::Taylor { max_terms, tol } => taylor_apply(&apply, f, max_terms, tol),
        ExpMethod::Euler { k } => {
            let kc = Complex64::new(1.0 / k as f64, 0.0);
            let mut w = f.clone();
            for _ in 0..k {
                let aw = apply(&w)?;
                w.axpy(kc, &aw)?;
            }
            Ok(w)
        }
        ExpMethod::ScalingSquaring { target_tol } => {
            let s = if norm_bound <= 0.5 {
                0
            } else {
                (norm_bound / 0.5).log2().ceil() as u32
            };
            if s > 30 {
                return Err(QfeyError::InvalidParameter(format!(
                    "operator norm bound {norm_bound:e} too large for matrix-free exponential"
                )));
            }
            let reps = 1usize << s;
            let scale = Complex64::new(1.0 / reps as f64, 0.0);
            let scaled_apply = |v: &WaveFunction| apply(v).map(|av| av.scale(scale));
            let mut w = f.clone();
            for _ in 0..reps {
                w = taylor_apply(&scaled_apply, &w, 200, target_tol)?;
            }
            Ok(w)
        }
    }
}

fn taylor_apply<F>(apply: &F, f: &WaveFunction, max_terms: usize, tol: f64) -> Result<WaveFunction>
where
    F: Fn(&WaveFunction) -> Result<WaveFunction>,
{
    let f_norm = f.l2_norm();
    let mut acc = f.clone();
    let mut term = f.clone();
    let mut small = 0;
    let mut peak = f_norm;
    for m in 1..=max_terms {
        term = apply(&term)?.scale(Complex64::new(1.0 / m as f64, 0.0));
        acc.axpy(Complex64::new(1.0, 0.0), &term)?;
        peak = peak.max(term.l2_norm());
        if term.l2_norm() <= tol * f_norm.max(f64::MIN_POSITIVE) {
            small += 1;
            if small == 3 {
                let loss_factor = peak / f_norm.max(f64::MIN_POSITIVE);
                if loss_factor > TAYLOR_PEAK_GUARD {
                    return Err(QfeyError::CancellationLoss { loss_factor });
                }
                return Ok(acc);
            }
        } else {
            small = 0;
        }
    }
    Err(QfeyError::ExpNonConvergence { terms: max_terms })
}

/// Matrix-free `exp(A) f` for an explicit operator.
pub fn exp_apply(a: &LinearOperator, f: &WaveFunction, method: ExpMethod) -> Result<WaveFunction> {
    exp_apply_with(|v| a.apply(v), a.norm_bound(), f, method)
}
