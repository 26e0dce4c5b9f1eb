//! Integral kernels of the shipped operator families.
//!
//! Two kernels are provided: the Gaussian heat kernel and the polyharmonic
//! kernel `l(t, y)`, the inverse Fourier transform of `1/(1 + t x^{2N})`.
//! The polyharmonic kernel has a residue closed form, checked here against an
//! independent adaptive-quadrature evaluation of the defining integral.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QfeyError, Result};
use crate::fft::ifft_in_place;
use crate::grid::Grid;
use crate::quad;

/// Heat kernel `(2 pi t)^{-1/2} exp(-y^2 / (2t))`.
pub fn gauss_kernel(t: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(QfeyError::InvalidParameter(format!(
            "gauss_kernel needs t > 0, got {t}"
        )));
    }
    Ok((2.0 * PI * t).sqrt().recip() * (-y * y / (2.0 * t)).exp())
}

/// Residue data for the polyharmonic kernel of order `N`.
///
/// The poles of `1/(1 + t x^{2N})` in the upper half plane sit at angles
/// `(2k-1) pi / (2N)`; poles off the imaginary axis pair up into one cosine /
/// sine term each, while for odd `N` the pole on the imaginary axis is its own
/// mirror image and enters with half weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyharmonicParams {
    n_order: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    weight: Vec<f64>,
}

/// Supported polyharmonic orders. Above 8 the slow decay of the symbol makes
/// the default quadrature oracle unreliable.
pub const POLYHARMONIC_ORDER_RANGE: std::ops::RangeInclusive<usize> = 2..=8;

impl PolyharmonicParams {
    pub fn new(n_order: usize) -> Result<Self> {
        if !POLYHARMONIC_ORDER_RANGE.contains(&n_order) {
            return Err(QfeyError::InvalidParameter(format!(
                "polyharmonic order must be in {POLYHARMONIC_ORDER_RANGE:?}, got {n_order}"
            )));
        }
        let terms = (n_order + 1) / 2;
        let mut alpha = Vec::with_capacity(terms);
        let mut beta = Vec::with_capacity(terms);
        let mut weight = Vec::with_capacity(terms);
        for k in 1..=terms {
            let theta = (2 * k - 1) as f64 * PI / (2.0 * n_order as f64);
            alpha.push(theta.sin());
            beta.push(theta.cos());
            weight.push(if n_order % 2 == 1 && 2 * k - 1 == n_order {
                0.5
            } else {
                1.0
            });
        }
        Ok(PolyharmonicParams {
            n_order,
            alpha,
            beta,
            weight,
        })
    }

    pub fn order(&self) -> usize {
        self.n_order
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

/// Closed-form polyharmonic kernel
/// `l(t, y) = (N t^{1/(2N)})^{-1} sum_k w_k [a_k cos(b_k u) + b_k sin(b_k u)] exp(-a_k u)`
/// with `u = t^{-1/(2N)} |y|`.
pub fn polyharmonic_kernel(t: f64, y: f64, params: &PolyharmonicParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(QfeyError::InvalidParameter(format!(
            "polyharmonic_kernel needs t > 0, got {t}"
        )));
    }
    let n = params.n_order as f64;
    let r = t.powf(-1.0 / (2.0 * n));
    let u = r * y.abs();
    let mut sum = 0.0;
    for ((&a, &b), &w) in params
        .alpha
        .iter()
        .zip(&params.beta)
        .zip(&params.weight)
    {
        sum += w * (a * (b * u).cos() + b * (b * u).sin()) * (-a * u).exp();
    }
    Ok(r / n * sum)
}

/// Independent oracle: evaluates `(1/pi) int_0^inf cos(x y) / (1 + t x^{2N}) dx`
/// by adaptive quadrature, pre-split at half periods of the oscillation.
/// Absolute error target 1e-10; reports non-convergence instead of guessing.
pub fn polyharmonic_kernel_quadrature(t: f64, y: f64, n_order: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(QfeyError::InvalidParameter(format!(
            "quadrature oracle needs t > 0, got {t}"
        )));
    }
    if !POLYHARMONIC_ORDER_RANGE.contains(&n_order) {
        return Err(QfeyError::InvalidParameter(format!(
            "polyharmonic order must be in {POLYHARMONIC_ORDER_RANGE:?}, got {n_order}"
        )));
    }
    let y = y.abs();
    let p = 2.0 * n_order as f64;
    let tail_tol = 1e-13;
    // int_X^inf dx/(t x^p) = X^(1-p) / (t (p-1))
    let x_direct = (1.0 / (t * (p - 1.0) * tail_tol)).powf(1.0 / (p - 1.0));
    // integration by parts in the oscillatory case: tail <= 2 g(X) / y
    let x_max = if y > 1.0 {
        x_direct.min((2.0 / (y * t * tail_tol)).powf(1.0 / p))
    } else {
        x_direct
    };

    let mut breakpoints = Vec::new();
    if y > 1.0 {
        // one panel per half period keeps each panel non-oscillatory
        let step = PI / y;
        let panels = (x_max / step).ceil() as usize;
        if panels > 250_000 {
            return Err(QfeyError::QuadratureNonConvergence {
                tol: 1e-10,
                estimate: f64::INFINITY,
            });
        }
        breakpoints.extend((0..=panels).map(|i| (i as f64 * step).min(x_max)));
    } else {
        // dyadic panels resolve the algebraic decay
        breakpoints.push(0.0);
        let mut edges = Vec::new();
        let mut x = x_max;
        while x > 1e-3 && edges.len() < 80 {
            edges.push(x);
            x *= 0.5;
        }
        edges.reverse();
        breakpoints.extend(edges);
    }

    let integrand = |x: f64| (x * y).cos() / (1.0 + t * x.powi(p as i32));
    let result = quad::integrate_panels(integrand, &breakpoints, 5e-11, 300_000)?;
    Ok(result.value / PI)
}

/// Kernel selector for row tabulation and family construction.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Gauss,
    Polyharmonic(PolyharmonicParams),
}

impl KernelKind {
    pub fn polyharmonic(n_order: usize) -> Result<Self> {
        Ok(KernelKind::Polyharmonic(PolyharmonicParams::new(n_order)?))
    }

    /// Fourier transform of the kernel at angular frequency `xi`
    /// (`exp(-t xi^2 / 2)` for Gauss, `1/(1 + t xi^{2N})` otherwise).
    pub fn symbol(&self, t: f64, xi: f64) -> f64 {
        match self {
            KernelKind::Gauss => (-t * xi * xi / 2.0).exp(),
            KernelKind::Polyharmonic(p) => {
                1.0 / (1.0 + t * xi.powi(2 * p.n_order as i32))
            }
        }
    }

    /// Pointwise kernel value at offset `y`.
    pub fn eval(&self, t: f64, y: f64) -> Result<f64> {
        match self {
            KernelKind::Gauss => gauss_kernel(t, y),
            KernelKind::Polyharmonic(p) => polyharmonic_kernel(t, y, p),
        }
    }
}

/// Tabulate the kernel at the circular offsets of `grid` for use as a
/// discrete convolution row.
///
/// The row is the band-limited realization of the kernel: it is synthesized
/// from the kernel's Fourier transform sampled at the grid frequencies, so
/// `h * sum_j row[j]` equals the symbol at frequency zero (exactly 1) and the
/// induced circular convolution acts on grid functions as multiplication by
/// the symbol, free of sampling aliasing. At offsets where the kernel is well
/// resolved by the grid the row agrees with pointwise kernel values.
pub fn kernel_row(kind: &KernelKind, t: f64, grid: Grid) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(QfeyError::InvalidParameter(format!(
            "kernel_row needs t > 0, got {t}"
        )));
    }
    let m = grid.len();
    let mut spectrum: Vec<Complex64> = (0..m)
        .map(|k| Complex64::new(kind.symbol(t, grid.frequency(k)), 0.0))
        .collect();
    ifft_in_place(&mut spectrum);
    let inv_h = grid.h().recip();
    let mut row: Vec<f64> = spectrum.iter().map(|z| z.re * inv_h).collect();
    // the symbol is even in frequency, so enforce exact circular evenness
    for j in 1..=(m - 1) / 2 {
        let avg = 0.5 * (row[j] + row[m - j]);
        row[j] = avg;
        row[m - j] = avg;
    }
    Ok(row)
}
