//! Periodic discretization of the real line: grid, wavefunctions, potentials.
//!
//! The configuration space is a uniform periodic grid on `[x_min, x_max)`
//! standing in for the whole line. All L2 quantities use the rectangle
//! quadrature rule with weight `h`, which is spectrally accurate for smooth
//! periodic integrands and matches the discrete Parseval identity. Choosing
//! the box large enough that states and kernels decay below roundoff at the
//! boundary is the caller's responsibility.

use num_complex::Complex64;

use crate::error::{QfeyError, Result};

/// Uniform periodic grid with `m` points `x_j = x_min + j h`, `h = (x_max - x_min)/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    m: usize,
    h: f64,
}

impl Grid {
    /// Requires `x_max > x_min` and even `m >= 8` (symmetric frequency layout).
    pub fn new(x_min: f64, x_max: f64, m: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(QfeyError::InvalidGrid(format!(
                "need x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if m < 8 || m % 2 != 0 {
            return Err(QfeyError::InvalidGrid(format!(
                "need even m >= 8, got m = {m}"
            )));
        }
        let h = (x_max - x_min) / m as f64;
        Ok(Grid { x_min, x_max, m, h })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Box length `x_max - x_min`.
    pub fn box_length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// j-th grid point, j in 0..m.
    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.h
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.point(j))
    }

    /// Signed circular distance represented by index j: the offset of the
    /// j-th point from the origin of the periodic box, folded to
    /// `(-L/2, L/2]`. Used to tabulate convolution kernels.
    pub fn circular_offset(&self, j: usize) -> f64 {
        if j <= self.m / 2 {
            j as f64 * self.h
        } else {
            (j as f64 - self.m as f64) * self.h
        }
    }

    /// Angular frequency of DFT mode k: `2 pi k~ / L` with `k~` folded to
    /// `(-m/2, m/2]`.
    pub fn frequency(&self, k: usize) -> f64 {
        let k_signed = if k <= self.m / 2 {
            k as f64
        } else {
            k as f64 - self.m as f64
        };
        2.0 * std::f64::consts::PI * k_signed / self.box_length()
    }
}

/// Complex state vector bound to a grid, with L2 quadrature norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    /// Sample a function at the grid points. Rejects non-finite samples.
    pub fn sample<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let values: Vec<Complex64> = grid.points().map(f).collect();
        if let Some(j) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QfeyError::NonFinite(format!(
                "sample at x = {} is not finite",
                grid.point(j)
            )));
        }
        Ok(WaveFunction { grid, values })
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QfeyError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(WaveFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        WaveFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Discrete delta at index j (value 1 at x_j, 0 elsewhere).
    pub fn basis(grid: Grid, j: usize) -> Self {
        let mut wf = Self::zeros(grid);
        wf.values[j] = Complex64::new(1.0, 0.0);
        wf
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Quadrature inner product `h sum_j conj(f_j) g_j`, antilinear in `self`.
    pub fn inner_product(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(QfeyError::GridMismatch);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a.conj() * b;
        }
        Ok(acc * self.grid.h())
    }

    /// L2 quadrature norm `sqrt(<f, f>)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (s * self.grid.h()).sqrt()
    }

    /// Pointwise maximum modulus.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral projection onto the DFT modes with folded index at most
    /// `max_mode`. Used to prepare band-limited test states.
    pub fn band_limited(&self, max_mode: usize) -> WaveFunction {
        let m = self.grid.len();
        let mut buf = self.values.clone();
        crate::fft::fft_in_place(&mut buf);
        for (k, z) in buf.iter_mut().enumerate() {
            let folded = k.min(m - k);
            if folded > max_mode {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        crate::fft::ifft_in_place(&mut buf);
        WaveFunction {
            grid: self.grid,
            values: buf,
        }
    }

    pub fn scale(&self, c: Complex64) -> WaveFunction {
        WaveFunction {
            grid: self.grid,
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &WaveFunction) -> Result<WaveFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<WaveFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(QfeyError::GridMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    fn zip_with<F>(&self, other: &WaveFunction, f: F) -> Result<WaveFunction>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        if self.grid != other.grid {
            return Err(QfeyError::GridMismatch);
        }
        Ok(WaveFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Real bounded potential sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    grid: Grid,
    values: Vec<f64>,
    sup_bound: f64,
}

impl Potential {
    pub fn sample<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let values: Vec<f64> = grid.points().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QfeyError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QfeyError::NonFinite("potential sample".into()));
        }
        let sup_bound = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Potential {
            grid,
            values,
            sup_bound,
        })
    }

    pub fn zero(grid: Grid) -> Self {
        Potential {
            grid,
            values: vec![0.0; grid.len()],
            sup_bound: 0.0,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Supremum bound `max_j |V(x_j)|`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }
}
