//! Independent reference solvers.
//!
//! The Hamiltonians are discretized spectrally (Fourier multiplier for the
//! differential part, diagonal for the potential), which is exact on
//! band-limited grid functions, so oracle error does not contaminate
//! convergence measurements. Groups and semigroups are evaluated through a
//! dense Hermitian eigendecomposition; the freely dispersing Gaussian packet
//! has a closed form of its own, giving a second, independent reference for
//! the zero-potential case.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QfeyError, Result};
use crate::fft::{fft_in_place, ifft_in_place};
use crate::grid::{Grid, Potential, WaveFunction};
use crate::kernels::POLYHARMONIC_ORDER_RANGE;
use crate::operators::LinearOperator;

/// Dense oracle paths are O(m^3); keep them at desk scale.
pub const MAX_ORACLE_POINTS: usize = 1024;

/// Which Hamiltonian to discretize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// `H f = (1/2) f'' - V f`
    HalfLaplacianMinusV,
    /// `H f = -(-Lap)^N f - V f`
    NegPolyharmonicMinusV { n_order: usize },
}

impl HamiltonianKind {
    /// Fourier multiplier of the differential part at angular frequency `xi`.
    pub fn multiplier(&self, xi: f64) -> f64 {
        match self {
            HamiltonianKind::HalfLaplacianMinusV => -xi * xi / 2.0,
            HamiltonianKind::NegPolyharmonicMinusV { n_order } => {
                -xi.powi(2 * *n_order as i32)
            }
        }
    }
}

/// A Hamiltonian to be realized as a dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    pub potential: Potential,
    pub grid: Grid,
}

impl HamiltonianSpec {
    pub fn new(kind: HamiltonianKind, potential: Potential, grid: Grid) -> Result<Self> {
        if potential.grid() != grid {
            return Err(QfeyError::GridMismatch);
        }
        if let HamiltonianKind::NegPolyharmonicMinusV { n_order } = kind {
            if !POLYHARMONIC_ORDER_RANGE.contains(&n_order) {
                return Err(QfeyError::InvalidParameter(format!(
                    "polyharmonic order must be in {POLYHARMONIC_ORDER_RANGE:?}, got {n_order}"
                )));
            }
        }
        Ok(HamiltonianSpec {
            kind,
            potential,
            grid,
        })
    }
}

/// Dense Hermitian matrix of the Hamiltonian: the differential part as a
/// Fourier multiplier conjugated back to position space, minus `diag(V)`.
pub fn discretize_hamiltonian(spec: &HamiltonianSpec) -> Result<LinearOperator> {
    let grid = spec.grid;
    let m = grid.len();
    if m > MAX_ORACLE_POINTS {
        return Err(QfeyError::InvalidParameter(format!(
            "oracle paths are limited to {MAX_ORACLE_POINTS} grid points, got {m}"
        )));
    }
    let mult: Vec<f64> = (0..m).map(|k| spec.kind.multiplier(grid.frequency(k))).collect();
    let mut matrix = DMatrix::<Complex64>::zeros(m, m);
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..m {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        fft_in_place(&mut col);
        for (z, &mu) in col.iter_mut().zip(&mult) {
            *z *= mu;
        }
        ifft_in_place(&mut col);
        for i in 0..m {
            matrix[(i, j)] = col[i];
        }
        matrix[(j, j)] -= spec.potential.values()[j];
    }
    // the multiplier is real, so the matrix is Hermitian up to roundoff;
    // symmetrize to make downstream Hermiticity checks exact
    let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    LinearOperator::from_dense(grid, sym)
}

/// Cached Hermitian eigendecomposition `H = Q diag(lambda) Q*`.
///
/// Construct once per Hamiltonian and reuse; `group` and `semigroup` are then
/// O(m^2) per evaluation.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    grid: Grid,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    /// Rejects operators that are not Hermitian within 1e-8.
    pub fn new(h: &LinearOperator) -> Result<Self> {
        let grid = h.grid();
        if grid.len() > MAX_ORACLE_POINTS {
            return Err(QfeyError::InvalidParameter(format!(
                "oracle paths are limited to {MAX_ORACLE_POINTS} grid points, got {}",
                grid.len()
            )));
        }
        let deviation = h.hermiticity_deviation();
        if deviation > 1e-8 {
            return Err(QfeyError::NotHermitian { deviation });
        }
        let dense = h.densify();
        let sym = (dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Ok(EigenDecomposition {
            grid,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    fn functional_calculus<F>(&self, f: &WaveFunction, phase: F) -> Result<WaveFunction>
    where
        F: Fn(f64) -> Complex64,
    {
        if f.grid() != self.grid {
            return Err(QfeyError::GridMismatch);
        }
        let v = DVector::from_column_slice(f.values());
        let mut coeffs = self.eigenvectors.adjoint() * v;
        for (c, &lambda) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= phase(lambda);
        }
        let out = &self.eigenvectors * coeffs;
        WaveFunction::from_values(self.grid, out.iter().copied().collect())
    }

    /// `exp(i a t H) f` via functional calculus; unitary.
    pub fn group(&self, a: f64, t: f64, f: &WaveFunction) -> Result<WaveFunction> {
        self.functional_calculus(f, |lambda| Complex64::from_polar(1.0, a * t * lambda))
    }

    /// `exp(t H) f` via functional calculus; requires `t >= 0`.
    pub fn semigroup(&self, t: f64, f: &WaveFunction) -> Result<WaveFunction> {
        if t < 0.0 {
            return Err(QfeyError::InvalidParameter(format!(
                "semigroup needs t >= 0, got {t}"
            )));
        }
        self.functional_calculus(f, |lambda| Complex64::new((t * lambda).exp(), 0.0))
    }

    /// Largest entry of `H Q - Q diag(lambda)`, for residual checks.
    pub fn residual(&self, h: &LinearOperator) -> f64 {
        let lhs = h.densify() * &self.eigenvectors;
        let rhs = &self.eigenvectors
            * DMatrix::from_diagonal(&self.eigenvalues.map(|x| Complex64::new(x, 0.0)));
        (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// One-shot `exp(i a t H) f` for a Hermitian operator.
pub fn exact_group(h: &LinearOperator, a: f64, t: f64, f: &WaveFunction) -> Result<WaveFunction> {
    EigenDecomposition::new(h)?.group(a, t, f)
}

/// One-shot `exp(t H) f` for a Hermitian operator and `t >= 0`.
pub fn exact_semigroup(h: &LinearOperator, t: f64, f: &WaveFunction) -> Result<WaveFunction> {
    EigenDecomposition::new(h)?.semigroup(t, f)
}

/// Parameters of a Gaussian wave packet
/// `psi_0(x) = (pi sigma^2)^(-1/4) exp(-(x-x0)^2/(2 sigma^2) + i p0 (x-x0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl PacketParams {
    /// Sample the packet at `t = 0` on a grid, checking box containment.
    pub fn sample(&self, grid: Grid) -> Result<WaveFunction> {
        free_packet_evolution(self.x0, self.p0, self.sigma, 1.0, 0.0, grid)
    }
}

/// Closed-form solution of `psi_t = (i a / 2) psi_xx` for the Gaussian packet
/// above: the complex squared width evolves as `sigma^2 -> sigma^2 + i a t`.
///
/// Rejects configurations whose packet mass outside the box exceeds 1e-10
/// (at the initial or at the requested time).
pub fn free_packet_evolution(
    x0: f64,
    p0: f64,
    sigma: f64,
    a: f64,
    t: f64,
    grid: Grid,
) -> Result<WaveFunction> {
    if !(sigma > 0.0) {
        return Err(QfeyError::InvalidParameter(format!(
            "packet needs sigma > 0, got {sigma}"
        )));
    }
    check_box_containment(x0, p0, sigma, a, 0.0, grid)?;
    check_box_containment(x0, p0, sigma, a, t, grid)?;

    let s2 = sigma * sigma;
    let gamma = Complex64::new(s2, a * t); // sigma^2 + i a t
    let norm = (std::f64::consts::PI * s2).powf(-0.25);
    let pref = Complex64::new(norm * sigma, 0.0) / gamma.sqrt();
    let const_term = Complex64::new(-s2 * p0 * p0 / 2.0, 0.0);
    WaveFunction::sample(grid, |x| {
        let b = Complex64::new(s2 * p0, x - x0);
        pref * (b * b / (gamma * 2.0) + const_term).exp()
    })
}

fn check_box_containment(x0: f64, p0: f64, sigma: f64, a: f64, t: f64, grid: Grid) -> Result<()> {
    let center = x0 + a * p0 * t;
    let s2 = sigma * sigma;
    // standard deviation of |psi|^2 at time t
    let spread = ((s2 * s2 + a * a * t * t) / (2.0 * s2)).sqrt();
    let dist = (center - grid.x_min()).min(grid.x_max() - center);
    let z = dist / (spread * std::f64::consts::SQRT_2);
    // erfc upper bound e^{-z^2} / (z sqrt(pi)) for the two-sided tail mass
    let mass = if z <= 3.0 {
        1.0
    } else if z >= 20.0 {
        0.0
    } else {
        (-z * z).exp() / (z * std::f64::consts::PI.sqrt())
    };
    if mass > 1e-10 {
        return Err(QfeyError::BoxLeak { mass });
    }
    Ok(())
}
