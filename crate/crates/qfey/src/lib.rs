//! Quasi-Feynman propagation on a periodic 1-D grid.
//!
//! Given a family of self-adjoint bounded operators `S(t)` whose derivative
//! at zero matches a Hamiltonian `H` (a Chernoff-tangent family), the step
//! operator `R(t) = exp(i a (S(|t|) - I) sign t)` is unitary and its n-fold
//! product at `t/n` converges to the Schrodinger group `exp(i a t H)`. The
//! same family composed with itself approximates the heat semigroup
//! `exp(t H)` directly. This crate builds such families for two Hamiltonians
//! on a periodic grid standing in for the real line:
//!
//! * `H = (1/2) d^2/dx^2 - V` via the Gaussian heat kernel, and
//! * `H = -(-Lap)^N - V` via the polyharmonic kernel `l(t, y)`,
//!
//! evaluates the propagators by several independent routes (step products,
//! merged exponentials, and the expanded formula variants), and validates
//! everything against dense spectral oracles.
//!
//! ## Modules
//!
//! * [`grid`] - periodic grid, wavefunctions, potentials, L2 quadrature;
//! * [`kernels`] - Gaussian and polyharmonic kernels, residue closed form
//!   plus an independent adaptive-quadrature oracle, convolution rows;
//! * [`operators`] - dense and structured operator representations,
//!   adjoints, and three operator-exponential algorithms;
//! * [`families`] - tangent families, symmetrization, multi-point
//!   recombination, and measured tangency reports;
//! * [`propagator`] - quasi-Feynman steps, heat products, the six formula
//!   variants, convergence studies;
//! * [`oracle`] - spectral Hamiltonians, exact groups/semigroups through a
//!   Hermitian eigendecomposition, the closed-form free packet;
//! * [`cli`] - the `qfey` binary surface (CSV experiments).
//!
//! ## Quick start
//!
//! ```
//! use qfey::{Grid, Potential, PropagationSpec, TangentFamily};
//! use qfey::oracle::PacketParams;
//! use qfey::propagator::evolve_schrodinger;
//!
//! # fn main() -> qfey::Result<()> {
//! let grid = Grid::new(-20.0, 20.0, 256)?;
//! let v = Potential::sample(grid, f64::cos)?;
//! let family = TangentFamily::heat_gauss(&v, grid)?;
//! let psi0 = PacketParams { x0: 0.0, p0: 2.0, sigma: 1.0 }.sample(grid)?;
//! let psi = evolve_schrodinger(&family, &PropagationSpec::new(1.0, 0.5, 32)?, &psi0)?;
//! assert!((psi.l2_norm() - 1.0).abs() < 1e-9); // unitary propagation
//! # Ok(())
//! # }
//! ```
//!
//! ## Runnable examples
//!
//! ```bash
//! cargo run --release --example free_packet          # product vs closed form
//! cargo run --release --example convergence_study    # plain vs three-point
//! cargo run --release --example tangency_measurement # measured slopes
//! cargo run --release --example kernel_table         # residue vs quadrature
//! cargo run --release --example formula_variants     # the six formulas
//! cargo run --release --example heat_semigroup       # semigroup products
//! cargo run --release --example custom_family        # build your own S(t)
//! ```
//!
//! The box truncation is the caller's responsibility: choose `[x_min, x_max]`
//! so states and kernels decay below roundoff at the boundary, or the
//! periodic wrap will fold tails back into the box.

pub mod cli;
pub mod error;
pub mod families;
pub(crate) mod fft;
pub mod grid;
pub mod kernels;
pub mod operators;
pub mod oracle;
pub mod propagator;
pub mod quad;

pub use error::{QfeyError, Result};
pub use families::TangentFamily;
pub use grid::{Grid, Potential, WaveFunction};
pub use operators::{ExpMethod, LinearOperator};
pub use propagator::{FormulaId, PropagationSpec};
