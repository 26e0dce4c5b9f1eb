//! Heat-equation side of the construction: the n-fold product of the
//! tangent family approximates the semigroup exp(tH) directly, for both the
//! Gaussian and the polyharmonic kernels.
//!
//! ```bash
//! cargo run --release --example heat_semigroup
//! ```

use qfey::families::TangentFamily;
use qfey::grid::{Grid, Potential};
use qfey::oracle::{
    discretize_hamiltonian, EigenDecomposition, HamiltonianKind, HamiltonianSpec, PacketParams,
};
use qfey::propagator::evolve_heat;

fn main() -> Result<(), qfey::QfeyError> {
    let t = 0.5;

    let grid = Grid::new(-20.0, 20.0, 256)?;
    let v = Potential::sample(grid, f64::cos)?;
    let omega0 = PacketParams {
        x0: 0.0,
        p0: 0.0,
        sigma: 1.0,
    }
    .sample(grid)?;

    let family = TangentFamily::heat_gauss(&v, grid)?;
    let h = discretize_hamiltonian(&HamiltonianSpec::new(
        HamiltonianKind::HalfLaplacianMinusV,
        v,
        grid,
    )?)?;
    let reference = EigenDecomposition::new(&h)?.semigroup(t, &omega0)?;
    println!("heat-gauss family, V = cos x, t = {t}:");
    for n in [1usize, 4, 16, 64] {
        let out = evolve_heat(&family, t, n, &omega0)?;
        println!("  n = {n:>3}: error vs exp(tH) {:.4e}", out.sub(&reference)?.l2_norm());
    }

    let grid = Grid::new(-40.0, 40.0, 512)?;
    let v = Potential::sample(grid, f64::cos)?;
    let omega0 = PacketParams {
        x0: 0.0,
        p0: 0.0,
        sigma: 1.5,
    }
    .sample(grid)?;
    let family = TangentFamily::polyharmonic(&v, 2, grid)?;
    let h = discretize_hamiltonian(&HamiltonianSpec::new(
        HamiltonianKind::NegPolyharmonicMinusV { n_order: 2 },
        v,
        grid,
    )?)?;
    let reference = EigenDecomposition::new(&h)?.semigroup(t, &omega0)?;
    println!("polyharmonic family, N = 2, V = cos x, t = {t}:");
    for n in [1usize, 4, 16, 64] {
        let out = evolve_heat(&family, t, n, &omega0)?;
        println!("  n = {n:>3}: error vs exp(tH) {:.4e}", out.sub(&reference)?.l2_norm());
    }
    Ok(())
}
