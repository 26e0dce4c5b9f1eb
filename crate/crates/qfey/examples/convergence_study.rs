//! Chernoff convergence of the quasi-Feynman product for a bounded cosine
//! potential, measured against the dense spectral oracle, for the plain
//! family and its three-point recombination.
//!
//! ```bash
//! cargo run --release --example convergence_study
//! ```

use qfey::families::TangentFamily;
use qfey::grid::{Grid, Potential};
use qfey::oracle::{
    discretize_hamiltonian, EigenDecomposition, HamiltonianKind, HamiltonianSpec, PacketParams,
};
use qfey::propagator::run_convergence;

fn main() -> Result<(), qfey::QfeyError> {
    let grid = Grid::new(-20.0, 20.0, 256)?;
    let v = Potential::sample(grid, f64::cos)?;
    let (a, t) = (1.0, 0.5);

    let family = TangentFamily::heat_gauss(&v, grid)?;
    let three_point = family.three_point()?;

    let h = discretize_hamiltonian(&HamiltonianSpec::new(
        HamiltonianKind::HalfLaplacianMinusV,
        v,
        grid,
    )?)?;
    let psi0 = PacketParams {
        x0: 0.0,
        p0: 2.0,
        sigma: 1.0,
    }
    .sample(grid)?;
    let reference = EigenDecomposition::new(&h)?.group(a, t, &psi0)?;

    let n_list = [1usize, 2, 4, 8, 16, 32, 64];
    let plain = run_convergence(&family, a, t, &n_list, &psi0, &reference, "dense oracle")?;
    let improved = run_convergence(&three_point, a, t, &n_list, &psi0, &reference, "dense oracle")?;

    println!("V(x) = cos x on [-20, 20), m = 256, a = {a}, t = {t}");
    println!(
        "{:>5} {:>14} {:>14}",
        "n", "plain l2 error", "3-point l2 error"
    );
    for (p, q) in plain.rows.iter().zip(&improved.rows) {
        println!("{:>5} {:>14.4e} {:>14.4e}", p.n, p.l2_error, q.l2_error);
    }
    println!(
        "log-log slopes: plain {:.2}, three-point {:.2}",
        plain.log_log_slope(),
        improved.log_log_slope()
    );
    Ok(())
}
