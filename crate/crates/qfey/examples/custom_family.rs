//! Build a tangent family from scratch, symmetrize a one-sided composite,
//! and check its step operators stay unitary under propagation.
//!
//! ```bash
//! cargo run --release --example custom_family
//! ```

use num_complex::Complex64;

use qfey::families::{GeneratorDescriptor, TangentFamily};
use qfey::grid::{Grid, Potential};
use qfey::kernels::{kernel_row, KernelKind};
use qfey::operators::LinearOperator;
use qfey::oracle::PacketParams;
use qfey::propagator::{evolve_schrodinger, PropagationSpec};

fn main() -> Result<(), qfey::QfeyError> {
    let grid = Grid::new(-20.0, 20.0, 128)?;
    let v = Potential::sample(grid, |x| 0.5 * x.sin())?;

    // one-sided composite: multiply by exp(-tV) only on the left, so the
    // operators are not self-adjoint
    let v_inner = v.clone();
    let one_sided = TangentFamily::from_builder(
        grid,
        GeneratorDescriptor::Custom,
        false,
        move |t| {
            if t == 0.0 {
                return Ok(LinearOperator::identity(grid));
            }
            let row = kernel_row(&KernelKind::Gauss, t, grid)?;
            let left: Vec<Complex64> = v_inner
                .values()
                .iter()
                .map(|&vj| Complex64::new((-t * vj).exp(), 0.0))
                .collect();
            let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
            LinearOperator::structured(grid, left, row, ones)
        },
    );

    let t_probe = 0.2;
    println!(
        "one-sided family Hermiticity deviation at t = {t_probe}: {:.3e}",
        one_sided.build(t_probe)?.hermiticity_deviation()
    );
    let symmetric = one_sided.symmetrized();
    println!(
        "after symmetrization: {:.3e}",
        symmetric.build(t_probe)?.hermiticity_deviation()
    );
    println!(
        "identity at zero (CT2 deviation): {:.3e}",
        symmetric.ct2_deviation()?
    );

    // propagation through the symmetrized family is unitary
    let psi0 = PacketParams {
        x0: 0.0,
        p0: 1.0,
        sigma: 1.0,
    }
    .sample(grid)?;
    let psi = evolve_schrodinger(&symmetric, &PropagationSpec::new(1.0, 0.5, 32)?, &psi0)?;
    println!(
        "norm after 32 steps: {:.12} (initial {:.12})",
        psi.l2_norm(),
        psi0.l2_norm()
    );
    Ok(())
}
