//! Evaluate all six formula variants of the quasi-Feynman construction at
//! finite (n, k) and cross-check them against each other.
//!
//! ```bash
//! cargo run --release --example formula_variants
//! ```

use qfey::families::TangentFamily;
use qfey::grid::{Grid, Potential};
use qfey::oracle::PacketParams;
use qfey::propagator::{
    evaluate_formula, evolve_schrodinger, resolve_k, FormulaId, PropagationSpec,
};

fn main() -> Result<(), qfey::QfeyError> {
    let grid = Grid::new(-10.0, 10.0, 32)?;
    let v = Potential::sample(grid, f64::cos)?;
    let family = TangentFamily::heat_gauss(&v, grid)?;
    let psi0 = PacketParams {
        x0: 0.0,
        p0: 1.0,
        sigma: 1.2,
    }
    .sample(grid)?;

    let base = PropagationSpec::new(1.0, 0.5, 2)?;
    let merged = evolve_schrodinger(&family, &base.with_formula(FormulaId::F1Merged), &psi0)?;
    let product = evolve_schrodinger(&family, &base.with_formula(FormulaId::F1Product), &psi0)?;
    println!(
        "F1_product vs F1_merged: {:.2e}",
        product.sub(&merged)?.l2_norm()
    );

    let k = 30;
    for formula in [
        FormulaId::F2Taylor,
        FormulaId::F3Binomial,
        FormulaId::F4Euler,
        FormulaId::F5EulerBinomial,
        FormulaId::F6FullBinomial,
    ] {
        let state = evaluate_formula(&family, &base.with_formula(formula), &psi0, k)?;
        println!(
            "{:<18} k={k}: diff vs F1_merged {:.3e}",
            formula.name(),
            state.sub(&merged)?.l2_norm()
        );
    }

    // the Euler variant converges like 1/k; resolve k automatically
    let resolved = resolve_k(&family, &base.with_formula(FormulaId::F4Euler), &psi0)?;
    println!(
        "F4_euler resolved at k = {} (converged: {}), diff {:.3e}",
        resolved.k,
        resolved.converged,
        resolved.state.sub(&merged)?.l2_norm()
    );
    Ok(())
}
