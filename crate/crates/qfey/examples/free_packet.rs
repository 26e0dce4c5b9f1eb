//! Propagate a free Gaussian wave packet with the quasi-Feynman product and
//! compare against the closed-form dispersing packet.
//!
//! ```bash
//! cargo run --release --example free_packet
//! ```

use qfey::families::TangentFamily;
use qfey::grid::{Grid, Potential};
use qfey::oracle::free_packet_evolution;
use qfey::propagator::{evolve_schrodinger, PropagationSpec};

fn main() -> Result<(), qfey::QfeyError> {
    let grid = Grid::new(-20.0, 20.0, 256)?;
    let (x0, p0, sigma) = (0.0, 2.0, 1.0);
    let (a, t) = (1.0, 0.5);

    let family = TangentFamily::heat_gauss(&Potential::zero(grid), grid)?;
    let psi0 = free_packet_evolution(x0, p0, sigma, a, 0.0, grid)?;
    let exact = free_packet_evolution(x0, p0, sigma, a, t, grid)?;

    println!("free packet: x0={x0}, p0={p0}, sigma={sigma}, a={a}, t={t}");
    println!("{:>6} {:>12} {:>12}", "n", "l2 error", "sup error");
    for n in [1usize, 2, 4, 8, 16, 32, 64, 128] {
        let spec = PropagationSpec::new(a, t, n)?;
        let psi = evolve_schrodinger(&family, &spec, &psi0)?;
        let diff = psi.sub(&exact)?;
        println!(
            "{n:>6} {:>12.3e} {:>12.3e}",
            diff.l2_norm(),
            diff.sup_norm()
        );
    }
    println!("(the error decays like 1/n, the Chernoff rate of the step family)");
    Ok(())
}
