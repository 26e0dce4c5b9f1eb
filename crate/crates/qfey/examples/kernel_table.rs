//! Evaluate the polyharmonic kernel l(t, y) both ways: the residue closed
//! form and the adaptive quadrature of the defining Fourier integral.
//!
//! ```bash
//! cargo run --release --example kernel_table
//! ```

use qfey::kernels::{
    gauss_kernel, polyharmonic_kernel, polyharmonic_kernel_quadrature, PolyharmonicParams,
};

fn main() -> Result<(), qfey::QfeyError> {
    println!("Gauss kernel at t = 1: peak {:.7}", gauss_kernel(1.0, 0.0)?);

    for n in [2usize, 3] {
        let params = PolyharmonicParams::new(n)?;
        println!("\npolyharmonic kernel, N = {n}, t = 1:");
        println!(
            "{:>6} {:>16} {:>16} {:>10}",
            "y", "residue form", "quadrature", "diff"
        );
        for y in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let closed = polyharmonic_kernel(1.0, y, &params)?;
            let oracle = polyharmonic_kernel_quadrature(1.0, y, n)?;
            println!(
                "{y:>6} {closed:>16.10} {oracle:>16.10} {:>10.1e}",
                (closed - oracle).abs()
            );
        }
    }
    println!("\nscaling law: l(t, y) = t^(-1/2N) l(1, t^(-1/2N) y)");
    let params = PolyharmonicParams::new(2)?;
    let (t, y) = (0.3_f64, 1.7);
    let s = t.powf(-0.25);
    println!(
        "  l({t}, {y}) = {:.12}  vs scaled {:.12}",
        polyharmonic_kernel(t, y, &params)?,
        s * polyharmonic_kernel(1.0, s * y, &params)?
    );
    Ok(())
}
