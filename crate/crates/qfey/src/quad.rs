//! Adaptive Gauss-Kronrod quadrature (G7/K15 pair with bisection).
//!
//! Kept deliberately small and auditable: this module backs the independent
//! kernel oracle, so it must not share code with the closed forms it checks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{QfeyError, Result};

// QUADPACK G7/K15 abscissae and weights on [-1, 1], positive half.
const XGK: [f64; 8] = [
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.20778495500789847,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224,
    0.06309209262997855,
    0.10479001032225018,
    0.14065325971552592,
    0.1690047266392679,
    0.1903505780647854,
    0.20443294007529889,
    0.20948214108472783,
];
const WG: [f64; 4] = [
    0.1294849661688697,
    0.27970539148927667,
    0.3818300505051189,
    0.4179591836734694,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on the error estimate
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let value = kronrod * half;
    // |K15 - G7| overestimates the K15 error, which keeps the gate conservative
    let error = ((kronrod - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Integrate `f` over the union of consecutive panels given by `breakpoints`,
/// bisecting the worst panel until the summed error estimate drops below
/// `abs_tol`. Errors out instead of returning a value it cannot vouch for.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    if breakpoints.len() < 2 {
        return Err(QfeyError::InvalidParameter(
            "quadrature needs at least one panel".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut error = 0.0;
    for w in breakpoints.windows(2) {
        let p = gk15(&f, w[0], w[1]);
        error += p.error;
        heap.push(p);
    }
    while error > abs_tol && heap.len() < max_panels {
        let worst = heap.pop().expect("heap cannot be empty here");
        if worst.error == 0.0 || (worst.b - worst.a) < f64::EPSILON * worst.b.abs().max(1.0) {
            // cannot improve further; put it back and stop
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // recompute totals to shed accumulated cancellation in the running sums
    let (mut v, mut e) = (0.0, 0.0);
    for p in heap.iter() {
        v += p.value;
        e += p.error;
    }
    if e > abs_tol {
        return Err(QfeyError::QuadratureNonConvergence {
            tol: abs_tol,
            estimate: e,
        });
    }
    Ok(QuadResult {
        value: v,
        error_estimate: e,
        panels: heap.len(),
    })
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    integrate_panels(f, &[a, b], abs_tol, max_panels)
}
