//! Shared FFT plumbing: cached plans and normalized transforms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(len: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
        })
        .clone()
}

/// In-place forward DFT, unnormalized: out[k] = sum_j in[j] exp(-2 pi i j k / m).
pub(crate) fn fft_in_place(buf: &mut [Complex64]) {
    plans(buf.len()).0.process(buf);
}

/// In-place inverse DFT with 1/m normalization, so ifft(fft(x)) = x.
pub(crate) fn ifft_in_place(buf: &mut [Complex64]) {
    let m = buf.len();
    plans(m).1.process(buf);
    let scale = 1.0 / m as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut buf: Vec<Complex64> = (0..16)
            .map(|j| Complex64::new(j as f64, (j * j) as f64))
            .collect();
        let orig = buf.clone();
        fft_in_place(&mut buf);
        ifft_in_place(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
