use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalised in-place d-dimensional FFT over a row-major array.
pub(crate) fn fft_nd(data: &mut [Complex64], grid: &Grid, inverse: bool) {
    let n = grid.n();
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    let total = grid.len();
    debug_assert_eq!(data.len(), total);

    // Last axis is contiguous.
    plan.process(data);

    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 0..grid.dim() - 1 {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}
