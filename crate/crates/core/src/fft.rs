//! Multidimensional complex FFTs on cubic row-major tables.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

static PLANS: LazyLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let forward = matches!(direction, FftDirection::Forward);
    let mut plans = PLANS.lock().expect("fft plan cache poisoned");
    plans
        .entry((n, forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// Unnormalised in-place transform of an `n^dim` table along every axis.
pub(crate) fn transform(data: &mut [Complex64], n: usize, dim: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let total = data.len();
    let mut lines = vec![Complex64::default(); total];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * stride;
        // gather every line along `axis` contiguously, transform them in one batch, scatter back
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let dst = &mut lines[line * n..(line + 1) * n];
                for (k, slot) in dst.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                line += 1;
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let src = &lines[line * n..(line + 1) * n];
                for (k, value) in src.iter().enumerate() {
                    data[base + k * stride] = *value;
                }
                line += 1;
            }
        }
    }
}

/// Forward transform normalised so that entry 0 is the mean of the samples.
pub(crate) fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, FftDirection::Forward);
    let scale = 1.0 / data.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Inverse of [`forward`]: synthesises samples from mean-normalised coefficients.
pub(crate) fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, FftDirection::Inverse);
}

/// Signed wavenumber of table index `i` on an `n`-point axis; the Nyquist index maps to `-n/2`.
#[inline]
pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Table index of signed wavenumber `k` on an `n`-point axis.
#[inline]
pub(crate) fn wrap_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
