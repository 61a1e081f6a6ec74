//! Square 2-D complex FFTs over row-major buffers, with a process-wide plan
//! cache. Plans are immutable once built, so sharing them across threads is
//! safe and every call with the same input produces the same bits.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

#[derive(Clone, Copy)]
pub(crate) enum Direction {
    /// `X_k = Σ_j x_j e^{-2πijk/n}` (unnormalized).
    Forward,
    /// `x_j = Σ_k X_k e^{+2πijk/n}` (unnormalized).
    Inverse,
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const TILE: usize = 16;
    for bi in (0..n).step_by(TILE) {
        for bj in (0..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                for j in bj..(bj + TILE).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// In-place unnormalized 2-D transform of an `n × n` row-major buffer.
pub(crate) fn fft2(buf: &mut [Complex64], n: usize, dir: Direction) {
    debug_assert_eq!(buf.len(), n * n);
    let p = plans(n);
    let fft = match dir {
        Direction::Forward => &p.forward,
        Direction::Inverse => &p.inverse,
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(buf, &mut tmp, n);
    fft.process_with_scratch(&mut tmp, &mut scratch);
    transpose(&tmp, buf, n);
}
