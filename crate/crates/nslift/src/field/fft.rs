//! Cached 3D complex FFTs on the uniform periodic grid.
//!
//! Forward transforms map physical samples to Fourier coefficients with the
//! 1/n^3 normalization, so a field u(x) = sum_k c(k) exp(i k.x) round-trips
//! exactly. Plans are cached per (length, direction) and shared.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

fn plan_cache() -> &'static Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

/// One 3D pass: transform every line along `axis` (0 = x outer, 2 = z inner).
fn transform_axis(data: &mut [Complex64], n: usize, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    match axis {
        2 => {
            for line in data.chunks_exact_mut(n) {
                fft.process_with_scratch(line, &mut scratch);
            }
        }
        1 => {
            let mut buf = vec![Complex64::ZERO; n];
            for ix in 0..n {
                for iz in 0..n {
                    let base = ix * n * n + iz;
                    for iy in 0..n {
                        buf[iy] = data[base + iy * n];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for iy in 0..n {
                        data[base + iy * n] = buf[iy];
                    }
                }
            }
        }
        0 => {
            let mut buf = vec![Complex64::ZERO; n];
            for iy in 0..n {
                for iz in 0..n {
                    let base = iy * n + iz;
                    for ix in 0..n {
                        buf[ix] = data[base + ix * n * n];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for ix in 0..n {
                        data[base + ix * n * n] = buf[ix];
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Physical samples -> Fourier coefficients (includes the 1/n^3 factor).
pub fn forward3(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n * n);
    let fft = plan(n, false);
    for axis in 0..3 {
        transform_axis(data, n, axis, &fft);
    }
    let scale = 1.0 / (n * n * n) as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Fourier coefficients -> physical samples.
pub fn inverse3(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n * n);
    let fft = plan(n, true);
    for axis in 0..3 {
        transform_axis(data, n, axis, &fft);
    }
}

/// Symmetrize so that c(-k) = conj(c(k)) holds exactly. Self-conjugate modes
/// (index 0 and n/2 per axis) are forced real.
pub fn hermitianize(data: &mut [Complex64], n: usize) {
    let mirror = |j: usize| (n - j) % n;
    for ix in 0..n {
        let mx = mirror(ix);
        for iy in 0..n {
            let my = mirror(iy);
            for iz in 0..n {
                let mz = mirror(iz);
                let a = (ix * n + iy) * n + iz;
                let b = (mx * n + my) * n + mz;
                if a < b {
                    let avg = 0.5 * (data[a] + data[b].conj());
                    data[a] = avg;
                    data[b] = avg.conj();
                } else if a == b {
                    data[a] = Complex64::new(data[a].re, 0.0);
                }
            }
        }
    }
}
