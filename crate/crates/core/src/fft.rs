//! Thin row-major multi-dimensional FFT wrapper over `rustfft`.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// In-place FFT along every axis of a row-major `dim`-dimensional cube with
/// `n` samples per axis. The inverse transform includes the `1/n^dim` factor,
/// so `inverse(forward(x)) == x` up to rounding.
pub fn transform(data: &mut [Complex<f64>], dim: usize, n: usize, forward: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, forward);
    let mut line = vec![Complex::default(); n];
    for axis in 0..dim {
        // stride of the axis in row-major order, axis 0 slowest
        let stride = n.pow((dim - 1 - axis) as u32);
        let lines = data.len() / n;
        for l in 0..lines {
            // decompose the line id into the base offset of this 1-d slice
            let block = l / stride;
            let offset = l % stride;
            let base = block * stride * n + offset;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
    if !forward {
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward transform of a real field into a fresh complex buffer.
pub fn forward_real(values: &[f64], dim: usize, n: usize) -> Vec<Complex<f64>> {
    let mut data: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform(&mut data, dim, n, true);
    data
}

/// Inverse transform, discarding the (round-off level) imaginary part.
pub fn inverse_to_real(mut data: Vec<Complex<f64>>, dim: usize, n: usize) -> Vec<f64> {
    transform(&mut data, dim, n, false);
    data.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let n = 16;
        let vals: Vec<f64> = (0..n * n).map(|i| (i as f64 * 0.37).sin()).collect();
        let spec = forward_real(&vals, 2, n);
        let back = inverse_to_real(spec, 2, n);
        for (a, b) in vals.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_3d() {
        let n = 8;
        let vals: Vec<f64> = (0..n * n * n).map(|i| (i as f64 * 0.11).cos()).collect();
        let spec = forward_real(&vals, 3, n);
        let back = inverse_to_real(spec, 3, n);
        for (a, b) in vals.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
