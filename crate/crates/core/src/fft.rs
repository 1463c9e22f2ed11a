//! Minimal n-dimensional complex FFT on flat row-major buffers, built from
//! 1D transforms.
//!
//! Conventions match the analysis the solvers rely on: the forward transform
//! divides by the number of points, so `spectrum[0]` is the spatial mean and
//! Parseval reads `<f g> = sum_xi f(xi) conj(g(xi))`; the inverse transform
//! is the plain unnormalized synthesis sum.

use num_complex::Complex;
use rustfft::FftPlanner;

/// Signed lattice frequency of DFT bin `k` on an axis of `n` points, in
/// `[-n/2, (n-1)/2]`.
pub(crate) fn signed_freq(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn transform_axes(shape: &[usize], data: &mut [Complex<f64>], forward: bool) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(data.len(), total);
    let mut planner = FftPlanner::<f64>::new();
    let mut scratch: Vec<Complex<f64>> = Vec::new();

    for axis in 0..shape.len() {
        let len = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let plan = if forward {
            planner.plan_fft_forward(len)
        } else {
            planner.plan_fft_inverse(len)
        };
        scratch.resize(len, Complex::default());
        for o in 0..outer {
            for i in 0..inner {
                let base = o * len * inner + i;
                for k in 0..len {
                    scratch[k] = data[base + k * inner];
                }
                plan.process(&mut scratch);
                for k in 0..len {
                    data[base + k * inner] = scratch[k];
                }
            }
        }
    }

    if forward {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// In-place forward transform with `1/N` normalization.
pub(crate) fn fft_forward(shape: &[usize], data: &mut [Complex<f64>]) {
    transform_axes(shape, data, true);
}

/// In-place unnormalized inverse transform.
pub(crate) fn fft_inverse(shape: &[usize], data: &mut [Complex<f64>]) {
    transform_axes(shape, data, false);
}

/// Lifts a real buffer into a complex one.
pub(crate) fn to_complex(values: &[f64]) -> Vec<Complex<f64>> {
    values.iter().map(|&v| Complex::new(v, 0.0)).collect()
}
