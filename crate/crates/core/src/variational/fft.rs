use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

const BATCH: usize = 16;

/// Unnormalized d-dimensional FFT on a grid's row-major layout, built from
/// 1-D transforms along each axis.
pub(crate) struct FftNd {
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FftNd {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let shape = grid.shape().to_vec();
        let forward: Vec<_> = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse: Vec<_> = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let scratch_len = forward
            .iter()
            .chain(&inverse)
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let nmax = shape.iter().copied().max().unwrap_or(0);
        Self {
            strides: grid.strides(),
            len: grid.len(),
            shape,
            forward,
            inverse,
            line: vec![Complex64::default(); nmax * BATCH],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    fn run(&mut self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len);
        for axis in 0..self.shape.len() {
            let plan = if inverse { &self.inverse[axis] } else { &self.forward[axis] };
            let n = self.shape[axis];
            let s = self.strides[axis];
            if s == 1 {
                plan.process_with_scratch(data, &mut self.scratch);
                continue;
            }
            let block = s * n;
            for outer in (0..self.len).step_by(block) {
                let mut inner = 0;
                while inner < s {
                    // Batch of adjacent lines, gathered line-major.
                    let b = BATCH.min(s - inner);
                    let buf = &mut self.line[..b * n];
                    for k in 0..n {
                        let row = outer + k * s + inner;
                        for j in 0..b {
                            buf[j * n + k] = data[row + j];
                        }
                    }
                    plan.process_with_scratch(buf, &mut self.scratch);
                    for k in 0..n {
                        let row = outer + k * s + inner;
                        for j in 0..b {
                            data[row + j] = buf[j * n + k];
                        }
                    }
                    inner += b;
                }
            }
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Inverse including the `1/N` factor.
    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, true);
        let s = 1.0 / self.len as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    pub(crate) fn forward_real(&mut self, v: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut data);
        data
    }

    /// Inverse transform keeping the real part.
    pub(crate) fn inverse_real(&mut self, mut data: Vec<Complex64>, out: &mut [f64]) {
        self.inverse(&mut data);
        for (o, z) in out.iter_mut().zip(&data) {
            *o = z.re;
        }
    }
}

/// Per-axis symbol of the backward difference `(1 - e^{-iθ})/h` at every
/// frequency index, for each axis.
pub(crate) fn backward_symbols(grid: &Grid) -> Vec<Vec<Complex64>> {
    (0..grid.dim())
        .map(|a| {
            let n = grid.shape()[a];
            let h = grid.spacing(a);
            (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n as f64;
                    (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -th)) / h
                })
                .collect()
        })
        .collect()
}

/// Signed integer frequency of index `k` (numpy `fftfreq` order).
pub(crate) fn signed_frequency(k: usize, n: usize) -> i64 {
    if k <= (n - 1) / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
