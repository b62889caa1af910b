//! Separable N-dimensional DFT over a row-major grid, built from one
//! [`rustfft`] plan per axis.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for every axis of one grid shape.
///
/// Neither direction is normalized; callers divide by the element count
/// after an inverse transform.
#[derive(Clone)]
pub struct NdFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for NdFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NdFft").field("dims", &self.dims).finish()
    }
}

impl NdFft {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.iter().map(|&d| planner.plan_fft_forward(d)).collect();
        let inverse = dims.iter().map(|&d| planner.plan_fft_inverse(d)).collect();
        NdFft {
            dims: dims.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.forward);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inverse);
    }

    fn run(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(buf.len(), self.len(), "buffer length does not match grid");
        let ndim = self.dims.len();
        let mut stride = 1usize;
        for axis in (0..ndim).rev() {
            let n = self.dims[axis];
            if n > 1 {
                let plan = &plans[axis];
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                if stride == 1 {
                    // Innermost axis is contiguous; rustfft batches over chunks.
                    plan.process_with_scratch(buf, &mut scratch);
                } else {
                    let block = n * stride;
                    let mut line = vec![Complex64::default(); n];
                    for outer in (0..buf.len()).step_by(block) {
                        for inner in 0..stride {
                            let base = outer + inner;
                            for (j, slot) in line.iter_mut().enumerate() {
                                *slot = buf[base + j * stride];
                            }
                            plan.process_with_scratch(&mut line, &mut scratch);
                            for (j, v) in line.iter().enumerate() {
                                buf[base + j * stride] = *v;
                            }
                        }
                    }
                }
            }
            stride *= n;
        }
    }
}
