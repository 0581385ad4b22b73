//! Unitary discrete transform between the position and momentum samples.
//!
//! Continuum kernel: `<x|p> = exp(i p x) / sqrt(2 pi)` in dimensionless
//! units. On the grid this reduces to a DFT with alternating-sign
//! modulation on both sides; the residual constant phase `exp(-i P L)` is
//! one because `P L = pi N / 2` and `N` is a multiple of four.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid1D;

fn checkerboard(buf: &mut [Complex64]) {
    for v in buf.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

pub(crate) fn position_to_momentum(grid: &Grid1D, amps: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n_points();
    debug_assert_eq!(amps.len(), n);
    let mut buf = amps.to_vec();
    checkerboard(&mut buf);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    checkerboard(&mut buf);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

pub(crate) fn momentum_to_position(grid: &Grid1D, amps: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n_points();
    debug_assert_eq!(amps.len(), n);
    let mut buf = amps.to_vec();
    checkerboard(&mut buf);
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    checkerboard(&mut buf);
    let scale = grid.momentum_spacing() / (2.0 * PI).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}
