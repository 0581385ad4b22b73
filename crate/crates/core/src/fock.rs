//! Truncated cavity ladder `|0> ... |n_max>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    pub n_max: usize,
}

impl FockSpace {
    pub const DEFAULT_CUTOFF: usize = 4;

    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// `a` with `<n-1|a|n> = sqrt(n)`.
    pub fn annihilation(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| {
            if c == r + 1 {
                Complex64::from((c as f64).sqrt())
            } else {
                Complex64::from(0.0)
            }
        })
    }

    pub fn creation(&self) -> DMatrix<Complex64> {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            Complex64::from(if r == c { r as f64 } else { 0.0 })
        })
    }
}

impl Default for FockSpace {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CUTOFF)
    }
}
