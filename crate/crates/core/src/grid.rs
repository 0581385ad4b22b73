//! Symmetric sampling grid shared by the position and momentum pictures.
//!
//! Positions are `x_j = -L + j dx` with `dx = 2L/N`, so `x = 0` sits at
//! `j = N/2`. The conjugate momentum axis is `p_k = -P + k dp` with
//! `dp = pi/L` and `P = pi/dx`. Both axes are dimensionless: `x/Delta`
//! and `p Delta/hbar`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Position,
    Momentum,
}

impl Representation {
    pub fn other(self) -> Self {
        match self {
            Representation::Position => Representation::Momentum,
            Representation::Momentum => Representation::Position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    half_width: f64,
}

impl Grid1D {
    pub const DEFAULT_POINTS: usize = 1024;
    pub const DEFAULT_HALF_WIDTH: f64 = 8.0;
    pub const MIN_POINTS: usize = 64;
    pub const MIN_HALF_WIDTH: f64 = 6.0;

    pub fn new(n_points: usize, half_width: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(WvaError::InvalidGrid(format!(
                "n_points = {n_points} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        if !half_width.is_finite() || half_width < Self::MIN_HALF_WIDTH {
            return Err(WvaError::InvalidGrid(format!(
                "half_width = {half_width} must be >= {}",
                Self::MIN_HALF_WIDTH
            )));
        }
        Ok(Self {
            n_points,
            half_width,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Position spacing `dx`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn momentum_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Largest representable momentum magnitude (Nyquist).
    pub fn momentum_half_width(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn position(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn momentum(&self, k: usize) -> f64 {
        -self.momentum_half_width() + k as f64 * self.momentum_spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.momentum(k)).collect()
    }

    pub fn axis(&self, rep: Representation) -> Vec<f64> {
        match rep {
            Representation::Position => self.positions(),
            Representation::Momentum => self.momenta(),
        }
    }

    pub fn step(&self, rep: Representation) -> f64 {
        match rep {
            Representation::Position => self.spacing(),
            Representation::Momentum => self.momentum_spacing(),
        }
    }

    /// Index of `-q` for the sample at index `i` (the first sample has no mirror).
    pub fn mirror_index(&self, i: usize) -> Option<usize> {
        (i > 0 && i < self.n_points).then(|| self.n_points - i)
    }

    /// Index of the sample closest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x + self.half_width) / self.spacing()).round();
        j.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self {
            n_points: Self::DEFAULT_POINTS,
            half_width: Self::DEFAULT_HALF_WIDTH,
        }
    }
}
