//! Single-branch pointer wavefunctions on a [`Grid1D`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WvaError};
use crate::grid::{Grid1D, Representation};
use crate::spectral;

/// Tolerance on `sum |psi|^2 * step` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState {
    grid: Grid1D,
    representation: Representation,
    amplitudes: Vec<Complex64>,
}

impl WavepacketState {
    pub fn from_amplitudes(
        grid: Grid1D,
        representation: Representation,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(WvaError::Contract(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid,
            representation,
            amplitudes,
        })
    }

    /// Builds a state by sampling `f` on the axis of `representation`.
    pub fn from_fn(
        grid: Grid1D,
        representation: Representation,
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        let amplitudes = grid.axis(representation).into_iter().map(f).collect();
        Self {
            grid,
            representation,
            amplitudes,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * self.grid.step(self.representation)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(WvaError::Unnormalized { norm: n });
        }
        Ok(self.scaled(Complex64::from(1.0 / n.sqrt())))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            representation: self.representation,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn to_momentum(&self) -> Result<Self> {
        if self.representation != Representation::Position {
            return Err(WvaError::Contract(
                "to_momentum requires a position-representation state".into(),
            ));
        }
        Ok(Self {
            grid: self.grid,
            representation: Representation::Momentum,
            amplitudes: spectral::position_to_momentum(&self.grid, &self.amplitudes),
        })
    }

    pub fn to_position(&self) -> Result<Self> {
        if self.representation != Representation::Momentum {
            return Err(WvaError::Contract(
                "to_position requires a momentum-representation state".into(),
            ));
        }
        Ok(Self {
            grid: self.grid,
            representation: Representation::Position,
            amplitudes: spectral::momentum_to_position(&self.grid, &self.amplitudes),
        })
    }

    /// Returns the state in `rep`, transforming only when needed.
    pub fn in_representation(&self, rep: Representation) -> Self {
        match (self.representation, rep) {
            (a, b) if a == b => self.clone(),
            (Representation::Position, _) => self.to_momentum().expect("checked"),
            (Representation::Momentum, _) => self.to_position().expect("checked"),
        }
    }

    /// Mean and variance of the coordinate of the current representation.
    pub fn moments(&self) -> Result<Moments> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(WvaError::Unnormalized { norm });
        }
        Ok(self.moments_unchecked())
    }

    pub(crate) fn moments_unchecked(&self) -> Moments {
        let (w, m1, m2) = raw_moments(&self.grid, self.representation, &self.amplitudes);
        let mean = m1 / w;
        Moments {
            mean,
            variance: m2 / w - mean * mean,
        }
    }

    /// `<self|other>`; both states must share grid and representation.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid || self.representation != other.representation {
            return Err(WvaError::Contract(
                "inner product of states on different grids or representations".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.step(self.representation))
    }

    /// `|<self|other>|^2` for normalized inputs.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest pointwise amplitude difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Shifts the momentum distribution, `phi(p) -> phi(p - shift)`, by the
    /// exact position-space phase `exp(i shift x)`.
    pub fn translate_momentum(&self, shift: f64) -> Self {
        let pos = self.in_representation(Representation::Position);
        let grid = self.grid;
        let amplitudes = pos
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| a * Complex64::from_polar(1.0, shift * grid.position(j)))
            .collect();
        let shifted = Self {
            grid,
            representation: Representation::Position,
            amplitudes,
        };
        shifted.in_representation(self.representation)
    }
}

/// Returns `(sum w, sum q w, sum q^2 w)` with `w = |psi|^2 * step`.
pub(crate) fn raw_moments(
    grid: &Grid1D,
    rep: Representation,
    amplitudes: &[Complex64],
) -> (f64, f64, f64) {
    let step = grid.step(rep);
    let mut acc = (0.0, 0.0, 0.0);
    for (q, a) in grid.axis(rep).into_iter().zip(amplitudes) {
        let w = a.norm_sqr() * step;
        acc.0 += w;
        acc.1 += q * w;
        acc.2 += q * q * w;
    }
    acc
}

/// Unit-width Gaussian `(2 pi)^(-1/4) exp(-x^2/4)`, renormalized on the grid.
pub fn make_gaussian(grid: Grid1D) -> WavepacketState {
    let c = (2.0 * PI).powf(-0.25);
    let raw = WavepacketState::from_fn(grid, Representation::Position, |x| {
        Complex64::from(c * (-x * x / 4.0).exp())
    });
    raw.normalized().expect("gaussian has positive norm")
}
