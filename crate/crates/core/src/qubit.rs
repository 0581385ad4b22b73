//! Internal two-level state `alpha|g> + beta e^{i theta}|e>` and the
//! post-selection rotation `exp(-i eta sigma_x)`.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};

pub const QUBIT_NORM_TOLERANCE: f64 = 1e-12;

/// Basis index of `|g>`.
pub const GROUND: usize = 0;
/// Basis index of `|e>`.
pub const EXCITED: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    alpha: f64,
    beta: f64,
    theta: f64,
}

fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl QubitState {
    pub fn new(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && theta.is_finite())
            || alpha < 0.0
            || beta < 0.0
        {
            return Err(WvaError::Domain(format!(
                "qubit needs finite alpha, beta >= 0 and finite theta (got {alpha}, {beta}, {theta})"
            )));
        }
        let sum = alpha * alpha + beta * beta;
        if (sum - 1.0).abs() > QUBIT_NORM_TOLERANCE {
            return Err(WvaError::QubitNorm { alpha, beta, sum });
        }
        Ok(Self {
            alpha,
            beta,
            theta: wrap_phase(theta),
        })
    }

    /// Rescales `(alpha, beta)` onto the unit circle first.
    pub fn normalized(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        let n = alpha.hypot(beta);
        if !(n > 0.0) {
            return Err(WvaError::Domain("alpha = beta = 0".into()));
        }
        Self::new(alpha / n, beta / n, theta)
    }

    pub fn ground() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            theta: 0.0,
        }
    }

    pub fn excited() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            theta: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `[<g|psi>, <e|psi>]`.
    pub fn amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::from(self.alpha),
            Complex64::from_polar(self.beta, self.theta),
        ]
    }

    /// `exp(i phase |e><e|)` applied to this state.
    pub fn with_excited_phase(&self, phase: f64) -> Self {
        Self {
            theta: wrap_phase(self.theta + phase),
            ..*self
        }
    }

    /// The prepared state `|S_i>` that the bare vacuum shift `exp(-i g0 t |e><e|)`
    /// maps onto `self`.
    pub fn preparation_for(&self, g0_t: f64) -> Self {
        self.with_excited_phase(g0_t)
    }

    /// Picks `(alpha, beta, theta)` so that post-selecting `|g>` after
    /// `exp(-i eta sigma_x)` yields the weak value `target`.
    pub fn for_weak_value(target: Complex64, eta: f64) -> Result<Self> {
        if target.norm() == 0.0 {
            return Ok(Self::ground());
        }
        let z = 1.0 / target - 1.0;
        let amplitude_ratio = z.norm();
        if amplitude_ratio == 0.0 {
            return Ok(Self::excited());
        }
        let ratio = amplitude_ratio * eta.tan();
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(WvaError::Domain(format!(
                "weak value {target} is unreachable with eta = {eta} (need tan(eta) > 0)"
            )));
        }
        let vartheta = z.arg();
        Self::normalized(ratio, 1.0, FRAC_PI_2 - vartheta)
    }
}

/// Single-qubit rotation `exp(-i eta sigma_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub eta: f64,
}

impl Rotation {
    pub fn new(eta: f64) -> Self {
        Self { eta }
    }

    /// Row-major matrix in the `(|g>, |e>)` basis.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let c = Complex64::from(self.eta.cos());
        let s = Complex64::new(0.0, -self.eta.sin());
        [[c, s], [s, c]]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.matrix();
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}
