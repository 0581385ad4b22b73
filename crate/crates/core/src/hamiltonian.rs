//! Local qubit ⊗ cavity Hamiltonians at a fixed transverse position.
//!
//! Without the kinetic term every Hamiltonian here is diagonal in position,
//! so the dynamics splits into independent `2 (n_max + 1)` blocks, one per
//! grid point. Matrices are returned as the dimensionless generator
//! `H t / hbar`; block basis index is `q (n_max + 1) + n` with `q = 0` for
//! `|g>` and `q = 1` for `|e>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::PhysicalParams;
use crate::qubit::{EXCITED, GROUND};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    /// `Omega_0 sin(k x + k x_0)(a + a^dag) sigma_x` plus free terms.
    FullSinusoidal,
    /// Coupling linearized about `x = 0`: `Omega (x + x_c)(a + a^dag) sigma_x`.
    Linearized,
    /// Rotating-wave interaction-picture coupling at time `tau * t`.
    RwaInteraction { tau: f64 },
    /// Large-detuning effective Hamiltonian
    /// `(Omega^2/delta)(x + x_c)^2 (a^dag a sigma_z + |e><e|)`.
    Effective,
}

/// Parameters of the local Hamiltonians in units of `1/t`, with `x`
/// measured in units of `Delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalModel {
    pub omega_a_t: f64,
    pub omega_c_t: f64,
    pub detuning_t: f64,
    pub rabi0_t: f64,
    pub coupling_t: f64,
    pub k_delta: f64,
    pub k_x0: f64,
    pub delta_over_xc: f64,
    pub g0_t: f64,
}

impl LocalModel {
    pub fn new(params: &PhysicalParams) -> Self {
        let t = params.t;
        Self {
            omega_a_t: params.omega_a() * t,
            omega_c_t: params.omega_c() * t,
            detuning_t: params.detuning() * t,
            rabi0_t: params.rabi0() * t,
            coupling_t: params.omega_xc() * t,
            k_delta: params.k_delta(),
            k_x0: params.k_x0,
            delta_over_xc: params.delta_over_xc(),
            g0_t: params.g0() * t,
        }
    }

    /// Dipole coupling `c(x) t` multiplying `(a + a^dag) sigma_x`.
    pub fn coupling(&self, kind: HamiltonianKind, x: f64) -> f64 {
        match kind {
            HamiltonianKind::FullSinusoidal => self.rabi0_t * (self.k_delta * x + self.k_x0).sin(),
            _ => self.coupling_t * (1.0 + x * self.delta_over_xc),
        }
    }

    pub fn hamiltonian(&self, kind: HamiltonianKind, n_max: usize, x: f64) -> DMatrix<Complex64> {
        let nf = n_max + 1;
        let d = 2 * nf;
        let idx = |q: usize, n: usize| q * nf + n;
        let mut h = DMatrix::<Complex64>::zeros(d, d);
        match kind {
            HamiltonianKind::FullSinusoidal | HamiltonianKind::Linearized => {
                for n in 0..nf {
                    let cav = self.omega_c_t * (n as f64 + 0.5);
                    h[(idx(GROUND, n), idx(GROUND, n))] =
                        Complex64::from(cav - 0.5 * self.omega_a_t);
                    h[(idx(EXCITED, n), idx(EXCITED, n))] =
                        Complex64::from(cav + 0.5 * self.omega_a_t);
                }
                let c = self.coupling(kind, x);
                for n in 0..n_max {
                    let v = Complex64::from(c * ((n + 1) as f64).sqrt());
                    // (a + a^dag) sigma_x links |q, n> and |1-q, n+1>
                    for q in [GROUND, EXCITED] {
                        h[(idx(q, n), idx(1 - q, n + 1))] = v;
                        h[(idx(1 - q, n + 1), idx(q, n))] = v;
                    }
                }
            }
            HamiltonianKind::RwaInteraction { tau } => {
                let c = self.coupling(kind, x);
                let phase = Complex64::from_polar(1.0, -self.detuning_t * tau);
                for n in 0..n_max {
                    // a^dag sigma_- e^{-i delta t}: |e, n> -> |g, n+1>
                    let v = phase * c * ((n + 1) as f64).sqrt();
                    h[(idx(GROUND, n + 1), idx(EXCITED, n))] = v;
                    h[(idx(EXCITED, n), idx(GROUND, n + 1))] = v.conj();
                }
            }
            HamiltonianKind::Effective => {
                let s = 1.0 + x * self.delta_over_xc;
                let shift = self.g0_t * s * s;
                for n in 0..nf {
                    let nn = n as f64;
                    h[(idx(GROUND, n), idx(GROUND, n))] = Complex64::from(-shift * nn);
                    h[(idx(EXCITED, n), idx(EXCITED, n))] = Complex64::from(shift * (nn + 1.0));
                }
            }
        }
        assert!(
            (&h - h.adjoint()).camax() == 0.0,
            "local Hamiltonian must be Hermitian"
        );
        h
    }
}

/// `H(x) t / hbar` for one grid point.
pub fn build_local_hamiltonian(
    kind: HamiltonianKind,
    params: &PhysicalParams,
    n_max: usize,
    x: f64,
) -> DMatrix<Complex64> {
    LocalModel::new(params).hamiltonian(kind, n_max, x)
}
