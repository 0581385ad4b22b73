//! Exact propagation of the position-diagonal qubit ⊗ cavity dynamics.
//!
//! With the kinetic term dropped (impulse regime) the lab-frame Hamiltonian
//! commutes with position, so `exp(-i H t)` factorizes into one small matrix
//! exponential per grid point. That is the whole Dyson series summed to all
//! orders, including the counter-rotating terms, up to the Fock cutoff.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::composite::CompositeState;
use crate::error::{Result, WvaError};
use crate::expm::{unitary_from_hermitian, ExpmMethod};
use crate::grid::Representation;
use crate::hamiltonian::{HamiltonianKind, LocalModel};
use crate::joint::JointEnsemble;
use crate::parallel::{for_each_chunk, map_indices, Execution};
use crate::params::{PhysicalParams, RegimeStatus};
use crate::qubit::EXCITED;

/// Cutoff-convergence delta above which a warning is recorded.
pub const CUTOFF_WARN: f64 = 1e-6;
/// Cutoff-convergence delta above which propagation fails.
pub const CUTOFF_FAIL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub method: ExpmMethod,
    pub execution: Execution,
    /// Grid points re-propagated with `n_max + 2` photons.
    pub probe_points: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            method: ExpmMethod::Eigen,
            execution: Execution::Parallel,
            probe_points: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactDiagnostics {
    pub cavity_excitation: f64,
    pub norm_drift: f64,
    pub cutoff_delta: f64,
    pub cutoff_status: RegimeStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorResult {
    pub state: CompositeState,
    pub frame: Frame,
    pub diagnostics: ExactDiagnostics,
}

fn apply_block(u: &nalgebra::DMatrix<Complex64>, block: &mut [Complex64]) {
    let v = DVector::from_column_slice(block);
    let out = u * v;
    block.copy_from_slice(out.as_slice());
}

fn cutoff_delta(
    state: &CompositeState,
    model: &LocalModel,
    kind: HamiltonianKind,
    evolved: &CompositeState,
    opts: &ExactOptions,
) -> f64 {
    let grid = state.grid();
    let nf = state.fock().dim();
    let nf2 = nf + 2;
    let probes = opts.probe_points.max(1);
    let deltas = map_indices(probes, opts.execution, |i| {
        let x = if probes == 1 {
            0.0
        } else {
            -4.0 + 8.0 * i as f64 / (probes - 1) as f64
        };
        let j = grid.nearest_index(x);
        let block = state.block(j);
        let norm: f64 = block.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let mut padded = vec![Complex64::from(0.0); 2 * nf2];
        for q in 0..2 {
            for n in 0..nf {
                padded[q * nf2 + n] = block[q * nf + n];
            }
        }
        let h = model.hamiltonian(kind, nf2 - 1, grid.position(j));
        apply_block(&unitary_from_hermitian(&h, opts.method), &mut padded);
        let reference = evolved.block(j);
        let mut err = 0.0;
        for q in 0..2 {
            for n in 0..nf2 {
                let big = padded[q * nf2 + n];
                let small = if n < nf {
                    reference[q * nf + n]
                } else {
                    Complex64::from(0.0)
                };
                err += (big - small).norm_sqr();
            }
        }
        err.sqrt() / norm
    });
    deltas.into_iter().fold(0.0, f64::max)
}

/// Propagates a position-representation state for the duration `params.t`.
pub fn propagate_exact(
    state: &CompositeState,
    kind: HamiltonianKind,
    params: &PhysicalParams,
    opts: &ExactOptions,
) -> Result<PropagatorResult> {
    if state.representation() != Representation::Position {
        return Err(WvaError::Contract(
            "exact propagation needs a position-representation state".into(),
        ));
    }
    if !matches!(
        kind,
        HamiltonianKind::FullSinusoidal | HamiltonianKind::Linearized
    ) {
        return Err(WvaError::Contract(format!(
            "exact engine runs FullSinusoidal or Linearized, not {kind:?}"
        )));
    }
    params.validate()?;
    let model = LocalModel::new(params);
    let grid = *state.grid();
    let n_max = state.fock().n_max;
    let mut evolved = state.clone();
    let d = evolved.block_len();
    for_each_chunk(evolved.amplitudes_mut(), d, opts.execution, |j, block| {
        let h = model.hamiltonian(kind, n_max, grid.position(j));
        apply_block(&unitary_from_hermitian(&h, opts.method), block);
    });

    let delta = cutoff_delta(state, &model, kind, &evolved, opts);
    if delta > CUTOFF_FAIL {
        return Err(WvaError::CutoffNotConverged { delta });
    }
    let diagnostics = ExactDiagnostics {
        cavity_excitation: evolved.cavity_excitation(),
        norm_drift: (evolved.norm_sqr() - state.norm_sqr()).abs(),
        cutoff_delta: delta,
        cutoff_status: if delta > CUTOFF_WARN {
            RegimeStatus::Warn
        } else {
            RegimeStatus::Pass
        },
    };
    Ok(PropagatorResult {
        state: evolved,
        frame: Frame::Lab,
        diagnostics,
    })
}

/// Multiplies by `exp[sign * i (omega_c t (n + 1/2) + omega_a t sigma_z / 2)]`.
fn rotate_free(state: &CompositeState, params: &PhysicalParams, sign: f64) -> CompositeState {
    let model = LocalModel::new(params);
    let nf = state.fock().dim();
    // reduce each phase mod 2 pi once instead of per amplitude
    let phase = |q: usize, n: usize| {
        let sz = if q == EXCITED { 0.5 } else { -0.5 };
        let p = model.omega_c_t * (n as f64 + 0.5) + model.omega_a_t * sz;
        Complex64::from_polar(1.0, sign * p.rem_euclid(2.0 * PI))
    };
    let table: Vec<Complex64> = (0..2 * nf).map(|i| phase(i / nf, i % nf)).collect();
    let mut out = state.clone();
    for (i, a) in out.amplitudes_mut().iter_mut().enumerate() {
        *a *= table[i % (2 * nf)];
    }
    out
}

/// Applies `U_2^dag` so that the free qubit and cavity phases are removed.
pub fn to_interaction_frame(
    result: &PropagatorResult,
    params: &PhysicalParams,
) -> Result<PropagatorResult> {
    if result.frame != Frame::Lab {
        return Err(WvaError::Contract(
            "state is already in the interaction frame".into(),
        ));
    }
    Ok(PropagatorResult {
        state: rotate_free(&result.state, params, 1.0),
        frame: Frame::Interaction,
        diagnostics: result.diagnostics,
    })
}

/// Inverse of [`to_interaction_frame`].
pub fn to_lab_frame(
    result: &PropagatorResult,
    params: &PhysicalParams,
) -> Result<PropagatorResult> {
    if result.frame != Frame::Interaction {
        return Err(WvaError::Contract(
            "state is already in the lab frame".into(),
        ));
    }
    Ok(PropagatorResult {
        state: rotate_free(&result.state, params, -1.0),
        frame: Frame::Lab,
        diagnostics: result.diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityDisposal {
    /// Project onto the cavity vacuum and renormalize.
    #[default]
    ProjectVacuum,
    /// Trace the cavity out, keeping the reduced pointer ⊗ qubit density.
    PartialTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisposedState {
    pub ensemble: JointEnsemble,
    /// Probability that the cavity was found in vacuum.
    pub vacuum_probability: f64,
}

pub fn dispose_cavity(state: &CompositeState, disposal: CavityDisposal) -> Result<DisposedState> {
    let total = state.norm_sqr();
    let p0 = state.photon_probability(0) / total;
    let ensemble = match disposal {
        CavityDisposal::ProjectVacuum => {
            if !(p0 > 0.0) {
                return Err(WvaError::Domain("cavity has no vacuum component".into()));
            }
            let vac = state.project_cavity(0);
            JointEnsemble::pure(vac.scaled(Complex64::from(1.0 / (p0 * total).sqrt())))
        }
        CavityDisposal::PartialTrace => {
            let mut e = state.trace_cavity();
            let s = Complex64::from(1.0 / total.sqrt());
            e.components = e.components.iter().map(|c| c.scaled(s)).collect();
            e
        }
    };
    Ok(DisposedState {
        ensemble,
        vacuum_probability: p0,
    })
}
