//! One end-to-end experiment: prepare, couple, rotate, post-select, measure.

use serde::{Deserialize, Serialize};

use crate::composite::CompositeState;
use crate::effective::propagate_effective;
use crate::error::Result;
use crate::exact::{
    dispose_cavity, propagate_exact, to_interaction_frame, CavityDisposal, ExactDiagnostics,
    ExactOptions,
};
use crate::expm::ExpmMethod;
use crate::fock::FockSpace;
use crate::grid::{Grid1D, Representation};
use crate::hamiltonian::HamiltonianKind;
use crate::joint::{JointEnsemble, JointState};
use crate::parallel::Execution;
use crate::params::{derive_couplings, CouplingReport, PhysicalParams};
use crate::qubit::QubitState;
use crate::wavepacket::make_gaussian;
use crate::weakvalue::{
    postselect_ensemble, predicted_shifts, unselected_momentum_shift, weak_value, MeasuredShifts,
    PostselectedMixture, PostselectionSpec, PredictedShifts, WeakValueResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Effective,
    ExactLinearized,
    ExactSinusoidal,
}

impl Engine {
    pub fn hamiltonian(self) -> HamiltonianKind {
        match self {
            Engine::Effective => HamiltonianKind::Effective,
            Engine::ExactLinearized => HamiltonianKind::Linearized,
            Engine::ExactSinusoidal => HamiltonianKind::FullSinusoidal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub n_points: usize,
    pub half_width: f64,
    pub n_max: usize,
    pub cavity_disposal: CavityDisposal,
    /// Keep the quadratic `g_c'` phase in the effective engine.
    pub keep_gc_prime: bool,
    pub expm: ExpmMethod,
    pub execution: Execution,
    pub cutoff_probes: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_points: 1024,
            half_width: 8.0,
            n_max: FockSpace::DEFAULT_CUTOFF,
            cavity_disposal: CavityDisposal::ProjectVacuum,
            keep_gc_prime: false,
            expm: ExpmMethod::Eigen,
            execution: Execution::Parallel,
            cutoff_probes: 8,
        }
    }
}

impl Numerics {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.n_points, self.half_width)
    }

    pub fn exact_options(&self) -> ExactOptions {
        ExactOptions {
            method: self.expm,
            execution: self.execution,
            probe_points: self.cutoff_probes,
        }
    }
}

/// `qubit` is the state after the bare vacuum phase; the engines are fed
/// the prepared state that this phase maps onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    pub physical: PhysicalParams,
    pub qubit: QubitState,
    pub postselect: PostselectionSpec,
    pub engine: Engine,
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactRecord {
    /// `|<psi_eff ⊗ 0|psi_exact>|^2` in the interaction frame.
    pub fidelity_with_effective: f64,
    pub effective_measured: MeasuredShifts,
    pub effective_probability: f64,
    pub vacuum_probability: f64,
    pub diagnostics: ExactDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub engine: Engine,
    pub couplings: CouplingReport,
    pub weak_value: WeakValueResult,
    pub predicted: PredictedShifts,
    pub measured: MeasuredShifts,
    /// Post-selection probability observed on the evolved state.
    pub probability: f64,
    pub unselected_p_shift_over_dp: f64,
    pub unselected_p_shift_over_dp_measured: f64,
    pub exact: Option<ExactRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub record: RunRecord,
    pub pointer: PostselectedMixture,
}

fn effective_state(exp: &Experiment, grid: Grid1D, keep_gc_prime: bool) -> Result<JointState> {
    let c = exp.physical.couplings();
    let packet = make_gaussian(grid).to_momentum()?;
    propagate_effective(
        &packet,
        &exp.qubit.preparation_for(c.g0_t),
        &c,
        keep_gc_prime,
    )
}

fn unselected_shift(ensemble: &JointEnsemble) -> Result<f64> {
    // <p> / Delta_p = 2 <p~>
    Ok(2.0 * ensemble.marginal_moments(Representation::Momentum)?.mean)
}

/// Exact evolution in the interaction frame, before the cavity is disposed of.
pub fn exact_interaction_state(
    exp: &Experiment,
    grid: Grid1D,
) -> Result<(CompositeState, ExactDiagnostics)> {
    let c = exp.physical.couplings();
    let packet = make_gaussian(grid);
    let initial = CompositeState::vacuum_product(
        &packet,
        &exp.qubit.preparation_for(c.g0_t),
        FockSpace::new(exp.numerics.n_max),
    )?;
    let lab = propagate_exact(
        &initial,
        exp.engine.hamiltonian(),
        &exp.physical,
        &exp.numerics.exact_options(),
    )?;
    let frame = to_interaction_frame(&lab, &exp.physical)?;
    Ok((frame.state, frame.diagnostics))
}

/// Overlap of the exact state with the effective state ⊗ vacuum.
pub fn fidelity_with_effective(exact: &CompositeState, effective: &JointState) -> Result<f64> {
    Ok(exact.overlap_with_joint(effective, 0)?.norm_sqr())
}

pub fn run(exp: &Experiment) -> Result<RunOutput> {
    let couplings = derive_couplings(&exp.physical)?;
    let grid = exp.numerics.grid()?;
    let gc = couplings.g_c;
    let wv = weak_value(&exp.qubit, &exp.postselect)?.with_validity(gc);
    let predicted = predicted_shifts(&wv, gc);
    let keep = exp.numerics.keep_gc_prime;

    let (ensemble, exact) = match exp.engine {
        Engine::Effective => (JointEnsemble::pure(effective_state(exp, grid, keep)?), None),
        Engine::ExactLinearized | Engine::ExactSinusoidal => {
            let (state, diagnostics) = exact_interaction_state(exp, grid)?;
            // the exact dynamics contain the quadratic phase, so compare against it
            let reference = effective_state(exp, grid, true)?;
            let fidelity = fidelity_with_effective(
                &state,
                &reference.in_representation(Representation::Position),
            )?;
            let disposed = dispose_cavity(&state, exp.numerics.cavity_disposal)?;
            let eff_sel = postselect_ensemble(
                &JointEnsemble::pure(effective_state(exp, grid, keep)?),
                &exp.postselect,
            )?;
            let record = ExactRecord {
                fidelity_with_effective: fidelity,
                effective_measured: eff_sel.measured_shifts(),
                effective_probability: eff_sel.probability,
                vacuum_probability: disposed.vacuum_probability,
                diagnostics,
            };
            (disposed.ensemble, Some(record))
        }
    };

    let unselected_measured = unselected_shift(&ensemble)?;
    let pointer = postselect_ensemble(&ensemble, &exp.postselect)?;
    let record = RunRecord {
        engine: exp.engine,
        weak_value: wv,
        predicted,
        measured: pointer.measured_shifts(),
        probability: pointer.probability,
        unselected_p_shift_over_dp: unselected_momentum_shift(&exp.qubit, gc),
        unselected_p_shift_over_dp_measured: unselected_measured,
        exact,
        couplings,
    };
    Ok(RunOutput { record, pointer })
}
