//! Rotation, post-selection and weak values.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};
use crate::grid::{Grid1D, Representation};
use crate::joint::{JointEnsemble, JointState};
use crate::params::{RegimeStatus, Thresholds};
use crate::qubit::{QubitState, Rotation, EXCITED, GROUND};
use crate::wavepacket::{raw_moments, Moments, WavepacketState};

/// Below this the post-selection is treated as impossible.
pub const MIN_POSTSELECTION_PROBABILITY: f64 = 1e-12;

/// Bounds on `g_c^2 |A_w|` used when annotating predicted shifts.
pub const SHIFT_VALIDITY: Thresholds = Thresholds {
    warn: 0.01,
    fail: 0.1,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    #[default]
    Ground,
    Excited,
}

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::Ground => GROUND,
            Outcome::Excited => EXCITED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostselectionSpec {
    pub eta: f64,
    #[serde(default)]
    pub outcome: Outcome,
}

impl PostselectionSpec {
    pub fn ground(eta: f64) -> Self {
        Self {
            eta,
            outcome: Outcome::Ground,
        }
    }

    pub fn rotation(&self) -> Rotation {
        Rotation::new(self.eta)
    }

    /// The bra `<f| = <outcome| U` as a row vector.
    pub fn final_bra(&self) -> [Complex64; 2] {
        self.rotation().matrix()[self.outcome.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    pub gc_abs_aw: f64,
    pub gc2_abs_aw: f64,
    pub status: RegimeStatus,
}

impl Validity {
    pub fn new(a_w: Complex64, gc: f64) -> Self {
        let gc2_abs_aw = gc * gc * a_w.norm();
        Self {
            gc_abs_aw: gc.abs() * a_w.norm(),
            gc2_abs_aw,
            status: SHIFT_VALIDITY.classify(gc2_abs_aw),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakValueResult {
    pub a_w: Complex64,
    pub re: f64,
    pub im: f64,
    /// `alpha cos(eta) / (beta sin(eta))`, when defined (ground outcome only).
    pub a_aux: Option<f64>,
    pub vartheta: f64,
    pub probability: f64,
    pub validity: Option<Validity>,
}

impl WeakValueResult {
    pub fn with_validity(mut self, gc: f64) -> Self {
        self.validity = Some(Validity::new(self.a_w, gc));
        self
    }

    /// `1 / (A e^{i vartheta} + 1)` when `A` is defined.
    pub fn closed_form(&self) -> Option<Complex64> {
        self.a_aux.map(|a| closed_form(a, self.vartheta))
    }
}

pub fn closed_form(a: f64, vartheta: f64) -> Complex64 {
    1.0 / (Complex64::from_polar(a, vartheta) + 1.0)
}

/// Real and imaginary parts written out separately.
pub fn closed_form_parts(a: f64, vartheta: f64) -> (f64, f64) {
    let d = 1.0 + a * a + 2.0 * a * vartheta.cos();
    ((1.0 + a * vartheta.cos()) / d, -a * vartheta.sin() / d)
}

/// `A_w = <f|e><e|i> / <f|i>` with `<f| = <outcome| U`.
pub fn weak_value(qubit: &QubitState, spec: &PostselectionSpec) -> Result<WeakValueResult> {
    let f = spec.final_bra();
    let i = qubit.amplitudes();
    let overlap = f[GROUND] * i[GROUND] + f[EXCITED] * i[EXCITED];
    let probability = overlap.norm_sqr();
    if probability == 0.0 {
        return Err(WvaError::UndefinedWeakValue);
    }
    let a_w = f[EXCITED] * i[EXCITED] / overlap;
    let denom = qubit.beta() * spec.eta.sin();
    let a_aux = (spec.outcome == Outcome::Ground && denom != 0.0)
        .then(|| qubit.alpha() * spec.eta.cos() / denom);
    Ok(WeakValueResult {
        a_w,
        re: a_w.re,
        im: a_w.im,
        a_aux,
        vartheta: FRAC_PI_2 - qubit.theta(),
        probability: probability.min(1.0),
        validity: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedShifts {
    /// `<p>_w / (2 Delta_p) = -g_c Re(A_w)`.
    pub p_shift_over_2dp: f64,
    /// `<x>_w / (2 Delta) = g_c Im(A_w)`.
    pub x_shift_over_2delta: f64,
    pub validity: Validity,
}

pub fn predicted_shifts(wv: &WeakValueResult, gc: f64) -> PredictedShifts {
    PredictedShifts {
        p_shift_over_2dp: -gc * wv.re,
        x_shift_over_2delta: gc * wv.im,
        validity: wv.validity.unwrap_or_else(|| Validity::new(wv.a_w, gc)),
    }
}

/// `<p> / Delta_p` without post-selection.
pub fn unselected_momentum_shift(qubit: &QubitState, gc: f64) -> f64 {
    -2.0 * qubit.beta() * qubit.beta() * gc
}

/// Shifts of a post-selected pointer, in the same units as [`PredictedShifts`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredShifts {
    pub p_shift_over_2dp: f64,
    pub x_shift_over_2delta: f64,
    pub p_variance: f64,
    pub x_variance: f64,
}

impl MeasuredShifts {
    fn from_moments(p: Moments, x: Moments) -> Self {
        // p = 2 Delta_p p~ and x = Delta x~ in the dimensionless units
        Self {
            p_shift_over_2dp: p.mean,
            x_shift_over_2delta: x.mean / 2.0,
            p_variance: p.variance,
            x_variance: x.variance,
        }
    }
}

/// Unnormalized pointer left after rotating and projecting the qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Postselected {
    pub pointer: WavepacketState,
    pub probability: f64,
}

impl Postselected {
    pub fn normalized_pointer(&self) -> WavepacketState {
        self.pointer
            .scaled(Complex64::from(1.0 / self.probability.sqrt()))
    }

    pub fn measured_shifts(&self) -> Result<MeasuredShifts> {
        let n = self.normalized_pointer();
        let p = n.in_representation(Representation::Momentum).moments()?;
        let x = n.in_representation(Representation::Position).moments()?;
        Ok(MeasuredShifts::from_moments(p, x))
    }
}

fn project(state: &JointState, spec: &PostselectionSpec) -> WavepacketState {
    let f = spec.final_bra();
    let amps = state
        .branch_amplitudes(GROUND)
        .iter()
        .zip(state.branch_amplitudes(EXCITED))
        .map(|(g, e)| f[GROUND] * g + f[EXCITED] * e)
        .collect();
    WavepacketState::from_amplitudes(*state.grid(), state.representation(), amps)
        .expect("branch lengths match the grid")
}

fn check_probability(probability: f64) -> Result<()> {
    if !(probability >= MIN_POSTSELECTION_PROBABILITY) {
        return Err(WvaError::PostselectionImpossible { probability });
    }
    Ok(())
}

pub fn postselect(state: &JointState, spec: &PostselectionSpec) -> Result<Postselected> {
    let pointer = project(state, spec);
    let probability = pointer.norm_sqr();
    check_probability(probability)?;
    Ok(Postselected {
        pointer,
        probability,
    })
}

/// Post-selected pointer when the motion ⊗ qubit state is mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectedMixture {
    pub components: Vec<WavepacketState>,
    pub probability: f64,
}

impl PostselectedMixture {
    fn moments(&self, rep: Representation) -> Moments {
        let mut acc = (0.0, 0.0, 0.0);
        for c in &self.components {
            let s = c.in_representation(rep);
            let (w, m1, m2) = raw_moments(s.grid(), rep, s.amplitudes());
            acc.0 += w;
            acc.1 += m1;
            acc.2 += m2;
        }
        let mean = acc.1 / acc.0;
        Moments {
            mean,
            variance: acc.2 / acc.0 - mean * mean,
        }
    }

    pub fn measured_shifts(&self) -> MeasuredShifts {
        MeasuredShifts::from_moments(
            self.moments(Representation::Momentum),
            self.moments(Representation::Position),
        )
    }

    /// Normalized `|phi_w(x)|^2` summed over the mixture.
    pub fn position_density(&self) -> Vec<f64> {
        let grid = *self.components[0].grid();
        let mut density = vec![0.0; grid.n_points()];
        for c in &self.components {
            let s = c.in_representation(Representation::Position);
            for (d, a) in density.iter_mut().zip(s.amplitudes()) {
                *d += a.norm_sqr() / self.probability;
            }
        }
        density
    }

    pub fn grid(&self) -> &Grid1D {
        self.components[0].grid()
    }
}

pub fn postselect_ensemble(
    ensemble: &JointEnsemble,
    spec: &PostselectionSpec,
) -> Result<PostselectedMixture> {
    if ensemble.components.is_empty() {
        return Err(WvaError::Contract("empty ensemble".into()));
    }
    let components: Vec<_> = ensemble
        .components
        .iter()
        .map(|c| project(c, spec))
        .collect();
    let probability = components.iter().map(WavepacketState::norm_sqr).sum();
    check_probability(probability)?;
    Ok(PostselectedMixture {
        components,
        probability,
    })
}

/// Pointer predicted by expanding `exp(-i g_c A_w x)` to first or second order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionOrder {
    First,
    Second,
}

/// `(1 - i g A x - [g^2 A x^2 / 2]) phi(x)`, returned in `phi`'s representation.
pub fn expanded_pointer(
    phi: &WavepacketState,
    a_w: Complex64,
    gc: f64,
    order: ExpansionOrder,
) -> WavepacketState {
    let pos = phi.in_representation(Representation::Position);
    let grid = *phi.grid();
    let i = Complex64::i();
    let amps = pos
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let x = grid.position(j);
            let mut factor = 1.0 - i * gc * a_w * x;
            if order == ExpansionOrder::Second {
                factor -= gc * gc * a_w * x * x / 2.0;
            }
            a * factor
        })
        .collect();
    WavepacketState::from_amplitudes(grid, Representation::Position, amps)
        .expect("length preserved")
        .in_representation(phi.representation())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveDecomposition {
    pub a_g: Complex64,
    pub a_e: Complex64,
    /// First-order pointers `phi(p, A_g)` and `phi(p, A_e)`.
    pub branch_g: WavepacketState,
    pub branch_e: WavepacketState,
}

/// Decomposes the evolved state over the `sigma_z` eigenbasis with
/// `A = |e><e|`; each branch carries its own (trivially real) weak value.
pub fn projective_decomposition(
    qubit: &QubitState,
    phi: &WavepacketState,
    gc: f64,
) -> Result<ProjectiveDecomposition> {
    if qubit.alpha() == 0.0 || qubit.beta() == 0.0 {
        return Err(WvaError::DegenerateBranch(format!(
            "alpha = {}, beta = {}",
            qubit.alpha(),
            qubit.beta()
        )));
    }
    let i = qubit.amplitudes();
    // <q|A|i> with A = |e><e|
    let a_i = [Complex64::from(0.0), i[EXCITED]];
    let a_g = a_i[GROUND] / i[GROUND];
    let a_e = a_i[EXCITED] / i[EXCITED];
    debug_assert!(a_g == Complex64::from(0.0) && a_e == Complex64::from(1.0));
    Ok(ProjectiveDecomposition {
        a_g,
        a_e,
        branch_g: expanded_pointer(phi, a_g, gc, ExpansionOrder::First),
        branch_e: expanded_pointer(phi, a_e, gc, ExpansionOrder::First),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardForm {
    /// `<g|U A|i> / <g|U|i>`.
    pub matrix_element: Complex64,
    /// `<f|A|i> / <f|i>` with `<f| = <g|U`.
    pub standard: Complex64,
    pub difference: f64,
}

impl StandardForm {
    pub fn agrees(&self, tol: f64) -> bool {
        self.difference <= tol * self.standard.norm().max(1.0)
    }
}

pub fn standard_form_equivalence(
    qubit: &QubitState,
    spec: &PostselectionSpec,
) -> Result<StandardForm> {
    let i = qubit.amplitudes();
    let o = spec.outcome.index();
    // U applied to the kets A|i> and |i>, then read off the outcome component
    let u = spec.rotation();
    let num = u.apply([Complex64::from(0.0), i[EXCITED]])[o];
    let den = u.apply(i)[o];
    if den.norm_sqr() == 0.0 {
        return Err(WvaError::UndefinedWeakValue);
    }
    let matrix_element = num / den;
    // bra <f| built once, then contracted with A|i> and |i>
    let f = spec.final_bra();
    let standard = (f[EXCITED] * i[EXCITED]) / (f[GROUND] * i[GROUND] + f[EXCITED] * i[EXCITED]);
    Ok(StandardForm {
        matrix_element,
        standard,
        difference: (matrix_element - standard).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::propagate_effective;
    use crate::params::Couplings;
    use crate::wavepacket::make_gaussian;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn balanced_state_gives_one_half() {
        let q = QubitState::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_PI_2).unwrap();
        let wv = weak_value(&q, &PostselectionSpec::ground(FRAC_PI_4)).unwrap();
        // <g|U|e> = -i/sqrt2, <e|i> = i/sqrt2, <g|U|i> = 1/2 + 1/2
        let direct = c(0.0, -FRAC_1_SQRT_2) * c(0.0, FRAC_1_SQRT_2) / c(1.0, 0.0);
        assert!((wv.a_w - direct).norm() < 1e-15);
        assert!((wv.a_w - 0.5).norm() < 1e-15);
        assert!((wv.a_aux.unwrap() - 1.0).abs() < 1e-15);
        assert!(wv.vartheta.abs() < 1e-15);
    }

    #[test]
    fn excited_preselection_gives_unity() {
        for &eta in &[0.2, 1.0, 2.5] {
            let wv = weak_value(&QubitState::excited(), &PostselectionSpec::ground(eta)).unwrap();
            assert!((wv.a_w - 1.0).norm() < 1e-15);
            assert_eq!(wv.a_aux, Some(0.0));
        }
    }

    #[test]
    fn no_rotation_is_projective() {
        let q = QubitState::new(0.6, 0.8, 1.3).unwrap();
        let wv = weak_value(&q, &PostselectionSpec::ground(0.0)).unwrap();
        assert_eq!(wv.a_w, c(0.0, 0.0));
        assert!(wv.a_aux.is_none());
        assert!((wv.probability - 0.36).abs() < 1e-15);
    }

    #[test]
    fn near_minus_one_amplifies_the_real_part() {
        let (re, im) = closed_form_parts(-1.0 + 0.01, 0.0);
        assert!((re - 100.0).abs() < 1e-9);
        assert_eq!(im, 0.0);
    }

    #[test]
    fn orthogonal_postselection_is_an_error() {
        // U|g> = cos|g> - i sin|e>, so <g|U|i> = 0 for alpha cos = i beta e^{i theta} sin
        let q = QubitState::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_PI_2).unwrap();
        let spec = PostselectionSpec::ground(FRAC_PI_4);
        let i = q.amplitudes();
        let f = spec.final_bra();
        let overlap = f[0] * i[0] + f[1] * i[1];
        if overlap.norm_sqr() == 0.0 {
            assert!(matches!(
                weak_value(&q, &spec),
                Err(WvaError::UndefinedWeakValue)
            ));
        } else {
            assert!(overlap.norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_construction_round_trips() {
        for &target in &[c(10.0, 0.0), c(0.0, 5.0), c(-3.0, 2.0), c(0.5, -0.1)] {
            let q = QubitState::for_weak_value(target, 0.4).unwrap();
            let wv = weak_value(&q, &PostselectionSpec::ground(0.4)).unwrap();
            assert!((wv.a_w - target).norm() < 1e-12 * target.norm().max(1.0));
            assert!((wv.closed_form().unwrap() - target).norm() < 1e-12 * target.norm());
        }
    }

    #[test]
    fn probability_times_weight_is_fixed_by_beta_sin_eta() {
        for &target in &[c(1.0, 0.0), c(4.0, 0.0), c(0.0, 20.0)] {
            let eta = 0.7;
            let q = QubitState::for_weak_value(target, eta).unwrap();
            let wv = weak_value(&q, &PostselectionSpec::ground(eta)).unwrap();
            let product = wv.probability * wv.a_w.norm_sqr();
            let expected = (q.beta() * eta.sin()).powi(2);
            assert!((product - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn predicted_shift_examples() {
        let q = QubitState::for_weak_value(c(10.0, 0.0), 0.3).unwrap();
        let wv = weak_value(&q, &PostselectionSpec::ground(0.3)).unwrap();
        let s = predicted_shifts(&wv, 0.01);
        assert!((s.p_shift_over_2dp + 0.1).abs() < 1e-13);
        assert!(s.x_shift_over_2delta.abs() < 1e-13);
        assert_eq!(s.validity.status, RegimeStatus::Pass);
        let zero = predicted_shifts(&wv, 0.0);
        assert_eq!(zero.p_shift_over_2dp, 0.0);
        assert_eq!(zero.x_shift_over_2delta, 0.0);
        let loud = predicted_shifts(&wv, 0.05);
        assert_eq!(loud.validity.status, RegimeStatus::Warn);
        assert_eq!(
            predicted_shifts(&wv, 0.2).validity.status,
            RegimeStatus::Fail
        );
    }

    #[test]
    fn projection_without_rotation_keeps_the_ground_branch() {
        let grid = Grid1D::default();
        let phi = make_gaussian(grid);
        let q = QubitState::new(0.6, 0.8, 0.0).unwrap();
        let joint = JointState::product(&phi, &q);
        let out = postselect(&joint, &PostselectionSpec::ground(0.0)).unwrap();
        assert!((out.probability - 0.36).abs() < 1e-12);
        assert!(out.pointer.max_abs_diff(&phi.scaled(c(0.6, 0.0))) < 1e-15);
        assert!(postselect(
            &JointState::product(&phi, &QubitState::excited()),
            &PostselectionSpec::ground(0.0)
        )
        .is_err());
    }

    #[test]
    fn postselected_pointer_follows_the_weak_value() {
        let phi = make_gaussian(Grid1D::default()).to_momentum().unwrap();
        let eta = 0.5;
        let target = c(3.0, 4.0);
        let q = QubitState::for_weak_value(target, eta).unwrap();
        let gc = 1e-3;
        let cpl = Couplings::from_gc(gc, 0.01);
        let state = propagate_effective(&phi, &q.preparation_for(cpl.g0_t), &cpl, false).unwrap();
        let spec = PostselectionSpec::ground(eta);
        let sel = postselect(&state, &spec).unwrap();
        let wv = weak_value(&q, &spec).unwrap();
        let m = sel.measured_shifts().unwrap();
        let p = predicted_shifts(&wv, gc);
        let tol = 5.0 * gc * gc * target.norm_sqr();
        assert!((m.p_shift_over_2dp - p.p_shift_over_2dp).abs() < tol);
        assert!((m.x_shift_over_2delta - p.x_shift_over_2delta).abs() < tol);
        assert!((sel.probability - wv.probability).abs() < 10.0 * gc * wv.probability);
    }

    #[test]
    fn standard_form_matches_matrix_elements() {
        let mut seed = 0x1234_5678_u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let a = next() * FRAC_PI_2;
            let q = QubitState::new(a.cos(), a.sin(), next() * 2.0 * PI).unwrap();
            let spec = PostselectionSpec {
                eta: next() * PI,
                outcome: if next() < 0.5 {
                    Outcome::Ground
                } else {
                    Outcome::Excited
                },
            };
            let r = standard_form_equivalence(&q, &spec).unwrap();
            assert!(r.agrees(1e-12), "{r:?}");
        }
        let q = QubitState::new(0.6, 0.8, 0.3).unwrap();
        let r = standard_form_equivalence(&q, &PostselectionSpec::ground(FRAC_PI_2)).unwrap();
        assert!((r.standard - 1.0).norm() < 1e-15);
    }

    #[test]
    fn real_weak_value_at_theta_half_pi() {
        let q = QubitState::new(0.3, (1.0f64 - 0.09).sqrt(), FRAC_PI_2).unwrap();
        let wv = weak_value(&q, &PostselectionSpec::ground(1.1)).unwrap();
        let (_, im) = closed_form_parts(wv.a_aux.unwrap(), wv.vartheta);
        assert_eq!(im, 0.0);
        assert!(wv.im.abs() < 1e-15);
    }

    #[test]
    fn decomposition_branches() {
        let phi = make_gaussian(Grid1D::default());
        let q = QubitState::new(0.6, 0.8, 0.9).unwrap();
        let d = projective_decomposition(&q, &phi, 1e-3).unwrap();
        assert_eq!(d.a_g, c(0.0, 0.0));
        assert_eq!(d.a_e, c(1.0, 0.0));
        assert!(d.branch_g.max_abs_diff(&phi) == 0.0);
        assert!(projective_decomposition(&QubitState::ground(), &phi, 1e-3).is_err());
    }
}
