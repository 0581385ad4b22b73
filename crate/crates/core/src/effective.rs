//! Large-detuning effective engine: the cavity is eliminated and the
//! vacuum shift `g_0 t (1 + x Delta/x_c)^2 |e><e|` acts as a phase on the
//! excited branch. Its linear part translates the momentum of `|e>` by
//! `-g_c`; the quadratic part is the `g_c'` chirp.

use num_complex::Complex64;

use crate::error::{Result, WvaError};
use crate::grid::{Grid1D, Representation};
use crate::joint::JointState;
use crate::params::Couplings;
use crate::qubit::{QubitState, EXCITED};
use crate::wavepacket::WavepacketState;

/// Momentum headroom kept free around the unit packet (ten `Delta_p`-widths).
const PACKET_MOMENTUM_REACH: f64 = 5.0;

fn check_aliasing(grid: &Grid1D, c: &Couplings, keep_gc_prime: bool) -> Result<()> {
    let nyquist = grid.momentum_half_width();
    let chirp = if keep_gc_prime {
        2.0 * c.gc_prime.abs() * grid.half_width()
    } else {
        0.0
    };
    let reach = c.gc.abs() + chirp + PACKET_MOMENTUM_REACH;
    if !(reach < nyquist) {
        return Err(WvaError::Aliasing(format!(
            "|g_c| = {} (plus chirp {chirp}) leaves no room below the grid momentum limit {nyquist}",
            c.gc.abs()
        )));
    }
    Ok(())
}

/// Applies the effective evolution to an existing pointer ⊗ qubit state.
pub fn apply_effective(
    state: &JointState,
    couplings: &Couplings,
    keep_gc_prime: bool,
) -> Result<JointState> {
    let grid = *state.grid();
    check_aliasing(&grid, couplings, keep_gc_prime)?;
    let rep = state.representation();
    let mut pos = state.in_representation(Representation::Position);
    let quad = if keep_gc_prime {
        couplings.gc_prime
    } else {
        0.0
    };
    for (j, a) in pos.branch_amplitudes_mut(EXCITED).iter_mut().enumerate() {
        let x = grid.position(j);
        *a *= Complex64::from_polar(1.0, -(couplings.g0_t + couplings.gc * x + quad * x * x));
    }
    Ok(pos.in_representation(rep))
}

/// `exp(g_c |e><e| d/dp) [exp(i g_c' |e><e| d^2/dp^2)] exp(-i g_0 t |e><e|)`
/// applied to `packet ⊗ prepared`. The result is in the momentum picture.
pub fn propagate_effective(
    packet: &WavepacketState,
    prepared: &QubitState,
    couplings: &Couplings,
    keep_gc_prime: bool,
) -> Result<JointState> {
    if packet.representation() != Representation::Momentum {
        return Err(WvaError::Contract(
            "effective engine takes a momentum-representation packet".into(),
        ));
    }
    apply_effective(
        &JointState::product(packet, prepared),
        couplings,
        keep_gc_prime,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::GROUND;
    use crate::wavepacket::make_gaussian;

    fn packet() -> WavepacketState {
        make_gaussian(Grid1D::default()).to_momentum().unwrap()
    }

    #[test]
    fn zero_coupling_only_adds_the_bare_phase() {
        let q = QubitState::new(0.6, 0.8, 0.2).unwrap();
        let c = Couplings {
            g0_t: 0.7,
            delta_over_xc: 0.0,
            gc: 0.0,
            gc_prime: 0.0,
        };
        let out = propagate_effective(&packet(), &q, &c, true).unwrap();
        let expected = JointState::product(&packet(), &q.with_excited_phase(-0.7));
        assert!(out.fidelity(&expected).unwrap() > 1.0 - 1e-14);
        let diff = out
            .branch_amplitudes(EXCITED)
            .iter()
            .zip(expected.branch_amplitudes(EXCITED))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn excited_packet_is_translated() {
        let c = Couplings::from_gc(0.1, 0.01);
        let out = propagate_effective(&packet(), &QubitState::excited(), &c, false).unwrap();
        let m = out.marginal_moments(Representation::Momentum).unwrap();
        assert!((m.mean + 0.1).abs() < 1e-12, "{}", m.mean);
        assert!((m.variance - 0.25).abs() < 1e-10);
        assert!(out
            .branch_amplitudes(GROUND)
            .iter()
            .all(|a| a.norm() == 0.0));
    }

    #[test]
    fn requires_momentum_input() {
        let pos = make_gaussian(Grid1D::default());
        let c = Couplings::from_gc(0.1, 0.01);
        assert!(propagate_effective(&pos, &QubitState::excited(), &c, false).is_err());
    }

    #[test]
    fn large_translation_is_rejected() {
        let c = Couplings::from_gc(250.0, 0.01);
        assert!(matches!(
            propagate_effective(&packet(), &QubitState::excited(), &c, false),
            Err(WvaError::Aliasing(_))
        ));
    }

    #[test]
    fn durations_compose() {
        let q = QubitState::new(0.6, 0.8, 1.0).unwrap();
        let c = Couplings::new(0.9, 0.02);
        let once = propagate_effective(&packet(), &q, &c, true).unwrap();
        let twice = apply_effective(&once, &c, true).unwrap();
        let double = propagate_effective(&packet(), &q, &c.scaled(2.0), true).unwrap();
        for qb in 0..2 {
            let d = twice
                .branch_amplitudes(qb)
                .iter()
                .zip(double.branch_amplitudes(qb))
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(d < 1e-12, "{d}");
        }
    }
}
