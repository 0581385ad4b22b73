//! Pointer ⊗ qubit states (cavity already eliminated or disposed of).

use num_complex::Complex64;

use crate::error::{Result, WvaError};
use crate::grid::{Grid1D, Representation};
use crate::qubit::{QubitState, EXCITED, GROUND};
use crate::spectral;
use crate::wavepacket::{raw_moments, Moments, WavepacketState, NORM_TOLERANCE};

/// Two pointer branches, `psi_g(q)|g> + psi_e(q)|e>`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    grid: Grid1D,
    representation: Representation,
    branches: [Vec<Complex64>; 2],
}

impl JointState {
    pub fn new(
        grid: Grid1D,
        representation: Representation,
        ground: Vec<Complex64>,
        excited: Vec<Complex64>,
    ) -> Result<Self> {
        if ground.len() != grid.n_points() || excited.len() != grid.n_points() {
            return Err(WvaError::Contract(
                "branch length does not match grid".into(),
            ));
        }
        Ok(Self {
            grid,
            representation,
            branches: [ground, excited],
        })
    }

    pub fn product(packet: &WavepacketState, qubit: &QubitState) -> Self {
        let amps = qubit.amplitudes();
        let branch = |c: Complex64| packet.amplitudes().iter().map(|a| a * c).collect();
        Self {
            grid: *packet.grid(),
            representation: packet.representation(),
            branches: [branch(amps[GROUND]), branch(amps[EXCITED])],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn branch_amplitudes(&self, q: usize) -> &[Complex64] {
        &self.branches[q]
    }

    pub(crate) fn branch_amplitudes_mut(&mut self, q: usize) -> &mut Vec<Complex64> {
        &mut self.branches[q]
    }

    /// Unnormalized pointer attached to `|q>`.
    pub fn branch(&self, q: usize) -> WavepacketState {
        WavepacketState::from_amplitudes(self.grid, self.representation, self.branches[q].clone())
            .expect("lengths match")
    }

    pub fn norm_sqr(&self) -> f64 {
        let step = self.grid.step(self.representation);
        self.branches
            .iter()
            .flat_map(|b| b.iter())
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            * step
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for b in out.branches.iter_mut() {
            b.iter_mut().for_each(|a| *a *= factor);
        }
        out
    }

    pub fn in_representation(&self, rep: Representation) -> Self {
        if rep == self.representation {
            return self.clone();
        }
        let convert = |b: &Vec<Complex64>| match rep {
            Representation::Momentum => spectral::position_to_momentum(&self.grid, b),
            Representation::Position => spectral::momentum_to_position(&self.grid, b),
        };
        Self {
            grid: self.grid,
            representation: rep,
            branches: [convert(&self.branches[0]), convert(&self.branches[1])],
        }
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(WvaError::Contract("states live on different grids".into()));
        }
        let other = other.in_representation(self.representation);
        let step = self.grid.step(self.representation);
        Ok((0..2)
            .map(|q| {
                self.branches[q]
                    .iter()
                    .zip(&other.branches[q])
                    .map(|(a, b)| a.conj() * b)
                    .sum::<Complex64>()
            })
            .sum::<Complex64>()
            * step)
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Moments of the pointer coordinate with the qubit traced out.
    pub fn marginal_moments(&self, rep: Representation) -> Result<Moments> {
        let s = self.in_representation(rep);
        let (w0, a0, b0) = raw_moments(&s.grid, rep, &s.branches[0]);
        let (w1, a1, b1) = raw_moments(&s.grid, rep, &s.branches[1]);
        let w = w0 + w1;
        if (w - 1.0).abs() > NORM_TOLERANCE {
            return Err(WvaError::Unnormalized { norm: w });
        }
        let mean = (a0 + a1) / w;
        Ok(Moments {
            mean,
            variance: (b0 + b1) / w - mean * mean,
        })
    }
}

/// Mixture of unnormalized pure components, `rho = sum_k |psi_k><psi_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEnsemble {
    pub components: Vec<JointState>,
}

impl JointEnsemble {
    pub fn pure(state: JointState) -> Self {
        Self {
            components: vec![state],
        }
    }

    pub fn trace(&self) -> f64 {
        self.components.iter().map(JointState::norm_sqr).sum()
    }

    /// `<phi|rho|phi>` for a pure reference `phi`.
    pub fn fidelity_with(&self, phi: &JointState) -> Result<f64> {
        self.components
            .iter()
            .map(|c| phi.inner(c).map(|z| z.norm_sqr()))
            .sum()
    }

    pub fn marginal_moments(&self, rep: Representation) -> Result<Moments> {
        let mut acc = (0.0, 0.0, 0.0);
        for c in &self.components {
            let s = c.in_representation(rep);
            for q in 0..2 {
                let (w, m1, m2) = raw_moments(&s.grid, rep, &s.branches[q]);
                acc.0 += w;
                acc.1 += m1;
                acc.2 += m2;
            }
        }
        if (acc.0 - 1.0).abs() > NORM_TOLERANCE {
            return Err(WvaError::Unnormalized { norm: acc.0 });
        }
        let mean = acc.1 / acc.0;
        Ok(Moments {
            mean,
            variance: acc.2 / acc.0 - mean * mean,
        })
    }
}
