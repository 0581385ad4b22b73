//! Pointer ⊗ qubit ⊗ truncated cavity amplitudes.

use num_complex::Complex64;

use crate::error::{Result, WvaError};
use crate::fock::FockSpace;
use crate::grid::{Grid1D, Representation};
use crate::joint::{JointEnsemble, JointState};
use crate::qubit::QubitState;
use crate::spectral;
use crate::wavepacket::WavepacketState;

/// Amplitudes laid out as `[(j * 2 + q) * (n_max + 1) + n]`: grid point
/// `j`, qubit level `q`, photon number `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    grid: Grid1D,
    fock: FockSpace,
    representation: Representation,
    amplitudes: Vec<Complex64>,
}

impl CompositeState {
    /// `packet ⊗ qubit ⊗ |n>`.
    pub fn product(
        packet: &WavepacketState,
        qubit: &QubitState,
        fock: FockSpace,
        photons: usize,
    ) -> Result<Self> {
        if photons > fock.n_max {
            return Err(WvaError::Contract(format!(
                "photon number {photons} exceeds the cutoff {}",
                fock.n_max
            )));
        }
        let grid = *packet.grid();
        let nf = fock.dim();
        let q = qubit.amplitudes();
        let mut amplitudes = vec![Complex64::from(0.0); grid.n_points() * 2 * nf];
        for (j, a) in packet.amplitudes().iter().enumerate() {
            for (level, c) in q.iter().enumerate() {
                amplitudes[(j * 2 + level) * nf + photons] = a * c;
            }
        }
        Ok(Self {
            grid,
            fock,
            representation: packet.representation(),
            amplitudes,
        })
    }

    /// `packet ⊗ qubit ⊗ |0>`.
    pub fn vacuum_product(
        packet: &WavepacketState,
        qubit: &QubitState,
        fock: FockSpace,
    ) -> Result<Self> {
        Self::product(packet, qubit, fock, 0)
    }

    pub fn from_amplitudes(
        grid: Grid1D,
        fock: FockSpace,
        representation: Representation,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitudes.len() != grid.n_points() * 2 * fock.dim() {
            return Err(WvaError::Contract(
                "composite amplitude length mismatch".into(),
            ));
        }
        Ok(Self {
            grid,
            fock,
            representation,
            amplitudes,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn block_len(&self) -> usize {
        2 * self.fock.dim()
    }

    /// Qubit ⊗ cavity amplitudes at grid point `j`.
    pub fn block(&self, j: usize) -> &[Complex64] {
        let d = self.block_len();
        &self.amplitudes[j * d..(j + 1) * d]
    }

    pub fn amplitude(&self, j: usize, q: usize, n: usize) -> Complex64 {
        self.amplitudes[(j * 2 + q) * self.fock.dim() + n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * self.grid.step(self.representation)
    }

    /// Probability of finding `n` photons.
    pub fn photon_probability(&self, n: usize) -> f64 {
        let nf = self.fock.dim();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i % nf == n)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            * self.grid.step(self.representation)
    }

    /// `1 - P(n = 0)`, relative to the current norm.
    pub fn cavity_excitation(&self) -> f64 {
        1.0 - self.photon_probability(0) / self.norm_sqr()
    }

    /// Unnormalized `<n|psi>` on pointer ⊗ qubit.
    pub fn project_cavity(&self, n: usize) -> JointState {
        let nf = self.fock.dim();
        let np = self.grid.n_points();
        let mut g = Vec::with_capacity(np);
        let mut e = Vec::with_capacity(np);
        for j in 0..np {
            g.push(self.amplitudes[(j * 2) * nf + n]);
            e.push(self.amplitudes[(j * 2 + 1) * nf + n]);
        }
        JointState::new(self.grid, self.representation, g, e).expect("lengths match")
    }

    /// Reduced state with the cavity traced out, as the ensemble
    /// `{<n|psi>}_n`.
    pub fn trace_cavity(&self) -> JointEnsemble {
        JointEnsemble {
            components: (0..self.fock.dim())
                .map(|n| self.project_cavity(n))
                .collect(),
        }
    }

    pub fn in_representation(&self, rep: Representation) -> Self {
        if rep == self.representation {
            return self.clone();
        }
        let nf = self.fock.dim();
        let np = self.grid.n_points();
        let mut out = self.clone();
        out.representation = rep;
        for col in 0..2 * nf {
            let column: Vec<Complex64> =
                (0..np).map(|j| self.amplitudes[j * 2 * nf + col]).collect();
            let t = match rep {
                Representation::Momentum => spectral::position_to_momentum(&self.grid, &column),
                Representation::Position => spectral::momentum_to_position(&self.grid, &column),
            };
            for (j, v) in t.into_iter().enumerate() {
                out.amplitudes[j * 2 * nf + col] = v;
            }
        }
        out
    }

    /// `<phi ⊗ n|self>` for a pointer ⊗ qubit state `phi`.
    pub fn overlap_with_joint(&self, phi: &JointState, n: usize) -> Result<Complex64> {
        phi.inner(&self.project_cavity(n))
    }
}
