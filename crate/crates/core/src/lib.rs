//! Weak-value amplification of a cavity-QED-induced momentum kick on an
//! atomic wavepacket.

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composite;
pub mod detector;
pub mod effective;
pub mod error;
pub mod exact;
pub mod expm;
pub mod fock;
pub mod grid;
pub mod hamiltonian;
pub mod joint;
pub mod parallel;
pub mod params;
pub mod pipeline;
pub mod qubit;
mod spectral;
pub mod wavepacket;
pub mod weakvalue;

pub use error::{Result, WvaError};
