//! Dense qudit simulation: gates, states, measurement, the string Fourier
//! transform and a small circuit language.

pub mod circuit;
pub mod gates;
pub mod sft;
pub mod state;
pub mod tricks;

pub use gates::{
    controlled_gate, cz_gate, fourier_gate, gaussian_gate, pauli_gate, sym_gate, sym_matrix,
    ControlFlavor, GateKind, GateSpec, Pauli,
};
pub use sft::{sft_gate, sft_matrix, SftMethod};
pub use state::{measure, measure_with, QOperator, QState};
pub use tricks::{circuit_tricks_check, TricksReport};
