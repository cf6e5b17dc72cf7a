//! Qudit charged-string diagrams and the machinery around them.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: the scalar system (roots of unity, ω and its square root).
//! - [`linalg`]: small dense helpers shared by everything else.
//! - [`diagram`]: layered charged-string tangles, rewriting and rotation.
//! - [`evaluator`]: the Jordan-Wigner compilation of diagrams to operators.
//! - [`sim`]: gates, states, measurement and the string Fourier transform.
//! - [`entangle`]: Max and GHZ resources, partial trace, entropy.
//! - [`clifford`]: Clifford identities, group closure and membership.
//! - [`protocols`]: party-partitioned scripts with edit/cdit accounting.
//! - [`verify`]: named verification suites with `key=value` reports.

pub mod clifford;
pub mod diagram;
pub mod entangle;
pub mod error;
pub mod evaluator;
pub mod linalg;
pub mod numerics;
pub mod protocols;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{Mat, C64};
pub use numerics::{make_phase_ring, PhaseRing};

/// Default comparison tolerance for operator identities.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Upper bound on the number of amplitudes in a state (d^n).
pub const MAX_STATE_ENTRIES: usize = 1 << 20;
