//! Numerical toolkit for finite-dimensional teleportation protocols and
//! their dense-coding duals.
//!
//! The crate is organized around a single identity: the entanglement
//! fidelity of a teleportation protocol equals `N/|C|^2` times the success
//! probability of discriminating the protocol's decoded resource states with
//! the protocol's own measurement. Everything else builds on that:
//!
//! - [`qcore`]: labelled operators, channels, POVMs, spectral routines;
//! - [`teleport`]: protocols, their channels, and both fidelity paths;
//! - [`witness`]: reduction-criterion tests, conditional states, the Werner
//!   family and its locally processed variants;
//! - [`synth`]: constructive protocols beating the classical fidelity from a
//!   reduction-criterion witness;
//! - [`optim`]: state discrimination (exact solver plus pretty-good
//!   measurement), min-entropy, and the see-saw optimizers;
//! - [`dense`]: transition matrices, correlation fidelity, the duality
//!   identity, and accessible-information bounds.

pub mod dense;
pub mod error;
pub mod optim;
pub mod qcore;
pub mod random;
pub mod synth;
pub mod teleport;
pub mod tol;
pub mod witness;

pub use error::{Error, Result};
pub use qcore::{
    kraus_from_choi, max_entangled, swap_operator, Channel, DensityOp, HermOp, Povm, PureState,
    Schmidt, SystemDims,
};
pub use random::{rng_from_seed, PortableRng};
pub use tol::Tolerances;
