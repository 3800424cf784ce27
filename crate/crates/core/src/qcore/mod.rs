//! Dimension-labelled complex linear algebra and the basic quantum objects
//! (states, channels, POVMs) the rest of the crate consumes.

pub mod channel;
pub mod dims;
pub mod herm;
pub mod linalg;
pub mod povm;

pub use channel::{kraus_from_choi, Channel};
pub use dims::SystemDims;
pub use herm::{max_entangled, swap_operator, DensityOp, HermOp, PureState, Schmidt};
pub use povm::Povm;
