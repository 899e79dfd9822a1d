pub mod cp;
pub mod linalg;
pub mod sketch;
pub mod tucker;

pub use cp::{cp_als, CpOptions, CpResult, KruskalRep};
pub use sketch::{randomized_mode_basis, SketchConfig};
pub use tucker::{hosvd, project, tucker_partial, Factor, ModeSpec, SharedSource, TuckerRep};
