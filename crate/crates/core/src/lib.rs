//! Separability checking for bipartite quantum states.
//!
//! An entanglement search (partial transpose, symmetric extensions) and a
//! separability search (convex hulls of enumerated product states) run side
//! by side until one of them produces a certificate.

pub mod defaults;
pub mod dps;
pub mod enumeration;
pub mod hull;
pub mod linalg;
pub mod scheduler;
pub mod states;

pub use dps::{ppt_check, DpsConfig, DpsOutcome, EntanglementCertificate, PptResult};
pub use hull::SeparableDecomposition;
pub use linalg::{BipartiteDims, ComplexMatrix, Subsystem, C64};
pub use scheduler::{make_shift, run, A2Mode, RunConfig, Verdict, VerdictKind};
pub use states::{DensityMatrix, ProductState, PureState};
