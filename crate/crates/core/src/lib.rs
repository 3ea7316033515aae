pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod integrators;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod oracles;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SparseOp, C64};
