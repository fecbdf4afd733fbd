//! Quantum deficit and localizable information toolkit.
//!
//! Entropies are in bits throughout. Density matrices are validated on
//! construction; every downstream routine assumes a valid state.

pub mod clocc;
pub mod deficits;
pub mod enttools;
pub mod error;
pub mod measure;
pub mod optim;
pub mod qmat;
pub mod scan;
pub mod states;

pub use error::{Error, Result};
pub use qmat::{DensityMatrix, PureState};
