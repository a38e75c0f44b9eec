pub mod error;
pub mod exponent;
pub mod grid;
pub mod spectral;

pub use error::{Error, Result};
pub mod modular;
pub mod solver;
pub mod kernels;
pub mod sequence;
pub mod phi;
pub mod oracle;
pub mod besov;
pub mod atoms;
pub mod io;
pub mod harness;
