pub mod cli;
pub mod coherent;
pub mod error;
pub mod fockspace;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod sparse;
pub mod special;
pub mod thermo;
pub mod vcs;
pub mod wavefunctions;

pub use error::{Error, Result};
