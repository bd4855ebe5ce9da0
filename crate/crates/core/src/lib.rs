pub mod asymptotics;
pub mod error;
pub mod manifolds;
pub mod maps;
pub mod numerics;
pub mod splitting;
pub mod variational;

pub use error::{Error, Result};
pub use numerics::{BigComplex, BigReal, Precision};
