pub mod coefficients;
pub mod error;
pub mod gauge;
pub mod holonomy;
pub mod invariants;
pub mod ktheory;
pub mod linalg;
pub mod loopcore;
pub mod meshforms;
pub mod quadrature;
pub mod samples;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
