//! Algebraic power series given by proper polynomial systems: coefficient
//! extraction, zeroness and finiteness tests, arithmetic circuits, and
//! grammar multiplicity equivalence built on top of them.

pub mod algebra;
pub mod bounded;
pub mod circuit;
pub mod cli;
pub mod decide;
pub mod error;
pub mod grammar;
pub mod poly;
pub mod polysys;
pub mod series;

pub use error::{Error, Result};
