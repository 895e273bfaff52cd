pub mod acceptance;
pub mod cli;
pub mod error;
pub mod gamma;
pub mod hecke;
pub mod homology;
pub mod injective;
pub mod linalg;
pub mod scalars;
pub mod tree;

pub use error::{Error, Result};
pub use scalars::{Field, Fq};
