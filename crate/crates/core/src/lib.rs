#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod crossover;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod lindblad;
pub mod metrology;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
