//! Exact computations on toric and horospherical colored fans.

pub mod catalog;
pub mod classify;
pub mod cone;
pub mod divisors;
pub mod document;
pub mod error;
pub mod fan;
pub mod horo;
pub mod linalg;
pub mod mori;
pub mod roots;
pub mod toric;

pub use error::{Error, Result};
