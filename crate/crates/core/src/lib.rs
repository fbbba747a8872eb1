//! Numerics for loop groups and their level-one positive-energy
//! representations.

pub mod affine_data;
pub mod entropy;
pub mod error;
pub mod fock;
pub mod lie;
pub mod linalg;
pub mod loops;
pub mod quadrature;
pub mod scenario;
pub mod soliton;

pub use error::{Error, Result};
