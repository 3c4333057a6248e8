//! Continuous-variable fine-grained uncertainty and steering numerics on a
//! truncated Fock space.

pub mod cli;
pub mod error;
pub mod fock;
pub mod fur;
pub mod oracles;
pub mod sampling;
pub mod scan;
pub mod security;
pub mod steering;

pub use error::{Error, Result};
