//! Numerical toolkit for classical communication over finite-dimensional
//! quantum channels: Holevo capacities with optimality certificates,
//! classical codes and POVM decoders, and finite-blocklength converse
//! bounds verified step by step on concrete codes.

pub mod error;
pub mod hermitian;
pub mod states;
pub mod entropy;
pub mod capacity;
pub mod codes;
pub mod bounds;
pub mod experiment;

pub use error::{QcapError, Result};
