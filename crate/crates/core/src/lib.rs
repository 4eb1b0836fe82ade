//! Compile resilient multicast routing problems on optical networks into
//! QUBO form, sample them, and audit the decoded route sets.

// Encoders index several parallel per-node and per-edge tables at once.
#![allow(clippy::needless_range_loop)]

pub mod encode;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod pipeline;
pub mod qubo;
pub mod routes;
pub mod solver;
pub mod validate;

pub use error::{Error, Result};
