//! Simulation core for multi-prover quantum Merlin-Arthur verification of 3SAT.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithm: SAT
//! instances and exhaustive oracles, the 3SAT to balanced 2-out-of-4-SAT
//! reduction, pure-state machinery over `[N]`, prover strategies, Arthur's
//! tests, numerical checks of the analysis lemmas, and the two-qubit
//! entanglement toolbox. File formats, the experiment harness and the CLI live
//! in the `qmak` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amplification;
pub mod analysis;
mod error;
pub mod linalg;
pub mod merlin;
pub mod reduction;
pub mod rng;
pub mod sat;
pub mod state;
pub mod stats;
pub mod verifier;

pub use error::{Error, Result};
