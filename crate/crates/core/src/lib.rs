//! Coded caching for a shared broadcast link with random (Zipf) demands.
//!
//! Each user fills its cache independently by sampling packets according to a
//! caching distribution over the library. Once demands are revealed, the
//! server colors the conflict graph of requested packets and broadcasts one
//! XOR codeword per color class. The crate provides:
//!
//! * [`model`]: system parameters, Zipf popularity and i.i.d. demand sampling.
//! * [`placement`]: caching distributions (Random LFU, LFU, uniform, optimized)
//!   and the randomized packet-level cache filling procedure.
//! * [`delivery`]: conflict-graph construction, greedy and exact coloring,
//!   XOR encoding and per-user decoding.
//! * [`analysis`]: closed-form expected-rate bounds and the caching
//!   distribution search.
//! * [`sim`]: the Monte-Carlo experiment engine.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel execution live in the `coded-caching` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod delivery;
mod error;
pub mod math;
pub mod model;
pub mod placement;
pub mod sim;

pub use error::{Error, Result};
