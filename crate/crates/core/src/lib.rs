//! Exact solvers for two-observer decentralized sequential detection.
//!
//! O1 observes, then sends one final message from an M-ary alphabet (blank
//! before that). O2 combines the message with its own observations and
//! declares a hypothesis. Everything works on finite observation alphabets,
//! so finite-horizon problems are solved exactly over reachable beliefs.

pub mod belief;
pub mod best_response;
pub mod envelope;
pub mod error;
pub mod infinite_horizon;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod seq_decomp;
pub mod simulate;
pub mod wald;

pub use error::{Error, Result};
