//! End-of-line instances over a layered graph, their embedding as a local
//! Lipschitz Brouwer function, and the two-player and n-player games whose
//! approximate equilibria encode approximate fixed points of that function.
//!
//! Every stage of the reduction is executable and checkable at desk scale:
//!
//! * [`lineworld`] builds the layered graph, line instances and a counting query oracle.
//! * [`codec`] provides the binary codes, grid rounding and point decoders.
//! * [`brouwer`] embeds an instance as a displacement field `f(x) = x + g(x)`.
//! * [`arena2p`] and [`arenanp`] expose the games as utility oracles with verifiers.
//! * [`commsim`] splits instances between two parties and counts protocol bits.
//! * [`cli`] ties the pipeline together and emits deterministic reports.

pub mod arena2p;
pub mod arenanp;
pub mod bits;
pub mod brouwer;
pub mod cli;
pub mod codec;
pub mod commsim;
pub mod error;
pub mod lineworld;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod seed;

pub use error::{Error, Result};

/// Format tag stamped on every serialized artifact and report.
pub const FORMAT_VERSION: &str = "hardnash-forge/1";
