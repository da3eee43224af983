//! Random regular digraphs and bipartite biregular graphs as 0/1 matrices with
//! fixed margins.
//!
//! The crate covers four layers:
//!
//! * [`graph`]: packed bit matrices, codegrees, edge counts and discrepancy,
//!   together with the exact regularity identities they satisfy.
//! * [`samplers`]: exact uniform sampling by configuration-model rejection,
//!   a simple-switching chain, the permutation model, Erdős–Rényi digraphs and
//!   exhaustive enumeration of tiny classes.
//! * [`couplings`] and [`chatterjee`]: the switching and reflection involutions
//!   and the exchangeable-pair quantities `f`, `v_f` built on them, computed in
//!   exact integer arithmetic.
//! * [`bounds`], [`spectral`], [`experiments`], [`verify`]: closed-form tail
//!   bounds, second singular value, Monte Carlo tail harness and the
//!   verification suites driven by the `rrd` binary.

pub mod bounds;
pub mod chatterjee;
pub mod couplings;
pub mod error;
pub mod experiments;
pub mod exact;
pub mod graph;
pub mod rng;
pub mod samplers;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{BiregularBitMatrix, BitMatrix, CodegreeRecord, Direction, VertexSet, VertexSetPair};

/// Version tag written into every JSON payload.
pub const SCHEMA_VERSION: u32 = 1;
