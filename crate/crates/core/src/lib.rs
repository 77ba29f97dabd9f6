//! Reachable-subspace analysis for quantum Markov chains.
//!
//! A chain is an OpenQASM 2.0 circuit body plus single-qubit channel sites
//! (noise, measurement, reset). [`reach::reachable_subspace`] computes an
//! orthonormal basis of every state reachable from an initial support by a
//! breadth-first search over subspace dimensions; [`oracle`] recomputes the
//! same subspace from the density-matrix closed form for cross-checking.

pub mod error;
pub mod families;
pub mod numerics;
pub mod oracle;
pub mod qasm;
pub mod qmc;
pub mod random;
pub mod reach;
pub mod simulator;

pub use error::{ReachError, Result};
pub use numerics::{DenseMatrix, StateVector, Tolerances, C64};
pub use qasm::{parse_qasm, Circuit, GateKind, GateOp};
pub use qmc::{build_qmc, ChannelFile, ChannelKind, ChannelSite, QuantumMarkovChain};
pub use reach::{reachable_subspace, ReachConfig, ReachReport, SubspaceBasis};
