//! Tiled variational quantum Kolmogorov-Arnold networks on a dense statevector.
//!
//! The crate is organised bottom-up:
//!
//! - [`qsim`]: a small dense statevector engine (rotations, multi-controlled
//!   rotations, Pauli expectations, dense non-unitary operators).
//! - [`spline`]: clamped B-spline bases on `[0, 1]`.
//! - [`evqkan`]: spline-parameterized angle tables, block unitaries, the tiled
//!   sum operator (with a gate-level ancilla construction for validation) and
//!   the layered forward pass.
//! - [`qnn`]: the re-uploading hardware-efficient baseline circuit.
//! - [`tasks`]: benchmark targets, datasets and the weighted absolute loss.
//! - [`optimizer`]: a COBYLA-style derivative-free minimizer.
//! - [`harness`]: multi-attempt experiments, statistics and report files.

pub mod error;
pub mod evqkan;
pub mod harness;
pub mod optimizer;
pub mod qnn;
pub mod qsim;
pub mod spline;
pub mod tasks;

pub use error::{Error, Result};

/// Unit-norm tolerance used by normalization checks.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance for agreement between two independent constructions of the same
/// quantity (gate level vs. matrix level).
pub const ORACLE_TOLERANCE: f64 = 1e-10;
