// Copyright 2026 Spinctrl Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-chain optimal control engine.
//!
//! Prepares many-body target states (and two-qubit gates) by piecewise-constant
//! time evolution of a spin-1/2 chain: the exchange couplings are fixed, the
//! local magnetic fields `h[k][n][α]` are the variational parameters, and the
//! optimization runs on exact analytic gradients obtained from an adjoint
//! recursion through the slice propagators.
//!
//! Module map:
//! - [`hilbert`]: spin operators and many-body Hamiltonians (dense, N ≤ 14).
//! - [`linalg`]: Hermitian eigendecomposition and propagator application.
//! - [`groundstate`]: exact ground states used as preparation targets.
//! - [`dynamics`]: piecewise-constant evolution of states and unitaries,
//!   fidelities and fidelity trajectories.
//! - [`control`]: loss functions, the directional derivative of the matrix
//!   exponential, adjoint schedule gradients, a finite-difference oracle, and
//!   the Adam update.
//! - [`gates`]: standard two-qubit target gates.
//! - [`protocols`]: the STO / GTO / FGTO optimization protocols, fine-graining,
//!   gate synthesis, and the exponential scaling fit.

// Pull in the OpenBLAS backend for ndarray's BLAS-based matrix products.
extern crate blas_src;

pub mod control;
pub mod dynamics;
pub mod gates;
pub mod groundstate;
pub mod hilbert;
pub mod linalg;
pub mod protocols;

#[cfg(test)]
pub(crate) mod testsupport;

use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A model specification violated its invariants.
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    /// A control schedule violated its invariants.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// A protocol configuration violated its invariants.
    #[error("invalid protocol config: {0}")]
    InvalidConfig(String),

    /// Operand shapes are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The target Hamiltonian's two lowest eigenvalues coincide, so "the"
    /// ground state is ill-defined.
    #[error("degenerate ground state: gap = {gap:.3e} below tolerance {tol:.1e}")]
    DegenerateGroundState { gap: f64, tol: f64 },

    /// LAPACK failed to converge or rejected its arguments.
    #[error("eigensolver failure: zheevd returned info = {info}")]
    Eigensolver { info: i32 },

    /// A non-finite number appeared mid-computation.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// A data fit had too few usable points.
    #[error("fit error: {0}")]
    Fit(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
