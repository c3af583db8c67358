// Copyright 2026 Spinctrl Contributors
// SPDX-License-Identifier: Apache-2.0

//! Standard two-qubit target gates for synthesis runs.
//!
//! Matrices are written in the computational basis |00⟩, |01⟩, |10⟩, |11⟩
//! with site 1 as the most significant bit — the same ordering the chain
//! Hamiltonians use, so targets and evolution operators compose directly.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Named two-qubit gates accepted by sweep configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Swap,
    SqrtSwap,
    Cnot,
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            GateKind::Swap => "swap",
            GateKind::SqrtSwap => "sqrt_swap",
            GateKind::Cnot => "cnot",
        };
        f.write_str(name)
    }
}

impl GateKind {
    /// The 4×4 unitary matrix of this gate.
    pub fn matrix(self) -> Array2<Complex64> {
        match self {
            GateKind::Swap => swap(),
            GateKind::SqrtSwap => sqrt_swap(),
            GateKind::Cnot => cnot(),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// SWAP: exchanges the two qubits (|01⟩ ↔ |10⟩).
pub fn swap() -> Array2<Complex64> {
    let mut g = Array2::zeros((4, 4));
    g[[0, 0]] = c(1.0, 0.0);
    g[[1, 2]] = c(1.0, 0.0);
    g[[2, 1]] = c(1.0, 0.0);
    g[[3, 3]] = c(1.0, 0.0);
    g
}

/// √SWAP: square root of SWAP; applying it twice gives SWAP.
pub fn sqrt_swap() -> Array2<Complex64> {
    let mut g = Array2::zeros((4, 4));
    g[[0, 0]] = c(1.0, 0.0);
    g[[3, 3]] = c(1.0, 0.0);
    g[[1, 1]] = c(0.5, 0.5);
    g[[2, 2]] = c(0.5, 0.5);
    g[[1, 2]] = c(0.5, -0.5);
    g[[2, 1]] = c(0.5, -0.5);
    g
}

/// CNOT with site 1 (most significant bit) as control.
pub fn cnot() -> Array2<Complex64> {
    let mut g = Array2::zeros((4, 4));
    g[[0, 0]] = c(1.0, 0.0);
    g[[1, 1]] = c(1.0, 0.0);
    g[[2, 3]] = c(1.0, 0.0);
    g[[3, 2]] = c(1.0, 0.0);
    g
}
