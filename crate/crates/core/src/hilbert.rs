// Copyright 2026 Spinctrl Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-1/2 operators and many-body chain Hamiltonians.
//!
//! Conventions, fixed once here and relied on everywhere else:
//! - Spin operators are S^α = σ^α/2 (not bare Pauli matrices).
//! - Site 1 is the leftmost tensor factor / most significant bit of the basis
//!   index; site n occupies bit `N − n` (counting from the least significant).
//! - Bit value 0 is spin-up, so basis index 0 is the all-up product state.
//! - Chains are open: bonds (n, n+1) for n = 1..N−1 only.
//!
//! Hamiltonians are dense `2^N × 2^N` complex matrices, assembled by bit
//! logic term by term (O(d) per term), which keeps them exactly Hermitian by
//! construction.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Largest supported chain length (dense dimension 2^14 = 16384).
pub const MAX_SITES: usize = 14;

/// Nearest-neighbor interaction pattern of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Isotropic exchange: J^x = J^y = J^z.
    Heisenberg,
    /// Planar exchange: J^x = J^y, J^z = 0.
    XY,
    /// Longitudinal exchange only: J^x = J^y = 0.
    Ising,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Model::Heisenberg => "heisenberg",
            Model::XY => "xy",
            Model::Ising => "ising",
        };
        f.write_str(name)
    }
}

/// One spin axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// All axes in the canonical x, y, z order used by field arrays.
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Index of this axis in a `[x, y, z]` array.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Which interaction the chain carries: model family, length, and per-axis
/// coupling constants (dimensionless; fields are measured in units of J).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Interaction pattern.
    pub model: Model,
    /// Number of sites N (2 ..= MAX_SITES).
    pub n_sites: usize,
    /// Couplings [J^x, J^y, J^z]; must match the model pattern.
    pub couplings: [f64; 3],
}

impl ModelSpec {
    /// Spec with the model's canonical unit couplings.
    pub fn new(model: Model, n_sites: usize) -> Result<Self> {
        let couplings = match model {
            Model::Heisenberg => [1.0, 1.0, 1.0],
            Model::XY => [1.0, 1.0, 0.0],
            Model::Ising => [0.0, 0.0, 1.0],
        };
        Self::with_couplings(model, n_sites, couplings)
    }

    /// Spec with explicit couplings, validated against the model pattern.
    pub fn with_couplings(model: Model, n_sites: usize, couplings: [f64; 3]) -> Result<Self> {
        let spec = Self {
            model,
            n_sites,
            couplings,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Check all invariants, returning a description of the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites > MAX_SITES {
            return Err(CoreError::InvalidSpec(format!(
                "n_sites must be in 2..={MAX_SITES}, got {}",
                self.n_sites
            )));
        }
        let [jx, jy, jz] = self.couplings;
        if !(jx.is_finite() && jy.is_finite() && jz.is_finite()) {
            return Err(CoreError::InvalidSpec("couplings must be finite".into()));
        }
        match self.model {
            Model::Heisenberg => {
                if jx != jy || jy != jz || jx == 0.0 {
                    return Err(CoreError::InvalidSpec(format!(
                        "heisenberg requires J^x = J^y = J^z != 0, got [{jx}, {jy}, {jz}]"
                    )));
                }
            }
            Model::XY => {
                if jx != jy || jx == 0.0 || jz != 0.0 {
                    return Err(CoreError::InvalidSpec(format!(
                        "xy requires J^x = J^y != 0 and J^z = 0, got [{jx}, {jy}, {jz}]"
                    )));
                }
            }
            Model::Ising => {
                if jx != 0.0 || jy != 0.0 || jz == 0.0 {
                    return Err(CoreError::InvalidSpec(format!(
                        "ising requires J^x = J^y = 0 and J^z != 0, got [{jx}, {jy}, {jz}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Bit of basis index `i` belonging to site `n` (1-indexed); 0 means spin-up.
#[inline]
fn site_bit(i: usize, n: usize, n_sites: usize) -> usize {
    (i >> (n_sites - n)) & 1
}

/// Bit mask that flips site `n` of a basis index.
#[inline]
fn site_mask(n: usize, n_sites: usize) -> usize {
    1 << (n_sites - n)
}

/// Dense single-site spin operator S^α_n embedded in the N-site chain:
/// I ⊗ … ⊗ S^α ⊗ … ⊗ I with S^α = σ^α/2 at position n.
///
/// Panics if `n` is out of range (index error: 1 ≤ n ≤ n_sites required).
pub fn site_operator(n: usize, axis: Axis, n_sites: usize) -> Array2<Complex64> {
    assert!(
        n >= 1 && n <= n_sites,
        "site index {n} out of range 1..={n_sites}"
    );
    assert!(
        n_sites >= 1 && n_sites <= MAX_SITES,
        "chain length {n_sites} out of range 1..={MAX_SITES}"
    );
    let d = 1usize << n_sites;
    let mask = site_mask(n, n_sites);
    let mut op = Array2::<Complex64>::zeros((d, d));
    for i in 0..d {
        match axis {
            Axis::Z => {
                // S^z eigenvalue +1/2 on spin-up (bit 0), −1/2 on spin-down.
                let sign = if site_bit(i, n, n_sites) == 0 { 0.5 } else { -0.5 };
                op[[i, i]] = Complex64::new(sign, 0.0);
            }
            Axis::X => {
                // S^x flips the spin with amplitude 1/2.
                op[[i ^ mask, i]] = Complex64::new(0.5, 0.0);
            }
            Axis::Y => {
                // S^y|up⟩ = (i/2)|down⟩ and S^y|down⟩ = (−i/2)|up⟩.
                let amp = if site_bit(i, n, n_sites) == 0 { 0.5 } else { -0.5 };
                op[[i ^ mask, i]] = Complex64::new(0.0, amp);
            }
        }
    }
    op
}

/// Sum of single-site field terms Σ_n Σ_α h[n][α] S^α_n (no interactions).
///
/// Panics if the field array is not shaped `n_sites × 3`.
pub fn field_hamiltonian(fields: &Array2<f64>, n_sites: usize) -> Array2<Complex64> {
    assert_eq!(
        fields.dim(),
        (n_sites, 3),
        "field array must be n_sites x 3"
    );
    let d = 1usize << n_sites;
    let mut h = Array2::<Complex64>::zeros((d, d));
    add_field_terms(&mut h, fields, n_sites);
    h
}

/// Full chain Hamiltonian H = Σ_bonds Σ_α J^α S^α_n S^α_{n+1}
/// + Σ_n Σ_α h[n][α] S^α_n, exactly Hermitian by construction.
///
/// Panics if the field array is not shaped `spec.n_sites × 3` (contract
/// violation). Non-finite field entries are the caller's responsibility; the
/// evolution and gradient entry points reject them with a numerical error.
pub fn build_hamiltonian(spec: &ModelSpec, fields: &Array2<f64>) -> Array2<Complex64> {
    assert_eq!(
        fields.dim(),
        (spec.n_sites, 3),
        "field array must be n_sites x 3"
    );
    let n_sites = spec.n_sites;
    let d = 1usize << n_sites;
    let [jx, jy, jz] = spec.couplings;
    let mut h = Array2::<Complex64>::zeros((d, d));

    for n in 1..n_sites {
        let ma = site_mask(n, n_sites);
        let mb = site_mask(n + 1, n_sites);
        if jz != 0.0 {
            // S^z_n S^z_{n+1}: diagonal, +1/4 when the two bits agree.
            for i in 0..d {
                let agree = site_bit(i, n, n_sites) == site_bit(i, n + 1, n_sites);
                let val = if agree { 0.25 } else { -0.25 };
                h[[i, i]] += Complex64::new(jz * val, 0.0);
            }
        }
        if jx != 0.0 {
            // S^x_n S^x_{n+1}: flips both bits with amplitude 1/4.
            for i in 0..d {
                h[[i ^ ma ^ mb, i]] += Complex64::new(jx * 0.25, 0.0);
            }
        }
        if jy != 0.0 {
            // S^y_n S^y_{n+1}: flips both bits; the product of the two
            // (±i/2) single-site elements is real: −1/4 when the source
            // bits agree, +1/4 when they differ.
            for i in 0..d {
                let agree = site_bit(i, n, n_sites) == site_bit(i, n + 1, n_sites);
                let val = if agree { -0.25 } else { 0.25 };
                h[[i ^ ma ^ mb, i]] += Complex64::new(jy * val, 0.0);
            }
        }
    }

    add_field_terms(&mut h, fields, n_sites);
    h
}

/// Accumulate Σ_n Σ_α h[n][α] S^α_n into `h`.
fn add_field_terms(h: &mut Array2<Complex64>, fields: &Array2<f64>, n_sites: usize) {
    let d = 1usize << n_sites;
    for n in 1..=n_sites {
        let mask = site_mask(n, n_sites);
        let (hx, hy, hz) = (fields[[n - 1, 0]], fields[[n - 1, 1]], fields[[n - 1, 2]]);
        if hz != 0.0 {
            for i in 0..d {
                let sign = if site_bit(i, n, n_sites) == 0 { 0.5 } else { -0.5 };
                h[[i, i]] += Complex64::new(hz * sign, 0.0);
            }
        }
        if hx != 0.0 {
            for i in 0..d {
                h[[i ^ mask, i]] += Complex64::new(hx * 0.5, 0.0);
            }
        }
        if hy != 0.0 {
            for i in 0..d {
                let amp = if site_bit(i, n, n_sites) == 0 { 0.5 } else { -0.5 };
                h[[i ^ mask, i]] += Complex64::new(0.0, hy * amp);
            }
        }
    }
}

/// Total magnetization operator S^z_total = Σ_n S^z_n (diagonal).
pub fn total_sz(n_sites: usize) -> Array2<Complex64> {
    let d = 1usize << n_sites;
    let mut op = Array2::<Complex64>::zeros((d, d));
    for i in 0..d {
        // N/2 minus the number of down spins (set bits).
        let downs = (i & (d - 1)).count_ones() as f64;
        op[[i, i]] = Complex64::new(0.5 * n_sites as f64 - downs, 0.0);
    }
    op
}

/// The all-up product state ⊗_n |0_n⟩: basis vector of index 0. This is the
/// fixed initial state of every state-preparation run.
pub fn all_up_state(n_sites: usize) -> Array1<Complex64> {
    let d = 1usize << n_sites;
    let mut psi = Array1::<Complex64>::zeros(d);
    psi[0] = Complex64::new(1.0, 0.0);
    psi
}

/// Validate a field slice: shape `n_sites × 3` and all entries finite.
pub fn validate_fields(fields: &Array2<f64>, n_sites: usize) -> Result<()> {
    if fields.dim() != (n_sites, 3) {
        return Err(CoreError::DimensionMismatch(format!(
            "field slice shaped {:?}, expected ({n_sites}, 3)",
            fields.dim()
        )));
    }
    if fields.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::NonFinite("field slice".into()));
    }
    Ok(())
}
