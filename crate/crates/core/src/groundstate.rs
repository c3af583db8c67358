// Copyright 2026 Spinctrl Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact ground states of target Hamiltonians.
//!
//! The preparation target |ψ_tar⟩ is the lowest eigenvector of a model
//! Hamiltonian, phase-fixed so results are reproducible bit-for-bit: the
//! amplitude of largest magnitude is rotated to the positive real axis.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::linalg::eigh;
use crate::{CoreError, Result};

/// Tolerance below which the spectral gap is treated as a degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Lowest eigenpair of a Hamiltonian, with the gap to the next level.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    /// Ground-state energy E₀.
    pub energy: f64,
    /// Normalized, phase-fixed ground-state vector.
    pub state: Array1<Complex64>,
    /// Spectral gap E₁ − E₀ (≥ 0).
    pub gap: f64,
}

/// Compute the ground state of a Hermitian matrix by full eigendecomposition.
///
/// Errors with [`CoreError::DegenerateGroundState`] when the gap is below
/// [`DEGENERACY_TOL`]: a degenerate lowest level makes "the" target state
/// ill-defined, and silently picking a vector inside the degenerate subspace
/// would poison every downstream fidelity.
pub fn ground_state(h: &Array2<Complex64>) -> Result<GroundStateResult> {
    let eig = eigh(h)?;
    let d = eig.dim();
    assert!(d >= 2, "ground_state requires dimension >= 2");
    let energy = eig.eigenvalues[0];
    let gap = eig.eigenvalues[1] - energy;
    if gap < DEGENERACY_TOL {
        return Err(CoreError::DegenerateGroundState {
            gap,
            tol: DEGENERACY_TOL,
        });
    }
    // Eigenvectors sit in the rows of V† (conjugated); take row 0 back to a ket.
    let mut state: Array1<Complex64> = eig.vh.row(0).mapv(|z| z.conj());
    phase_fix(&mut state);
    Ok(GroundStateResult { energy, state, gap })
}

/// Rotate the global phase so the largest-magnitude amplitude is real
/// positive. Idempotent; ties are broken by the first maximal index.
pub fn phase_fix(state: &mut Array1<Complex64>) {
    let mut best_idx = 0usize;
    let mut best_mag = -1.0f64;
    for (i, z) in state.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best_idx = i;
        }
    }
    let z = state[best_idx];
    if z.norm() == 0.0 {
        return;
    }
    let rot = z.conj() / z.norm();
    for amp in state.iter_mut() {
        *amp *= rot;
    }
    // Clean the pivot's residual imaginary dust so the fix is exactly
    // idempotent.
    state[best_idx] = Complex64::new(state[best_idx].re.max(0.0), 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{all_up_state, build_hamiltonian, Model, ModelSpec};
    use ndarray::Array2;
    use rand::prelude::*;

    fn heisenberg_hamiltonian(n: usize) -> Array2<Complex64> {
        let spec = ModelSpec::new(Model::Heisenberg, n).unwrap();
        build_hamiltonian(&spec, &Array2::zeros((n, 3)))
    }

    #[test]
    fn two_site_singlet() {
        let gs = ground_state(&heisenberg_hamiltonian(2)).unwrap();
        assert!((gs.energy - (-0.75)).abs() < 1e-12);
        assert!((gs.gap - 1.0).abs() < 1e-12);
        // (|01⟩ − |10⟩)/√2 after phase fixing: amplitude +1/√2 on index 1.
        let r = 1.0 / 2.0f64.sqrt();
        assert!((gs.state[0].norm()) < 1e-12);
        assert!((gs.state[1] - Complex64::new(r, 0.0)).norm() < 1e-10);
        assert!((gs.state[2] - Complex64::new(-r, 0.0)).norm() < 1e-10);
        assert!((gs.state[3].norm()) < 1e-12);
    }

    #[test]
    fn three_site_open_chain_energy_is_minus_one() {
        // Independently derivable from the m = ±1/2 sector 3x3 blocks.
        let gs = ground_state(&heisenberg_hamiltonian(3)).unwrap();
        assert!((gs.energy - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn ground_state_is_normalized_eigenvector() {
        let h = heisenberg_hamiltonian(5);
        let gs = ground_state(&h).unwrap();
        let norm: f64 = gs.state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let hpsi = h.dot(&gs.state);
        let resid: f64 = hpsi
            .iter()
            .zip(gs.state.iter())
            .map(|(a, b)| (a - b * Complex64::new(gs.energy, 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-10, "eigen-residual {resid}");
    }

    #[test]
    fn variational_bound_holds_for_random_states() {
        let h = heisenberg_hamiltonian(4);
        let gs = ground_state(&h).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut phi = ndarray::Array1::from_shape_fn(16, |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            phi.mapv_inplace(|z| z / norm);
            let expect: f64 = phi
                .iter()
                .zip(h.dot(&phi).iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            assert!(gs.energy <= expect + 1e-12);
        }
    }

    #[test]
    fn heisenberg_ground_state_is_orthogonal_to_all_up() {
        // The ground state lives in the S^z_total = 0 sector; all-up has
        // S^z_total = N/2, so the overlap vanishes identically.
        for n in [4usize, 6] {
            let gs = ground_state(&heisenberg_hamiltonian(n)).unwrap();
            let up = all_up_state(n);
            let overlap: Complex64 = up
                .iter()
                .zip(gs.state.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!(overlap.norm() < 1e-13);
        }
    }

    #[test]
    fn degenerate_input_is_rejected() {
        // The identity has a fully degenerate spectrum.
        let eye = Array2::<Complex64>::eye(4);
        match ground_state(&eye) {
            Err(CoreError::DegenerateGroundState { .. }) => {}
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn phase_fix_is_idempotent_and_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut v = ndarray::Array1::from_shape_fn(8, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        phase_fix(&mut v);
        let once = v.clone();
        phase_fix(&mut v);
        for (a, b) in v.iter().zip(once.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
