// Copyright 2026 Spinctrl Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared oracles for unit tests.
//!
//! Deliberately independent of the production code paths: the matrix
//! exponential here uses scaling-and-squaring with a Taylor series, never an
//! eigendecomposition, so it can certify the spectral propagator.

use ndarray::Array2;
use num_complex::Complex64;

/// exp(A) for a general complex square matrix by scaling-and-squaring with a
/// Taylor series on the scaled matrix. Accurate to ~1e-13 for the moderate
/// norms used in tests.
pub fn expm_taylor(a: &Array2<Complex64>) -> Array2<Complex64> {
    let d = a.nrows();
    assert_eq!(d, a.ncols());

    // 1-norm (max column sum) decides the scaling power.
    let norm1 = (0..d)
        .map(|j| (0..d).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new(1.0 / f64::powi(2.0, s as i32), 0.0);
    let b = a.mapv(|z| z * scale);

    // Taylor: exp(B) = Σ B^k / k!, stop when the term underflows the sum.
    let mut result = Array2::<Complex64>::eye(d);
    let mut term = Array2::<Complex64>::eye(d);
    for k in 1..200 {
        term = term.dot(&b).mapv(|z| z / k as f64);
        result = result + &term;
        let tmax = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if tmax < 1e-18 {
            break;
        }
    }

    // Undo the scaling by repeated squaring.
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// exp(−iτH) oracle for Hermitian H.
pub fn expm_minus_i_tau_h(h: &Array2<Complex64>, tau: f64) -> Array2<Complex64> {
    let a = h.mapv(|z| z * Complex64::new(0.0, -tau));
    expm_taylor(&a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_of_diagonal_matrix() {
        let mut a = Array2::<Complex64>::zeros((2, 2));
        a[[0, 0]] = Complex64::new(0.3, 0.0);
        a[[1, 1]] = Complex64::new(0.0, -1.2);
        let e = expm_taylor(&a);
        assert!((e[[0, 0]] - Complex64::new(0.3f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[[1, 1]] - Complex64::new(0.0, -1.2).exp()).norm() < 1e-13);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn exponential_of_pauli_x_rotation() {
        // exp(−iθ σ^x/2) = cos(θ/2) I − i sin(θ/2) σ^x.
        let theta = 0.77;
        let mut sx = Array2::<Complex64>::zeros((2, 2));
        sx[[0, 1]] = Complex64::new(0.5, 0.0);
        sx[[1, 0]] = Complex64::new(0.5, 0.0);
        let u = expm_minus_i_tau_h(&sx, theta);
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        assert!((u[[0, 0]] - Complex64::new(c, 0.0)).norm() < 1e-13);
        assert!((u[[0, 1]] - Complex64::new(0.0, -s)).norm() < 1e-13);
        assert!((u[[1, 0]] - Complex64::new(0.0, -s)).norm() < 1e-13);
        assert!((u[[1, 1]] - Complex64::new(c, 0.0)).norm() < 1e-13);
    }
}
