// Copyright 2026 Spinctrl Contributors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant time evolution of states and unitaries.
//!
//! A control schedule splits the total time T into K equal slices; within
//! slice k the fields — and hence the Hamiltonian H_k — are constant, so the
//! slice propagator is the exact exponential e^{−iτH_k} with τ = T/K,
//! evaluated spectrally. The evolved state is
//! ψ(T) = e^{−iτH_K} ··· e^{−iτH_1} ψ₀.
//!
//! States are propagated without materializing any propagator (two
//! matrix-vector products per slice); full unitaries are accumulated with two
//! matrix-matrix products per slice.

use ndarray::{Array1, Array2, Array3, Axis as NdAxis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hilbert::{build_hamiltonian, ModelSpec};
use crate::linalg::{apply_propagator, apply_propagator_to_matrix, eigh, form_propagator, EigenData};
use crate::{CoreError, Result};

/// Piecewise-constant control: total time T and the field array h[k][n][α]
/// (slice, site, axis). The slice duration τ = T/K is always recomputed,
/// never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    /// Total evolution time T > 0.
    pub total_time: f64,
    /// Fields, shape K × N × 3.
    pub fields: Array3<f64>,
}

impl ControlSchedule {
    /// Build a schedule, validating all invariants.
    pub fn new(total_time: f64, fields: Array3<f64>) -> Result<Self> {
        let s = Self { total_time, fields };
        s.validate()?;
        Ok(s)
    }

    /// Check invariants: T > 0 and finite, K ≥ 1, axis dimension 3, finite
    /// entries.
    pub fn validate(&self) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(CoreError::InvalidSchedule(format!(
                "total_time must be positive and finite, got {}",
                self.total_time
            )));
        }
        let (k, _n, axes) = self.fields.dim();
        if k == 0 {
            return Err(CoreError::InvalidSchedule("need at least one slice".into()));
        }
        if axes != 3 {
            return Err(CoreError::InvalidSchedule(format!(
                "field array must have 3 axis components, got {axes}"
            )));
        }
        if self.fields.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::InvalidSchedule(
                "field array contains non-finite entries".into(),
            ));
        }
        Ok(())
    }

    /// Number of slices K.
    pub fn n_slices(&self) -> usize {
        self.fields.dim().0
    }

    /// Number of sites the schedule drives.
    pub fn n_sites(&self) -> usize {
        self.fields.dim().1
    }

    /// Slice duration τ = T/K.
    pub fn tau(&self) -> f64 {
        self.total_time / self.n_slices() as f64
    }

    /// Owned copy of slice k's fields (0-indexed), shape N × 3.
    pub fn slice_fields(&self, k: usize) -> Array2<f64> {
        self.fields.index_axis(NdAxis(0), k).to_owned()
    }
}

/// States ψ₀..ψ_K visited by an evolution, optionally with the fidelity
/// f(kτ) against a fixed target at each step ([`evolve`] leaves `fidelities`
/// empty; [`fidelity_trajectory`] fills it with K+1 values).
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// ψ₀ .. ψ_K (K+1 unit vectors).
    pub states: Vec<Array1<Complex64>>,
    /// f(kτ) for k = 0..K, or empty when no target was supplied.
    pub fidelities: Vec<f64>,
}

impl Trajectory {
    /// The final state ψ_K = ψ(T).
    pub fn final_state(&self) -> &Array1<Complex64> {
        self.states.last().expect("trajectory holds K+1 >= 1 states")
    }
}

/// Exact slice propagator U = e^{−iτH} together with the eigendecomposition
/// it was built from (reused by the gradient code).
///
/// Panics if `h` is not Hermitian within 1e-12 (contract violation).
pub fn step_unitary(h: &Array2<Complex64>, tau: f64) -> Result<(Array2<Complex64>, EigenData)> {
    let mut defect = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..=i {
            defect = defect.max((h[[i, j]] - h[[j, i]].conj()).norm());
        }
    }
    assert!(
        defect < 1e-12,
        "step_unitary requires a Hermitian matrix (defect {defect:.3e})"
    );
    let eig = eigh(h)?;
    let u = form_propagator(&eig, tau);
    Ok((u, eig))
}

/// Validate the (schedule, spec, state) triple shared by all entry points.
fn check_consistency(
    schedule: &ControlSchedule,
    spec: &ModelSpec,
    psi0: Option<&Array1<Complex64>>,
) -> Result<()> {
    spec.validate()?;
    schedule.validate()?;
    if schedule.n_sites() != spec.n_sites {
        return Err(CoreError::DimensionMismatch(format!(
            "schedule drives {} sites, spec has {}",
            schedule.n_sites(),
            spec.n_sites
        )));
    }
    if let Some(psi) = psi0 {
        if psi.len() != spec.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "state has dimension {}, spec needs {}",
                psi.len(),
                spec.dim()
            )));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(CoreError::DimensionMismatch(format!(
                "initial state is not normalized (norm {norm})"
            )));
        }
    }
    Ok(())
}

/// Eigendecomposition of slice k's Hamiltonian (0-indexed slice).
pub(crate) fn slice_eigendata(
    schedule: &ControlSchedule,
    spec: &ModelSpec,
    k: usize,
) -> Result<EigenData> {
    let fields = schedule.slice_fields(k);
    crate::hilbert::validate_fields(&fields, spec.n_sites)
        .map_err(|_| CoreError::NonFinite(format!("fields of slice {}", k + 1)))?;
    let h = build_hamiltonian(spec, &fields);
    eigh(&h)
}

/// Evolve ψ₀ through every slice, retaining all K+1 states (the adjoint
/// gradient needs them). `fidelities` is left empty.
pub fn evolve(
    schedule: &ControlSchedule,
    spec: &ModelSpec,
    psi0: &Array1<Complex64>,
) -> Result<Trajectory> {
    check_consistency(schedule, spec, Some(psi0))?;
    let tau = schedule.tau();
    let mut states = Vec::with_capacity(schedule.n_slices() + 1);
    states.push(psi0.clone());
    for k in 0..schedule.n_slices() {
        let eig = slice_eigendata(schedule, spec, k)?;
        let next = apply_propagator(&eig, tau, states.last().unwrap());
        states.push(next);
    }
    Ok(Trajectory {
        states,
        fidelities: Vec::new(),
    })
}

/// Forward pass that also keeps each slice's eigendecomposition; used by the
/// gradient code. Memory: K stored factorizations of 2·d² complex entries
/// each (~34 MB at N=8, K=16).
pub(crate) struct ForwardPass {
    pub states: Vec<Array1<Complex64>>,
    pub eigs: Vec<EigenData>,
}

pub(crate) fn forward_pass(
    schedule: &ControlSchedule,
    spec: &ModelSpec,
    psi0: &Array1<Complex64>,
) -> Result<ForwardPass> {
    check_consistency(schedule, spec, Some(psi0))?;
    let tau = schedule.tau();
    let kk = schedule.n_slices();
    let mut states = Vec::with_capacity(kk + 1);
    let mut eigs = Vec::with_capacity(kk);
    states.push(psi0.clone());
    for k in 0..kk {
        let eig = slice_eigendata(schedule, spec, k)?;
        let next = apply_propagator(&eig, tau, states.last().unwrap());
        states.push(next);
        eigs.push(eig);
    }
    Ok(ForwardPass { states, eigs })
}

/// Overlap magnitude f = |⟨a|b⟩| ∈ [0, 1]; invariant under global phases and
/// symmetric in its arguments. Panics on dimension mismatch.
pub fn fidelity(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
    assert_eq!(a.len(), b.len(), "fidelity requires equal dimensions");
    let c: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    c.norm().min(1.0)
}

/// Evolve and record the fidelity against `target` after every slice.
pub fn fidelity_trajectory(
    schedule: &ControlSchedule,
    spec: &ModelSpec,
    psi0: &Array1<Complex64>,
    target: &Array1<Complex64>,
) -> Result<Trajectory> {
    if target.len() != spec.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "target has dimension {}, spec needs {}",
            target.len(),
            spec.dim()
        )));
    }
    let mut traj = evolve(schedule, spec, psi0)?;
    traj.fidelities = traj
        .states
        .iter()
        .map(|psi| fidelity(target, psi))
        .collect();
    Ok(traj)
}

/// Full evolution operator G(T) = e^{−iτH_K} ··· e^{−iτH_1}.
pub fn evolve_unitary(schedule: &ControlSchedule, spec: &ModelSpec) -> Result<Array2<Complex64>> {
    check_consistency(schedule, spec, None)?;
    let tau = schedule.tau();
    let d = spec.dim();
    let mut g = Array2::<Complex64>::eye(d);
    for k in 0..schedule.n_slices() {
        let eig = slice_eigendata(schedule, spec, k)?;
        g = apply_propagator_to_matrix(&eig, tau, &g);
    }
    Ok(g)
}
