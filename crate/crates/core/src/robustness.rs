//! Sensitivity of the weak values to a miscalibrated interaction.
//!
//! If the applied Hamiltonian is H_e with ‖H − H_e‖₁ ≤ δ, every defined weak
//! value moves by at most δ/m, where m is the smallest product of two
//! diagonal elements of ρ. This module measures the actual deviations under
//! random and structured perturbations and checks them against that bound.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math under no_std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::protocol::{weak_value_two_copy, OutcomeIndex, ProtocolError, WeakHamiltonian};
use crate::qmat::{CMatrix, QmatError};
use crate::states::TwoQubitState;
use crate::tolerances::{TAU_DEN, TAU_DIAG};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RobustnessError {
    #[error("perturbation size must be finite and non-negative, got {0}")]
    BadDelta(f64),
    #[error("state has a vanishing diagonal ({min_diagonal:e}); the bound needs m > 0")]
    RankDeficient { min_diagonal: f64 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// A Hermitian 16×16 difference H − H_e with its trace norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    matrix: CMatrix,
    delta: f64,
}

impl Perturbation {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same direction, `factor` times the size.
    pub fn scaled(&self, factor: f64) -> Perturbation {
        Perturbation {
            matrix: self.matrix.scale_real(factor),
            delta: self.delta * factor.abs(),
        }
    }

    /// H_e = (1 + η)H, i.e. a miscalibrated coupling strength.
    pub fn miscalibration(h: &WeakHamiltonian, eta: f64) -> Result<Perturbation, RobustnessError> {
        let matrix = h.matrix().scale_real(-eta);
        let delta = matrix.trace_norm()?;
        Ok(Perturbation { matrix, delta })
    }

    /// The erroneous Hamiltonian H_e = H − P.
    pub fn apply_to(&self, h: &WeakHamiltonian) -> CMatrix {
        h.matrix().sub(&self.matrix).expect("both 16x16")
    }
}

/// Gaussian Hermitian 16×16 matrix rescaled to trace norm `delta`.
pub fn random_perturbation(delta: f64, seed: u64) -> Result<Perturbation, RobustnessError> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(RobustnessError::BadDelta(delta));
    }
    if delta == 0.0 {
        return Ok(Perturbation {
            matrix: CMatrix::zeros(16, 16),
            delta: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(16, 16, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let herm = g.symmetrized();
    let norm = herm.trace_norm()?;
    Ok(Perturbation {
        matrix: herm.scale_real(delta / norm),
        delta,
    })
}

/// Δ_k = |⟨H⟩^{(k)} − ⟨H − P⟩^{(k)}| on ρ⊗ρ.
pub fn weak_value_deviation(
    rho: &TwoQubitState,
    h: &WeakHamiltonian,
    perturbation: &Perturbation,
    k: OutcomeIndex,
) -> Result<f64, ProtocolError> {
    let two_copy = rho.two_copy();
    deviation_on(&two_copy, h, &perturbation.apply_to(h), k)
}

fn deviation_on(two_copy: &CMatrix, h: &WeakHamiltonian, h_e: &CMatrix, k: OutcomeIndex) -> Result<f64, ProtocolError> {
    let exact = weak_value_two_copy(h.matrix(), two_copy, k, TAU_DEN)?;
    let perturbed = weak_value_two_copy(h_e, two_copy, k, TAU_DEN)?;
    Ok((exact - perturbed).norm())
}

/// m = (min diagonal)².
pub fn bound_denominator(rho: &TwoQubitState) -> f64 {
    let d = rho.diagonals().iter().copied().fold(f64::INFINITY, f64::min);
    d * d
}

/// m as the minimum over all pairwise diagonal products.
pub fn bound_denominator_cross(rho: &TwoQubitState) -> f64 {
    let d = rho.diagonals();
    d.iter()
        .flat_map(|a| d.iter().map(move |b| a * b))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub delta: f64,
    pub m: f64,
    pub bound: f64,
    pub trials: usize,
    /// Worst Δ_k over all trials, indexed by k − 1; `None` if undefined.
    pub deviations: [Option<f64>; 16],
    /// min over k of (bound − worst Δ_k).
    pub margin: f64,
    pub violations: usize,
    /// Total (perturbation, outcome) pairs checked.
    pub checked: usize,
}

impl RobustnessReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks Δ_k ≤ δ/m over `trials` random perturbations of size `delta`.
/// Per-trial seeds are drawn from a generator seeded with `seed`.
pub fn bound_check(rho: &TwoQubitState, delta: f64, trials: usize, seed: u64) -> Result<RobustnessReport, RobustnessError> {
    let min_diagonal = rho.diagonals().iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_diagonal > TAU_DIAG) {
        return Err(RobustnessError::RankDeficient { min_diagonal });
    }
    let m = bound_denominator(rho);
    debug_assert!((m - bound_denominator_cross(rho)).abs() <= f64::EPSILON * m);
    let bound = delta / m;

    let h = WeakHamiltonian::general();
    let two_copy = rho.two_copy();
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut deviations = [None::<f64>; 16];
    let mut violations = 0;
    let mut checked = 0;
    for _ in 0..trials {
        let perturbation = random_perturbation(delta, master.random())?;
        let h_e = perturbation.apply_to(&h);
        for k in OutcomeIndex::all() {
            let dev = match deviation_on(&two_copy, &h, &h_e, k) {
                Ok(d) => d,
                Err(ProtocolError::NoSignal { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            checked += 1;
            if dev > bound {
                violations += 1;
            }
            let slot = &mut deviations[k.basis_index()];
            *slot = Some(slot.map_or(dev, |w| w.max(dev)));
        }
    }
    let margin = deviations
        .iter()
        .flatten()
        .map(|d| bound - d)
        .fold(f64::INFINITY, f64::min);
    Ok(RobustnessReport {
        delta,
        m,
        bound,
        trials,
        deviations,
        margin,
        violations,
        checked,
    })
}

/// Rows (k, worst Δ_k) for every defined outcome.
pub fn sweep_rows(report: &RobustnessReport) -> Vec<(u8, f64)> {
    report
        .deviations
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (i as u8 + 1, d)))
        .collect()
}
