//! Two-qubit density matrices and the partial-transpose separability tests.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ throughout. Elements are named
//!
//! ```text
//!     ⎡ p  u  v  w ⎤
//! ρ = ⎢ u* q  x  y ⎥
//!     ⎢ v* x* r  z ⎥
//!     ⎣ w* y* z* s ⎦
//! ```

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math under no_std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::qmat::{c, CMatrix, ComplexScalar, QmatError};
use crate::tolerances::{STATE_TOL, TAU_DET};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StateError {
    #[error("expected a 4x4 matrix, got {rows}x{cols}")]
    WrongShape { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("amplitudes are not normalised (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("diagonal element {index} is zero; the expansion needs a full-rank diagonal")]
    ZeroDiagonal { index: usize },
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Entangled,
    Separable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Entangled => "Entangled",
            Verdict::Separable => "Separable",
        }
    }
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: CMatrix,
}

impl TwoQubitState {
    /// Checks Hermiticity, unit trace and positivity, in that order. The
    /// stored matrix is the Hermitian part of the input.
    pub fn validate(m: &CMatrix) -> Result<Self, StateError> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(StateError::WrongShape {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let deviation = m.hermitian_deviation();
        if deviation > STATE_TOL {
            return Err(StateError::NotHermitian { deviation });
        }
        let matrix = m.symmetrized();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(StateError::TraceNotOne { trace });
        }
        let min_eigenvalue = matrix.hermitian_eigen()?.min_value();
        if min_eigenvalue < -STATE_TOL {
            return Err(StateError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn p(&self) -> f64 {
        self.matrix[(0, 0)].re
    }
    pub fn q(&self) -> f64 {
        self.matrix[(1, 1)].re
    }
    pub fn r(&self) -> f64 {
        self.matrix[(2, 2)].re
    }
    pub fn s(&self) -> f64 {
        self.matrix[(3, 3)].re
    }
    pub fn u(&self) -> ComplexScalar {
        self.matrix[(0, 1)]
    }
    pub fn v(&self) -> ComplexScalar {
        self.matrix[(0, 2)]
    }
    pub fn w(&self) -> ComplexScalar {
        self.matrix[(0, 3)]
    }
    pub fn x(&self) -> ComplexScalar {
        self.matrix[(1, 2)]
    }
    pub fn y(&self) -> ComplexScalar {
        self.matrix[(1, 3)]
    }
    pub fn z(&self) -> ComplexScalar {
        self.matrix[(2, 3)]
    }

    pub fn diagonals(&self) -> [f64; 4] {
        [self.p(), self.q(), self.r(), self.s()]
    }

    /// I/4.
    pub fn maximally_mixed() -> Self {
        Self {
            matrix: CMatrix::diag_real(&[0.25; 4]),
        }
    }

    /// |Φ+⟩⟨Φ+| with |Φ+⟩ = (|00⟩ + |11⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        PureAmplitudes::phi_plus().density()
    }

    /// Werner family `f·|Φ+⟩⟨Φ+| + (1 − f)·I/4`, valid for f ∈ [−1/3, 1].
    pub fn werner(f: f64) -> Result<Self, StateError> {
        let hi = (1.0 + f) / 4.0;
        let lo = (1.0 - f) / 4.0;
        let mut m = CMatrix::diag_real(&[hi, lo, lo, hi]);
        m[(0, 3)] = c(f / 2.0, 0.0);
        m[(3, 0)] = c(f / 2.0, 0.0);
        Self::validate(&m)
    }

    /// ρ_A ⊗ ρ_B for single-qubit density matrices.
    pub fn product(rho_a: &CMatrix, rho_b: &CMatrix) -> Result<Self, StateError> {
        Self::validate(&rho_a.kron(rho_b))
    }

    /// Partial transpose on the second qubit.
    pub fn partial_transpose_b(&self) -> CMatrix {
        partial_transpose_b(&self.matrix)
    }

    /// det(ρ^{T_B}) via LU; the imaginary residue is discarded.
    pub fn det_ptb(&self) -> f64 {
        self.partial_transpose_b()
            .determinant()
            .expect("4x4 matrix is square")
            .re
    }

    /// det(ρ^{T_B}) evaluated as pqrs times the 24-term bracket written in
    /// the element ratios. Requires all four diagonals to be non-zero.
    pub fn det_ptb_expansion(&self) -> Result<f64, StateError> {
        let [p, q, r, s] = self.diagonals();
        if let Some(index) = [p, q, r, s].iter().position(|&d| d == 0.0) {
            return Err(StateError::ZeroDiagonal { index });
        }
        let (u, v, w) = (self.u(), self.v(), self.w());
        let (x, y, z) = (self.x(), self.y(), self.z());
        let (uc, vc, wc) = (u.conj(), v.conj(), w.conj());
        let (xc, yc, zc) = (x.conj(), y.conj(), z.conj());

        let pqrs = p * q * r * s;
        let quartic = u * uc * z * zc - u * v * yc * zc - u * wc * x * z - uc * vc * y * z - uc * w * xc * zc
            + v * vc * y * yc
            - v * wc * xc * y
            - vc * w * x * yc
            + w * wc * x * xc;
        let bracket = quartic / pqrs + u * v * wc / (p * q * r) + uc * vc * w / (p * q * r) + u * x * yc / (p * q * s)
            + uc * xc * y / (p * q * s)
            - u * uc / (p * q)
            + v * xc * zc / (p * r * s)
            + vc * x * z / (p * r * s)
            - v * vc / (p * r)
            - x * xc / (p * s)
            + w * yc * zc / (q * r * s)
            + wc * y * z / (q * r * s)
            - w * wc / (q * r)
            - y * yc / (q * s)
            - z * zc / (r * s)
            + 1.0;
        Ok(pqrs * bracket.re)
    }

    pub fn pt_eigenvalues(&self) -> Vec<f64> {
        self.partial_transpose_b()
            .hermitian_eigen()
            .expect("partial transpose of a Hermitian matrix is Hermitian")
            .values
    }

    /// Eigenvalue-based PPT test, used as ground truth.
    pub fn ppt_oracle(&self) -> Verdict {
        if self.pt_eigenvalues()[0] < -TAU_DET {
            Verdict::Entangled
        } else {
            Verdict::Separable
        }
    }

    /// (‖ρ^{T_B}‖₁ − 1)/2, computed as the magnitude of the negative part of
    /// the PT spectrum.
    pub fn negativity(&self) -> f64 {
        0.0 - self.pt_eigenvalues().iter().filter(|&&l| l < 0.0).sum::<f64>()
    }

    /// max{0, −det(ρ^{T_B})}.
    pub fn entanglement_estimate(&self) -> f64 {
        (-self.det_ptb()).max(0.0)
    }

    /// ρ ⊗ ρ, the 16×16 two-copy state.
    pub fn two_copy(&self) -> CMatrix {
        self.matrix.kron(&self.matrix)
    }

    pub fn trace_distance(&self, other: &TwoQubitState) -> f64 {
        let diff = self.matrix.sub(&other.matrix).expect("both 4x4");
        0.5 * diff.trace_norm().expect("square")
    }

    pub fn random_mixed(seed: u64) -> Self {
        StateSampler::new(seed).mixed()
    }
}

/// Swaps the second-qubit indices inside each 2×2 block of a 4×4 matrix.
pub fn partial_transpose_b(m: &CMatrix) -> CMatrix {
    assert!(m.rows() == 4 && m.cols() == 4, "partial transpose needs a 4x4 matrix");
    CMatrix::from_fn(4, 4, |row, col| {
        let (i, k) = (row / 2, row % 2);
        let (j, l) = (col / 2, col % 2);
        m[(2 * i + l, 2 * j + k)]
    })
}

/// Amplitudes of a pure state a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureAmplitudes {
    pub a: ComplexScalar,
    pub b: ComplexScalar,
    pub c: ComplexScalar,
    pub d: ComplexScalar,
}

impl PureAmplitudes {
    pub fn new(a: ComplexScalar, b: ComplexScalar, c: ComplexScalar, d: ComplexScalar) -> Result<Self, StateError> {
        let norm_sqr = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalized { norm_sqr });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn phi_plus() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Self {
            a: c(h, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(h, 0.0),
        }
    }

    /// |α⟩ ⊗ |β⟩ for normalised single-qubit amplitude pairs.
    pub fn product(alpha: [ComplexScalar; 2], beta: [ComplexScalar; 2]) -> Result<Self, StateError> {
        Self::new(alpha[0] * beta[0], alpha[0] * beta[1], alpha[1] * beta[0], alpha[1] * beta[1])
    }

    pub fn as_array(&self) -> [ComplexScalar; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// ad − bc; zero exactly for product states.
    pub fn concurrence_amplitude(&self) -> ComplexScalar {
        self.a * self.d - self.b * self.c
    }

    /// |Ψ⟩⟨Ψ|.
    pub fn density(&self) -> TwoQubitState {
        let psi = self.as_array();
        TwoQubitState {
            matrix: CMatrix::outer(&psi, &psi).symmetrized(),
        }
    }

    pub fn random(seed: u64) -> Self {
        StateSampler::new(seed).pure()
    }
}

/// Seeded source of Ginibre mixed states and Haar pure states.
#[derive(Debug, Clone)]
pub struct StateSampler {
    rng: ChaCha8Rng,
}

impl StateSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn complex_gaussian(&mut self) -> ComplexScalar {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// G·G†/tr(G·G†) with G a 4×4 matrix of standard complex Gaussians.
    pub fn mixed(&mut self) -> TwoQubitState {
        let g = CMatrix::from_fn(4, 4, |_, _| self.complex_gaussian());
        let gg = g.matmul(&g.adjoint()).expect("4x4");
        let tr = gg.trace().re;
        TwoQubitState {
            matrix: gg.scale_real(1.0 / tr).symmetrized(),
        }
    }

    /// Normalised complex Gaussian 4-vector (Haar distributed).
    pub fn pure(&mut self) -> PureAmplitudes {
        let v: [ComplexScalar; 4] = core::array::from_fn(|_| self.complex_gaussian());
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        PureAmplitudes {
            a: v[0] / norm,
            b: v[1] / norm,
            c: v[2] / norm,
            d: v[3] / norm,
        }
    }

    /// Random single-qubit amplitude pair.
    pub fn qubit(&mut self) -> [ComplexScalar; 2] {
        let a = self.complex_gaussian();
        let b = self.complex_gaussian();
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        [a / norm, b / norm]
    }
}
