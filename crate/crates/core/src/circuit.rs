//! Gate-level realisation of the two-copy weak interaction U = exp(−iεH).
//!
//! Qubits 0 and 1 are copy 1 (A, B), qubits 2 and 3 are copy 2. Qubit 0 is
//! the most significant bit of a basis label, matching `kron` ordering.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[allow(unused_imports)] // f64 math under no_std
use num_traits::Float;
use thiserror::Error;

use crate::qmat::{c, pauli, CMatrix, QmatError};

pub const QUBITS: usize = 4;
const DIM: usize = 1 << QUBITS;
const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("gate `{label}` is not unitary (deviation {deviation:e})")]
    NotUnitary { label: String, deviation: f64 },
    #[error("gate `{label}` touches qubit {qubit}, outside 0..{QUBITS}")]
    QubitOutOfRange { label: String, qubit: usize },
    #[error("gate `{label}` uses qubit {qubit} as both control and target")]
    Overlap { label: String, qubit: usize },
    #[error("gate `{label}` has a {rows}x{cols} matrix for {targets} target(s)")]
    Shape {
        label: String,
        rows: usize,
        cols: usize,
        targets: usize,
    },
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// A (multi-)controlled gate on one or two target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    label: String,
    targets: Vec<usize>,
    matrix: CMatrix,
    controls: Vec<(usize, bool)>,
}

impl Gate {
    pub fn new(
        label: impl Into<String>,
        targets: Vec<usize>,
        matrix: CMatrix,
        controls: Vec<(usize, bool)>,
    ) -> Result<Self, CircuitError> {
        let label = label.into();
        let dim = 1usize << targets.len();
        if targets.is_empty() || targets.len() > 2 || matrix.rows() != dim || matrix.cols() != dim {
            return Err(CircuitError::Shape {
                label,
                rows: matrix.rows(),
                cols: matrix.cols(),
                targets: targets.len(),
            });
        }
        for &q in targets.iter().chain(controls.iter().map(|(q, _)| q)) {
            if q >= QUBITS {
                return Err(CircuitError::QubitOutOfRange { label, qubit: q });
            }
        }
        if let Some(&(qubit, _)) = controls.iter().find(|(q, _)| targets.contains(q)) {
            return Err(CircuitError::Overlap { label, qubit });
        }
        let deviation = matrix
            .adjoint()
            .matmul(&matrix)?
            .max_abs_diff(&CMatrix::identity(dim));
        if deviation > UNITARY_TOL {
            return Err(CircuitError::NotUnitary { label, deviation });
        }
        Ok(Self {
            label,
            targets,
            matrix,
            controls,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[(usize, bool)] {
        &self.controls
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Full 16×16 operator of this gate.
    pub fn embed(&self) -> CMatrix {
        let bit = |state: usize, q: usize| (state >> (QUBITS - 1 - q)) & 1;
        let mut out = CMatrix::zeros(DIM, DIM);
        for col in 0..DIM {
            let active = self.controls.iter().all(|&(q, v)| bit(col, q) == usize::from(v));
            if !active {
                out[(col, col)] = c(1.0, 0.0);
                continue;
            }
            let sub_in = self.targets.iter().fold(0, |acc, &q| (acc << 1) | bit(col, q));
            for sub_out in 0..self.matrix.rows() {
                let mut row = col;
                for (pos, &q) in self.targets.iter().enumerate() {
                    let shift = QUBITS - 1 - q;
                    let b = (sub_out >> (self.targets.len() - 1 - pos)) & 1;
                    row = (row & !(1 << shift)) | (b << shift);
                }
                out[(row, col)] = self.matrix[(sub_out, sub_in)];
            }
        }
        out
    }
}

/// Ordered gate list; gates act first to last.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub gates: Vec<Gate>,
    pub epsilon: f64,
}

impl CircuitSpec {
    /// One line per gate: label, controls, targets.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# weak-interaction circuit, epsilon = {}", self.epsilon);
        for (i, g) in self.gates.iter().enumerate() {
            let controls: Vec<String> = g
                .controls
                .iter()
                .map(|&(q, v)| format!("q{}={}", q, u8::from(v)))
                .collect();
            let targets: Vec<String> = g.targets.iter().map(|q| format!("q{q}")).collect();
            let _ = writeln!(
                out,
                "{:>2}  {:<10} controls [{}]  targets [{}]",
                i + 1,
                g.label,
                controls.join(", "),
                targets.join(", ")
            );
        }
        out
    }
}

/// e^{−iεσx} in closed form.
pub fn x_rotation(epsilon: f64) -> CMatrix {
    let (s, co) = epsilon.sin_cos();
    CMatrix::from_rows(&[[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]).expect("finite")
}

/// R_X = e^{iεσx}, the inverse of the branch rotation.
pub fn rx_gate(epsilon: f64) -> CMatrix {
    x_rotation(-epsilon)
}

fn projector(bits: &[usize]) -> CMatrix {
    let n = 1 << bits.len();
    let idx = bits.iter().fold(0, |acc, &b| (acc << 1) | b);
    CMatrix::from_fn(n, n, |i, j| if i == idx && j == idx { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// U = |0⟩⟨0|⊗I⊗I⊗e^{−iεσx} + |10⟩⟨10|⊗e^{−iεσx}⊗I + |11⟩⟨11|⊗e^{−iεσx⊗σx}.
pub fn interaction_unitary(epsilon: f64) -> CMatrix {
    let i2 = pauli::identity();
    let r = x_rotation(epsilon);
    let (s, co) = epsilon.sin_cos();
    let xx = pauli::x().kron(&pauli::x());
    let r_xx = CMatrix::identity(4)
        .scale_real(co)
        .add(&xx.scale(c(0.0, -s)))
        .expect("4x4");

    let zero_branch = projector(&[0]).kron(&i2).kron(&i2).kron(&r);
    let one_zero_branch = projector(&[1, 0]).kron(&r).kron(&i2);
    let one_one_branch = projector(&[1, 1]).kron(&r_xx);
    zero_branch
        .add(&one_zero_branch)
        .and_then(|m| m.add(&one_one_branch))
        .expect("16x16")
}

/// Gate sequence realising [`interaction_unitary`]. The σx⊗σx branch is rotated
/// into the computational basis of qubit 2 with Hadamards, since
/// e^{−iεσx⊗σx} = |+⟩⟨+|⊗e^{−iεσx} + |−⟩⟨−|⊗e^{+iεσx}.
pub fn build_interaction_circuit(epsilon: f64) -> CircuitSpec {
    let r = x_rotation(epsilon);
    let r_inv = x_rotation(-epsilon);
    let h = pauli::hadamard();
    let gate = |label: &str, target: usize, m: &CMatrix, controls: &[(usize, bool)]| {
        Gate::new(label, alloc::vec![target], m.clone(), controls.to_vec()).expect("fixed gates are valid")
    };
    CircuitSpec {
        gates: alloc::vec![
            gate("RX^dag", 3, &r, &[(0, false)]),
            gate("RX^dag", 2, &r, &[(0, true), (1, false)]),
            gate("H_D", 2, &h, &[]),
            gate("RX^dag", 3, &r, &[(0, true), (1, true), (2, false)]),
            gate("RX", 3, &r_inv, &[(0, true), (1, true), (2, true)]),
            gate("H_D", 2, &h, &[]),
        ],
        epsilon,
    }
}

/// Product of the embedded gates in application order.
pub fn assemble_unitary(spec: &CircuitSpec) -> Result<CMatrix, CircuitError> {
    let mut u = CMatrix::identity(DIM);
    for g in &spec.gates {
        // re-check gates that may have been built outside `Gate::new`
        let g = Gate::new(g.label.clone(), g.targets.clone(), g.matrix.clone(), g.controls.clone())?;
        u = g.embed().matmul(&u)?;
    }
    Ok(u)
}

/// ‖assembled circuit − U‖_max.
pub fn verify_equivalence(epsilon: f64) -> f64 {
    let assembled = assemble_unitary(&build_interaction_circuit(epsilon)).expect("fixed circuit is valid");
    assembled.max_abs_diff(&interaction_unitary(epsilon))
}
