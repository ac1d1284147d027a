//! Weak-value entanglement detection and tomography on two copies of a
//! two-qubit state.
//!
//! The system is ρ⊗ρ on four qubits, ordered (copy-1 A, copy-1 B, copy-2 A,
//! copy-2 B). Post-selection is in the computational basis; outcome `k`
//! (1-based) is the basis state whose binary label is `k − 1`, so `k = 1` is
//! |0000⟩ and `k = 16` is |1111⟩.
//!
//! With the standard Hamiltonian the informative outcomes read off the twelve
//! element ratios
//!
//! | k  | value | k  | value | k  | value |
//! |----|-------|----|-------|----|-------|
//! | 1  | u*/p  | 9  | v*/p  | 13 | w*/p  |
//! | 2  | u/q   | 10 | y*/q  | 14 | x*/q  |
//! | 3  | z*/r  | 11 | v/r   | 15 | x/r   |
//! | 4  | z/s   | 12 | y/s   | 16 | w/s   |
//!
//! and outcomes 5–8 repeat 1–4.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math under no_std
use num_traits::Float;
use num_traits::Zero;
use thiserror::Error;

use crate::qmat::{c, pauli, CMatrix, ComplexScalar, QmatError};
use crate::states::{PureAmplitudes, StateError, TwoQubitState, Verdict};
use crate::tolerances::{TAU_DEN, TAU_DET, TAU_DIAG, TAU_WV};

/// Allowed slack on p+q+r+s when reconstructing.
pub const DIAGONAL_SUM_TOL: f64 = 1e-6;
/// Reconstructions more negative than this are rejected as inconsistent.
pub const RECONSTRUCT_PSD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ProtocolError {
    #[error("no signal for outcome {k} (post-selection probability {probability:e})")]
    NoSignal { k: u8, probability: f64 },
    #[error("outcome index {0} is outside 1..=16")]
    BadOutcome(u8),
    #[error("diagonals must be non-negative and sum to 1 (sum {sum})")]
    InvalidDiagonals { sum: f64 },
    #[error("reconstructed matrix is not positive (min eigenvalue {min_eigenvalue:e})")]
    Inconsistent { min_eigenvalue: f64 },
    #[error("the ratio chain does not determine the diagonals")]
    Underdetermined,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// Post-selection outcome, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomeIndex(u8);

impl OutcomeIndex {
    pub const INFORMATIVE: [u8; 12] = [1, 2, 3, 4, 9, 10, 11, 12, 13, 14, 15, 16];
    pub const REDUNDANT: [u8; 4] = [5, 6, 7, 8];

    pub fn new(k: u8) -> Result<Self, ProtocolError> {
        if (1..=16).contains(&k) {
            Ok(Self(k))
        } else {
            Err(ProtocolError::BadOutcome(k))
        }
    }

    pub fn all() -> impl Iterator<Item = OutcomeIndex> {
        (1..=16).map(OutcomeIndex)
    }

    pub fn k(self) -> u8 {
        self.0
    }

    /// Row/column of |u_k⟩ in the 16-dimensional basis.
    pub fn basis_index(self) -> usize {
        usize::from(self.0) - 1
    }

    pub fn is_informative(self) -> bool {
        !Self::REDUNDANT.contains(&self.0)
    }
}

/// What a first-copy block of the Hamiltonian does to the second copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockAction {
    /// I ⊗ σx
    FlipSecond,
    /// σx ⊗ I
    FlipFirst,
    /// σx ⊗ σx
    FlipBoth,
}

impl BlockAction {
    fn matrix(self) -> CMatrix {
        match self {
            BlockAction::FlipSecond => pauli::identity().kron(&pauli::x()),
            BlockAction::FlipFirst => pauli::x().kron(&pauli::identity()),
            BlockAction::FlipBoth => pauli::x().kron(&pauli::x()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// Block-diagonal two-copy coupling.
    General,
    /// I⊗I⊗I⊗σx, local on every qubit.
    PureLocal,
    /// Any other Hermitian 16×16 operator (e.g. a miscalibrated coupling).
    Custom,
}

/// Hermitian 16×16 system operator of the weak interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakHamiltonian {
    matrix: CMatrix,
    kind: HamiltonianKind,
}

impl WeakHamiltonian {
    /// Standard block layout: |00⟩,|01⟩ → I⊗σx, |10⟩ → σx⊗I, |11⟩ → σx⊗σx.
    pub const STANDARD_BLOCKS: [BlockAction; 4] = [
        BlockAction::FlipSecond,
        BlockAction::FlipSecond,
        BlockAction::FlipFirst,
        BlockAction::FlipBoth,
    ];

    pub fn general() -> Self {
        Self::with_blocks(Self::STANDARD_BLOCKS)
    }

    /// Σ_a |a⟩⟨a| ⊗ block(a), with `a` running over the first copy's basis.
    pub fn with_blocks(blocks: [BlockAction; 4]) -> Self {
        let mut matrix = CMatrix::zeros(16, 16);
        for (a, block) in blocks.iter().enumerate() {
            let b = block.matrix();
            for i in 0..4 {
                for j in 0..4 {
                    matrix[(4 * a + i, 4 * a + j)] = b[(i, j)];
                }
            }
        }
        Self {
            matrix,
            kind: HamiltonianKind::General,
        }
    }

    pub fn pure_local() -> Self {
        let i4 = CMatrix::identity(8);
        Self {
            matrix: i4.kron(&pauli::x()),
            kind: HamiltonianKind::PureLocal,
        }
    }

    pub fn custom(matrix: CMatrix) -> Result<Self, ProtocolError> {
        if matrix.rows() != 16 || matrix.cols() != 16 {
            return Err(QmatError::DimensionMismatch {
                left_rows: 16,
                left_cols: 16,
                right_rows: matrix.rows(),
                right_cols: matrix.cols(),
            }
            .into());
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > crate::qmat::HERMITIAN_TOL {
            return Err(QmatError::NotHermitian { deviation }.into());
        }
        Ok(Self {
            matrix: matrix.symmetrized(),
            kind: HamiltonianKind::Custom,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }
}

pub fn build_hamiltonian() -> WeakHamiltonian {
    WeakHamiltonian::general()
}

pub fn build_local_hamiltonian() -> WeakHamiltonian {
    WeakHamiltonian::pure_local()
}

/// ⟨u_k|ρ⊗ρ|u_k⟩.
pub fn postselection_probability(two_copy: &CMatrix, k: OutcomeIndex) -> f64 {
    let i = k.basis_index();
    two_copy[(i, i)].re
}

/// ⟨u_k|H·ρ⊗ρ|u_k⟩ / ⟨u_k|ρ⊗ρ|u_k⟩, defined when the denominator exceeds `floor`.
pub fn weak_value_two_copy(
    op: &CMatrix,
    two_copy: &CMatrix,
    k: OutcomeIndex,
    floor: f64,
) -> Result<ComplexScalar, ProtocolError> {
    let i = k.basis_index();
    let probability = postselection_probability(two_copy, k);
    if !(probability > floor) {
        return Err(ProtocolError::NoSignal { k: k.k(), probability });
    }
    let numerator: ComplexScalar = (0..16).map(|j| op[(i, j)] * two_copy[(j, i)]).sum();
    Ok(numerator / probability)
}

pub fn exact_weak_value(
    rho: &TwoQubitState,
    h: &WeakHamiltonian,
    k: OutcomeIndex,
) -> Result<ComplexScalar, ProtocolError> {
    weak_value_two_copy(h.matrix(), &rho.two_copy(), k, TAU_DEN)
}

/// Weak values for all sixteen outcomes; undefined ones are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValueSet {
    values: [Option<ComplexScalar>; 16],
}

impl WeakValueSet {
    pub fn from_values(values: [Option<ComplexScalar>; 16]) -> Self {
        Self { values }
    }

    pub fn get(&self, k: u8) -> Option<ComplexScalar> {
        OutcomeIndex::new(k).ok().and_then(|k| self.values[k.basis_index()])
    }

    pub fn defined_mask(&self) -> [bool; 16] {
        core::array::from_fn(|i| self.values[i].is_some())
    }

    /// Defined outcomes in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u8, ComplexScalar)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i as u8 + 1, v)))
    }

    pub fn ratios(&self) -> RatioSet {
        RatioSet::from_weak_values(self)
    }
}

/// Weak values of `h` on ρ⊗ρ, keeping outcomes whose probability exceeds `floor`.
pub fn weak_values_with(rho: &TwoQubitState, h: &WeakHamiltonian, floor: f64) -> WeakValueSet {
    let two_copy = rho.two_copy();
    let mut values = [None; 16];
    for k in OutcomeIndex::all() {
        values[k.basis_index()] = weak_value_two_copy(h.matrix(), &two_copy, k, floor).ok();
    }
    WeakValueSet { values }
}

pub fn weak_values_all(rho: &TwoQubitState) -> WeakValueSet {
    weak_values_with(rho, &WeakHamiltonian::general(), TAU_DEN)
}

/// (p, q, r, s) as square roots of the probabilities of outcomes 1, 6, 11, 16.
pub fn diagonals_from_postselection(rho: &TwoQubitState) -> [f64; 4] {
    let two_copy = rho.two_copy();
    [1u8, 6, 11, 16].map(|k| {
        let pr = postselection_probability(&two_copy, OutcomeIndex(k));
        pr.max(0.0).sqrt()
    })
}

/// The twelve element ratios, each `None` when its outcome had no signal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatioSet {
    pub u_star_p: Option<ComplexScalar>,
    pub u_q: Option<ComplexScalar>,
    pub z_star_r: Option<ComplexScalar>,
    pub z_s: Option<ComplexScalar>,
    pub v_star_p: Option<ComplexScalar>,
    pub y_star_q: Option<ComplexScalar>,
    pub v_r: Option<ComplexScalar>,
    pub y_s: Option<ComplexScalar>,
    pub w_star_p: Option<ComplexScalar>,
    pub x_star_q: Option<ComplexScalar>,
    pub x_r: Option<ComplexScalar>,
    pub w_s: Option<ComplexScalar>,
}

impl RatioSet {
    pub fn from_weak_values(wv: &WeakValueSet) -> Self {
        Self {
            u_star_p: wv.get(1),
            u_q: wv.get(2),
            z_star_r: wv.get(3),
            z_s: wv.get(4),
            v_star_p: wv.get(9),
            y_star_q: wv.get(10),
            v_r: wv.get(11),
            y_s: wv.get(12),
            w_star_p: wv.get(13),
            x_star_q: wv.get(14),
            x_r: wv.get(15),
            w_s: wv.get(16),
        }
    }

    /// Read the ratios straight from the matrix elements (test oracle and
    /// reference for full-rank states).
    pub fn from_state(rho: &TwoQubitState) -> Self {
        let [p, q, r, s] = rho.diagonals();
        let ratio = |num: ComplexScalar, den: f64| (den != 0.0).then(|| num / den);
        Self {
            u_star_p: ratio(rho.u().conj(), p),
            u_q: ratio(rho.u(), q),
            z_star_r: ratio(rho.z().conj(), r),
            z_s: ratio(rho.z(), s),
            v_star_p: ratio(rho.v().conj(), p),
            y_star_q: ratio(rho.y().conj(), q),
            v_r: ratio(rho.v(), r),
            y_s: ratio(rho.y(), s),
            w_star_p: ratio(rho.w().conj(), p),
            x_star_q: ratio(rho.x().conj(), q),
            x_r: ratio(rho.x(), r),
            w_s: ratio(rho.w(), s),
        }
    }

    pub fn as_array(&self) -> [Option<ComplexScalar>; 12] {
        [
            self.u_star_p,
            self.u_q,
            self.z_star_r,
            self.z_s,
            self.v_star_p,
            self.y_star_q,
            self.v_r,
            self.y_s,
            self.w_star_p,
            self.x_star_q,
            self.x_r,
            self.w_s,
        ]
    }

    pub fn is_complete(&self) -> bool {
        self.as_array().iter().all(Option::is_some)
    }

    /// Largest |conj(A*/d₁)·d₁ − (A/d₂)·d₂| over the six conjugate pairs;
    /// zero for exact data. `None` if any ratio is missing.
    pub fn conjugate_consistency(&self, [p, q, r, s]: [f64; 4]) -> Option<f64> {
        let pairs = [
            (self.u_star_p?, p, self.u_q?, q),
            (self.z_star_r?, r, self.z_s?, s),
            (self.v_star_p?, p, self.v_r?, r),
            (self.y_star_q?, q, self.y_s?, s),
            (self.w_star_p?, p, self.w_s?, s),
            (self.x_star_q?, q, self.x_r?, r),
        ];
        Some(
            pairs
                .iter()
                .map(|&(a, da, b, db)| ((a * da).conj() - b * db).norm())
                .fold(0.0, f64::max),
        )
    }

    /// det(ρ^{T_B})/(pqrs) as the 24-term bracket.
    ///
    /// Every term is a product of the ratios and their conjugates:
    ///
    /// ```text
    ///  +uu*zz*/pqrs = (u/q)(u*/p)(z/s)(z*/r)     +uvw*/pqr  = (u/q)(v/r)(w*/p)
    ///  -uvy*z*/pqrs = (u/q)(v/p)(y*/s)(z*/r)     +u*v*w/pqr = (u*/q)(v*/r)(w/p)
    ///  -uw*xz/pqrs  = (u/q)(w*/p)(x/r)(z/s)      +uxy*/pqs  = (u/p)(x/q)(y*/s)
    ///  -u*v*yz/pqrs = (u*/q)(v*/p)(y/s)(z/r)     +u*x*y/pqs = (u*/p)(x*/q)(y/s)
    ///  -u*wx*z*/pqrs= (u*/q)(w/p)(x*/r)(z*/s)    +vx*z*/prs = (v/p)(x*/r)(z*/s)
    ///  +vv*yy*/pqrs = (v/r)(v*/p)(y/s)(y*/q)     +v*xz/prs  = (v*/p)(x/r)(z/s)
    ///  -vw*x*y/pqrs = (v/r)(w*/p)(x*/q)(y/s)     +wy*z*/qrs = (w/s)(y*/q)(z*/r)
    ///  -v*wxy*/pqrs = (v*/r)(w/p)(x/q)(y*/s)     +w*yz/qrs  = (w*/s)(y/q)(z/r)
    ///  +ww*xx*/pqrs = (w/s)(w*/p)(x/r)(x*/q)
    ///  -uu*/pq = (u/q)(u*/p)   -vv*/pr = (v/r)(v*/p)   -yy*/qs = (y/s)(y*/q)
    ///  -zz*/rs = (z/s)(z*/r)
    ///  -xx*/ps = (x/r)(x*/q)·(qr/ps)   -ww*/qr = (w/s)(w*/p)·(ps/qr)
    ///  +1
    /// ```
    ///
    /// The last two terms cannot be formed from ratios alone and take the
    /// diagonal quotient from `diagonals`. Returns `None` if a ratio is
    /// missing or a diagonal is zero.
    pub fn bracket(&self, [p, q, r, s]: [f64; 4]) -> Option<f64> {
        if [p, q, r, s].iter().any(|&d| d <= 0.0) {
            return None;
        }
        let a1 = self.u_star_p?; // u*/p
        let a2 = self.u_q?; // u/q
        let a3 = self.z_star_r?; // z*/r
        let a4 = self.z_s?; // z/s
        let b1 = self.v_star_p?; // v*/p
        let b2 = self.y_star_q?; // y*/q
        let b3 = self.v_r?; // v/r
        let b4 = self.y_s?; // y/s
        let c1 = self.w_star_p?; // w*/p
        let c2 = self.x_star_q?; // x*/q
        let c3 = self.x_r?; // x/r
        let c4 = self.w_s?; // w/s
        let cj = |z: ComplexScalar| z.conj();

        let quartic = a2 * a1 * a4 * a3 - a2 * cj(b1) * cj(b4) * a3 - a2 * c1 * c3 * a4
            - cj(a2) * b1 * b4 * cj(a3)
            - cj(a2) * cj(c1) * cj(c3) * cj(a4)
            + b3 * b1 * b4 * b2
            - b3 * c1 * c2 * b4
            - cj(b3) * cj(c1) * cj(c2) * cj(b4)
            + c4 * c1 * c3 * c2;
        let cubic = a2 * b3 * c1 + cj(a2) * cj(b3) * cj(c1) + cj(a1) * cj(c2) * cj(b4) + a1 * c2 * b4
            + cj(b1) * cj(c3) * cj(a4)
            + b1 * c3 * a4
            + c4 * b2 * a3
            + cj(c4) * cj(b2) * cj(a3);
        let quadratic = -(a2 * a1) - b3 * b1 - b4 * b2 - a4 * a3
            - c3 * c2 * ((q * r) / (p * s))
            - c4 * c1 * ((p * s) / (q * r));
        Some((quartic + cubic + quadratic).re + 1.0)
    }
}

/// Which branch of the decision tree produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionPath {
    General,
    CaseI,
    CaseII,
    PureLocal,
}

impl DecisionPath {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionPath::General => "General",
            DecisionPath::CaseI => "CaseI",
            DecisionPath::CaseII => "CaseII",
            DecisionPath::PureLocal => "PureLocal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub verdict: Verdict,
    pub path: DecisionPath,
    /// det(ρ^{T_B})/(pqrs); only on the general path.
    pub det_scaled: Option<f64>,
    pub det_value: Option<f64>,
    pub e_estimate: f64,
    /// Diagonals inferred from post-selection probabilities.
    pub diagonals: [f64; 4],
    pub weak_values: WeakValueSet,
}

/// Thresholds used by [`detect_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub tau_det: f64,
    pub tau_diag: f64,
    pub tau_wv: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            tau_det: TAU_DET,
            tau_diag: TAU_DIAG,
            tau_wv: TAU_WV,
        }
    }
}

pub fn detect(rho: &TwoQubitState) -> DetectionReport {
    detect_with(rho, &DetectOptions::default())
}

pub fn detect_with(rho: &TwoQubitState, opts: &DetectOptions) -> DetectionReport {
    let diagonals = diagonals_from_postselection(rho);
    let [p, q, r, s] = diagonals;
    let h = WeakHamiltonian::general();
    // any non-zero probability counts here; the no-signal calls are made on
    // the diagonals below
    let weak_values = weak_values_with(rho, &h, 0.0);
    let dead = |d: f64| d < opts.tau_diag;

    let (verdict, path, det_scaled, det_value) = if dead(p) || dead(s) {
        // p = 0 or s = 0: det = −|x|²qr
        if dead(q) || dead(r) {
            (Verdict::Separable, DecisionPath::CaseI, None, Some(0.0))
        } else {
            let probe = if dead(s) {
                // outcome 14 needs s ≠ 0; move σx⊗σx under |01⟩ and read x*/q at k = 6
                let mut blocks = WeakHamiltonian::STANDARD_BLOCKS;
                blocks.swap(1, 3);
                weak_value_two_copy(
                    WeakHamiltonian::with_blocks(blocks).matrix(),
                    &rho.two_copy(),
                    OutcomeIndex(6),
                    0.0,
                )
                .ok()
            } else {
                weak_values.get(14)
            };
            let x_star_q = probe.unwrap_or(Complex64::zero()).norm();
            let det = -(x_star_q * x_star_q) * q * q * q * r;
            let verdict = if x_star_q > opts.tau_wv {
                Verdict::Entangled
            } else {
                Verdict::Separable
            };
            (verdict, DecisionPath::CaseI, None, Some(det))
        }
    } else if dead(q) || dead(r) {
        // det = −|w|²ps, probed through w/s at k = 16
        let w_s = weak_values.get(16).unwrap_or(Complex64::zero()).norm();
        let det = -(w_s * w_s) * p * s * s * s;
        let verdict = if w_s > opts.tau_wv {
            Verdict::Entangled
        } else {
            Verdict::Separable
        };
        (verdict, DecisionPath::CaseII, None, Some(det))
    } else {
        let pqrs = p * q * r * s;
        let bracket = weak_values
            .ratios()
            .bracket(diagonals)
            .expect("all outcomes carry signal when every diagonal is non-zero");
        let verdict = if bracket < -opts.tau_det / pqrs {
            Verdict::Entangled
        } else {
            Verdict::Separable
        };
        (verdict, DecisionPath::General, Some(bracket), Some(bracket * pqrs))
    };

    DetectionReport {
        verdict,
        path,
        det_scaled,
        det_value,
        e_estimate: det_value.map_or(0.0, |d| (-d).max(0.0)),
        diagonals,
        weak_values,
    }
}

/// Rebuilds ρ from weak values and post-selection diagonals.
///
/// Each off-diagonal element is taken from its primary ratio (u/q, z/s, v/r,
/// y/s, w/s, x/r), from the conjugate partner when that is missing, and is
/// zero when neither outcome had signal. Small negative eigenvalues (down to
/// −1e−6) are clipped; anything more negative is reported as inconsistent.
pub fn reconstruct(wv: &WeakValueSet, diagonals: [f64; 4]) -> Result<TwoQubitState, ProtocolError> {
    let sum: f64 = diagonals.iter().sum();
    if diagonals.iter().any(|&d| !(d >= 0.0)) || (sum - 1.0).abs() > DIAGONAL_SUM_TOL {
        return Err(ProtocolError::InvalidDiagonals { sum });
    }
    let [p, q, r, s] = diagonals.map(|d| d / sum);
    let ratios = wv.ratios();
    let element = |primary: Option<ComplexScalar>, den: f64, partner: Option<ComplexScalar>, partner_den: f64| {
        primary
            .map(|ratio| ratio * den)
            .or_else(|| partner.map(|ratio| (ratio * partner_den).conj()))
            .unwrap_or(Complex64::zero())
    };
    let u = element(ratios.u_q, q, ratios.u_star_p, p);
    let z = element(ratios.z_s, s, ratios.z_star_r, r);
    let v = element(ratios.v_r, r, ratios.v_star_p, p);
    let y = element(ratios.y_s, s, ratios.y_star_q, q);
    let w = element(ratios.w_s, s, ratios.w_star_p, p);
    let x = element(ratios.x_r, r, ratios.x_star_q, q);

    let re = |d: f64| c(d, 0.0);
    let m = CMatrix::from_rows(&[
        [re(p), u, v, w],
        [u.conj(), re(q), x, y],
        [v.conj(), x.conj(), re(r), z],
        [w.conj(), y.conj(), z.conj(), re(s)],
    ])?;

    let eig = m.hermitian_eigen()?;
    let min_eigenvalue = eig.min_value();
    if min_eigenvalue < -RECONSTRUCT_PSD_TOL {
        return Err(ProtocolError::Inconsistent { min_eigenvalue });
    }
    if min_eigenvalue < -crate::tolerances::STATE_TOL {
        let clipped: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
        let m = eig.map_spectrum(|l| c(l.max(0.0) / clipped, 0.0));
        return Ok(TwoQubitState::validate(&m)?);
    }
    Ok(TwoQubitState::validate(&m)?)
}

/// Solves the diagonals from the ratio chain and p+q+r+s = 1.
///
/// Each of q/p, r/p, s/p is read from the conjugate pair whose element has
/// the larger magnitude (|A*/d₁| / |A/d₂| = d₂/d₁), directly or through one
/// intermediate diagonal. Fails when a quotient has no supporting element.
pub fn diagonals_from_ratio_chain(wv: &WeakValueSet) -> Result<[f64; 4], ProtocolError> {
    let r = wv.ratios();
    // quotient d₂/d₁ from a pair (A*/d₁, A/d₂), with |A|/d₁ as a strength score
    let quotient = |lhs: Option<ComplexScalar>, rhs: Option<ComplexScalar>| -> Option<(f64, f64)> {
        let (a, b) = (lhs?.norm(), rhs?.norm());
        (a > 0.0 && b > 0.0).then_some((a / b, a.min(b)))
    };
    let best = |cands: &[Option<(f64, f64)>]| -> Option<f64> {
        cands
            .iter()
            .flatten()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|&(v, _)| v)
    };
    let q_p = quotient(r.u_star_p, r.u_q); // u: q/p
    let r_p = quotient(r.v_star_p, r.v_r); // v: r/p
    let s_p = quotient(r.w_star_p, r.w_s); // w: s/p
    let r_q = quotient(r.x_star_q, r.x_r); // x: r/q
    let s_q = quotient(r.y_star_q, r.y_s); // y: s/q
    let s_r = quotient(r.z_star_r, r.z_s); // z: s/r
    let chain = |a: Option<(f64, f64)>, b: Option<(f64, f64)>| Some((a?.0 * b?.0, a?.1.min(b?.1)));

    let q_over_p = best(&[q_p, chain(r_p, r_q.map(|(v, w)| (1.0 / v, w))), chain(s_p, s_q.map(|(v, w)| (1.0 / v, w)))])
        .ok_or(ProtocolError::Underdetermined)?;
    let r_over_p = best(&[r_p, chain(q_p, r_q), chain(s_p, s_r.map(|(v, w)| (1.0 / v, w)))])
        .ok_or(ProtocolError::Underdetermined)?;
    let s_over_p = best(&[s_p, chain(q_p, s_q), chain(r_p, s_r)]).ok_or(ProtocolError::Underdetermined)?;

    let p = 1.0 / (1.0 + q_over_p + r_over_p + s_over_p);
    Ok([p, p * q_over_p, p * r_over_p, p * s_over_p])
}

/// Pure-state variant with the local Hamiltonian I⊗I⊗I⊗σx.
///
/// With every diagonal non-zero the state is separable iff u/q = z/s (read
/// at outcomes 2 and 4). Otherwise the vanishing amplitudes fix |ad − bc|
/// directly from the remaining diagonals.
pub fn detect_pure_local(psi: &PureAmplitudes) -> DetectionReport {
    detect_pure_local_with(psi, &DetectOptions::default())
}

pub fn detect_pure_local_with(psi: &PureAmplitudes, opts: &DetectOptions) -> DetectionReport {
    let rho = psi.density();
    let diagonals = diagonals_from_postselection(&rho);
    let [p, q, r, s] = diagonals;
    let h = WeakHamiltonian::pure_local();
    let weak_values = weak_values_with(&rho, &h, 0.0);
    let dead = |d: f64| d < opts.tau_diag;

    let overlap = if dead(p) || dead(q) || dead(r) || dead(s) {
        // |a| = √p etc.; a known-zero amplitude kills its product
        let ad = if dead(p) || dead(s) { 0.0 } else { (p * s).sqrt() };
        let bc = if dead(q) || dead(r) { 0.0 } else { (q * r).sqrt() };
        if ad == 0.0 {
            bc
        } else {
            ad
        }
    } else {
        let u_q = weak_values.get(2).expect("p, q > 0");
        let z_s = weak_values.get(4).expect("p, s > 0");
        let gap = (u_q - z_s).norm();
        if gap <= opts.tau_wv {
            0.0
        } else {
            // |a/b − c/d|·|b||d| = |ad − bc|
            gap * (q * s).sqrt()
        }
    };
    let verdict = if overlap > opts.tau_wv {
        Verdict::Entangled
    } else {
        Verdict::Separable
    };
    // ρ^{T_B} of a pure state has spectrum {λ₁², λ₂², ±λ₁λ₂}, λ₁λ₂ = |ad − bc|
    let det = -(overlap * overlap) * (overlap * overlap);
    DetectionReport {
        verdict,
        path: DecisionPath::PureLocal,
        det_scaled: None,
        det_value: Some(det),
        e_estimate: -det,
        diagonals,
        weak_values,
    }
}

/// Outcomes whose weak values differ between two sets by more than `tol`.
pub fn disagreements(a: &WeakValueSet, b: &WeakValueSet, tol: f64) -> Vec<u8> {
    OutcomeIndex::all()
        .filter(|k| match (a.get(k.k()), b.get(k.k())) {
            (Some(x), Some(y)) => (x - y).norm() > tol,
            (None, None) => false,
            _ => true,
        })
        .map(|k| k.k())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateSampler;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn k(n: u8) -> OutcomeIndex {
        OutcomeIndex::new(n).unwrap()
    }

    #[test]
    fn hamiltonian_elements() {
        let h = build_hamiltonian();
        let m = h.matrix();
        assert_eq!(m[(0b0001, 0b0000)], c(1.0, 0.0));
        assert_eq!(m[(0b1100, 0b1111)], c(1.0, 0.0));
        assert!(m.matmul(m).unwrap().max_abs_diff(&CMatrix::identity(16)) == 0.0);
        assert!(m.is_hermitian(0.0));
        // block-diagonal in the first copy's basis
        for i in 0..16 {
            for j in 0..16 {
                if i / 4 != j / 4 {
                    assert!(m[(i, j)].is_zero());
                }
            }
        }
    }

    #[test]
    fn local_hamiltonian_is_one_qubit_flip() {
        let h = build_local_hamiltonian();
        assert_eq!(h.kind(), HamiltonianKind::PureLocal);
        let expected = CMatrix::identity(8).kron(&pauli::x());
        assert_eq!(*h.matrix(), expected);
    }

    #[test]
    fn outcome_index_bounds() {
        assert!(OutcomeIndex::new(0).is_err());
        assert!(OutcomeIndex::new(17).is_err());
        assert_eq!(k(16).basis_index(), 15);
        assert!(!k(6).is_informative());
        assert!(k(9).is_informative());
    }

    #[test]
    fn weak_value_examples() {
        let h = build_hamiltonian();
        let w = TwoQubitState::werner(0.5).unwrap();
        let v16 = exact_weak_value(&w, &h, k(16)).unwrap();
        assert!((v16 - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(exact_weak_value(&w, &h, k(1)).unwrap().norm() < 1e-15);

        let bell = TwoQubitState::bell_phi_plus();
        assert!((exact_weak_value(&bell, &h, k(16)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            exact_weak_value(&bell, &h, k(2)),
            Err(ProtocolError::NoSignal { k: 2, .. })
        ));
    }

    #[test]
    fn weak_values_match_ratio_table() {
        let rho = TwoQubitState::random_mixed(21);
        let wv = weak_values_all(&rho);
        let direct = RatioSet::from_state(&rho);
        for (got, want) in wv.ratios().as_array().iter().zip(direct.as_array()) {
            assert!((got.unwrap() - want.unwrap()).norm() < 1e-12);
        }
        for j in 1..=4 {
            assert!((wv.get(j).unwrap() - wv.get(j + 4).unwrap()).norm() < 1e-12);
        }
        let mm = weak_values_all(&TwoQubitState::maximally_mixed());
        for &j in &OutcomeIndex::INFORMATIVE {
            assert_eq!(mm.get(j).unwrap(), Complex64::zero());
        }
    }

    #[test]
    fn postselection_diagonals() {
        let w = TwoQubitState::werner(0.5).unwrap();
        let two = w.two_copy();
        assert!(close(postselection_probability(&two, k(1)), 9.0 / 64.0, 1e-16));
        assert!(close(diagonals_from_postselection(&w)[0], 3.0 / 8.0, 1e-16));
        assert_eq!(diagonals_from_postselection(&TwoQubitState::maximally_mixed()), [0.25; 4]);
        let basis = TwoQubitState::validate(&CMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(diagonals_from_postselection(&basis), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn detect_named_states() {
        let bell = detect(&TwoQubitState::bell_phi_plus());
        assert_eq!(bell.path, DecisionPath::CaseII);
        assert_eq!(bell.verdict, Verdict::Entangled);
        assert!(close(bell.det_value.unwrap(), -1.0 / 16.0, 1e-15));
        assert!(close(bell.e_estimate, 1.0 / 16.0, 1e-15));

        let basis = TwoQubitState::validate(&CMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        let rep = detect(&basis);
        assert_eq!((rep.path, rep.verdict), (DecisionPath::CaseI, Verdict::Separable));

        let w = detect(&TwoQubitState::werner(0.2).unwrap());
        assert_eq!((w.path, w.verdict), (DecisionPath::General, Verdict::Separable));
        let expected = 1.2f64.powi(3) * 0.4 / 256.0;
        assert!(close(w.det_value.unwrap(), expected, 1e-15));
    }

    fn state_from(m: [[ComplexScalar; 4]; 4]) -> TwoQubitState {
        TwoQubitState::validate(&CMatrix::from_rows(&m).unwrap()).unwrap()
    }

    #[test]
    fn case_one_with_vanishing_s_probes_x() {
        // p, q, r > 0, s = 0, x ≠ 0: entangled with det = −|x|²qr
        let z0 = c(0.0, 0.0);
        let x = c(0.1, 0.05);
        let rho = state_from([
            [c(0.2, 0.0), c(0.05, 0.0), c(0.02, 0.01), z0],
            [c(0.05, 0.0), c(0.4, 0.0), x, z0],
            [c(0.02, -0.01), x.conj(), c(0.4, 0.0), z0],
            [z0, z0, z0, z0],
        ]);
        let rep = detect(&rho);
        assert_eq!(rep.path, DecisionPath::CaseI);
        assert_eq!(rep.verdict, rho.ppt_oracle());
        assert!(close(rep.det_value.unwrap(), rho.det_ptb(), 1e-14));

        // same with p = 0, read at the literal outcome 14
        let rho = state_from([
            [z0, z0, z0, z0],
            [z0, c(0.4, 0.0), x, c(0.03, 0.0)],
            [z0, x.conj(), c(0.4, 0.0), c(0.0, 0.02)],
            [z0, c(0.03, 0.0), c(0.0, -0.02), c(0.2, 0.0)],
        ]);
        let rep = detect(&rho);
        assert_eq!((rep.path, rep.verdict), (DecisionPath::CaseI, Verdict::Entangled));
        assert!(close(rep.det_value.unwrap(), rho.det_ptb(), 1e-14));
    }

    #[test]
    fn case_two_separable_when_w_vanishes() {
        let rho = TwoQubitState::validate(&CMatrix::diag_real(&[0.5, 0.0, 0.2, 0.3])).unwrap();
        let rep = detect(&rho);
        assert_eq!((rep.path, rep.verdict), (DecisionPath::CaseII, Verdict::Separable));
    }

    #[test]
    fn bracket_matches_expansion_on_random_states() {
        let mut sampler = StateSampler::new(2);
        for _ in 0..50 {
            let rho = sampler.mixed();
            let d = rho.diagonals();
            let bracket = RatioSet::from_state(&rho).bracket(d).unwrap();
            let pqrs = d.iter().product::<f64>();
            let det = rho.det_ptb();
            assert!(((bracket * pqrs) - det).abs() <= 1e-10 * det.abs().max(1e-6));
        }
    }

    #[test]
    fn reconstruct_examples() {
        let mm = TwoQubitState::maximally_mixed();
        let rec = reconstruct(&weak_values_all(&mm), diagonals_from_postselection(&mm)).unwrap();
        assert_eq!(rec, mm);

        let bell = TwoQubitState::bell_phi_plus();
        let rec = reconstruct(&weak_values_all(&bell), diagonals_from_postselection(&bell)).unwrap();
        assert!(rec.trace_distance(&bell) < 1e-14);
        assert!(close(rec.w().re, 0.5, 1e-15));

        let rho = TwoQubitState::random_mixed(8);
        let rec = reconstruct(&weak_values_all(&rho), diagonals_from_postselection(&rho)).unwrap();
        assert!(rec.trace_distance(&rho) < 1e-8);
    }

    #[test]
    fn reconstruct_rejects_bad_input() {
        let wv = weak_values_all(&TwoQubitState::maximally_mixed());
        assert!(matches!(
            reconstruct(&wv, [0.5, 0.5, 0.5, 0.5]),
            Err(ProtocolError::InvalidDiagonals { .. })
        ));
        assert!(matches!(
            reconstruct(&wv, [1.2, -0.2, 0.0, 0.0]),
            Err(ProtocolError::InvalidDiagonals { .. })
        ));
        // a weak value far too large for its diagonals
        let mut values = [Some(Complex64::zero()); 16];
        values[15] = Some(c(5.0, 0.0));
        let err = reconstruct(&WeakValueSet::from_values(values), [0.25; 4]).unwrap_err();
        assert!(matches!(err, ProtocolError::Inconsistent { .. }));
    }

    #[test]
    fn ratio_chain_agrees_with_postselection() {
        let mut sampler = StateSampler::new(4);
        for _ in 0..50 {
            let rho = sampler.mixed();
            let wv = weak_values_all(&rho);
            let chain = diagonals_from_ratio_chain(&wv).unwrap();
            let post = diagonals_from_postselection(&rho);
            for (a, b) in chain.iter().zip(post) {
                assert!(close(*a, b, 1e-8));
            }
        }
        let mm = weak_values_all(&TwoQubitState::maximally_mixed());
        assert_eq!(diagonals_from_ratio_chain(&mm), Err(ProtocolError::Underdetermined));
    }

    #[test]
    fn pure_local_examples() {
        let rep = detect_pure_local(&PureAmplitudes::phi_plus());
        assert_eq!(rep.verdict, Verdict::Entangled);
        assert!(close(rep.det_value.unwrap(), -1.0 / 16.0, 1e-15));

        let h = core::f64::consts::FRAC_1_SQRT_2;
        let plus_zero = PureAmplitudes::new(c(h, 0.0), c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(detect_pure_local(&plus_zero).verdict, Verdict::Separable);

        let psi = PureAmplitudes::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)).unwrap();
        let rep = detect_pure_local(&psi);
        assert!((rep.weak_values.get(2).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((rep.weak_values.get(4).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(rep.verdict, Verdict::Entangled);
        assert!(close(rep.det_value.unwrap(), psi.density().det_ptb(), 1e-14));
    }

    #[test]
    fn conjugate_consistency_on_full_rank() {
        let rho = TwoQubitState::random_mixed(13);
        let res = weak_values_all(&rho).ratios().conjugate_consistency(rho.diagonals()).unwrap();
        assert!(res < 1e-14);
    }

    #[test]
    fn custom_hamiltonian_checks() {
        assert!(WeakHamiltonian::custom(CMatrix::identity(4)).is_err());
        let mut m = CMatrix::identity(16);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(WeakHamiltonian::custom(m).is_err());
        assert_eq!(
            WeakHamiltonian::custom(CMatrix::identity(16)).unwrap().kind(),
            HamiltonianKind::Custom
        );
    }
}
