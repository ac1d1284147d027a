//! Gaussian pointer coupled to the two-copy system through exp(−iε H⊗P_x),
//! followed by post-selection on a computational basis state.
//!
//! The evolution is exact: ρ⊗ρ is split into its eigen-ensemble, each pure
//! branch is expanded over the eigenspaces of H, and the pointer is translated
//! by ελ in every eigenspace. Translation happens in the discrete Fourier
//! domain, so it is exact to rounding for pointers whose tails vanish at the
//! grid edge. Weak values are read back from the shifts of ⟨x⟩ and ⟨p⟩.

use std::f64::consts::PI;
use std::io;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;
use twocopy_core::protocol::{postselection_probability, OutcomeIndex, ProtocolError, WeakHamiltonian};
use twocopy_core::tolerances::TAU_DEN;
use twocopy_core::{CMatrix, QmatError, TwoQubitState};

/// Ensemble branches with smaller weight than this are dropped.
const BRANCH_WEIGHT_FLOOR: f64 = 1e-14;
/// Eigenvalues of H closer than this share a translation.
const EIGEN_GROUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointerError {
    #[error("grid needs a power-of-two point count of at least 256, got {0}")]
    BadGridSize(usize),
    #[error("grid half-extent must be positive and finite, got {0}")]
    BadExtent(f64),
    #[error("pointer width must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("coupling must lie in (0, 0.1], got {0}")]
    BadEpsilon(f64),
    #[error("grid half-extent {half_extent} is below 10σ = {}", 10.0 * sigma)]
    GridTooSmall { half_extent: f64, sigma: f64 },
    #[error("outcome {k} has post-selection probability {probability:e}")]
    NoSignal { k: u8, probability: f64 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerGrid {
    n: usize,
    half_extent: f64,
}

impl PointerGrid {
    pub fn new(n: usize, half_extent: f64) -> Result<Self, PointerError> {
        if n < 256 || !n.is_power_of_two() {
            return Err(PointerError::BadGridSize(n));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(PointerError::BadExtent(half_extent));
        }
        Ok(Self { n, half_extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    pub fn position(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.position(j)).collect()
    }

    /// Angular wave numbers in standard DFT order (0, +, …, −).
    pub fn wave_numbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / (self.n as f64 * self.dx());
        let half = self.n / 2;
        (0..self.n)
            .map(|j| if j < half { j as f64 * dk } else { (j as f64 - self.n as f64) * dk })
            .collect()
    }
}

impl Default for PointerGrid {
    fn default() -> Self {
        Self {
            n: 4096,
            half_extent: 40.0,
        }
    }
}

/// Forward/inverse plans plus the wave-number table for one grid.
#[derive(Clone)]
struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl Spectral {
    fn new(grid: &PointerGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
            k: grid.wave_numbers(),
        }
    }

    fn to_momentum(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut buf = psi.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    fn to_position(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut buf = phi.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|a| *a *= scale);
        buf
    }

    /// ψ̃(p)·e^{−ip·shift}, i.e. ψ(x − shift) in momentum space.
    fn translate_momentum(&self, phi: &[Complex64], shift: f64) -> Vec<Complex64> {
        phi.iter()
            .zip(&self.k)
            .map(|(a, &p)| a * Complex64::from_polar(1.0, -p * shift))
            .collect()
    }
}

/// Unnormalised moment sums of one or more pointer branches.
#[derive(Debug, Clone, Copy, Default)]
struct MomentSums {
    norm: f64,
    x: f64,
    x2: f64,
    p: f64,
    p2: f64,
}

impl MomentSums {
    /// `psi` in position space and `phi` its unnormalised DFT.
    fn of(grid: &PointerGrid, k: &[f64], psi: &[Complex64], phi: &[Complex64]) -> Self {
        let dx = grid.dx();
        let mut s = MomentSums::default();
        for (j, a) in psi.iter().enumerate() {
            let w = a.norm_sqr() * dx;
            let x = grid.position(j);
            s.norm += w;
            s.x += w * x;
            s.x2 += w * x * x;
        }
        // Parseval: Σ|ψ̃|² = n·Σ|ψ|²
        let scale = dx / grid.n as f64;
        for (a, &p) in phi.iter().zip(k) {
            let w = a.norm_sqr() * scale;
            s.p += w * p;
            s.p2 += w * p * p;
        }
        s
    }

    fn accumulate(&mut self, other: &MomentSums, weight: f64) {
        self.norm += weight * other.norm;
        self.x += weight * other.x;
        self.x2 += weight * other.x2;
        self.p += weight * other.p;
        self.p2 += weight * other.p2;
    }

    fn normalized(&self) -> PointerMoments {
        let mean_x = self.x / self.norm;
        let mean_p = self.p / self.norm;
        PointerMoments {
            norm: self.norm,
            mean_x,
            var_x: self.x2 / self.norm - mean_x * mean_x,
            mean_p,
            var_p: self.p2 / self.norm - mean_p * mean_p,
        }
    }
}

/// First and second moments of a (possibly mixed) pointer state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerMoments {
    /// Total weight before normalisation.
    pub norm: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerWave {
    grid: PointerGrid,
    amplitudes: Vec<Complex64>,
}

impl PointerWave {
    pub fn from_amplitudes(grid: PointerGrid, amplitudes: Vec<Complex64>) -> Option<Self> {
        (amplitudes.len() == grid.n).then_some(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Σ|ψ_j|²·dx
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalized(&self) -> PointerWave {
        let s = 1.0 / self.norm_sqr().sqrt();
        PointerWave {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
        }
    }

    pub fn moments(&self) -> PointerMoments {
        let spectral = Spectral::new(&self.grid);
        let phi = spectral.to_momentum(&self.amplitudes);
        MomentSums::of(&self.grid, &spectral.k, &self.amplitudes, &phi).normalized()
    }

    /// ψ(x − shift), applied as a phase in momentum space.
    pub fn translated(&self, shift: f64) -> PointerWave {
        let spectral = Spectral::new(&self.grid);
        let phi = spectral.translate_momentum(&spectral.to_momentum(&self.amplitudes), shift);
        PointerWave {
            grid: self.grid,
            amplitudes: spectral.to_position(&phi),
        }
    }

    /// Rows of (x, re ψ, im ψ).
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "re", "im"])?;
        for (j, a) in self.amplitudes.iter().enumerate() {
            w.serialize((self.grid.position(j), a.re, a.im))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// ψ(x) ∝ exp(−x²/(4σ²)), normalised on the grid.
pub fn gaussian_pointer(sigma: f64, grid: PointerGrid) -> Result<PointerWave, PointerError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(PointerError::BadSigma(sigma));
    }
    if grid.half_extent < 10.0 * sigma {
        return Err(PointerError::GridTooSmall {
            half_extent: grid.half_extent,
            sigma,
        });
    }
    let amplitudes = (0..grid.n)
        .map(|j| {
            let x = grid.position(j);
            Complex64::new((-x * x / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .collect();
    Ok(PointerWave { grid, amplitudes }.normalized())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    epsilon: f64,
    sigma: f64,
    grid: PointerGrid,
}

impl SimConfig {
    pub fn new(epsilon: f64, sigma: f64, grid: PointerGrid) -> Result<Self, PointerError> {
        if !(epsilon > 0.0 && epsilon <= 0.1) {
            return Err(PointerError::BadEpsilon(epsilon));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(PointerError::BadSigma(sigma));
        }
        if grid.half_extent < 10.0 * sigma {
            return Err(PointerError::GridTooSmall {
                half_extent: grid.half_extent,
                sigma,
            });
        }
        Ok(Self { epsilon, sigma, grid })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, PointerError> {
        Self::new(epsilon, self.sigma, self.grid)
    }

    /// Same pointer with the coupling switched off; only useful as a
    /// reference run, since nothing can be read out.
    pub fn uncoupled(&self) -> Self {
        Self { epsilon: 0.0, ..*self }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            sigma: 1.0,
            grid: PointerGrid::default(),
        }
    }
}

/// Result of coupling and post-selecting on one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    pub k: OutcomeIndex,
    pub probability: f64,
    /// Moments of the normalised mixed pointer state.
    pub moments: PointerMoments,
    /// Normalised pointer of the heaviest ensemble branch.
    pub wave: PointerWave,
}

/// One eigenspace of H: its projector and the pointer translated by ελ.
struct Eigenbranch {
    projector: CMatrix,
    psi: Vec<Complex64>,
    phi: Vec<Complex64>,
}

/// Precomputed coupling of a fixed state, Hamiltonian and pointer; outcomes
/// can then be post-selected independently.
pub struct PointerExperiment {
    cfg: SimConfig,
    input: PointerMoments,
    ensemble: Vec<(f64, Vec<Complex64>)>,
    eigenbranches: Vec<Eigenbranch>,
    two_copy: CMatrix,
    spectral: Spectral,
}

impl PointerExperiment {
    pub fn new(rho: &TwoQubitState, h: &WeakHamiltonian, cfg: &SimConfig) -> Result<Self, PointerError> {
        let pointer = gaussian_pointer(cfg.sigma, cfg.grid)?;
        let spectral = Spectral::new(&cfg.grid);
        let phi0 = spectral.to_momentum(pointer.amplitudes());
        let input = MomentSums::of(&cfg.grid, &spectral.k, pointer.amplitudes(), &phi0).normalized();

        let two_copy = rho.two_copy();
        let eig = two_copy.hermitian_eigen()?;
        let ensemble = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &mu)| mu > BRANCH_WEIGHT_FLOOR)
            .map(|(i, &mu)| (mu, eig.vector(i)))
            .collect();

        let h_eig = h.matrix().hermitian_eigen()?;
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &lambda) in h_eig.values.iter().enumerate() {
            match groups.last_mut() {
                Some((l, members)) if (lambda - *l).abs() <= EIGEN_GROUP_TOL => members.push(i),
                _ => groups.push((lambda, vec![i])),
            }
        }
        let dim = h.matrix().rows();
        let eigenbranches = groups
            .into_iter()
            .map(|(lambda, members)| {
                let mut projector = CMatrix::zeros(dim, dim);
                for i in members {
                    let v = h_eig.vector(i);
                    projector = projector.add(&CMatrix::outer(&v, &v)).expect("same shape");
                }
                let phi = spectral.translate_momentum(&phi0, cfg.epsilon * lambda);
                let psi = spectral.to_position(&phi);
                Eigenbranch { projector, psi, phi }
            })
            .collect();

        Ok(Self {
            cfg: *cfg,
            input,
            ensemble,
            eigenbranches,
            two_copy,
            spectral,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn input_moments(&self) -> &PointerMoments {
        &self.input
    }

    /// Number of pure components in the eigen-ensemble of ρ⊗ρ.
    pub fn ensemble_size(&self) -> usize {
        self.ensemble.len()
    }

    /// ⟨u_k|ρ⊗ρ|u_k⟩ without any pointer.
    pub fn exact_probability(&self, k: OutcomeIndex) -> f64 {
        postselection_probability(&self.two_copy, k)
    }

    pub fn postselect(&self, k: OutcomeIndex) -> Result<PostSelection, PointerError> {
        let n = self.cfg.grid.n;
        let row = k.basis_index();
        let mut total = MomentSums::default();
        let mut heaviest: Option<(f64, Vec<Complex64>)> = None;
        for (mu, state) in &self.ensemble {
            let coeffs: Vec<Complex64> = self
                .eigenbranches
                .iter()
                .map(|b| b.projector.row(row).iter().zip(state).map(|(a, s)| a * s).sum())
                .collect();
            let mut psi = vec![Complex64::new(0.0, 0.0); n];
            let mut phi = vec![Complex64::new(0.0, 0.0); n];
            for (c, b) in coeffs.iter().zip(&self.eigenbranches) {
                for j in 0..n {
                    psi[j] += c * b.psi[j];
                    phi[j] += c * b.phi[j];
                }
            }
            let sums = MomentSums::of(&self.cfg.grid, &self.spectral.k, &psi, &phi);
            let weight = mu * sums.norm;
            if heaviest.as_ref().is_none_or(|(w, _)| weight > *w) {
                heaviest = Some((weight, psi));
            }
            total.accumulate(&sums, *mu);
        }
        let probability = total.norm;
        if !(probability >= TAU_DEN) {
            return Err(PointerError::NoSignal { k: k.k(), probability });
        }
        let (_, psi) = heaviest.expect("probability > 0 needs a branch");
        let wave = PointerWave {
            grid: self.cfg.grid,
            amplitudes: psi,
        }
        .normalized();
        Ok(PostSelection {
            k,
            probability,
            moments: total.normalized(),
            wave,
        })
    }

    pub fn readout(&self, post: &PostSelection) -> Complex64 {
        readout_weak_value(&self.input, &post.moments, self.cfg.epsilon, self.cfg.sigma)
    }
}

/// Single-outcome convenience wrapper around [`PointerExperiment`].
pub fn evolve_and_postselect(
    rho: &TwoQubitState,
    h: &WeakHamiltonian,
    cfg: &SimConfig,
    k: OutcomeIndex,
) -> Result<PostSelection, PointerError> {
    PointerExperiment::new(rho, h, cfg)?.postselect(k)
}

/// Re A = Δ⟨x⟩/ε, Im A = Δ⟨p⟩/(2ε·Var_in(p)) with Var_in(p) = 1/(4σ²).
pub fn readout_weak_value(input: &PointerMoments, post: &PointerMoments, epsilon: f64, sigma: f64) -> Complex64 {
    let var_p = 1.0 / (4.0 * sigma * sigma);
    Complex64::new(
        (post.mean_x - input.mean_x) / epsilon,
        (post.mean_p - input.mean_p) / (2.0 * epsilon * var_p),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakReadout {
    pub k: OutcomeIndex,
    pub estimate: Complex64,
    pub postselect_prob: f64,
}

/// Pointer estimates of ⟨H⟩^{(k)} for every outcome with signal.
pub fn estimate_weak_values(rho: &TwoQubitState, cfg: &SimConfig) -> Result<Vec<WeakReadout>, PointerError> {
    estimate_with(rho, &WeakHamiltonian::general(), cfg)
}

pub fn estimate_with(rho: &TwoQubitState, h: &WeakHamiltonian, cfg: &SimConfig) -> Result<Vec<WeakReadout>, PointerError> {
    let experiment = PointerExperiment::new(rho, h, cfg)?;
    let outcomes: Vec<OutcomeIndex> = OutcomeIndex::all().collect();
    let results: Vec<Result<PostSelection, PointerError>> =
        outcomes.par_iter().map(|&k| experiment.postselect(k)).collect();
    let mut readouts = Vec::with_capacity(16);
    for r in results {
        match r {
            Ok(post) => readouts.push(WeakReadout {
                k: post.k,
                estimate: experiment.readout(&post),
                postselect_prob: post.probability,
            }),
            Err(PointerError::NoSignal { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(readouts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use twocopy_core::protocol::exact_weak_value;
    use twocopy_core::PureAmplitudes;

    fn k(n: u8) -> OutcomeIndex {
        OutcomeIndex::new(n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PointerGrid::new(128, 40.0).is_err());
        assert!(PointerGrid::new(300, 40.0).is_err());
        assert!(PointerGrid::new(256, 0.0).is_err());
        let g = PointerGrid::new(256, 8.0).unwrap();
        assert_eq!(g.dx(), 0.0625);
        assert_eq!(g.position(128), 0.0);
        assert!(gaussian_pointer(1.0, g).is_err());
        assert!(SimConfig::new(0.2, 1.0, PointerGrid::default()).is_err());
        assert!(SimConfig::new(0.0, 1.0, PointerGrid::default()).is_err());
        assert!(SimConfig::new(1e-3, -1.0, PointerGrid::default()).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let g = PointerGrid::default();
        let w = gaussian_pointer(1.0, g).unwrap();
        assert!((w.norm_sqr() - 1.0).abs() < 1e-12);
        let m = w.moments();
        assert!(m.mean_x.abs() < 1e-12);
        assert!((m.var_x - 1.0).abs() < 1e-8);
        assert!((m.var_p - 0.25).abs() < 1e-6);
        assert!((m.var_x * m.var_p - 0.25).abs() < 1e-6);

        let wide = gaussian_pointer(2.0, g).unwrap().moments();
        assert!((wide.var_p - m.var_p / 4.0).abs() < 1e-6);
    }

    #[test]
    fn translation_is_exact() {
        let w = gaussian_pointer(1.0, PointerGrid::default()).unwrap();
        for shift in [1e-3, 0.37, -2.5] {
            let m = w.translated(shift).moments();
            assert!((m.mean_x - shift).abs() < 1e-10, "shift {shift}");
            assert!((m.var_x - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uncoupled_run_is_exact() {
        let rho = TwoQubitState::random_mixed(3);
        let cfg = SimConfig::default().uncoupled();
        let exp = PointerExperiment::new(&rho, &WeakHamiltonian::general(), &cfg).unwrap();
        for kk in OutcomeIndex::all() {
            let post = exp.postselect(kk).unwrap();
            assert!((post.probability - exp.exact_probability(kk)).abs() < 1e-12);
            assert!(post.moments.mean_x.abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let rho = TwoQubitState::random_mixed(4);
        let cfg = SimConfig::new(0.1, 1.0, PointerGrid::default()).unwrap();
        let exp = PointerExperiment::new(&rho, &WeakHamiltonian::general(), &cfg).unwrap();
        let total: f64 = OutcomeIndex::all().map(|kk| exp.postselect(kk).unwrap().probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_shift() {
        let rho = TwoQubitState::bell_phi_plus();
        let cfg = SimConfig::default();
        let exp = PointerExperiment::new(&rho, &WeakHamiltonian::general(), &cfg).unwrap();
        let post = exp.postselect(k(16)).unwrap();
        assert!((post.moments.mean_x - 1e-3).abs() < 1e-8);
        let est = exp.readout(&post);
        assert!((est - Complex64::new(1.0, 0.0)).norm() < 1e-3);
        assert!(est.im.abs() < 1e-6);
    }

    #[test]
    fn imaginary_weak_value_moves_momentum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = Complex64::new(0.0, 0.0);
        let psi = PureAmplitudes::new(Complex64::new(s, 0.0), zero, zero, Complex64::new(0.0, s)).unwrap();
        let rho = psi.density();
        let exact = exact_weak_value(&rho, &WeakHamiltonian::general(), k(16)).unwrap();
        assert!((exact - Complex64::new(0.0, -1.0)).norm() < 1e-12);

        let cfg = SimConfig::default();
        let exp = PointerExperiment::new(&rho, &WeakHamiltonian::general(), &cfg).unwrap();
        assert_eq!(exp.ensemble_size(), 1);
        let post = exp.postselect(k(16)).unwrap();
        let dp = post.moments.mean_p - exp.input_moments().mean_p;
        // Δ⟨p⟩ = 2ε·Var(p)·Im A with Im A = −1
        assert!((dp + 2.0 * 1e-3 * 0.25).abs() < 1e-8);
        let est = exp.readout(&post);
        assert!(est.re.abs() < 1e-6);
        assert!((est.im + 1.0).abs() < 1e-3);
    }

    #[test]
    fn werner_estimate() {
        let rho = TwoQubitState::werner(0.5).unwrap();
        let readouts = estimate_weak_values(&rho, &SimConfig::default()).unwrap();
        assert_eq!(readouts.len(), 16);
        let r16 = readouts.iter().find(|r| r.k.k() == 16).unwrap();
        assert!((r16.estimate - Complex64::new(2.0 / 3.0, 0.0)).norm() < 5e-3);
    }

    #[test]
    fn maximally_mixed_reads_zero() {
        let readouts = estimate_weak_values(&TwoQubitState::maximally_mixed(), &SimConfig::default()).unwrap();
        for r in readouts.iter().filter(|r| r.k.is_informative()) {
            assert!(r.estimate.norm() < 1e-6, "k = {}", r.k.k());
        }
    }

    #[test]
    fn halving_epsilon_shrinks_error() {
        let rho = TwoQubitState::random_mixed(11);
        let h = WeakHamiltonian::general();
        let cfg = SimConfig::default();
        let half = cfg.with_epsilon(5e-4).unwrap();
        let a = estimate_weak_values(&rho, &cfg).unwrap();
        let b = estimate_weak_values(&rho, &half).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            let exact = exact_weak_value(&rho, &h, ra.k).unwrap();
            let ea = (ra.estimate - exact).norm();
            let eb = (rb.estimate - exact).norm();
            assert!(ea <= 5e-3);
            let ratio = ea / eb;
            assert!((1.7..=4.3).contains(&ratio), "k = {} ratio {ratio}", ra.k.k());
        }
    }

    #[test]
    fn csv_dump() {
        let g = PointerGrid::new(256, 12.0).unwrap();
        let w = gaussian_pointer(1.0, g).unwrap();
        let mut out = Vec::new();
        w.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 257);
        assert!(text.starts_with("x,re,im\n-12.0,"));
    }
}
