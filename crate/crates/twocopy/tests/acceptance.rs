//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p twocopy --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use twocopy::pointer::{estimate_weak_values, PointerExperiment, SimConfig};
use twocopy_core::circuit::{build_interaction_circuit, assemble_unitary, interaction_unitary};
use twocopy_core::protocol::{
    detect, detect_pure_local, diagonals_from_postselection, exact_weak_value, reconstruct, weak_values_all,
    OutcomeIndex, RatioSet, WeakHamiltonian,
};
use twocopy_core::robustness::{bound_check, random_perturbation, weak_value_deviation};
use twocopy_core::states::StateSampler;
use twocopy_core::tolerances::TAU_WV;
use twocopy_core::{CMatrix, PureAmplitudes, TwoQubitState, Verdict};

type Check = (bool, String);

fn mixed_states(seed: u64, n: usize) -> Vec<TwoQubitState> {
    let mut sampler = StateSampler::new(seed);
    (0..n).map(|_| sampler.mixed()).collect()
}

fn verdict_universality() -> Check {
    let states = mixed_states(0, 1000);
    let start = Instant::now();
    let mismatches = states.iter().filter(|rho| detect(rho).verdict != rho.ppt_oracle()).count();
    let secs = start.elapsed().as_secs_f64();
    let entangled = states.iter().filter(|rho| rho.ppt_oracle() == Verdict::Entangled).count();
    (
        mismatches == 0 && secs < 10.0,
        format!("{mismatches} mismatches over 1000 states ({entangled} entangled), {secs:.2}s"),
    )
}

fn expansion_fidelity() -> Check {
    let worst = mixed_states(1, 1000)
        .iter()
        .map(|rho| {
            let lu = rho.det_ptb();
            let expansion = rho.det_ptb_expansion().expect("full rank");
            (expansion - lu).abs() / lu.abs()
        })
        .fold(0.0, f64::max);
    (worst <= 1e-10, format!("max relative difference {worst:.2e}"))
}

fn weak_value_identities() -> Check {
    let mut worst = 0.0f64;
    let mut duplicate_gap = 0.0f64;
    for rho in mixed_states(2, 200) {
        let wv = weak_values_all(&rho);
        let measured = RatioSet::from_weak_values(&wv).as_array();
        let closed = RatioSet::from_state(&rho).as_array();
        for (m, c) in measured.iter().zip(&closed) {
            let (m, c) = (m.expect("full rank"), c.expect("full rank"));
            worst = worst.max((m - c).norm() / c.norm().max(1.0));
        }
        for k in 5..=8u8 {
            let gap = (wv.get(k).unwrap() - wv.get(k - 4).unwrap()).norm();
            duplicate_gap = duplicate_gap.max(gap);
        }
    }
    (
        worst <= 1e-12 && duplicate_gap <= 1e-12,
        format!("max identity error {worst:.2e}, max |⟨H⟩⁽ᵏ⁺⁴⁾ − ⟨H⟩⁽ᵏ⁾| {duplicate_gap:.2e}"),
    )
}

fn tomography_round_trip() -> Check {
    let worst = mixed_states(3, 1000)
        .par_iter()
        .map(|rho| {
            let rec = reconstruct(&weak_values_all(rho), diagonals_from_postselection(rho)).expect("full rank");
            rho.trace_distance(&rec)
        })
        .reduce(|| 0.0, f64::max);

    let mut sampler = StateSampler::new(4);
    let mut diag_worst = 0.0f64;
    for _ in 0..100 {
        let raw: Vec<f64> = (0..4).map(|_| (sampler.next_u64() >> 11) as f64 + 1.0).collect();
        let total: f64 = raw.iter().sum();
        let d: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let rho = TwoQubitState::validate(&CMatrix::diag_real(&d)).unwrap();
        let rec = reconstruct(&weak_values_all(&rho), diagonals_from_postselection(&rho)).unwrap();
        diag_worst = diag_worst.max(rec.matrix().max_abs_diff(rho.matrix()));
    }
    (
        worst <= 1e-8 && diag_worst <= 1e-15,
        format!("max trace distance {worst:.2e}; diagonal states max element error {diag_worst:.2e}"),
    )
}

fn named_states() -> Check {
    let bell = TwoQubitState::bell_phi_plus();
    let det = bell.det_ptb();
    let neg = bell.negativity();
    let below = detect(&TwoQubitState::werner(1.0 / 3.0 - 1e-6).unwrap()).verdict;
    let above = detect(&TwoQubitState::werner(1.0 / 3.0 + 1e-3).unwrap()).verdict;
    let ok = (det + 1.0 / 16.0).abs() <= 1e-12
        && (neg - 0.5).abs() <= 1e-12
        && below == Verdict::Separable
        && above == Verdict::Entangled;
    (
        ok,
        format!(
            "det(ρ_Bell^T_B) = {det:.15}, negativity = {neg:.15}, Werner 1/3−1e−6 → {}, 1/3+1e−3 → {}",
            below.as_str(),
            above.as_str()
        ),
    )
}

fn pointer_convergence() -> Check {
    let cfg = SimConfig::default();
    let half = cfg.with_epsilon(5e-4).unwrap();
    let h = WeakHamiltonian::general();
    let rows: Vec<(f64, f64, f64, f64, usize)> = mixed_states(5, 50)
        .par_iter()
        .map(|rho| {
            let full = estimate_weak_values(rho, &cfg).unwrap();
            let halved = estimate_weak_values(rho, &half).unwrap();
            let (mut max_err, mut min_ratio, mut max_ratio) = (0.0f64, f64::INFINITY, 0.0f64);
            for (a, b) in full.iter().zip(&halved) {
                let exact = exact_weak_value(rho, &h, a.k).unwrap();
                let ea = (a.estimate - exact).norm();
                let eb = (b.estimate - exact).norm();
                max_err = max_err.max(ea);
                min_ratio = min_ratio.min(ea / eb);
                max_ratio = max_ratio.max(ea / eb);
            }
            let zero = PointerExperiment::new(rho, &h, &cfg.uncoupled()).unwrap();
            let prob_err = OutcomeIndex::all()
                .map(|k| (zero.postselect(k).unwrap().probability - zero.exact_probability(k)).abs())
                .fold(0.0, f64::max);
            (max_err, min_ratio, max_ratio, prob_err, full.len())
        })
        .collect();
    let max_err = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_ratio = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let prob_err = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let outcomes: usize = rows.iter().map(|r| r.4).sum();
    let ok = max_err <= 5e-3 && min_ratio >= 1.7 && max_ratio <= 4.3 && prob_err <= 1e-12;
    (
        ok,
        format!(
            "{outcomes} readouts: max error {max_err:.2e} (≤ 5ε = 5e-3), error ratio in [{min_ratio:.3}, {max_ratio:.3}], ε = 0 probability error {prob_err:.2e}"
        ),
    )
}

fn circuit_equivalence() -> Check {
    let h = WeakHamiltonian::general();
    let mut circuit_dev = 0.0f64;
    let mut expm_dev = 0.0f64;
    for eps in [1e-3, 0.1, 1.0] {
        let u = interaction_unitary(eps);
        circuit_dev = circuit_dev.max(assemble_unitary(&build_interaction_circuit(eps)).unwrap().max_abs_diff(&u));
        let expm = h.matrix().expm_hermitian(Complex64::new(0.0, -eps)).unwrap();
        expm_dev = expm_dev.max(expm.max_abs_diff(&u));
    }
    (
        circuit_dev <= 1e-12 && expm_dev <= 1e-12,
        format!("‖circuit − U‖_max = {circuit_dev:.2e}, ‖expm(−iεH) − U‖_max = {expm_dev:.2e}"),
    )
}

fn robustness_bound() -> Check {
    let states = mixed_states(6, 100);
    let mut violations = 0;
    let mut checked = 0;
    let mut tightest = 0.0f64;
    for delta in [1e-3, 1e-2] {
        let reports: Vec<_> = states
            .par_iter()
            .enumerate()
            .map(|(i, rho)| bound_check(rho, delta, 100, 1000 + i as u64).unwrap())
            .collect();
        for r in &reports {
            violations += r.violations;
            checked += r.checked;
            let worst = r.deviations.iter().flatten().fold(0.0f64, |a, &d| a.max(d));
            tightest = tightest.max(worst / r.bound);
        }
    }

    let h = WeakHamiltonian::general();
    let mut linearity = 0.0f64;
    for (i, rho) in states.iter().take(20).enumerate() {
        let p = random_perturbation(1e-2, i as u64).unwrap();
        for factor in [2.0, 0.5, 10.0] {
            let scaled = p.scaled(factor);
            for k in OutcomeIndex::all() {
                let d1 = weak_value_deviation(rho, &h, &p, k).unwrap();
                let d2 = weak_value_deviation(rho, &h, &scaled, k).unwrap();
                linearity = linearity.max((d2 - factor * d1).abs() / (factor * d1));
            }
        }
    }
    (
        violations == 0 && checked == 320_000 && linearity <= 1e-10,
        format!(
            "{violations} violations over {checked} triples (max Δ_k/bound {tightest:.3}), linearity error {linearity:.2e}"
        ),
    )
}

fn pure_local_protocol() -> Check {
    let mut sampler = StateSampler::new(9);
    let mut states: Vec<PureAmplitudes> = (0..1000).map(|_| sampler.pure()).collect();
    for _ in 0..100 {
        let alpha = sampler.qubit();
        let beta = sampler.qubit();
        states.push(PureAmplitudes::product(alpha, beta).unwrap());
    }
    let oracle = |psi: &PureAmplitudes| {
        if psi.concurrence_amplitude().norm() > TAU_WV {
            Verdict::Entangled
        } else {
            Verdict::Separable
        }
    };
    let mismatches = states.iter().filter(|psi| detect_pure_local(psi).verdict != oracle(psi)).count();
    let separable = states.iter().filter(|psi| detect_pure_local(psi).verdict == Verdict::Separable).count();
    (
        mismatches == 0 && separable == 100,
        format!("{mismatches} mismatches over 1100 states ({separable} called Separable)"),
    )
}

fn cli_determinism() -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_twocopy"))
            .args(["benchmark", "--seed", "7"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let doc: serde_json::Value = match serde_json::from_slice(&a.stdout) {
        Ok(v) => v,
        Err(e) => return (false, format!("unparseable output: {e}")),
    };
    let identical = a.stdout == b.stdout;
    let ok = identical
        && a.status.code() == Some(0)
        && doc["agreements"] == 1000
        && doc["max_trace_distance"].as_f64().is_some_and(|d| d <= 1e-8);
    (
        ok,
        format!(
            "byte-identical: {identical}, exit {:?}, agreements {}, max trace distance {}",
            a.status.code(),
            doc["agreements"],
            doc["max_trace_distance"]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("verdict universality", verdict_universality),
        ("determinant expansion fidelity", expansion_fidelity),
        ("weak-value identities", weak_value_identities),
        ("tomography round trip", tomography_round_trip),
        ("named-state values", named_states),
        ("pointer convergence", pointer_convergence),
        ("circuit equivalence", circuit_equivalence),
        ("robustness bound", robustness_bound),
        ("pure-state local protocol", pure_local_protocol),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
