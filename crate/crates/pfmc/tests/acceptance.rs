//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line with its runtime. Tolerances and budgets are pinned in code.
//!
//! Run with `cargo test -p pfmc --test acceptance -- --nocapture`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use pfmc_core::apsg::{psi4_product, ApsgBlock, ApsgState};
use pfmc_core::estimators::{
    charge_phase_decomposition, estimate_apsg_overlap, estimate_binned_distribution,
    estimate_extent_overlap, estimate_fock_overlap, estimate_hs_parity, estimate_marginal,
    estimate_transition_correlator, estimate_wilson_loop, hamiltonian_transition_element,
    one_shot_fock, transition_rdm_element, CircuitElement, RdmIndices, SquaredFactor,
};
use pfmc_core::fock::FockState;
use pfmc_core::gaussian::GaussianMap;
use pfmc_core::hubbard::{
    build_initial_state, hs_complexity_envelope, wilson_sample_complexity, QuenchConfig,
};
use pfmc_core::lattice::{hopping_evolution, LatticeSpec};
use pfmc_core::oracle::{
    expectation_on_statevector, gaussian_on_apsg, oracle_amplitude, OracleObservable,
};
use pfmc_core::pfaffian::{pfaffian, SkewMatrix};
use pfmc_core::rng::derive_seed;
use pfmc_core::sampling::{hoeffding_samples, Executor, Sequential};
use pfmc_core::wedge::wedge_top_coefficient_oracle;
use pfmc_core::{C64, CMatrix};

use pfmc::exec::RayonExecutor;

fn pass(criterion: u32, label: &str, started: Instant) {
    println!(
        "ACCEPTANCE {criterion} PASS — {label} [{:.2}s]",
        started.elapsed().as_secs_f64()
    );
}

fn budget(criterion: u32, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < limit_s,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.1}s > {limit_s}s"
    );
}

fn random_skew(dim: usize, rng: &mut impl Rng) -> SkewMatrix {
    let mut entries = Vec::new();
    for p in 0..dim {
        for q in (p + 1)..dim {
            entries.push((
                p,
                q,
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            ));
        }
    }
    SkewMatrix::from_upper(dim, &entries).unwrap()
}

fn random_mat(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

fn random_unitary(m: usize, rng: &mut impl Rng) -> GaussianMap {
    let mut h = CMatrix::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = Complex64::new(rng.gen::<f64>() - 0.5, 0.0);
        for j in (i + 1)..m {
            let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    GaussianMap::expm_hermitian(&h, Complex64::new(0.0, -1.0)).unwrap()
}

fn random_apsg(m: usize, blocks: usize, rng: &mut impl Rng) -> ApsgState {
    let mut modes: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        modes.swap(i, j);
    }
    let mut cursor = 0;
    let mut out = Vec::new();
    for b in 0..blocks {
        let slots_left = blocks - b;
        let max_r = ((m - cursor) / 2 - (slots_left - 1)).min(2).max(1);
        let r = rng.gen_range(1..=max_r);
        let block_modes = modes[cursor..cursor + 2 * r].to_vec();
        cursor += 2 * r;
        let raw: Vec<C64> = (0..r)
            .map(|_| Complex64::new(rng.gen::<f64>() + 0.2, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = raw.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        out.push(ApsgBlock::new(block_modes, raw.into_iter().map(|w| w / norm).collect()).unwrap());
    }
    ApsgState::new(m, out).unwrap()
}

fn random_fock(m: usize, particles: usize, rng: &mut impl Rng) -> FockState {
    let mut modes: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        modes.swap(i, j);
    }
    FockState::new(m, &modes[..particles]).unwrap()
}

/// γ · mean over all 2^N signs of the one-shot.
fn exact_filter(g: &GaussianMap, psi: &ApsgState, x: &FockState) -> C64 {
    let n = psi.num_blocks();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut b = vec![1i8; n];
    for bits in 0u64..(1 << n) {
        for (t, s) in b.iter_mut().enumerate() {
            *s = if bits >> t & 1 == 0 { 1 } else { -1 };
        }
        acc += one_shot_fock(g, psi, x, &b).unwrap();
    }
    acc * psi.gamma() / (1u64 << n) as f64
}

#[test]
fn acceptance_01_pfaffian_suite() {
    let started = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    for rep in 0..500 {
        let dim = 2 * (1 + rep % 6); // 2..12
        let a = random_skew(dim, &mut rng);
        let pf = pfaffian(&a);
        let det = a.matrix().clone().determinant();
        assert!(
            (pf * pf - det).norm() <= 1e-9 * det.norm().max(1.0),
            "rep {rep}: pf² = {} vs det = {det}",
            pf * pf
        );
        let x = random_mat(dim, &mut rng);
        let lhs = pfaffian(&a.congruence(&x).unwrap());
        let rhs = x.clone().determinant() * pf;
        assert!(
            (lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0),
            "rep {rep}: congruence {lhs} vs {rhs}"
        );
    }
    budget(1, started, 5.0);
    pass(1, "pf² = det and congruence identity on 500 random skew matrices", started);
}

#[test]
fn acceptance_02_pfaffian_wedge_identity() {
    let started = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2);
    for n in 1..=4usize {
        for _ in 0..5 {
            let a = random_skew(2 * n, &mut rng);
            let forms: Vec<SkewMatrix> = (0..n).map(|_| a.clone()).collect();
            let top = wedge_top_coefficient_oracle(&forms).unwrap();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let lhs = top / fact;
            let rhs = pfaffian(&a);
            assert!(
                (lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0),
                "N={n}: (1/N!)[α(A)^∧N] = {lhs} vs pf = {rhs}"
            );
        }
    }
    budget(2, started, 5.0);
    pass(2, "(1/N!)[α(A)^∧N]_vol = pf(A) for N ≤ 4", started);
}

#[test]
fn acceptance_03_exact_filter_equivalence() {
    let started = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for instance in 0..50 {
        let blocks = 1 + instance % 6; // N ≤ 6
        let m = (2 * blocks + 4).min(16);
        let psi = random_apsg(m, blocks, &mut rng);
        let x = random_fock(m, psi.particle_number(), &mut rng);
        let unitary = random_unitary(m, &mut rng);
        let general = GaussianMap::general(random_mat(m, &mut rng)).unwrap();
        for g in [&unitary, &general] {
            let filtered = exact_filter(g, &psi, &x);
            let exact = oracle_amplitude(&x, g, &psi).unwrap();
            assert!(
                (filtered - exact).norm() <= 1e-10,
                "instance {instance} (unitary={}): {filtered} vs {exact}",
                g.is_unitary()
            );
        }
    }
    budget(3, started, 60.0);
    pass(3, "sign filter ≡ oracle amplitude on 50 instances, N ≤ 6, M ≤ 16", started);
}

#[test]
fn acceptance_04_pointwise_and_variance_bounds() {
    let started = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    for instance in 0..10 {
        let blocks = 1 + instance % 4; // N ≤ 4
        let m = 4 * blocks;
        let psi = random_apsg(m, blocks, &mut rng);
        let phi = random_apsg(m, blocks, &mut rng);
        let g = if instance % 2 == 0 {
            random_unitary(m, &mut rng)
        } else {
            GaussianMap::general(random_mat(m, &mut rng)).unwrap()
        };
        let two_n = psi.particle_number();
        let n = psi.num_blocks();
        let x = random_fock(m, two_n, &mut rng);
        let pointwise = g.op_norm().powi(two_n as i32);
        let mut b = vec![1i8; n];
        for bits in 0u64..(1 << n) {
            for (t, s) in b.iter_mut().enumerate() {
                *s = if bits >> t & 1 == 0 { 1 } else { -1 };
            }
            let z = one_shot_fock(&g, &psi, &x, &b).unwrap();
            assert!(
                z.norm() <= pointwise + 1e-9,
                "instance {instance}: |Z| = {} > {pointwise}",
                z.norm()
            );
        }
        // second moment: sum over all bra patterns at fixed signs
        let second = g.op_norm().powi(2 * two_n as i32);
        for bits in 0u64..(1 << n) {
            let mut w = CMatrix::zeros(m, m);
            for t in 0..n {
                let s = if bits >> t & 1 == 0 { 1.0 } else { -1.0 };
                w += psi.two_form(t).matrix() * Complex64::new(s, 0.0);
            }
            let w = SkewMatrix::new(w).unwrap();
            let mut choice = vec![0usize; phi.num_blocks()];
            let mut total = 0.0f64;
            loop {
                let mut rows: Vec<usize> = Vec::new();
                for (t, block) in phi.blocks().iter().enumerate() {
                    let (a, b2) = block.slot_modes(choice[t]);
                    rows.push(a);
                    rows.push(b2);
                }
                rows.sort_unstable();
                let x_mat = CMatrix::from_fn(m, rows.len(), |r, c| g.matrix()[(rows[c], r)]);
                total += pfaffian(&w.congruence(&x_mat).unwrap()).norm_sqr();
                let mut t = 0;
                loop {
                    if t == choice.len() {
                        break;
                    }
                    choice[t] += 1;
                    if choice[t] < phi.blocks()[t].num_slots() {
                        break;
                    }
                    choice[t] = 0;
                    t += 1;
                }
                if t == choice.len() {
                    break;
                }
            }
            assert!(
                total <= second + 1e-9,
                "instance {instance}: second moment {total} > {second}"
            );
        }
    }
    budget(4, started, 60.0);
    pass(4, "pointwise |Z| ≤ ‖G‖^{2N} and Σ_x |pf|² ≤ ‖G‖^{4N} by enumeration", started);
}

struct Calibration<'a> {
    name: &'a str,
    runs: u32,
    failures: u32,
}

impl Calibration<'_> {
    fn record(&mut self, ok: bool) {
        self.runs += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self) {
        assert!(
            self.failures * 10 <= self.runs,
            "{}: {}/{} failures exceeds the 0.10 budget",
            self.name,
            self.failures,
            self.runs
        );
        println!(
            "  calibration {}: {}/{} failures",
            self.name, self.failures, self.runs
        );
    }
}

#[test]
fn acceptance_05_monte_carlo_calibration() {
    let started = Instant::now();
    let (eps, delta) = (0.05f64, 0.05f64);
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(2);
    let exec = RayonExecutor::new(threads).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);

    // --- fixed-output overlap on Ψ₄⊗Ψ₄ under a random unitary ---
    {
        let psi = psi4_product(2).unwrap();
        let u = random_unitary(8, &mut rng);
        let x = random_fock(8, 4, &mut rng);
        let exact = oracle_amplitude(&x, &u, &psi).unwrap();
        let mut cal = Calibration { name: "fock_overlap", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = estimate_fock_overlap(&u, &psi, &x, eps, delta, 50_000 + rep, &exec).unwrap();
            cal.record((est.value - exact).norm() <= eps * est.scale);
        }
        cal.finish();
    }

    // --- APSG overlap on random two-block states ---
    {
        let phi = random_apsg(8, 2, &mut rng);
        let psi = random_apsg(8, 2, &mut rng);
        let u = random_unitary(8, &mut rng);
        let exact = gaussian_on_apsg(&GaussianMap::identity(8), &phi)
            .unwrap()
            .inner(&gaussian_on_apsg(&u, &psi).unwrap());
        let mut cal = Calibration { name: "apsg_overlap", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = estimate_apsg_overlap(&u, &phi, &psi, eps, delta, 51_000 + rep, &exec).unwrap();
            cal.record((est.value - exact).norm() <= eps * est.scale);
        }
        cal.finish();
    }

    // --- transition number correlator, |S| = 5 on 12 modes ---
    {
        let psi = psi4_product(3).unwrap();
        let u = random_unitary(12, &mut rng);
        let subset = [0usize, 3, 5, 8, 10];
        let exact =
            pfmc_core::oracle::oracle_expectation(&OracleObservable::NumberProduct(subset.to_vec()), &u, &psi)
                .unwrap();
        let mut cal = Calibration { name: "correlator", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = estimate_transition_correlator(
                &u, &u, &psi, &psi, &subset, eps, delta, 52_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value - exact).norm() <= eps * est.scale);
        }
        cal.finish();
    }

    // --- marginal probability, |S| = 3 ---
    {
        let psi = psi4_product(2).unwrap();
        let u = random_unitary(8, &mut rng);
        let subset = [0usize, 2, 5];
        let pattern = [true, false, true];
        let sv = gaussian_on_apsg(&u, &psi).unwrap();
        let mut exact = 0.0f64;
        for (s, amp) in sv.amplitudes().iter().enumerate() {
            if subset
                .iter()
                .zip(&pattern)
                .all(|(&m, &a)| ((s >> m) & 1 == 1) == a)
            {
                exact += amp.norm_sqr();
            }
        }
        let mut cal = Calibration { name: "marginal", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = estimate_marginal(
                &u, &psi, &subset, &pattern, eps, delta, 53_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value.re - exact).abs() <= eps);
        }
        cal.finish();
    }

    // --- binned distribution on 4 modes ---
    {
        let psi = psi4_product(1).unwrap();
        let u = random_unitary(4, &mut rng);
        let omega = [1u32, 1, 2, 0];
        let sv = gaussian_on_apsg(&u, &psi).unwrap();
        let omega_max: usize = omega.iter().map(|&w| w as usize).sum();
        let mut hist = vec![0.0f64; omega_max + 1];
        for (s, amp) in sv.amplitudes().iter().enumerate() {
            let big: usize = omega
                .iter()
                .enumerate()
                .map(|(m, &w)| if s >> m & 1 == 1 { w as usize } else { 0 })
                .sum();
            hist[big] += amp.norm_sqr();
        }
        let mut cal = Calibration { name: "binned", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let out =
                estimate_binned_distribution(&u, &psi, &omega, eps, delta, 54_000 + rep, &exec)
                    .unwrap();
            let ok = out
                .bins
                .iter()
                .zip(&hist)
                .all(|(est, exact)| (est - exact).abs() <= eps);
            cal.record(ok);
        }
        cal.finish();
    }

    // --- transition RDM elements ---
    {
        let psi = psi4_product(1).unwrap();
        let u = random_unitary(4, &mut rng);
        let sv = gaussian_on_apsg(&u, &psi).unwrap();
        let exact1 = sv
            .annihilation_applied(0)
            .inner(&sv.annihilation_applied(2));
        let mut cal = Calibration { name: "rdm_one", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = transition_rdm_element(
                &u, &u, &psi, &psi, RdmIndices::One(0, 2), eps, delta, 55_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value - exact1).norm() <= eps + est.bias);
        }
        cal.finish();

        let exact2 = sv
            .annihilation_applied(0)
            .annihilation_applied(1)
            .inner(&sv.annihilation_applied(2).annihilation_applied(3));
        let mut cal = Calibration { name: "rdm_two", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = transition_rdm_element(
                &u, &u, &psi, &psi, RdmIndices::Two(0, 1, 2, 3), eps, delta, 56_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value - exact2).norm() <= eps + est.bias);
        }
        cal.finish();
    }

    // --- Hamiltonian transition element on the 2-site chain ---
    {
        let lat = LatticeSpec::grid(2, 1).unwrap();
        let psi = psi4_product(1).unwrap();
        let u = random_unitary(4, &mut rng);
        let e0 = 0.3;
        let h1 = lat.hopping_matrix(0.5);
        let mut l_mat = CMatrix::zeros(4, 4);
        l_mat[(0, 0)] = Complex64::new(0.25, 0.0);
        l_mat[(2, 2)] = Complex64::new(0.25, 0.0);
        let factors = vec![SquaredFactor { lambda: 1.0, matrix: l_mat.clone() }];
        let sv = gaussian_on_apsg(&u, &psi).unwrap();
        let exact = {
            let mut v = sv.inner(&sv) * e0;
            v += sv.inner(&sv.one_body_applied(&h1));
            let once = sv.one_body_applied(&l_mat);
            v += sv.inner(&once.one_body_applied(&l_mat)) * 0.5;
            v
        };
        let mut cal = Calibration { name: "hamiltonian_element", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = hamiltonian_transition_element(
                &u, &u, &psi, &psi, e0, Some(&h1), &factors, eps, delta, 57_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value - exact).norm() <= eps + est.bias);
        }
        cal.finish();
    }

    // --- Wilson loop on the 2×2 lattice ---
    {
        let cfg = QuenchConfig {
            lattice: LatticeSpec::grid(2, 2).unwrap(),
            dimers: vec![(0, 1), (2, 3)],
            holons: vec![],
            doublons: vec![],
            j: 1.0,
            w: 0.0,
            times: vec![],
            trotter_k: 1,
        };
        let psi = build_initial_state(&cfg).unwrap();
        let u = hopping_evolution(&cfg.lattice, 1.0, 0.6).unwrap();
        let pairs: Vec<(usize, usize)> = (0..4)
            .map(|s| (cfg.lattice.mode_up(s), cfg.lattice.mode_down(s)))
            .collect();
        let exact = pfmc_core::oracle::oracle_expectation(
            &OracleObservable::DoublonFreeString(pairs),
            &u,
            &psi,
        )
        .unwrap();
        let mut cal = Calibration { name: "wilson", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = estimate_wilson_loop(
                &u, &psi, &cfg.lattice, &[0, 1, 3, 2], eps, delta, 58_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value - exact).norm() <= eps);
        }
        cal.finish();
    }

    // --- Hubbard–Stratonovich parity at W = 1 ---
    {
        let cfg = QuenchConfig {
            lattice: LatticeSpec::grid(2, 1).unwrap(),
            dimers: vec![(0, 1)],
            holons: vec![],
            doublons: vec![],
            j: 1.0,
            w: 1.0,
            times: vec![],
            trotter_k: 2,
        };
        let psi = build_initial_state(&cfg).unwrap();
        let subset = [0usize, 1];
        let (dt, n) = (0.25f64, 2usize);
        let exact = {
            let mut sv = pfmc_core::oracle::apsg_to_statevector(&psi).unwrap();
            let u_half = hopping_evolution(&cfg.lattice, cfg.j, dt / 2.0).unwrap();
            for _ in 0..n {
                sv.apply_unitary(&u_half).unwrap();
                sv.apply_fock_diagonal(&|s| {
                    let mut d = 0u32;
                    for site in 0..2 {
                        if s & (1 << site) != 0 && s & (1 << (2 + site)) != 0 {
                            d += 1;
                        }
                    }
                    Complex64::new(0.0, -dt * cfg.w * d as f64).exp()
                });
                sv.apply_unitary(&u_half).unwrap();
            }
            expectation_on_statevector(&OracleObservable::Parity(subset.to_vec()), &sv).unwrap()
        };
        let mut cal = Calibration { name: "hs_parity", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est = estimate_hs_parity(
                &cfg.lattice, cfg.j, cfg.w, dt, n, &psi, &subset, eps, delta, 59_000 + rep, &exec,
            )
            .unwrap();
            cal.record((est.value - exact).norm() <= eps);
        }
        cal.finish();
    }

    // --- extent-based circuit estimator ---
    {
        let psi = psi4_product(1).unwrap();
        let g1 = random_unitary(4, &mut rng);
        let g2 = random_unitary(4, &mut rng);
        let theta = std::f64::consts::PI / 8.0;
        let circuit = [
            CircuitElement::Gaussian(g1.clone()),
            CircuitElement::PhaseGate { i: 0, j: 1, theta },
            CircuitElement::Gaussian(g2.clone()),
        ];
        let exact = {
            let mut sv = pfmc_core::oracle::apsg_to_statevector(&psi).unwrap();
            sv.apply_unitary(&g1).unwrap();
            sv.apply_fock_diagonal(&|s| {
                let parity = ((s & 1) ^ ((s >> 1) & 1)) as u32;
                if parity == 0 {
                    Complex64::new(0.0, theta).exp()
                } else {
                    Complex64::new(0.0, -theta).exp()
                }
            });
            sv.apply_unitary(&g2).unwrap();
            pfmc_core::oracle::apsg_to_statevector(&psi).unwrap().inner(&sv)
        };
        let mut cal = Calibration { name: "extent", runs: 0, failures: 0 };
        for rep in 0..100u64 {
            let est =
                estimate_extent_overlap(&circuit, &psi, &psi, eps, delta, 60_000 + rep, &exec)
                    .unwrap();
            cal.record((est.value - exact).norm() <= eps);
        }
        cal.finish();
    }

    budget(5, started, 600.0);
    pass(5, "100-run calibration at ε=δ=0.05 for every estimator", started);
}

#[test]
fn acceptance_06_charge_phase_and_wilson_enumeration() {
    let started = Instant::now();
    assert!((charge_phase_decomposition(0) - 1.0).abs() <= 1e-14);
    assert!((charge_phase_decomposition(1) - 1.0).abs() <= 1e-14);
    assert!(charge_phase_decomposition(2).abs() <= 1e-14);

    // exact σ-enumeration of the charge-phase Wilson estimator on 2×2
    let cfg = QuenchConfig {
        lattice: LatticeSpec::grid(2, 2).unwrap(),
        dimers: vec![(0, 1), (2, 3)],
        holons: vec![],
        doublons: vec![],
        j: 1.0,
        w: 0.0,
        times: vec![],
        trotter_k: 1,
    };
    let psi = build_initial_state(&cfg).unwrap();
    let u = hopping_evolution(&cfg.lattice, 1.0, 0.45).unwrap();
    let contour = [0usize, 1, 3, 2];
    let site_modes: Vec<(usize, usize)> = contour
        .iter()
        .map(|&s| (cfg.lattice.mode_up(s), cfg.lattice.mode_down(s)))
        .collect();
    let sv = gaussian_on_apsg(&u, &psi).unwrap();
    let prefactor = (2.0 / 3.0f64.sqrt()).powi(4);
    let mut acc = Complex64::new(0.0, 0.0);
    for bits in 0u64..16 {
        let mut diag = vec![Complex64::new(1.0, 0.0); 8];
        let mut sigma_sum = 0.0f64;
        for (pos, &(up, down)) in site_modes.iter().enumerate() {
            let sigma = if bits >> pos & 1 == 0 { 1.0 } else { -1.0 };
            sigma_sum += sigma;
            let phase = sigma * std::f64::consts::FRAC_PI_3;
            diag[up] = Complex64::new(phase.cos(), phase.sin());
            diag[down] = diag[up];
        }
        let mu = sv.expectation_mode_diagonal(&diag);
        let phase = -sigma_sum * std::f64::consts::FRAC_PI_6;
        acc += Complex64::new(phase.cos(), phase.sin()) * mu * prefactor / 16.0;
    }
    let exact = pfmc_core::oracle::oracle_expectation(
        &OracleObservable::DoublonFreeString(site_modes),
        &u,
        &psi,
    )
    .unwrap();
    assert!(
        (acc - exact).norm() <= 1e-10,
        "σ-enumeration {acc} vs oracle {exact}"
    );
    budget(6, started, 60.0);
    pass(6, "charge-phase values (1,1,0) and 2×2 Wilson σ-enumeration ≡ oracle", started);
}

#[test]
fn acceptance_07_wilson_sample_complexity_calibration() {
    let started = Instant::now();
    let w22 = wilson_sample_complexity(22, 0.01, 0.01).unwrap();
    assert!(
        (w22.calibrated - 1e3).abs() < 1e-9,
        "calibrated(22) = {}",
        w22.calibrated
    );
    for (len, target) in [(54usize, 1e7), (62, 1e8), (70, 1e9)] {
        let w = wilson_sample_complexity(len, 0.01, 0.01).unwrap();
        assert!(
            w.calibrated > target / 2.0 && w.calibrated < target * 2.0,
            "calibrated({len}) = {} not within factor 2 of {target}",
            w.calibrated
        );
    }
    // Hoeffding form at unit prefactor
    assert_eq!(hoeffding_samples(1.0, 0.01, 0.01), 105_967);
    budget(7, started, 5.0);
    pass(7, "Wilson sample-complexity heuristic: 10³ at |C|=22, ~10⁷/10⁸/10⁹ at 54/62/70", started);
}

#[test]
fn acceptance_08_hoeffding_budget_and_envelope() {
    let started = Instant::now();
    assert_eq!(hoeffding_samples(1.0, 0.01, 0.01), 105_967);
    let env = hs_complexity_envelope(0.0, 2.0, 0.5, 6, 3, 1.0, 0.01, 0.01).unwrap();
    assert_eq!(env.a, 0.0);
    assert_eq!(env.b_typ, 1.0);
    assert_eq!(env.b_worst, 1.0);
    assert_eq!(env.k_worst, 105_967);
    budget(8, started, 5.0);
    pass(8, "K(1, 0.01, 0.01) = 105967 and W=0 envelope (a=0, B_typ=1)", started);
}

#[test]
fn acceptance_09_quench_suite_oracle_agreement() {
    let started = Instant::now();
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/quench_2x3.json"
    ))
    .unwrap();
    let cfg = pfmc::config::ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(cfg.budget.eps, 0.02);
    assert_eq!(cfg.budget.delta, 0.01);
    // single-threaded by criterion
    let run = pfmc::runner::run_experiment(&cfg, &Sequential).unwrap();
    let oracle = pfmc::runner::run_oracle(&cfg).unwrap();
    assert_eq!(run.rows.len(), oracle.rows.len());
    assert_eq!(run.rows.len(), 4 * 5); // 4 diagnostics × 5 time points
    for (mc, exact) in run.rows.iter().zip(&oracle.rows) {
        assert_eq!(mc.observable, exact.observable);
        let err = (mc.value - exact.value).norm();
        assert!(
            err <= 0.02,
            "{} {:?}: {} vs {} (err {err:.4})",
            mc.observable,
            mc.params,
            mc.value,
            exact.value
        );
    }
    budget(9, started, 900.0);
    pass(9, "2×3 quench suite (N_d, C_zz, triplets, Wilson × 5 times) within ε=0.02 of the oracle", started);
}

#[test]
fn acceptance_10_hs_and_extent_estimators() {
    let started = Instant::now();
    let exec = RayonExecutor::new(
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2),
    )
    .unwrap();
    // 2-site Hubbard, W = 4, Strang k = 2
    let cfg = QuenchConfig {
        lattice: LatticeSpec::grid(2, 1).unwrap(),
        dimers: vec![(0, 1)],
        holons: vec![],
        doublons: vec![],
        j: 1.0,
        w: 4.0,
        times: vec![],
        trotter_k: 2,
    };
    let psi = build_initial_state(&cfg).unwrap();
    let (dt, n) = (0.25f64, 2usize);
    let subset = [0usize, 1];
    let exact = {
        let mut sv = pfmc_core::oracle::apsg_to_statevector(&psi).unwrap();
        let u_half = hopping_evolution(&cfg.lattice, cfg.j, dt / 2.0).unwrap();
        for _ in 0..n {
            sv.apply_unitary(&u_half).unwrap();
            sv.apply_fock_diagonal(&|s| {
                let mut d = 0u32;
                for site in 0..2 {
                    if s & (1 << site) != 0 && s & (1 << (2 + site)) != 0 {
                        d += 1;
                    }
                }
                Complex64::new(0.0, -dt * cfg.w * d as f64).exp()
            });
            sv.apply_unitary(&u_half).unwrap();
        }
        expectation_on_statevector(&OracleObservable::Parity(subset.to_vec()), &sv).unwrap()
    };
    let est = estimate_hs_parity(
        &cfg.lattice,
        cfg.j,
        cfg.w,
        dt,
        n,
        &psi,
        &subset,
        0.05,
        0.05,
        424_242,
        &exec,
    )
    .unwrap();
    assert!(
        (est.value - exact).norm() <= 0.05,
        "hs_parity {} vs {exact}",
        est.value
    );

    // extent estimator with one θ = π/8 gate
    let mut rng = rand::rngs::StdRng::seed_from_u64(10);
    let psi4 = psi4_product(1).unwrap();
    let g1 = random_unitary(4, &mut rng);
    let g2 = random_unitary(4, &mut rng);
    let theta = std::f64::consts::PI / 8.0;
    let circuit = [
        CircuitElement::Gaussian(g1.clone()),
        CircuitElement::PhaseGate { i: 0, j: 1, theta },
        CircuitElement::Gaussian(g2.clone()),
    ];
    let exact = {
        let mut sv = pfmc_core::oracle::apsg_to_statevector(&psi4).unwrap();
        sv.apply_unitary(&g1).unwrap();
        sv.apply_fock_diagonal(&|s| {
            let parity = ((s & 1) ^ ((s >> 1) & 1)) as u32;
            if parity == 0 {
                Complex64::new(0.0, theta).exp()
            } else {
                Complex64::new(0.0, -theta).exp()
            }
        });
        sv.apply_unitary(&g2).unwrap();
        pfmc_core::oracle::apsg_to_statevector(&psi4)
            .unwrap()
            .inner(&sv)
    };
    let est = estimate_extent_overlap(&circuit, &psi4, &psi4, 0.05, 0.05, 515_151, &exec).unwrap();
    assert!(
        (est.value - exact).norm() <= 0.05,
        "extent {} vs {exact}",
        est.value
    );
    budget(10, started, 300.0);
    pass(10, "HS parity (W=4, Strang k=2) and extent (θ=π/8) match dense oracles at ε=0.05", started);
}

#[test]
fn acceptance_11_determinism_across_workers() {
    let started = Instant::now();
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/quench_1x2.json"
    ))
    .unwrap();
    let cfg = pfmc::config::ExperimentConfig::from_json(&text).unwrap();
    let render = |exec: &dyn Executor| {
        let run = pfmc::runner::run_experiment(&cfg, exec).unwrap();
        run.rows
            .iter()
            .map(|row| {
                let full = pfmc::output::render_row(row);
                full.rsplit_once(',').unwrap().0.to_string() // drop wall_ms
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let single = render(&RayonExecutor::new(1).unwrap());
    let eight = render(&RayonExecutor::new(8).unwrap());
    let repeat = render(&RayonExecutor::new(1).unwrap());
    assert_eq!(single, eight, "1 vs 8 workers produced different bytes");
    assert_eq!(single, repeat, "repeated run produced different bytes");
    budget(11, started, 300.0);
    pass(11, "value columns byte-identical across 1 and 8 worker threads", started);
}
