//! Experiment dispatch: resolves a parsed config, runs the matching
//! estimator (or its brute-force oracle), and collects result rows.

use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use pfmc_core::apsg::ApsgState;
use pfmc_core::estimators::{
    estimate_apsg_overlap, estimate_binned_distribution, estimate_extent_overlap,
    estimate_fock_overlap, estimate_hs_parity, estimate_marginal,
    estimate_transition_correlator, estimate_wilson_loop, hamiltonian_transition_element,
    transition_rdm_element, CircuitElement, Estimate, Method, RdmIndices, SquaredFactor,
};
use pfmc_core::fock::FockState;
use pfmc_core::gaussian::GaussianMap;
use pfmc_core::hubbard::{
    build_initial_state, doublon_number, hs_complexity_envelope, spin_correlator_czz,
    triplet_density, QuenchConfig,
};
use pfmc_core::lattice::hopping_evolution;
use pfmc_core::oracle::{
    apsg_to_statevector, gaussian_on_apsg, oracle_amplitude, StateVector,
};
use pfmc_core::rng::derive_seed;
use pfmc_core::sampling::Executor;
use pfmc_core::{C64, CMatrix, Error};

use crate::config::*;
use crate::maps::resolve_map;

/// Schema-validate and resolve a config's inputs without running anything.
pub fn validate_inputs(cfg: &ExperimentConfig) -> Result<()> {
    let flags = &mut ResolutionFlags::default();
    match cfg.kind.as_str() {
        "overlap" => {
            let i: OverlapInputs = cfg.parse_inputs()?;
            resolve_map(&i.map, flags)?;
            i.ket.resolve(flags)?;
            if let BraSpec::Fock { fock } = &i.bra {
                FockState::from_bitstring(fock)?;
            } else if let BraSpec::State(s) = &i.bra {
                s.resolve(flags)?;
            }
        }
        "correlator" => {
            let i: CorrelatorInputs = cfg.parse_inputs()?;
            resolve_map(&i.map_left, flags)?;
            resolve_map(&i.map_right, flags)?;
            i.bra.resolve(flags)?;
            i.ket.resolve(flags)?;
        }
        "marginal" => {
            let i: MarginalInputs = cfg.parse_inputs()?;
            resolve_map(&i.map, flags)?;
            i.state.resolve(flags)?;
        }
        "binned" => {
            let i: BinnedInputs = cfg.parse_inputs()?;
            resolve_map(&i.map, flags)?;
            i.state.resolve(flags)?;
        }
        "rdm" => {
            let i: RdmInputs = cfg.parse_inputs()?;
            resolve_map(&i.map_left, flags)?;
            resolve_map(&i.map_right, flags)?;
            i.bra.resolve(flags)?;
            i.ket.resolve(flags)?;
            parse_rdm_indices(&i.indices)?;
        }
        "hamiltonian_element" => {
            let i: HamiltonianInputs = cfg.parse_inputs()?;
            resolve_map(&i.map_left, flags)?;
            resolve_map(&i.map_right, flags)?;
            i.bra.resolve(flags)?;
            i.ket.resolve(flags)?;
            resolve_hamiltonian(&i.hamiltonian)?;
        }
        "wilson" => {
            let i: WilsonInputs = cfg.parse_inputs()?;
            i.quench.resolve(flags)?;
        }
        "quench_suite" => {
            let i: QuenchSuiteInputs = cfg.parse_inputs()?;
            i.quench.resolve(flags)?;
        }
        "hs_parity" => {
            let i: HsParityInputs = cfg.parse_inputs()?;
            i.quench.resolve(flags)?;
        }
        "extent" => {
            let i: ExtentInputs = cfg.parse_inputs()?;
            i.bra.resolve(flags)?;
            i.ket.resolve(flags)?;
            resolve_circuit(&i.circuit, flags)?;
        }
        "envelope" => {
            let _: EnvelopeInputs = cfg.parse_inputs()?;
        }
        "noci" => {
            let i: NociInputs = cfg.parse_inputs()?;
            i.state.resolve(flags)?;
            resolve_map(&i.map_left, flags)?;
            resolve_map(&i.map_right, flags)?;
            resolve_hamiltonian(&i.hamiltonian)?;
        }
        "afqmc_overlap" => {
            let i: AfqmcInputs = cfg.parse_inputs()?;
            i.trial.resolve(flags)?;
            i.walker_init.resolve(flags)?;
            i.lattice.resolve(flags)?;
        }
        "orbital_gradient" => {
            let i: OrbitalGradientInputs = cfg.parse_inputs()?;
            i.state.resolve(flags)?;
            resolve_map(&i.map, flags)?;
            resolve_hamiltonian(&i.hamiltonian)?;
        }
        other => {
            return Err(Error::Validation(format!(
                "unknown experiment kind {other:?} (field: kind)"
            )))
        }
    }
    Ok(())
}

/// One emitted observable.
#[derive(Debug, Clone)]
pub struct Row {
    pub observable: String,
    pub params: Vec<(String, String)>,
    pub value: C64,
    pub std_error: f64,
    pub samples: u64,
    pub bound: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub method: String,
    pub bias: f64,
    pub wall_ms: f64,
}

impl Row {
    fn from_estimate(observable: &str, params: Vec<(String, String)>, est: &Estimate) -> Row {
        Row {
            observable: observable.into(),
            params,
            value: est.value,
            std_error: est.std_error,
            samples: est.samples,
            bound: est.bound,
            epsilon: est.epsilon,
            delta: est.delta,
            method: method_name(est.method).into(),
            bias: est.bias,
            wall_ms: 0.0,
        }
    }

    fn exact(observable: &str, params: Vec<(String, String)>, value: C64) -> Row {
        Row {
            observable: observable.into(),
            params,
            value,
            std_error: 0.0,
            samples: 0,
            bound: 0.0,
            epsilon: 0.0,
            delta: 0.0,
            method: "oracle".into(),
            bias: 0.0,
            wall_ms: 0.0,
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Mean => "mean",
        Method::MedianOfMeans => "median_of_means",
        Method::Exact => "exact",
        Method::Composite => "composite",
    }
}

#[derive(Debug)]
pub struct RunResult {
    pub rows: Vec<Row>,
    pub metadata: serde_json::Value,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn param(key: &str, value: impl std::fmt::Display) -> (String, String) {
    (key.into(), format!("{value}"))
}

/// Run the Monte Carlo estimators described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig, exec: &dyn Executor) -> Result<RunResult> {
    dispatch(cfg, exec, false)
}

/// Run the brute-force oracle path on guard-sized inputs.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<RunResult> {
    dispatch(cfg, &pfmc_core::sampling::Sequential, true)
}

fn dispatch(cfg: &ExperimentConfig, exec: &dyn Executor, oracle: bool) -> Result<RunResult> {
    let mut flags = ResolutionFlags::default();
    let started = Instant::now();
    let mut rows = match cfg.kind.as_str() {
        "overlap" => run_overlap(cfg, exec, oracle, &mut flags)?,
        "correlator" => run_correlator(cfg, exec, oracle, &mut flags)?,
        "marginal" => run_marginal(cfg, exec, oracle, &mut flags)?,
        "binned" => run_binned(cfg, exec, oracle, &mut flags)?,
        "rdm" => run_rdm(cfg, exec, oracle, &mut flags)?,
        "hamiltonian_element" => run_hamiltonian(cfg, exec, oracle, &mut flags)?,
        "wilson" => run_wilson(cfg, exec, oracle, &mut flags)?,
        "quench_suite" => run_quench_suite(cfg, exec, oracle, &mut flags)?,
        "hs_parity" => run_hs_parity(cfg, exec, oracle, &mut flags)?,
        "extent" => run_extent(cfg, exec, oracle, &mut flags)?,
        "envelope" => run_envelope(cfg)?,
        "noci" => run_noci(cfg, exec, oracle, &mut flags)?,
        "afqmc_overlap" => run_afqmc(cfg, exec, oracle, &mut flags)?,
        "orbital_gradient" => run_orbital_gradient(cfg, exec, oracle, &mut flags)?,
        other => {
            return Err(Error::Validation(format!(
                "unknown experiment kind {other:?} (field: kind)"
            )))
        }
    };
    let wall = started.elapsed().as_secs_f64() * 1e3;
    if !rows.is_empty() {
        let share = wall / rows.len() as f64;
        for row in &mut rows {
            row.wall_ms = share;
        }
    }
    let metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind,
        "seed": cfg.seed,
        "budget": {"eps": cfg.budget.eps, "delta": cfg.budget.delta},
        "oracle": oracle,
        "flags": serde_json::to_value(&flags).unwrap_or_default(),
        "inputs": cfg.inputs,
    });
    Ok(RunResult { rows, metadata })
}

/// ⟨Φ|Ĝ|Ψ⟩ by dense statevector contraction (both states through guards).
fn exact_state_overlap(g: &GaussianMap, phi: &ApsgState, psi: &ApsgState) -> Result<C64> {
    let ket = gaussian_on_apsg(g, psi)?;
    let bra = apsg_to_statevector(phi)?;
    Ok(bra.inner(&ket))
}

fn run_overlap(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: OverlapInputs = cfg.parse_inputs()?;
    let map = resolve_map(&inputs.map, flags)?;
    let ket = inputs.ket.resolve(flags)?;
    let Budget { eps, delta } = cfg.budget;
    match &inputs.bra {
        BraSpec::Fock { fock } => {
            let x = FockState::from_bitstring(fock)?;
            let row = if oracle {
                Row::exact("overlap_fock", vec![], oracle_amplitude(&x, &map, &ket)?)
            } else {
                let est = estimate_fock_overlap(&map, &ket, &x, eps, delta, cfg.seed, exec)?;
                Row::from_estimate("overlap_fock", vec![], &est)
            };
            Ok(vec![row])
        }
        BraSpec::State(spec) => {
            let bra = spec.resolve(flags)?;
            let row = if oracle {
                Row::exact("overlap", vec![], exact_state_overlap(&map, &bra, &ket)?)
            } else {
                let est = estimate_apsg_overlap(&map, &bra, &ket, eps, delta, cfg.seed, exec)?;
                Row::from_estimate("overlap", vec![], &est)
            };
            Ok(vec![row])
        }
    }
}

/// Oracle for ⟨Φ|Ĝ_L†(Π_{i∈S} n̂_i)Ĝ_R|Ψ⟩.
fn exact_correlator(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    modes: &[usize],
) -> Result<C64> {
    let bra = gaussian_on_apsg(gl, phi)?;
    let mut ket = gaussian_on_apsg(gr, psi)?;
    let mut mask = 0usize;
    for &m in modes {
        mask |= 1usize << m;
    }
    ket.apply_fock_diagonal(&|s| {
        if s & mask == mask {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(bra.inner(&ket))
}

fn run_correlator(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: CorrelatorInputs = cfg.parse_inputs()?;
    let gl = resolve_map(&inputs.map_left, flags)?;
    let gr = resolve_map(&inputs.map_right, flags)?;
    let bra = inputs.bra.resolve(flags)?;
    let ket = inputs.ket.resolve(flags)?;
    let params = vec![param("modes", join(&inputs.modes))];
    let row = if oracle {
        Row::exact(
            "correlator",
            params,
            exact_correlator(&gl, &gr, &bra, &ket, &inputs.modes)?,
        )
    } else {
        let est = estimate_transition_correlator(
            &gl,
            &gr,
            &bra,
            &ket,
            &inputs.modes,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("correlator", params, &est)
    };
    Ok(vec![row])
}

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

fn run_marginal(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: MarginalInputs = cfg.parse_inputs()?;
    let map = resolve_map(&inputs.map, flags)?;
    let state = inputs.state.resolve(flags)?;
    let pattern: Vec<bool> = inputs.pattern.iter().map(|&b| b != 0).collect();
    let params = vec![
        param("modes", join(&inputs.modes)),
        param(
            "pattern",
            inputs
                .pattern
                .iter()
                .map(|b| b.to_string())
                .collect::<String>(),
        ),
    ];
    let row = if oracle {
        let sv = gaussian_on_apsg(&map, &state)?;
        let mut total = 0.0;
        for (s, amp) in sv.amplitudes().iter().enumerate() {
            let matches = inputs
                .modes
                .iter()
                .zip(&pattern)
                .all(|(&m, &a)| ((s >> m) & 1 == 1) == a);
            if matches {
                total += amp.norm_sqr();
            }
        }
        Row::exact("marginal", params, Complex64::new(total, 0.0))
    } else {
        let est = estimate_marginal(
            &map,
            &state,
            &inputs.modes,
            &pattern,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("marginal", params, &est)
    };
    Ok(vec![row])
}

fn run_binned(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: BinnedInputs = cfg.parse_inputs()?;
    let map = resolve_map(&inputs.map, flags)?;
    let state = inputs.state.resolve(flags)?;
    if oracle {
        let sv = gaussian_on_apsg(&map, &state)?;
        let omega_max: usize = inputs.omega.iter().map(|&w| w as usize).sum();
        let mut hist = vec![0.0f64; omega_max + 1];
        for (s, amp) in sv.amplitudes().iter().enumerate() {
            let big: usize = inputs
                .omega
                .iter()
                .enumerate()
                .map(|(m, &w)| if s >> m & 1 == 1 { w as usize } else { 0 })
                .sum();
            hist[big] += amp.norm_sqr();
        }
        Ok(hist
            .iter()
            .enumerate()
            .map(|(bin, &v)| {
                Row::exact(
                    "binned",
                    vec![param("omega", bin)],
                    Complex64::new(v, 0.0),
                )
            })
            .collect())
    } else {
        let out = estimate_binned_distribution(
            &map,
            &state,
            &inputs.omega,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        let k_total: u64 = out.fourier.iter().map(|e| e.samples).sum();
        Ok(out
            .bins
            .iter()
            .enumerate()
            .map(|(bin, &v)| {
                let mut row = Row::exact("binned", vec![param("omega", bin)], Complex64::new(v, 0.0));
                row.method = "mixed_pfaffian_dft".into();
                row.samples = k_total / out.bins.len().max(1) as u64;
                row.epsilon = cfg.budget.eps;
                row.delta = cfg.budget.delta;
                row
            })
            .collect())
    }
}

fn parse_rdm_indices(indices: &[usize]) -> Result<RdmIndices> {
    match indices {
        [p, q] => Ok(RdmIndices::One(*p, *q)),
        [p, q, r, s] => Ok(RdmIndices::Two(*p, *q, *r, *s)),
        _ => Err(Error::Validation(format!(
            "indices must be [p,q] or [p,q,r,s], got {} entries (field: indices)",
            indices.len()
        ))),
    }
}

fn run_rdm(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: RdmInputs = cfg.parse_inputs()?;
    let gl = resolve_map(&inputs.map_left, flags)?;
    let gr = resolve_map(&inputs.map_right, flags)?;
    let bra = inputs.bra.resolve(flags)?;
    let ket = inputs.ket.resolve(flags)?;
    let idx = parse_rdm_indices(&inputs.indices)?;
    let params = vec![param("indices", join(&inputs.indices))];
    let row = if oracle {
        let bra_sv = gaussian_on_apsg(&gl, &bra)?;
        let ket_sv = gaussian_on_apsg(&gr, &ket)?;
        let value = match idx {
            RdmIndices::One(p, q) => bra_sv
                .annihilation_applied(p)
                .inner(&ket_sv.annihilation_applied(q)),
            RdmIndices::Two(p, q, r, s) => bra_sv
                .annihilation_applied(p)
                .annihilation_applied(q)
                .inner(&ket_sv.annihilation_applied(r).annihilation_applied(s)),
        };
        Row::exact("rdm", params, value)
    } else {
        let est = transition_rdm_element(
            &gl,
            &gr,
            &bra,
            &ket,
            idx,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("rdm", params, &est)
    };
    Ok(vec![row])
}

fn resolve_hamiltonian(
    h: &HamiltonianJson,
) -> Result<(f64, Option<CMatrix>, Vec<SquaredFactor>)> {
    let h1 = h.h1.as_ref().map(|m| m.resolve()).transpose()?;
    let factors = h
        .factors
        .iter()
        .map(|f| {
            Ok(SquaredFactor {
                lambda: f.lambda,
                matrix: f.matrix.resolve()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((h.e0, h1, factors))
}

/// Oracle for ⟨Φ'|E₀ + Ĥ₁ + ½Σλ Ô²|Ψ'⟩ on explicit statevectors.
fn exact_hamiltonian_element(
    bra: &StateVector,
    ket: &StateVector,
    e0: f64,
    h1: Option<&CMatrix>,
    factors: &[SquaredFactor],
) -> C64 {
    let mut value = bra.inner(ket) * e0;
    if let Some(h) = h1 {
        value += bra.inner(&ket.one_body_applied(h));
    }
    for f in factors {
        let once = ket.one_body_applied(&f.matrix);
        let twice = once.one_body_applied(&f.matrix);
        value += bra.inner(&twice) * (0.5 * f.lambda);
    }
    value
}

fn run_hamiltonian(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: HamiltonianInputs = cfg.parse_inputs()?;
    let gl = resolve_map(&inputs.map_left, flags)?;
    let gr = resolve_map(&inputs.map_right, flags)?;
    let bra = inputs.bra.resolve(flags)?;
    let ket = inputs.ket.resolve(flags)?;
    let (e0, h1, factors) = resolve_hamiltonian(&inputs.hamiltonian)?;
    let row = if oracle {
        let bra_sv = gaussian_on_apsg(&gl, &bra)?;
        let ket_sv = gaussian_on_apsg(&gr, &ket)?;
        Row::exact(
            "hamiltonian_element",
            vec![],
            exact_hamiltonian_element(&bra_sv, &ket_sv, e0, h1.as_ref(), &factors),
        )
    } else {
        let est = hamiltonian_transition_element(
            &gl,
            &gr,
            &bra,
            &ket,
            e0,
            h1.as_ref(),
            &factors,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("hamiltonian_element", vec![], &est)
    };
    Ok(vec![row])
}

fn wilson_oracle_value(
    quench: &QuenchConfig,
    t: f64,
    contour: &[usize],
) -> Result<C64> {
    let psi = build_initial_state(quench)?;
    let u = hopping_evolution(&quench.lattice, quench.j, t)?;
    let pairs: Vec<(usize, usize)> = contour
        .iter()
        .map(|&s| (quench.lattice.mode_up(s), quench.lattice.mode_down(s)))
        .collect();
    pfmc_core::oracle::oracle_expectation(
        &pfmc_core::oracle::OracleObservable::DoublonFreeString(pairs),
        &u,
        &psi,
    )
}

fn run_wilson(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: WilsonInputs = cfg.parse_inputs()?;
    let quench = inputs.quench.resolve(flags)?;
    let params = vec![
        param("t", fmt_f64(inputs.time)),
        param("contour_len", inputs.contour.len()),
    ];
    let row = if oracle {
        Row::exact(
            "wilson",
            params,
            wilson_oracle_value(&quench, inputs.time, &inputs.contour)?,
        )
    } else {
        let psi = build_initial_state(&quench)?;
        let u = hopping_evolution(&quench.lattice, quench.j, inputs.time)?;
        let est = estimate_wilson_loop(
            &u,
            &psi,
            &quench.lattice,
            &inputs.contour,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("wilson", params, &est)
    };
    Ok(vec![row])
}

/// Exact quench diagnostics on the statevector at time t.
fn quench_oracle_rows(quench: &QuenchConfig, czz_pair: [usize; 2], contour: &[usize], t: f64) -> Result<Vec<Row>> {
    use pfmc_core::oracle::{expectation_on_statevector, OracleObservable};
    let psi = build_initial_state(quench)?;
    let u = hopping_evolution(&quench.lattice, quench.j, t)?;
    let sv = gaussian_on_apsg(&u, &psi)?;
    let lat = &quench.lattice;
    let n_of = |modes: Vec<usize>| -> Result<f64> {
        Ok(expectation_on_statevector(&OracleObservable::NumberProduct(modes), &sv)?.re)
    };
    let mut rows = Vec::new();
    let mut doublons = 0.0;
    for site in 0..lat.num_sites() {
        doublons += n_of(vec![lat.mode_up(site), lat.mode_down(site)])?;
    }
    rows.push(Row::exact(
        "doublon_number",
        vec![param("t", fmt_f64(t))],
        Complex64::new(doublons, 0.0),
    ));
    let czz = |i: usize, j: usize| -> Result<f64> {
        let (iu, id) = (lat.mode_up(i), lat.mode_down(i));
        let (ju, jd) = (lat.mode_up(j), lat.mode_down(j));
        let four = n_of(vec![iu, ju])? - n_of(vec![iu, jd])? - n_of(vec![id, ju])?
            + n_of(vec![id, jd])?;
        let szi = 0.5 * (n_of(vec![iu])? - n_of(vec![id])?);
        let szj = 0.5 * (n_of(vec![ju])? - n_of(vec![jd])?);
        Ok(four - 4.0 * szi * szj)
    };
    rows.push(Row::exact(
        "czz",
        vec![
            param("t", fmt_f64(t)),
            param("i", czz_pair[0]),
            param("j", czz_pair[1]),
        ],
        Complex64::new(czz(czz_pair[0], czz_pair[1])?, 0.0),
    ));
    let mut triplet = 0.0;
    for link in lat.links() {
        triplet += czz(link.i, link.j)?;
    }
    triplet *= 2.0 / lat.num_sites() as f64;
    rows.push(Row::exact(
        "triplet_density",
        vec![param("t", fmt_f64(t))],
        Complex64::new(triplet, 0.0),
    ));
    if !contour.is_empty() {
        let pairs: Vec<(usize, usize)> = contour
            .iter()
            .map(|&s| (lat.mode_up(s), lat.mode_down(s)))
            .collect();
        let w = expectation_on_statevector(&OracleObservable::DoublonFreeString(pairs), &sv)?;
        rows.push(Row::exact(
            "wilson",
            vec![param("t", fmt_f64(t)), param("contour_len", contour.len())],
            w,
        ));
    }
    Ok(rows)
}

fn run_quench_suite(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: QuenchSuiteInputs = cfg.parse_inputs()?;
    let quench = inputs.quench.resolve(flags)?;
    if quench.times.is_empty() {
        return Err(Error::Validation(
            "quench_suite needs a nonempty times list (field: quench.times)".into(),
        ));
    }
    let Budget { eps, delta } = cfg.budget;
    let mut rows = Vec::new();
    for (ti, &t) in quench.times.iter().enumerate() {
        if oracle {
            rows.extend(quench_oracle_rows(
                &quench,
                inputs.czz_pair,
                &inputs.wilson_contour,
                t,
            )?);
            continue;
        }
        let seed_t = derive_seed(cfg.seed, ti as u64);
        let est = doublon_number(&quench, t, eps, delta, derive_seed(seed_t, 0), exec)?;
        rows.push(Row::from_estimate(
            "doublon_number",
            vec![param("t", fmt_f64(t))],
            &est,
        ));
        let est = spin_correlator_czz(
            &quench,
            inputs.czz_pair[0],
            inputs.czz_pair[1],
            t,
            eps,
            delta,
            derive_seed(seed_t, 1),
            exec,
        )?;
        rows.push(Row::from_estimate(
            "czz",
            vec![
                param("t", fmt_f64(t)),
                param("i", inputs.czz_pair[0]),
                param("j", inputs.czz_pair[1]),
            ],
            &est,
        ));
        let est = triplet_density(&quench, t, eps, delta, derive_seed(seed_t, 2), exec)?;
        rows.push(Row::from_estimate(
            "triplet_density",
            vec![param("t", fmt_f64(t))],
            &est,
        ));
        if !inputs.wilson_contour.is_empty() {
            let psi = build_initial_state(&quench)?;
            let u = hopping_evolution(&quench.lattice, quench.j, t)?;
            let est = estimate_wilson_loop(
                &u,
                &psi,
                &quench.lattice,
                &inputs.wilson_contour,
                eps,
                delta,
                derive_seed(seed_t, 3),
                exec,
            )?;
            rows.push(Row::from_estimate(
                "wilson",
                vec![
                    param("t", fmt_f64(t)),
                    param("contour_len", inputs.wilson_contour.len()),
                ],
                &est,
            ));
        }
    }
    Ok(rows)
}

/// Strang-split statevector reference for the interacting quench.
fn strang_oracle_state(quench: &QuenchConfig, dt: f64, n: usize) -> Result<StateVector> {
    let psi = build_initial_state(quench)?;
    let mut sv = apsg_to_statevector(&psi)?;
    let u_half = hopping_evolution(&quench.lattice, quench.j, dt / 2.0)?;
    let l = quench.lattice.num_sites();
    let w = quench.w;
    for _ in 0..n {
        sv.apply_unitary(&u_half)?;
        sv.apply_fock_diagonal(&|s| {
            let mut doublons = 0u32;
            for site in 0..l {
                if s & (1 << site) != 0 && s & (1 << (l + site)) != 0 {
                    doublons += 1;
                }
            }
            Complex64::new(0.0, -dt * w * doublons as f64).exp()
        });
        sv.apply_unitary(&u_half)?;
    }
    Ok(sv)
}

fn run_hs_parity(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: HsParityInputs = cfg.parse_inputs()?;
    let quench = inputs.quench.resolve(flags)?;
    let t = inputs.dt * inputs.n_slices as f64;
    let params = vec![
        param("t", fmt_f64(t)),
        param("modes", join(&inputs.subset)),
        param("n_slices", inputs.n_slices),
    ];
    if oracle {
        let sv = strang_oracle_state(&quench, inputs.dt, inputs.n_slices)?;
        let value = pfmc_core::oracle::expectation_on_statevector(
            &pfmc_core::oracle::OracleObservable::Parity(inputs.subset.clone()),
            &sv,
        )?;
        return Ok(vec![Row::exact("hs_parity", params, value)]);
    }
    let psi = build_initial_state(&quench)?;
    let est = estimate_hs_parity(
        &quench.lattice,
        quench.j,
        quench.w,
        inputs.dt,
        inputs.n_slices,
        &psi,
        &inputs.subset,
        cfg.budget.eps,
        cfg.budget.delta,
        cfg.seed,
        exec,
    )?;
    let mut row = Row::from_estimate("hs_parity", params, &est);
    // attach the worst-case envelope scale alongside the used bound
    let env = hs_complexity_envelope(
        quench.w,
        t,
        inputs.dt,
        quench.lattice.num_sites(),
        psi.num_blocks(),
        1.0,
        cfg.budget.eps,
        cfg.budget.delta,
    )?;
    row.params.push(param("b_worst", fmt_f64(env.b_worst)));
    row.params.push(param("b_typ", fmt_f64(env.b_typ)));
    Ok(vec![row])
}

fn resolve_circuit(
    elems: &[CircuitElementJson],
    flags: &mut ResolutionFlags,
) -> Result<Vec<CircuitElement>> {
    elems
        .iter()
        .map(|e| match e {
            CircuitElementJson::Gaussian(spec) => {
                Ok(CircuitElement::Gaussian(resolve_map(spec, flags)?))
            }
            CircuitElementJson::Phase { i, j, theta } => Ok(CircuitElement::PhaseGate {
                i: *i,
                j: *j,
                theta: *theta,
            }),
        })
        .collect()
}

fn run_extent(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: ExtentInputs = cfg.parse_inputs()?;
    let bra = inputs.bra.resolve(flags)?;
    let ket = inputs.ket.resolve(flags)?;
    let circuit = resolve_circuit(&inputs.circuit, flags)?;
    let row = if oracle {
        let mut sv = apsg_to_statevector(&ket)?;
        for elem in &circuit {
            match elem {
                CircuitElement::Gaussian(g) => sv.apply_unitary(g)?,
                CircuitElement::PhaseGate { i, j, theta } => {
                    let (bi, bj, th) = (1usize << i, 1usize << j, *theta);
                    sv.apply_fock_diagonal(&|s| {
                        let parity =
                            ((s & bi != 0) as u32 + (s & bj != 0) as u32) % 2;
                        if parity == 0 {
                            Complex64::new(0.0, th).exp()
                        } else {
                            Complex64::new(0.0, -th).exp()
                        }
                    });
                }
            }
        }
        let bra_sv = apsg_to_statevector(&bra)?;
        Row::exact("extent_overlap", vec![], bra_sv.inner(&sv))
    } else {
        let est = estimate_extent_overlap(
            &circuit,
            &bra,
            &ket,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("extent_overlap", vec![], &est)
    };
    Ok(vec![row])
}

fn run_envelope(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let inputs: EnvelopeInputs = cfg.parse_inputs()?;
    if inputs.trotter_k == 0 {
        return Err(Error::Validation("trotter_k must be positive (field: trotter_k)".into()));
    }
    let mut rows = Vec::new();
    for &w in &inputs.w_values {
        for &t in &inputs.t_values {
            let dt = t / inputs.trotter_k as f64;
            let env = hs_complexity_envelope(
                w,
                t,
                dt,
                inputs.l,
                inputs.r,
                inputs.c_t,
                cfg.budget.eps,
                cfg.budget.delta,
            )?;
            let mk = |name: &str, v: f64| {
                Row::exact(
                    name,
                    vec![param("W", fmt_f64(w)), param("t", fmt_f64(t))],
                    Complex64::new(v, 0.0),
                )
            };
            rows.push(mk("envelope_b_worst", env.b_worst));
            rows.push(mk("envelope_b_typ", env.b_typ));
            rows.push(mk("envelope_k_worst", env.k_worst as f64));
            rows.push(mk("envelope_k_typ", env.k_typ as f64));
            rows.push(mk("envelope_a", env.a));
        }
    }
    Ok(rows)
}

fn run_noci(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: NociInputs = cfg.parse_inputs()?;
    let state = inputs.state.resolve(flags)?;
    let ul = resolve_map(&inputs.map_left, flags)?;
    let ur = resolve_map(&inputs.map_right, flags)?;
    let (e0, h1, factors) = resolve_hamiltonian(&inputs.hamiltonian)?;
    let Budget { eps, delta } = cfg.budget;
    if oracle {
        let bra_sv = gaussian_on_apsg(&ul, &state)?;
        let ket_sv = gaussian_on_apsg(&ur, &state)?;
        return Ok(vec![
            Row::exact("noci_s", vec![], bra_sv.inner(&ket_sv)),
            Row::exact(
                "noci_h",
                vec![],
                exact_hamiltonian_element(&bra_sv, &ket_sv, e0, h1.as_ref(), &factors),
            ),
        ]);
    }
    // S_LR through the single effective map U_L†U_R
    let eff = GaussianMap::compose(&ul.adjoint(), &ur)?;
    let s_est = estimate_apsg_overlap(
        &eff,
        &state,
        &state,
        eps,
        delta,
        derive_seed(cfg.seed, 0),
        exec,
    )?;
    let h_est = hamiltonian_transition_element(
        &ul,
        &ur,
        &state,
        &state,
        e0,
        h1.as_ref(),
        &factors,
        eps,
        delta,
        derive_seed(cfg.seed, 1),
        exec,
    )?;
    Ok(vec![
        Row::from_estimate("noci_s", vec![], &s_est),
        Row::from_estimate("noci_h", vec![], &h_est),
    ])
}

fn run_afqmc(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: AfqmcInputs = cfg.parse_inputs()?;
    let trial = inputs.trial.resolve(flags)?;
    let walker0 = inputs.walker_init.resolve(flags)?;
    let lat = inputs.lattice.resolve(flags)?;
    let walker_map =
        pfmc_core::lattice::hs_propagator(&lat, inputs.j, inputs.w, inputs.dt, &inputs.sigma)?;
    let params = vec![
        param("n_slices", inputs.sigma.len()),
        param("op_norm", fmt_f64(walker_map.op_norm())),
    ];
    let row = if oracle {
        Row::exact(
            "afqmc_overlap",
            params,
            exact_state_overlap(&walker_map, &trial, &walker0)?,
        )
    } else {
        let est = estimate_apsg_overlap(
            &walker_map,
            &trial,
            &walker0,
            cfg.budget.eps,
            cfg.budget.delta,
            cfg.seed,
            exec,
        )?;
        Row::from_estimate("afqmc_overlap", params, &est)
    };
    Ok(vec![row])
}

/// Orbital-rotation generator exp(θ(E_pq − E_qp)) as a Gaussian map.
fn orbital_rotation(m: usize, p: usize, q: usize, theta: f64) -> Result<GaussianMap> {
    let mut herm = CMatrix::zeros(m, m);
    herm[(p, q)] = Complex64::new(0.0, 1.0);
    herm[(q, p)] = Complex64::new(0.0, -1.0);
    GaussianMap::expm_hermitian(&herm, Complex64::new(0.0, -theta))
}

fn run_orbital_gradient(
    cfg: &ExperimentConfig,
    exec: &dyn Executor,
    oracle: bool,
    flags: &mut ResolutionFlags,
) -> Result<Vec<Row>> {
    let inputs: OrbitalGradientInputs = cfg.parse_inputs()?;
    let state = inputs.state.resolve(flags)?;
    let base = resolve_map(&inputs.map, flags)?;
    let (e0, h1, factors) = resolve_hamiltonian(&inputs.hamiltonian)?;
    let m = base.dim();
    let h_step = 1e-3;
    let Budget { eps, delta } = cfg.budget;
    let mut rows = Vec::new();
    for (pi, pair) in inputs.pairs.iter().enumerate() {
        let [p, q] = *pair;
        if p >= m || q >= m || p == q {
            return Err(Error::Validation(format!(
                "rotation pair ({p}, {q}) invalid for {m} modes (field: pairs)"
            )));
        }
        let params = vec![param("p", p), param("q", q)];
        if oracle {
            // dE/dθ at 0 by dense evaluation of E(±h)
            let mut vals = [Complex64::new(0.0, 0.0); 2];
            for (slot, sgn) in [(0usize, 1.0), (1, -1.0)] {
                let rot = orbital_rotation(m, p, q, sgn * h_step)?;
                let total = GaussianMap::compose(&rot, &base)?;
                let sv = gaussian_on_apsg(&total, &state)?;
                vals[slot] = exact_hamiltonian_element(&sv, &sv, e0, h1.as_ref(), &factors);
            }
            let grad = (vals[0] - vals[1]) / (2.0 * h_step);
            rows.push(Row::exact("orbital_gradient", params, grad));
            continue;
        }
        // central difference of the rotated energy with shared seeds: the
        // sub-samples of E(+h) and E(−h) cancel pathwise
        let seed_pair = derive_seed(cfg.seed, pi as u64);
        let mut vals = [Complex64::new(0.0, 0.0); 2];
        let mut var = 0.0f64;
        let mut samples = 0u64;
        let mut bias = 0.0f64;
        for (slot, sgn) in [(0usize, 1.0), (1, -1.0)] {
            let rot = orbital_rotation(m, p, q, sgn * h_step)?;
            let total = GaussianMap::compose(&rot, &base)?;
            let est = hamiltonian_transition_element(
                &total,
                &total,
                &state,
                &state,
                e0,
                h1.as_ref(),
                &factors,
                eps,
                delta,
                seed_pair,
                exec,
            )?;
            vals[slot] = est.value;
            var += est.std_error * est.std_error;
            samples += est.samples;
            bias += est.bias;
        }
        let grad = (vals[0] - vals[1]) / (2.0 * h_step);
        rows.push(Row {
            observable: "orbital_gradient".into(),
            params,
            value: grad,
            std_error: var.sqrt() / (2.0 * h_step),
            samples,
            bound: 0.0,
            epsilon: eps,
            delta,
            method: "composite".into(),
            bias: bias / (2.0 * h_step),
            wall_ms: 0.0,
        });
    }
    Ok(rows)
}
