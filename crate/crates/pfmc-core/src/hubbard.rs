//! Noninteracting-quench benchmark: triplet-dimer initial states, physical
//! diagnostics (doublon number, connected spin correlators, triplet
//! density), and sample-complexity envelopes for the interacting regime.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::apsg::{ApsgBlock, ApsgState};
use crate::error::{Error, Result};
use crate::estimators::diagonal::{correlator_atom_bound, run_correlator_mean};
use crate::estimators::{estimate_transition_correlator, Estimate, Method};
use crate::gaussian::GaussianMap;
use crate::lattice::{hirsch_lambda, hopping_evolution, LatticeSpec};
use crate::rng::derive_seed;
use crate::sampling::{hoeffding_samples, validate_budget, Executor};
use crate::C64;

/// Declarative description of a quench run.
#[derive(Debug, Clone)]
pub struct QuenchConfig {
    pub lattice: LatticeSpec,
    /// Nearest-neighbor site pairs carrying spin-triplet dimers.
    pub dimers: Vec<(usize, usize)>,
    pub holons: Vec<usize>,
    pub doublons: Vec<usize>,
    pub j: f64,
    pub w: f64,
    pub times: Vec<f64>,
    pub trotter_k: u32,
}

impl QuenchConfig {
    /// Dimers, holons, and doublons must partition the site set, and every
    /// dimer must sit on a lattice link.
    pub fn validate(&self) -> Result<()> {
        let l = self.lattice.num_sites();
        let mut seen = vec![false; l];
        let mut claim = |site: usize, what: &str| -> Result<()> {
            if site >= l {
                return Err(Error::validation(format!(
                    "{what} site {site} out of range for {l} sites"
                )));
            }
            if seen[site] {
                return Err(Error::validation(format!(
                    "site {site} assigned more than once"
                )));
            }
            seen[site] = true;
            Ok(())
        };
        for &(a, b) in &self.dimers {
            claim(a, "dimer")?;
            claim(b, "dimer")?;
        }
        for &h in &self.holons {
            claim(h, "holon")?;
        }
        for &d in &self.doublons {
            claim(d, "doublon")?;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::validation(format!(
                "site {missing} is not covered by any dimer, holon, or doublon"
            )));
        }
        for &(a, b) in &self.dimers {
            if !self.lattice.are_linked(a, b) {
                return Err(Error::validation(format!(
                    "dimer ({a}, {b}) is not a lattice link"
                )));
            }
        }
        if self.trotter_k == 0 {
            return Err(Error::validation("trotter_k must be positive"));
        }
        Ok(())
    }

    pub fn free_evolution(&self, t: f64) -> Result<GaussianMap> {
        hopping_evolution(&self.lattice, self.j, t)
    }
}

/// The triplet-dimer product state with holon/doublon defects:
/// one two-slot block per dimer carrying
/// (ĉ_{j↑}†ĉ_{k↓}† + ĉ_{j↓}†ĉ_{k↑}†)/√2, one single-slot block per
/// doublon site.
pub fn build_initial_state(cfg: &QuenchConfig) -> Result<ApsgState> {
    cfg.validate()?;
    let lat = &cfg.lattice;
    let w = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut blocks = Vec::new();
    for &(j, k) in &cfg.dimers {
        blocks.push(ApsgBlock::new(
            vec![
                lat.mode_up(j),
                lat.mode_down(k),
                lat.mode_down(j),
                lat.mode_up(k),
            ],
            vec![w, w],
        )?);
    }
    for &d in &cfg.doublons {
        blocks.push(ApsgBlock::new(
            vec![lat.mode_up(d), lat.mode_down(d)],
            vec![Complex64::new(1.0, 0.0)],
        )?);
    }
    ApsgState::new(lat.num_modes(), blocks)
}

/// One term of a linear combination of number correlators Σ c·⟨Π n̂⟩.
struct Atom {
    coeff: f64,
    modes: Vec<usize>,
}

/// Estimate Σ_i c_i ⟨Π_{m∈S_i} n̂_m⟩ under the free evolution at time t,
/// allocating a joint Hoeffding budget K_i ∝ |c_i| across the terms so the
/// combined error stays below `eps` with probability 1 − δ.
fn estimate_atom_family(
    atoms: &[Atom],
    u: &GaussianMap,
    psi: &ApsgState,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<(C64, f64, u64, f64)> {
    let b_atom = correlator_atom_bound(psi, psi);
    let weight: f64 = atoms.iter().map(|a| a.coeff.abs() * b_atom).sum();
    let k_total = hoeffding_samples(weight, eps, delta);
    let mut value = Complex64::new(0.0, 0.0);
    let mut var = 0.0f64;
    let mut samples = 0u64;
    for (i, atom) in atoms.iter().enumerate() {
        if atom.coeff == 0.0 {
            continue;
        }
        let share = (atom.coeff.abs() * b_atom) / weight;
        let k_i = ((k_total as f64 * share).ceil() as u64).max(1);
        let stats = run_correlator_mean(
            u,
            u,
            psi,
            psi,
            &atom.modes,
            k_i,
            derive_seed(seed, i as u64),
            exec,
        )?;
        value += stats.value * atom.coeff;
        var += (atom.coeff * stats.std_error).powi(2);
        samples += stats.k;
    }
    Ok((value, var, samples, weight))
}

/// N_d(t) = Σ_i ⟨n̂_{i↑}(t) n̂_{i↓}(t)⟩, estimated site by site with the
/// per-site budget (ε/L, δ/L).
pub fn doublon_number(
    cfg: &QuenchConfig,
    t: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    validate_budget(eps, delta)?;
    let psi = build_initial_state(cfg)?;
    let u = cfg.free_evolution(t)?;
    let l = cfg.lattice.num_sites();
    let (eps_i, delta_i) = (eps / l as f64, delta / l as f64);
    let mut value = Complex64::new(0.0, 0.0);
    let mut var = 0.0f64;
    let mut samples = 0u64;
    let mut bound = 0.0f64;
    for site in 0..l {
        let subset = [cfg.lattice.mode_up(site), cfg.lattice.mode_down(site)];
        let est = estimate_transition_correlator(
            &u,
            &u,
            &psi,
            &psi,
            &subset,
            eps_i,
            delta_i,
            derive_seed(seed, site as u64),
            exec,
        )?;
        value += est.value;
        var += est.std_error * est.std_error;
        samples += est.samples;
        bound += est.bound;
    }
    Ok(Estimate {
        value,
        std_error: var.sqrt(),
        samples,
        epsilon: eps,
        delta,
        bound,
        scale: 1.0,
        method: Method::Composite,
        bias: 0.0,
        gamma: psi.gamma(),
        op_norm_pow: 1.0,
    })
}

/// ⟨Ŝ_i^z(t)⟩ estimated as ½(⟨n̂_{i↑}⟩ − ⟨n̂_{i↓}⟩) with target (eps, delta).
fn sz_estimate(
    cfg: &QuenchConfig,
    u: &GaussianMap,
    psi: &ApsgState,
    site: usize,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<(C64, f64, u64)> {
    let atoms = [
        Atom {
            coeff: 0.5,
            modes: vec![cfg.lattice.mode_up(site)],
        },
        Atom {
            coeff: -0.5,
            modes: vec![cfg.lattice.mode_down(site)],
        },
    ];
    let (v, var, k, _) = estimate_atom_family(&atoms, u, psi, eps, delta, seed, exec)?;
    Ok((v, var, k))
}

fn two_point_atoms(cfg: &QuenchConfig, i: usize, j: usize, coeff: f64) -> Vec<Atom> {
    let (iu, id) = (cfg.lattice.mode_up(i), cfg.lattice.mode_down(i));
    let (ju, jd) = (cfg.lattice.mode_up(j), cfg.lattice.mode_down(j));
    vec![
        Atom {
            coeff,
            modes: vec![iu, ju],
        },
        Atom {
            coeff: -coeff,
            modes: vec![iu, jd],
        },
        Atom {
            coeff: -coeff,
            modes: vec![id, ju],
        },
        Atom {
            coeff,
            modes: vec![id, jd],
        },
    ]
}

/// C_zz(i,j;t) = 4(⟨Ŝ_i^zŜ_j^z⟩ − ⟨Ŝ_i^z⟩⟨Ŝ_j^z⟩).
///
/// The quadratic term is linearized with |Ŝ^z| ≤ ½: half the budget goes
/// to the four two-point correlators, half to the two single-site terms.
#[allow(clippy::too_many_arguments)]
pub fn spin_correlator_czz(
    cfg: &QuenchConfig,
    i: usize,
    j: usize,
    t: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    validate_budget(eps, delta)?;
    if i == j {
        return Err(Error::validation(
            "connected spin correlator requires distinct sites",
        ));
    }
    let psi = build_initial_state(cfg)?;
    let u = cfg.free_evolution(t)?;
    // 4⟨Sz_i Sz_j⟩ = Σ_{σσ'} ± ⟨n_{iσ} n_{jσ'}⟩
    let atoms = two_point_atoms(cfg, i, j, 1.0);
    let (two_pt, var2, k2, bound2) =
        estimate_atom_family(&atoms, &u, &psi, eps / 2.0, delta / 2.0, seed, exec)?;
    // product term: |∂C/∂s_i| = 4|s_j| ≤ 2 per factor; e_z = ε/9 each keeps
    // 4(e_i/2 + e_j/2) + 4 e_i e_j below ε/2
    let e_z = eps / 9.0;
    let (szi, vari, ki) = sz_estimate(cfg, &u, &psi, i, e_z, delta / 4.0, derive_seed(seed, 101), exec)?;
    let (szj, varj, kj) = sz_estimate(cfg, &u, &psi, j, e_z, delta / 4.0, derive_seed(seed, 102), exec)?;
    let value = two_pt - szi * szj * 4.0;
    let var = var2
        + (4.0 * szj.norm()).powi(2) * vari
        + (4.0 * szi.norm()).powi(2) * varj;
    Ok(Estimate {
        value,
        std_error: var.sqrt(),
        samples: k2 + ki + kj,
        epsilon: eps,
        delta,
        bound: bound2 + 1.0,
        scale: 1.0,
        method: Method::Composite,
        bias: 0.0,
        gamma: psi.gamma(),
        op_norm_pow: 1.0,
    })
}

/// n_triplets(t) = (2/L) Σ_{⟨i,j⟩} C_zz(i,j;t).
///
/// The two-point parts of all links share one jointly budgeted Hoeffding
/// family, and each site's ⟨Ŝ^z⟩ is estimated once and reused by every
/// link containing it.
pub fn triplet_density(
    cfg: &QuenchConfig,
    t: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    validate_budget(eps, delta)?;
    let psi = build_initial_state(cfg)?;
    let u = cfg.free_evolution(t)?;
    let l = cfg.lattice.num_sites() as f64;
    let links: Vec<(usize, usize)> = cfg.lattice.links().iter().map(|lk| (lk.i, lk.j)).collect();
    if links.is_empty() {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            std_error: 0.0,
            samples: 0,
            epsilon: eps,
            delta,
            bound: 0.0,
            scale: 1.0,
            method: Method::Exact,
            bias: 0.0,
            gamma: psi.gamma(),
            op_norm_pow: 1.0,
        });
    }
    let scale_per_link = 2.0 / l;
    let mut atoms = Vec::new();
    for &(i, j) in &links {
        atoms.extend(two_point_atoms(cfg, i, j, scale_per_link));
    }
    let (two_pt, var2, k2, bound2) =
        estimate_atom_family(&atoms, &u, &psi, eps / 2.0, delta / 2.0, seed, exec)?;

    // Σz budget: the linearized product error across all links is
    // (2/L)·4·Σ_links (|s_j| e_i + |s_i| e_j) ≤ (4/L)·e_z·Σ_i deg_i.
    let degree_sum: usize = 2 * links.len();
    let e_z = eps * l / (8.0 * degree_sum as f64);
    let mut sz = vec![(Complex64::new(0.0, 0.0), 0.0f64, 0u64); cfg.lattice.num_sites()];
    let mut needed = vec![false; cfg.lattice.num_sites()];
    for &(i, j) in &links {
        needed[i] = true;
        needed[j] = true;
    }
    let delta_z = delta / (2.0 * cfg.lattice.num_sites() as f64);
    let mut kz = 0u64;
    for site in 0..cfg.lattice.num_sites() {
        if needed[site] {
            let est = sz_estimate(
                cfg,
                &u,
                &psi,
                site,
                e_z,
                delta_z,
                derive_seed(seed, 200 + site as u64),
                exec,
            )?;
            kz += est.2;
            sz[site] = est;
        }
    }
    let mut value = two_pt;
    let mut var = var2;
    for &(i, j) in &links {
        let (si, vi, _) = sz[i];
        let (sj, vj, _) = sz[j];
        value -= si * sj * 4.0 * scale_per_link;
        var += (scale_per_link * 4.0 * sj.norm()).powi(2) * vi
            + (scale_per_link * 4.0 * si.norm()).powi(2) * vj;
    }
    Ok(Estimate {
        value,
        std_error: var.sqrt(),
        samples: k2 + kz,
        epsilon: eps,
        delta,
        bound: bound2 + 1.0,
        scale: 1.0,
        method: Method::Composite,
        bias: 0.0,
        gamma: psi.gamma(),
        op_norm_pow: 1.0,
    })
}

/// Sample counts for the Wilson-loop estimator at contour length |C|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonComplexity {
    /// ⌈2·(4/3)^{|C|}·ln(2/δ)/ε²⌉.
    pub hoeffding: u128,
    /// The benchmark-calibrated heuristic 10³·(4/3)^{|C|−22}.
    pub calibrated: f64,
}

pub fn wilson_sample_complexity(
    contour_len: usize,
    eps: f64,
    delta: f64,
) -> Result<WilsonComplexity> {
    if contour_len == 0 {
        return Err(Error::validation("contour length must be positive"));
    }
    validate_budget(eps, delta)?;
    let b2 = (4.0f64 / 3.0).powi(contour_len as i32);
    let k = 2.0 * b2 * (2.0f64 / delta).ln() / (eps * eps);
    let hoeffding = if k.is_finite() && k < u128::MAX as f64 {
        k.ceil() as u128
    } else {
        u128::MAX
    };
    let calibrated = 1e3 * (4.0f64 / 3.0).powi(contour_len as i32 - 22);
    Ok(WilsonComplexity {
        hoeffding,
        calibrated,
    })
}

/// Worst-case and typical-scale sampling envelopes for the real-time
/// Hubbard–Stratonovich estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEnvelope {
    pub b_worst: f64,
    pub b_typ: f64,
    pub k_worst: u128,
    pub k_typ: u128,
    /// a = Re λ(W, Δt).
    pub a: f64,
}

/// B_worst = C_T·exp(2|a|·n·r) with n = t/Δt, and the random-walk proxy
/// B_typ = exp(c·|a|·L·√(t/Δt)) with c = √(2/π); K(B) = ⌈2B²ln(2/δ)/ε²⌉.
#[allow(clippy::too_many_arguments)]
pub fn hs_complexity_envelope(
    w: f64,
    t: f64,
    dt: f64,
    l: usize,
    r: usize,
    c_t: f64,
    eps: f64,
    delta: f64,
) -> Result<ComplexityEnvelope> {
    if dt <= 0.0 {
        return Err(Error::validation("time step must be positive"));
    }
    if t < 0.0 {
        return Err(Error::validation("time must be nonnegative"));
    }
    validate_budget(eps, delta)?;
    let a = hirsch_lambda(w, dt).re;
    let n = t / dt;
    let b_worst = c_t * (2.0 * a.abs() * n * r as f64).exp();
    let c = (2.0 / core::f64::consts::PI).sqrt();
    let b_typ = (c * a.abs() * l as f64 * (t / dt).sqrt()).exp();
    let k_of = |b: f64| -> u128 {
        let k = 2.0 * b * b * (2.0f64 / delta).ln() / (eps * eps);
        if k.is_finite() && k < u128::MAX as f64 {
            k.ceil() as u128
        } else {
            u128::MAX
        }
    };
    Ok(ComplexityEnvelope {
        b_worst,
        b_typ,
        k_worst: k_of(b_worst),
        k_typ: k_of(b_typ),
        a,
    })
}
