//! Off-diagonal transition elements from one-body sources: transition 1-
//! and 2-RDM elements and full Hamiltonian matrix elements in low-rank
//! (sum-of-squares) form.
//!
//! Source derivatives are taken by central differences of the overlap
//! kernel with Richardson refinement over steps (h, h/2). All kernel
//! variants of one derivative are evaluated on the same (x, b) draw, so
//! the difference quotients stay bounded shot by shot; the reported bias
//! is the Richardson residual against the half-step difference.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::apsg::ApsgState;
use crate::error::{Error, Result};
use crate::estimators::shot::{
    estimate_with_family_bounds, gather_dense, FamilyState, KernelFamily,
};
use crate::estimators::{Estimate, Method};
use crate::gaussian::GaussianMap;
use crate::rng::derive_seed;
use crate::sampling::{validate_budget, Executor};
use crate::{CMatrix, C64};

/// Default finite-difference step.
pub const SOURCE_STEP: f64 = 1e-4;

/// Fixed set of dense kernels combined per shot with Richardson weights.
struct FdFamily {
    kernels: Vec<CMatrix>,
    coeffs: Vec<C64>,
    aux_coeffs: Vec<C64>,
    norm_sup: f64,
}

impl FdFamily {
    fn new(kernels: Vec<CMatrix>, coeffs: Vec<C64>, aux_coeffs: Vec<C64>) -> Self {
        let norm_sup = kernels
            .iter()
            .map(crate::gaussian::operator_norm)
            .fold(0.0, f64::max);
        FdFamily {
            kernels,
            coeffs,
            aux_coeffs,
            norm_sup,
        }
    }
}

impl KernelFamily for FdFamily {
    fn arity(&self) -> usize {
        self.kernels.len()
    }
    fn num_modes(&self) -> usize {
        self.kernels[0].nrows()
    }
    fn kernel_coeff(&self, kappa: usize) -> C64 {
        self.coeffs[kappa]
    }
    fn aux_coeff(&self, kappa: usize) -> C64 {
        self.aux_coeffs[kappa]
    }
    fn has_aux(&self) -> bool {
        true
    }
    fn gather(&self, _s: &FamilyState, kappa: usize, rows: &[usize], col: usize, out: &mut [C64]) {
        gather_dense(&self.kernels[kappa], rows, col, out);
    }
    fn norm_sup(&self) -> f64 {
        self.norm_sup
    }
    fn prefactor_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// Single-particle matrix of e^{s·Ê_pq}: I + s·E_pq off the diagonal,
/// e^s on the diagonal entry for p = q.
fn source_exponential(m: usize, p: usize, q: usize, s: f64) -> CMatrix {
    let mut e = CMatrix::identity(m, m);
    if p == q {
        e[(p, p)] = Complex64::new(s.exp(), 0.0);
    } else {
        e[(p, q)] = Complex64::new(s, 0.0);
    }
    e
}

/// Pointwise bound on a shared-draw derivative shot. Per sample the pf
/// value is analytic in the source strength, so a Cauchy bound on the disk
/// of radius ρ controls every difference quotient that stays inside it:
/// |D| ≤ max_{|z|≤ρ}|f(z)|/ρ per derivative order, and the Richardson
/// combination adds a factor 5/3. `grow` bounds ‖kernel(z)‖/‖kernel(0)‖ at
/// |z| = ρ.
fn derivative_shot_bound(
    norm_lr_pow: f64,
    grow_at_rho: f64,
    rho: f64,
    order: u32,
    two_n: i32,
) -> f64 {
    let f_max = norm_lr_pow * grow_at_rho.powi(two_n);
    5.0 / 3.0 * f_max / rho.powi(order as i32)
}

/// Run an FD family with an explicit pointwise shot bound (the raw
/// Richardson prefactor sums are vacuous under shared draws).
#[allow(clippy::too_many_arguments)]
fn run_fd_family(
    family: &FdFamily,
    phi: &ApsgState,
    psi: &ApsgState,
    shot_bound: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    let bra_bound = crate::estimators::diagonal::correlator_atom_bound(phi, psi);
    let b_pt = shot_bound * bra_bound;
    estimate_with_family_bounds(
        family, phi, psi, b_pt, b_pt, 1.0, eps, delta, seed, exec,
    )
}

/// Indices of a transition RDM element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdmIndices {
    /// ⟨Φ|Ĝ_L† ĉ_p†ĉ_q Ĝ_R|Ψ⟩.
    One(usize, usize),
    /// ⟨Φ|Ĝ_L† ĉ_p†ĉ_q†ĉ_sĉ_r Ĝ_R|Ψ⟩.
    Two(usize, usize, usize, usize),
}

/// Additive-error estimate of a transition RDM element by differentiating
/// the sourced overlap kernel at zero source.
///
/// Statistical error is targeted at ε; the finite-difference bias is
/// reported separately in `Estimate::bias` as the Richardson residual.
#[allow(clippy::too_many_arguments)]
pub fn transition_rdm_element(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    indices: RdmIndices,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    validate_budget(eps, delta)?;
    let m = gl.dim();
    if gr.dim() != m {
        return Err(Error::validation("left/right map dimensions disagree"));
    }
    let check = |i: usize| -> Result<()> {
        if i >= m {
            Err(Error::validation(format!(
                "RDM index {i} out of range for {m} modes"
            )))
        } else {
            Ok(())
        }
    };
    let h = SOURCE_STEP;
    let ladj = gl.matrix().adjoint();
    match indices {
        RdmIndices::One(p, q) => {
            check(p)?;
            check(q)?;
            // D(h) = [Z(+h) − Z(−h)]/2h, value = (4 D(h/2) − D(h))/3
            let steps = [h, -h, h / 2.0, -h / 2.0];
            let kernels: Vec<CMatrix> = steps
                .iter()
                .map(|&s| &ladj * source_exponential(m, p, q, s) * gr.matrix())
                .collect();
            let coeffs = vec![
                Complex64::new(-1.0 / (6.0 * h), 0.0),
                Complex64::new(1.0 / (6.0 * h), 0.0),
                Complex64::new(4.0 / (3.0 * h), 0.0),
                Complex64::new(-4.0 / (3.0 * h), 0.0),
            ];
            let aux = vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0 / h, 0.0),
                Complex64::new(-1.0 / h, 0.0),
            ];
            let family = FdFamily::new(kernels, coeffs, aux);
            let two_n = psi.particle_number() as i32;
            let rho = 1.0 / (two_n as f64).max(1.0);
            let norm_lr_pow = (gl.op_norm() * gr.op_norm()).powi(two_n);
            let bound = derivative_shot_bound(norm_lr_pow, 1.0 + rho, rho, 1, two_n);
            run_fd_family(&family, phi, psi, bound, eps, delta, seed, exec)
        }
        RdmIndices::Two(p, q, r, s) => {
            check(p)?;
            check(q)?;
            check(r)?;
            check(s)?;
            let correction_needed = r == q;
            let (eps_main, delta_main) = if correction_needed {
                (eps / 2.0, delta / 2.0)
            } else {
                (eps, delta)
            };
            // cross difference over ordered sources e^{s₁Ê_pr} e^{s₂Ê_qs}
            let mut kernels = Vec::with_capacity(8);
            let mut coeffs = Vec::with_capacity(8);
            let mut aux = Vec::with_capacity(8);
            for &(step, w_val, w_aux) in &[
                (h, -1.0 / (12.0 * h * h), 0.0),
                (h / 2.0, 4.0 / (3.0 * h * h), 1.0 / (h * h)),
            ] {
                for &(s1, s2) in &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let e1 = source_exponential(m, p, r, s1 * step);
                    let e2 = source_exponential(m, q, s, s2 * step);
                    kernels.push(&ladj * e1 * e2 * gr.matrix());
                    let parity = s1 * s2;
                    coeffs.push(Complex64::new(parity * w_val, 0.0));
                    aux.push(Complex64::new(parity * w_aux, 0.0));
                }
            }
            let family = FdFamily::new(kernels, coeffs, aux);
            let two_n = psi.particle_number() as i32;
            let rho = 1.0 / (two_n as f64).max(1.0);
            let norm_lr_pow = (gl.op_norm() * gr.op_norm()).powi(two_n);
            // two sources: the kernel grows as (1+ρ)² on the bidisk
            let bound =
                derivative_shot_bound(norm_lr_pow, (1.0 + rho) * (1.0 + rho), rho, 2, two_n);
            let mut est =
                run_fd_family(&family, phi, psi, bound, eps_main, delta_main, seed, exec)?;
            if correction_needed {
                let corr = transition_rdm_element(
                    gl,
                    gr,
                    phi,
                    psi,
                    RdmIndices::One(p, s),
                    eps / 2.0,
                    delta / 2.0,
                    derive_seed(seed, 1),
                    exec,
                )?;
                est.value -= corr.value;
                est.std_error = (est.std_error * est.std_error
                    + corr.std_error * corr.std_error)
                    .sqrt();
                est.samples += corr.samples;
                est.bias += corr.bias;
                est.method = Method::Composite;
            }
            Ok(est)
        }
    }
}

/// One-body-operator factor of a sum-of-squares Hamiltonian.
#[derive(Debug, Clone)]
pub struct SquaredFactor {
    pub lambda: f64,
    pub matrix: CMatrix,
}

fn require_hermitian(mat: &CMatrix, what: &str) -> Result<()> {
    let dev = (mat - mat.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let scale = mat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if dev > 1e-10 * scale {
        return Err(Error::validation(format!(
            "{what} must be Hermitian (max deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// First χ derivative: ⟨Φ|Ĝ_L† Ô(K) Ĝ_R|Ψ⟩ = (1/i)·dχ/dθ at 0 with
/// χ(θ) the overlap through e^{iθK}.
fn one_body_term(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    k_mat: &CMatrix,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    let h = SOURCE_STEP;
    let ladj = gl.matrix().adjoint();
    let steps = [h, -h, h / 2.0, -h / 2.0];
    let kernels: Vec<CMatrix> = steps
        .iter()
        .map(|&t| {
            let e = GaussianMap::expm_hermitian(k_mat, Complex64::new(0.0, t))
                .expect("validated Hermitian generator");
            &ladj * e.matrix() * gr.matrix()
        })
        .collect();
    // (1/i)·Richardson first derivative
    let mi = Complex64::new(0.0, -1.0);
    let coeffs = vec![
        mi * (-1.0 / (6.0 * h)),
        mi * (1.0 / (6.0 * h)),
        mi * (4.0 / (3.0 * h)),
        mi * (-4.0 / (3.0 * h)),
    ];
    let aux = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        mi * (1.0 / h),
        mi * (-1.0 / h),
    ];
    let family = FdFamily::new(kernels, coeffs, aux);
    let two_n = psi.particle_number() as i32;
    let k_norm = crate::gaussian::operator_norm(k_mat);
    let rho = 1.0 / (two_n as f64 * k_norm).max(1.0);
    let norm_lr_pow = (gl.op_norm() * gr.op_norm()).powi(two_n);
    // ‖e^{izK}‖ ≤ e^{ρ‖K‖} on |z| ≤ ρ
    let bound = derivative_shot_bound(norm_lr_pow, (rho * k_norm).exp(), rho, 1, two_n);
    run_fd_family(&family, phi, psi, bound, eps, delta, seed, exec)
}

/// Squared-operator term ⟨Φ|Ĝ_L† Ô(K)² Ĝ_R|Ψ⟩ = −d²χ/dθ² at 0.
fn squared_term(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    k_mat: &CMatrix,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    let h = SOURCE_STEP;
    let ladj = gl.matrix().adjoint();
    let steps = [h, -h, h / 2.0, -h / 2.0, 0.0];
    let kernels: Vec<CMatrix> = steps
        .iter()
        .map(|&t| {
            let e = GaussianMap::expm_hermitian(k_mat, Complex64::new(0.0, t))
                .expect("validated Hermitian generator");
            &ladj * e.matrix() * gr.matrix()
        })
        .collect();
    let h2 = h * h;
    // −(4 D₂(h/2) − D₂(h))/3
    let coeffs = vec![
        Complex64::new(1.0 / (3.0 * h2), 0.0),
        Complex64::new(1.0 / (3.0 * h2), 0.0),
        Complex64::new(-16.0 / (3.0 * h2), 0.0),
        Complex64::new(-16.0 / (3.0 * h2), 0.0),
        Complex64::new(10.0 / h2, 0.0),
    ];
    // auxiliary: −D₂(h/2)
    let aux = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-4.0 / h2, 0.0),
        Complex64::new(-4.0 / h2, 0.0),
        Complex64::new(8.0 / h2, 0.0),
    ];
    let family = FdFamily::new(kernels, coeffs, aux);
    let two_n = psi.particle_number() as i32;
    let k_norm = crate::gaussian::operator_norm(k_mat);
    let rho = 1.0 / (two_n as f64 * k_norm).max(1.0);
    let norm_lr_pow = (gl.op_norm() * gr.op_norm()).powi(two_n);
    let bound =
        2.0 * derivative_shot_bound(norm_lr_pow, (rho * k_norm).exp(), rho, 2, two_n);
    run_fd_family(&family, phi, psi, bound, eps, delta, seed, exec)
}

/// Additive-error estimate of the transition Hamiltonian matrix element
/// ⟨Φ|Ĝ_L†(E₀ + Σ h_pq ĉ_p†ĉ_q + ½Σ_ℓ λ_ℓ Ô_ℓ²)Ĝ_R|Ψ⟩ with
/// Ô_ℓ = Σ (L_ℓ)_pq ĉ_p†ĉ_q. The error budget is split evenly across the
/// active terms.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian_transition_element(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    e0: f64,
    h1: Option<&CMatrix>,
    factors: &[SquaredFactor],
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    validate_budget(eps, delta)?;
    let m = gl.dim();
    if gr.dim() != m {
        return Err(Error::validation("left/right map dimensions disagree"));
    }
    if let Some(h) = h1 {
        if h.nrows() != m || h.ncols() != m {
            return Err(Error::validation("one-body matrix must be M×M"));
        }
        require_hermitian(h, "one-body term")?;
    }
    for (ell, f) in factors.iter().enumerate() {
        if f.matrix.nrows() != m || f.matrix.ncols() != m {
            return Err(Error::validation(format!(
                "factor {ell} must be an M×M one-body matrix"
            )));
        }
        require_hermitian(&f.matrix, "squared factor")?;
    }
    let n_terms = usize::from(e0 != 0.0) + usize::from(h1.is_some()) + factors.len();
    if n_terms == 0 {
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
    let eps_i = eps / n_terms as f64;
    let delta_i = delta / n_terms as f64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut var = 0.0f64;
    let mut samples = 0u64;
    let mut bias = 0.0f64;
    let mut bound = 0.0f64;
    let mut stream = 0u64;
    if e0 != 0.0 {
        let kernel = GaussianMap::compose(&gl.adjoint(), gr)?;
        let s = super::overlap::estimate_apsg_overlap(
            &kernel,
            phi,
            psi,
            eps_i / e0.abs().max(1.0),
            delta_i,
            derive_seed(seed, stream),
            exec,
        )?;
        value += s.value * e0;
        var += (e0 * s.std_error).powi(2);
        samples += s.samples;
        bound += e0.abs() * s.bound;
        stream += 1;
    }
    if let Some(hmat) = h1 {
        let t = one_body_term(
            gl,
            gr,
            phi,
            psi,
            hmat,
            eps_i,
            delta_i,
            derive_seed(seed, stream),
            exec,
        )?;
        value += t.value;
        var += t.std_error * t.std_error;
        samples += t.samples;
        bias += t.bias;
        bound += t.bound;
        stream += 1;
    }
    for f in factors {
        let weight = 0.5 * f.lambda;
        if weight == 0.0 {
            continue;
        }
        let t = squared_term(
            gl,
            gr,
            phi,
            psi,
            &f.matrix,
            eps_i / weight.abs().max(1.0),
            delta_i,
            derive_seed(seed, stream),
            exec,
        )?;
        value += t.value * weight;
        var += (weight * t.std_error).powi(2);
        samples += t.samples;
        bias += weight.abs() * t.bias;
        bound += weight.abs() * t.bound;
        stream += 1;
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
        bias,
        gamma: psi.gamma(),
        op_norm_pow: 1.0,
    })
}
