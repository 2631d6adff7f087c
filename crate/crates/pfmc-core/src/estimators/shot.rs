//! The mixed-Pfaffian one-shot variable and the shared sampling driver.
//!
//! One sample: restrict the kernel to the occupied output rows, assemble
//! A(b) = Σ_t b_t XᵀW̃_tX from the ket's pair slots, and return
//! pf(A(b))·Π_t b_t. The random sign vector b implements the exact Fourier
//! filter isolating the one-pair-per-block coefficient; bra states enter by
//! sampling a slot pattern x ∼ Π|v|² with importance weight Π 1/v and the
//! reordering sign of the chosen creation sequence.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;

use crate::apsg::ApsgState;
use crate::error::{Error, Result};
use crate::estimators::{Estimate, Method};
use crate::fock::FockState;
use crate::gaussian::GaussianMap;
use crate::oracle::sort_sign;
use crate::pfaffian::pfaffian_in_place;
use crate::rng::{draw_categorical, draw_signs, sample_rng, SampleSeed};
use crate::sampling::{choose_plan, run_plan, Executor, Plan, ShotFn};
use crate::{CMatrix, C64};

/// Ket-side sampling context: slots with weights rescaled by γ_t so that
/// every block two-form has unit operator norm.
pub(crate) struct KetCtx {
    /// (mode_a, mode_b, w/γ_t) per slot, flattened with block boundaries.
    slots: Vec<(usize, usize, C64)>,
    block_ranges: Vec<(usize, usize)>,
    pub gamma: f64,
    pub n_blocks: usize,
    pub particle_number: usize,
}

impl KetCtx {
    pub fn new(psi: &ApsgState) -> Self {
        let mut slots = Vec::new();
        let mut block_ranges = Vec::new();
        for block in psi.blocks() {
            let start = slots.len();
            let gamma_t = block.gamma();
            for j in 0..block.num_slots() {
                let (a, b) = block.slot_modes(j);
                slots.push((a, b, block.weight(j) / gamma_t));
            }
            block_ranges.push((start, slots.len()));
        }
        KetCtx {
            slots,
            block_ranges,
            gamma: psi.gamma(),
            n_blocks: psi.num_blocks(),
            particle_number: psi.particle_number(),
        }
    }
}

/// Bra-side sampling context: per-block cumulative |v|² tables.
pub(crate) struct BraCtx {
    blocks: Vec<BraBlock>,
    /// Π_t 1/min_j |v_{t,j}| over nonzero weights.
    pub inv_min_weight_prod: f64,
}

struct BraBlock {
    slots: Vec<(usize, usize)>,
    weights: Vec<C64>,
    cumulative: Vec<f64>,
}

impl BraCtx {
    pub fn new(phi: &ApsgState) -> Self {
        let mut blocks = Vec::new();
        let mut inv_min = 1.0f64;
        for block in phi.blocks() {
            inv_min /= block.min_nonzero_weight();
            blocks.push(BraBlock {
                slots: (0..block.num_slots()).map(|j| block.slot_modes(j)).collect(),
                weights: block.weights().to_vec(),
                cumulative: crate::apsg::cumulative_probabilities(block),
            });
        }
        BraCtx {
            blocks,
            inv_min_weight_prod: inv_min,
        }
    }
}

/// Reusable per-chunk buffers.
pub(crate) struct Scratch {
    a: CMatrix,
    col_a: Vec<C64>,
    col_b: Vec<C64>,
    rows: Vec<usize>,
    seq: Vec<usize>,
    signs: Vec<i8>,
}

impl Scratch {
    pub fn new(two_n: usize, n_blocks: usize) -> Self {
        Scratch {
            a: CMatrix::zeros(two_n, two_n),
            col_a: vec![Complex64::zero(); two_n],
            col_b: vec![Complex64::zero(); two_n],
            rows: vec![0; two_n],
            seq: vec![0; two_n],
            signs: vec![0; n_blocks],
        }
    }

    pub fn rows_mut(&mut self) -> &mut [usize] {
        &mut self.rows
    }

    pub fn signs_mut(&mut self) -> &mut [i8] {
        &mut self.signs
    }
}

/// One-shot with the output rows already fixed in `scratch.rows` and signs
/// in `scratch.signs` (the fixed-Fock-output path).
pub(crate) fn filtered_pfaffian_fixed_rows(
    family: &dyn KernelFamily,
    ket: &KetCtx,
    scratch: &mut Scratch,
) -> C64 {
    let state = FamilyState::default();
    sign_filtered_pfaffian(family, &state, 0, ket, scratch)
}

/// A family of kernels sampled per shot. `arity` kernels are evaluated on
/// the same (x, b) draw and combined linearly; the per-sample `draw`
/// returns a global coefficient.
pub(crate) trait KernelFamily: Sync {
    fn arity(&self) -> usize {
        1
    }
    fn num_modes(&self) -> usize;
    /// Per-sample kernel randomness; the default is deterministic.
    fn draw(&self, _rng: &mut ChaCha8Rng, _state: &mut FamilyState) -> C64 {
        Complex64::new(1.0, 0.0)
    }
    fn kernel_coeff(&self, _kappa: usize) -> C64 {
        Complex64::new(1.0, 0.0)
    }
    /// out[r] = K_κ[rows[r], col].
    fn gather(
        &self,
        state: &FamilyState,
        kappa: usize,
        rows: &[usize],
        col: usize,
        out: &mut [C64],
    );
    /// sup over samples and κ of ‖K_κ‖_op.
    fn norm_sup(&self) -> f64;
    /// sup over samples of |coeff| · Σ_κ |kernel_coeff(κ)|.
    fn prefactor_sum(&self) -> f64;
    /// Weight of kernel κ in the auxiliary (bias-tracking) combination.
    fn aux_coeff(&self, _kappa: usize) -> C64 {
        Complex64::zero()
    }
    fn has_aux(&self) -> bool {
        false
    }
}

/// Per-sample kernel state written by `KernelFamily::draw`.
#[derive(Default)]
pub(crate) struct FamilyState {
    pub diag: Vec<C64>,
    pub bits: u64,
    pub mats: Vec<CMatrix>,
}

/// Dense column gather.
pub(crate) fn gather_dense(mat: &CMatrix, rows: &[usize], col: usize, out: &mut [C64]) {
    for (o, &r) in out.iter_mut().zip(rows) {
        *o = mat[(r, col)];
    }
}

/// Column gather of left†·diag·right without forming the product.
pub(crate) fn gather_sandwich(
    left: &CMatrix,
    diag: &[C64],
    right: &CMatrix,
    rows: &[usize],
    col: usize,
    out: &mut [C64],
) {
    for o in out.iter_mut() {
        *o = Complex64::zero();
    }
    let m = left.nrows();
    for mm in 0..m {
        let rc = diag[mm] * right[(mm, col)];
        if rc.is_zero() {
            continue;
        }
        for (o, &r) in out.iter_mut().zip(rows) {
            *o += left[(mm, r)].conj() * rc;
        }
    }
}

/// A single fixed dense kernel.
pub(crate) struct FixedKernel<'a> {
    pub mat: &'a CMatrix,
    pub op_norm: f64,
}

impl KernelFamily for FixedKernel<'_> {
    fn num_modes(&self) -> usize {
        self.mat.nrows()
    }
    fn gather(&self, _s: &FamilyState, _k: usize, rows: &[usize], col: usize, out: &mut [C64]) {
        gather_dense(self.mat, rows, col, out);
    }
    fn norm_sup(&self) -> f64 {
        self.op_norm
    }
    fn prefactor_sum(&self) -> f64 {
        1.0
    }
}

/// pf(Σ_t b_t XᵀW̃_tX)·Π_t b_t for kernel κ of the family, with the output
/// restriction already in `scratch.rows` (sorted ascending).
fn sign_filtered_pfaffian(
    family: &dyn KernelFamily,
    state: &FamilyState,
    kappa: usize,
    ket: &KetCtx,
    scratch: &mut Scratch,
) -> C64 {
    let two_n = scratch.rows.len();
    scratch.a.fill(Complex64::zero());
    let mut sign_prod = 1.0f64;
    for (t, &(start, end)) in ket.block_ranges.iter().enumerate() {
        let bt = scratch.signs[t] as f64;
        sign_prod *= bt;
        for &(ma, mb, w) in &ket.slots[start..end] {
            family.gather(state, kappa, &scratch.rows, ma, &mut scratch.col_a);
            family.gather(state, kappa, &scratch.rows, mb, &mut scratch.col_b);
            let coeff = w * bt;
            for r in 0..two_n {
                let ua = scratch.col_a[r];
                let ub = scratch.col_b[r];
                for c_idx in (r + 1)..two_n {
                    scratch.a[(r, c_idx)] +=
                        coeff * (ua * scratch.col_b[c_idx] - ub * scratch.col_a[c_idx]);
                }
            }
        }
    }
    for r in 0..two_n {
        for c_idx in (r + 1)..two_n {
            scratch.a[(c_idx, r)] = -scratch.a[(r, c_idx)];
        }
    }
    pfaffian_in_place(&mut scratch.a) * sign_prod
}

/// Draw a bra slot pattern: fills `scratch.seq` (creation order) and
/// `scratch.rows` (sorted), returning (reordering sign, Π_t 1/v_{t,x_t}).
fn draw_bra_pattern(bra: &BraCtx, rng: &mut ChaCha8Rng, scratch: &mut Scratch) -> (f64, C64) {
    let mut inv_weight = Complex64::new(1.0, 0.0);
    let mut pos = 0;
    for block in &bra.blocks {
        let j = draw_categorical(rng, &block.cumulative);
        let (a, b) = block.slots[j];
        scratch.seq[pos] = a;
        scratch.seq[pos + 1] = b;
        pos += 2;
        inv_weight /= block.weights[j];
    }
    let sgn = sort_sign(&scratch.seq);
    scratch.rows.copy_from_slice(&scratch.seq);
    scratch.rows.sort_unstable();
    (sgn, inv_weight)
}

/// One full APSG-bra sample against the kernel family; returns the main
/// combination and the auxiliary combination.
fn apsg_shot(
    family: &dyn KernelFamily,
    bra: &BraCtx,
    ket: &KetCtx,
    rng: &mut ChaCha8Rng,
    state: &mut FamilyState,
    scratch: &mut Scratch,
) -> (C64, C64) {
    let coeff = family.draw(rng, state);
    let (sgn, inv_weight) = draw_bra_pattern(bra, rng, scratch);
    draw_signs(rng, &mut scratch.signs);
    let mut val = Complex64::zero();
    let mut aux = Complex64::zero();
    let track_aux = family.has_aux();
    for kappa in 0..family.arity() {
        let z = sign_filtered_pfaffian(family, state, kappa, ket, scratch);
        val += family.kernel_coeff(kappa) * z;
        if track_aux {
            aux += family.aux_coeff(kappa) * z;
        }
    }
    let pre = coeff * inv_weight * sgn * ket.gamma;
    (pre * val, pre * aux)
}

/// Spec-level one-shot: pf(Σ_t b_t B_t(x))·Π_t b_t with the ket two-forms
/// rescaled to unit operator norm per block. γ·E_b[·] recovers ⟨x|Ĝ|Ψ⟩.
pub fn one_shot_fock(
    g: &GaussianMap,
    psi: &ApsgState,
    x: &FockState,
    b: &[i8],
) -> Result<C64> {
    if g.dim() != psi.num_modes() || x.num_modes() != psi.num_modes() {
        return Err(Error::validation(
            "map, state, and output must share the mode count",
        ));
    }
    if b.len() != psi.num_blocks() {
        return Err(Error::validation(format!(
            "sign vector length {} does not match {} blocks",
            b.len(),
            psi.num_blocks()
        )));
    }
    if b.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::validation("sign vector entries must be ±1"));
    }
    if x.particle_number() != psi.particle_number() {
        return Ok(Complex64::zero());
    }
    let ket = KetCtx::new(psi);
    let family = FixedKernel {
        mat: g.matrix(),
        op_norm: g.op_norm(),
    };
    let two_n = psi.particle_number();
    let mut scratch = Scratch::new(two_n, psi.num_blocks());
    scratch.rows.copy_from_slice(&x.occupied_modes());
    scratch.signs.copy_from_slice(b);
    let state = FamilyState::default();
    Ok(sign_filtered_pfaffian(&family, &state, 0, &ket, &mut scratch))
}

/// Shared estimator driver: budgets, runs, and packages an [`Estimate`].
///
/// The additive-error guarantee is at ε·`scale`; `extra_bias` is carried
/// into the result for derivative estimators.
#[allow(clippy::too_many_arguments)]
pub(crate) fn estimate_with_family(
    family: &dyn KernelFamily,
    phi: &ApsgState,
    psi: &ApsgState,
    scale: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    crate::sampling::validate_budget(eps, delta)?;
    if phi.num_modes() != psi.num_modes() {
        return Err(Error::validation(format!(
            "bra has {} modes, ket has {}",
            phi.num_modes(),
            psi.num_modes()
        )));
    }
    if family.num_modes() != psi.num_modes() {
        return Err(Error::validation(format!(
            "kernel on {} modes applied to {}-mode states",
            family.num_modes(),
            psi.num_modes()
        )));
    }
    let norm_pow = family
        .norm_sup()
        .powi(psi.particle_number() as i32);
    if phi.particle_number() != psi.particle_number() {
        return Ok(Estimate {
            value: Complex64::zero(),
            std_error: 0.0,
            samples: 0,
            epsilon: eps,
            delta,
            bound: 0.0,
            scale,
            method: Method::Exact,
            bias: 0.0,
            gamma: psi.gamma(),
            op_norm_pow: norm_pow,
        });
    }
    let bra = BraCtx::new(phi);
    let ket = KetCtx::new(psi);
    let b2 = family.prefactor_sum() * norm_pow;
    let b_pt = b2 * ket.gamma * bra.inv_min_weight_prod;
    let (plan, bound) = choose_plan(b_pt, b2, scale, eps, delta);
    let stats = run_apsg_plan(family, &bra, &ket, plan, seed, exec);
    let bias = if family.has_aux() {
        (stats.value - stats.aux_mean).norm()
    } else {
        0.0
    };
    Ok(Estimate {
        value: stats.value,
        std_error: stats.std_error,
        samples: stats.k,
        epsilon: eps,
        delta,
        bound,
        scale,
        method: match plan {
            Plan::Mean { .. } => Method::Mean,
            Plan::MedianOfMeans { .. } => Method::MedianOfMeans,
        },
        bias,
        gamma: psi.gamma(),
        op_norm_pow: norm_pow,
    })
}

/// Variant of [`estimate_with_family`] with caller-supplied budgeting
/// bounds, for derivative families whose shared-randomness cancellation
/// makes the generic prefactor bound vacuous.
#[allow(clippy::too_many_arguments)]
pub(crate) fn estimate_with_family_bounds(
    family: &dyn KernelFamily,
    phi: &ApsgState,
    psi: &ApsgState,
    pointwise_bound: f64,
    second_moment_bound: f64,
    scale: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    crate::sampling::validate_budget(eps, delta)?;
    if phi.num_modes() != psi.num_modes() || family.num_modes() != psi.num_modes() {
        return Err(Error::validation("kernel/state mode counts disagree"));
    }
    let norm_pow = family.norm_sup().powi(psi.particle_number() as i32);
    if phi.particle_number() != psi.particle_number() {
        return Ok(Estimate {
            value: Complex64::zero(),
            std_error: 0.0,
            samples: 0,
            epsilon: eps,
            delta,
            bound: 0.0,
            scale,
            method: Method::Exact,
            bias: 0.0,
            gamma: psi.gamma(),
            op_norm_pow: norm_pow,
        });
    }
    let bra = BraCtx::new(phi);
    let ket = KetCtx::new(psi);
    let (plan, bound) = choose_plan(pointwise_bound, second_moment_bound, scale, eps, delta);
    let stats = run_apsg_plan(family, &bra, &ket, plan, seed, exec);
    let bias = if family.has_aux() {
        (stats.value - stats.aux_mean).norm()
    } else {
        0.0
    };
    Ok(Estimate {
        value: stats.value,
        std_error: stats.std_error,
        samples: stats.k,
        epsilon: eps,
        delta,
        bound,
        scale,
        method: match plan {
            Plan::Mean { .. } => Method::Mean,
            Plan::MedianOfMeans { .. } => Method::MedianOfMeans,
        },
        bias,
        gamma: psi.gamma(),
        op_norm_pow: norm_pow,
    })
}

pub(crate) fn run_apsg_plan(
    family: &dyn KernelFamily,
    bra: &BraCtx,
    ket: &KetCtx,
    plan: Plan,
    seed: u64,
    exec: &dyn Executor,
) -> crate::sampling::RunStats {
    let two_n = ket.particle_number;
    let n_blocks = ket.n_blocks;
    let m = family.num_modes();
    let factory = move || -> ShotFn<'_> {
        let mut scratch = Scratch::new(two_n, n_blocks);
        let mut state = FamilyState {
            diag: vec![Complex64::new(1.0, 0.0); m],
            ..FamilyState::default()
        };
        Box::new(move |k: u64| {
            let mut rng = sample_rng(SampleSeed {
                master: seed,
                index: k,
            });
            apsg_shot(family, bra, ket, &mut rng, &mut state, &mut scratch)
        })
    };
    run_plan(plan, exec, &factory)
}
