//! Transition-amplitude estimators: fixed Fock outputs and APSG–APSG
//! overlaps through arbitrary number-preserving Gaussian maps.

use alloc::boxed::Box;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::apsg::ApsgState;
use crate::error::{Error, Result};
use crate::estimators::shot::{
    estimate_with_family, FixedKernel, KetCtx, Scratch,
};
use crate::estimators::{Estimate, Method};
use crate::fock::FockState;
use crate::gaussian::GaussianMap;
use crate::rng::{draw_signs, sample_rng, SampleSeed};
use crate::sampling::{hoeffding_samples, run_plan, validate_budget, Executor, Plan, ShotFn};

/// Additive-error estimate of ⟨x|Ĝ|Ψ⟩.
///
/// Guarantee: |Ã − A| ≤ ε·γ·‖G‖^{2N} with probability 1 − δ, from
/// K = ⌈2 ln(2/δ)/ε²⌉ unit-bounded sign samples.
pub fn estimate_fock_overlap(
    g: &GaussianMap,
    psi: &ApsgState,
    x: &FockState,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    validate_budget(eps, delta)?;
    if g.dim() != psi.num_modes() || x.num_modes() != psi.num_modes() {
        return Err(Error::validation(
            "map, state, and output must share the mode count",
        ));
    }
    let gamma = psi.gamma();
    let norm_pow = g.op_norm().powi(psi.particle_number() as i32);
    let scale = gamma * norm_pow;
    if x.particle_number() != psi.particle_number() {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            std_error: 0.0,
            samples: 0,
            epsilon: eps,
            delta,
            bound: 0.0,
            scale,
            method: Method::Exact,
            bias: 0.0,
            gamma,
            op_norm_pow: norm_pow,
        });
    }
    let ket = KetCtx::new(psi);
    let rows = x.occupied_modes();
    let n_blocks = psi.num_blocks();
    let two_n = psi.particle_number();
    let family = FixedKernel {
        mat: g.matrix(),
        op_norm: g.op_norm(),
    };
    let k = hoeffding_samples(scale, eps * scale, delta);
    let family_ref = &family;
    let ket_ref = &ket;
    let rows_ref = &rows[..];
    let factory = move || -> ShotFn<'_> {
        let mut scratch = Scratch::new(two_n, n_blocks);
        scratch.rows_mut().copy_from_slice(rows_ref);
        Box::new(move |idx: u64| {
            let mut rng = sample_rng(SampleSeed {
                master: seed,
                index: idx,
            });
            draw_signs(&mut rng, scratch.signs_mut());
            let z = crate::estimators::shot::filtered_pfaffian_fixed_rows(
                family_ref, ket_ref, &mut scratch,
            );
            (z * gamma, Complex64::new(0.0, 0.0))
        })
    };
    let stats = run_plan(Plan::Mean { k }, exec, &factory);
    Ok(Estimate {
        value: stats.value,
        std_error: stats.std_error,
        samples: stats.k,
        epsilon: eps,
        delta,
        bound: scale,
        scale,
        method: Method::Mean,
        bias: 0.0,
        gamma,
        op_norm_pow: norm_pow,
    })
}

/// Additive-error estimate of ⟨Φ|Ĝ|Ψ⟩ for block-product APSG bra and ket.
///
/// Guarantee: |Ã − A| ≤ ε·‖G‖^{2N} with probability 1 − δ. Aggregation is
/// the cheaper of a Hoeffding mean (when the pointwise one-shot bound is
/// tight enough) and median-of-means from the second-moment bound.
pub fn estimate_apsg_overlap(
    g: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    let norm_pow = g.op_norm().powi(psi.particle_number() as i32);
    let family = FixedKernel {
        mat: g.matrix(),
        op_norm: g.op_norm(),
    };
    estimate_with_family(&family, phi, psi, norm_pow, eps, delta, seed, exec)
}
