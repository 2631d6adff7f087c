//! Diagonal-observable estimators built on the parity-string expansion:
//! transition number correlators, marginal probabilities, and coarse-grained
//! binned output distributions via the discrete Fourier transform.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use crate::apsg::ApsgState;
use crate::error::{Error, Result};
use crate::estimators::shot::{
    estimate_with_family, gather_dense, gather_sandwich, FamilyState, FixedKernel, KernelFamily,
};
use crate::estimators::{Estimate, Method};
use crate::gaussian::GaussianMap;
use crate::rng::derive_seed;
use crate::sampling::Executor;
use crate::{CMatrix, C64};

/// Precompute dense kernels when the subset is this small.
const PRECOMPUTE_SUBSET_LIMIT: usize = 6;

/// Guard on Ω_max for binned-distribution reconstruction.
pub const BINNED_OMEGA_GUARD: usize = 4096;

fn validate_subset(s: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &i in s {
        if i >= m {
            return Err(Error::validation(alloc::format!(
                "subset mode {i} out of range for {m} modes"
            )));
        }
        if seen[i] {
            return Err(Error::validation(alloc::format!(
                "subset mode {i} listed twice"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Kernel family L†·D_T·R with T drawn uniformly from subsets of `subset`
/// and a per-sample sign coefficient.
struct ParityFamily<'a> {
    left: &'a CMatrix,
    right: &'a CMatrix,
    subset: &'a [usize],
    /// sign weight per element: coefficient picks up `signs[pos]` when the
    /// subset member at `pos` is included (correlator: −1 for all; marginal:
    /// (−1)^{a_pos}).
    member_signs: Vec<f64>,
    norm_sup: f64,
    /// Dense kernels indexed by subset bitmask, when small enough.
    precomputed: Vec<CMatrix>,
}

impl<'a> ParityFamily<'a> {
    fn new(
        left: &'a GaussianMap,
        right: &'a GaussianMap,
        subset: &'a [usize],
        member_signs: Vec<f64>,
    ) -> Self {
        let m = left.dim();
        let mut precomputed = Vec::new();
        if subset.len() <= PRECOMPUTE_SUBSET_LIMIT {
            let ladj = left.matrix().adjoint();
            for bits in 0u64..(1u64 << subset.len()) {
                let mut diag = vec![Complex64::new(1.0, 0.0); m];
                for (pos, &mode) in subset.iter().enumerate() {
                    if bits >> pos & 1 == 1 {
                        diag[mode] = Complex64::new(-1.0, 0.0);
                    }
                }
                let mut scaled = ladj.clone();
                for (col, &d) in diag.iter().enumerate() {
                    for row in 0..m {
                        scaled[(row, col)] *= d;
                    }
                }
                precomputed.push(&scaled * right.matrix());
            }
        }
        ParityFamily {
            left: left.matrix(),
            right: right.matrix(),
            subset,
            member_signs,
            norm_sup: left.op_norm() * right.op_norm(),
            precomputed,
        }
    }
}

impl KernelFamily for ParityFamily<'_> {
    fn num_modes(&self) -> usize {
        self.left.nrows()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, state: &mut FamilyState) -> C64 {
        use rand::Rng;
        let mut coeff = 1.0f64;
        let mut bits = 0u64;
        if self.precomputed.is_empty() {
            for d in state.diag.iter_mut() {
                *d = Complex64::new(1.0, 0.0);
            }
        }
        for (pos, &mode) in self.subset.iter().enumerate() {
            if rng.gen::<bool>() {
                bits |= 1 << pos;
                coeff *= self.member_signs[pos];
                if self.precomputed.is_empty() {
                    state.diag[mode] = Complex64::new(-1.0, 0.0);
                }
            }
        }
        state.bits = bits;
        Complex64::new(coeff, 0.0)
    }

    fn gather(
        &self,
        state: &FamilyState,
        _kappa: usize,
        rows: &[usize],
        col: usize,
        out: &mut [C64],
    ) {
        if self.precomputed.is_empty() {
            gather_sandwich(self.left, &state.diag, self.right, rows, col, out);
        } else {
            gather_dense(&self.precomputed[state.bits as usize], rows, col, out);
        }
    }

    fn norm_sup(&self) -> f64 {
        self.norm_sup
    }

    fn prefactor_sum(&self) -> f64 {
        1.0
    }
}

/// Forced-mean run of the parity-sampled number correlator with an explicit
/// sample count; used by the benchmark diagnostics, which allocate a joint
/// Hoeffding budget across many correlator terms.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_correlator_mean(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    subset: &[usize],
    k: u64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<crate::sampling::RunStats> {
    validate_subset(subset, gl.dim())?;
    let family = ParityFamily::new(gl, gr, subset, vec![-1.0; subset.len()]);
    let bra = crate::estimators::shot::BraCtx::new(phi);
    let ket = crate::estimators::shot::KetCtx::new(psi);
    Ok(crate::estimators::shot::run_apsg_plan(
        &family,
        &bra,
        &ket,
        crate::sampling::Plan::Mean { k },
        seed,
        exec,
    ))
}

/// Pointwise one-shot bound of a unit-norm-kernel correlator atom.
pub(crate) fn correlator_atom_bound(phi: &ApsgState, psi: &ApsgState) -> f64 {
    let bra = crate::estimators::shot::BraCtx::new(phi);
    psi.gamma() * bra.inv_min_weight_prod
}

/// Additive-error estimate of ⟨Φ|Û_L†(Π_{i∈S} n̂_i)Û_R|Ψ⟩.
///
/// Per sample a subset T ⊆ S is drawn uniformly and one mixed-Pfaffian
/// shot of the parity kernel Û_L†Π̂_TÛ_R is taken with weight (−1)^{|T|};
/// the budget does not depend on |S|. Guarantee at ε·(‖G_L‖‖G_R‖)^{2N}.
#[allow(clippy::too_many_arguments)]
pub fn estimate_transition_correlator(
    gl: &GaussianMap,
    gr: &GaussianMap,
    phi: &ApsgState,
    psi: &ApsgState,
    subset: &[usize],
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    if gl.dim() != gr.dim() {
        return Err(Error::validation("left/right map dimensions disagree"));
    }
    validate_subset(subset, gl.dim())?;
    if subset.is_empty() {
        let kernel = GaussianMap::compose(&gl.adjoint(), gr)?;
        return super::overlap::estimate_apsg_overlap(&kernel, phi, psi, eps, delta, seed, exec);
    }
    let family = ParityFamily::new(gl, gr, subset, vec![-1.0; subset.len()]);
    let scale = family.norm_sup().powi(psi.particle_number() as i32);
    estimate_with_family(&family, phi, psi, scale, eps, delta, seed, exec)
}

/// Additive-error estimate of the marginal probability
/// P_S(a) = Σ_{x: x_S = a} |⟨x|Û|Ψ⟩|².
///
/// The value is reported raw (it may leave [0,1] by up to ε).
#[allow(clippy::too_many_arguments)]
pub fn estimate_marginal(
    u: &GaussianMap,
    psi: &ApsgState,
    subset: &[usize],
    pattern: &[bool],
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    if !u.is_unitary() {
        return Err(Error::validation("marginal estimation requires a unitary map"));
    }
    validate_subset(subset, u.dim())?;
    if pattern.len() != subset.len() {
        return Err(Error::validation(alloc::format!(
            "pattern length {} does not match subset size {}",
            pattern.len(),
            subset.len()
        )));
    }
    if subset.is_empty() {
        return Ok(Estimate {
            value: Complex64::new(1.0, 0.0),
            std_error: 0.0,
            samples: 0,
            epsilon: eps,
            delta,
            bound: 1.0,
            scale: 1.0,
            method: Method::Exact,
            bias: 0.0,
            gamma: psi.gamma(),
            op_norm_pow: 1.0,
        });
    }
    // (−1)^{Σ_{i∈T} a_i}: members with a_i = 1 contribute −1 when included.
    let member_signs = pattern
        .iter()
        .map(|&b| if b { -1.0 } else { 1.0 })
        .collect();
    let family = ParityFamily::new(u, u, subset, member_signs);
    estimate_with_family(&family, psi, psi, 1.0, eps, delta, seed, exec)
}

/// Binned output distribution G(Ω) = Σ_{x: ω·x = Ω} |⟨x|Û|Ψ⟩|².
#[derive(Debug, Clone)]
pub struct BinnedDistribution {
    /// Reconstructed bins, Ω = 0..Ω_max.
    pub bins: Vec<f64>,
    /// The estimated Fourier coefficients G̃(k).
    pub fourier: Vec<Estimate>,
}

/// Estimate every characteristic-function coefficient
/// G̃(k) = ⟨Ψ|Û†D̂(k)Û|Ψ⟩ as a diagonal passive-FLO overlap, then invert
/// the DFT. Each bin carries additive error at most ε (triangle bound),
/// with δ split across the Ω_max+1 coefficients.
pub fn estimate_binned_distribution(
    u: &GaussianMap,
    psi: &ApsgState,
    omega: &[u32],
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<BinnedDistribution> {
    if !u.is_unitary() {
        return Err(Error::validation(
            "binned-distribution estimation requires a unitary map",
        ));
    }
    if omega.len() != u.dim() {
        return Err(Error::validation(alloc::format!(
            "weight vector length {} does not match {} modes",
            omega.len(),
            u.dim()
        )));
    }
    let omega_max: usize = omega.iter().map(|&w| w as usize).sum();
    if omega_max > BINNED_OMEGA_GUARD {
        return Err(Error::Capacity {
            what: "binned-distribution Ω_max",
            requested: omega_max,
            guard: BINNED_OMEGA_GUARD,
            hint: "coarser weights keep the DFT reconstruction polynomial",
        });
    }
    let n_coeff = omega_max + 1;
    let theta = core::f64::consts::TAU / n_coeff as f64;
    let delta_k = delta / n_coeff as f64;
    let mut fourier = Vec::with_capacity(n_coeff);
    for k in 0..n_coeff {
        let phases: Vec<f64> = omega
            .iter()
            .map(|&w| k as f64 * theta * w as f64)
            .collect();
        let dk = GaussianMap::diagonal_phase(&phases);
        let kernel = GaussianMap::compose(&u.adjoint(), &GaussianMap::compose(&dk, u)?)?;
        let family = FixedKernel {
            mat: kernel.matrix(),
            op_norm: 1.0,
        };
        let est = estimate_with_family(
            &family,
            psi,
            psi,
            1.0,
            eps,
            delta_k,
            derive_seed(seed, k as u64),
            exec,
        )?;
        fourier.push(est);
    }
    let mut bins = vec![0.0f64; n_coeff];
    for (big_omega, bin) in bins.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, est) in fourier.iter().enumerate() {
            let phase = -(k as f64) * theta * big_omega as f64;
            acc += est.value * Complex64::new(phase.cos(), phase.sin());
        }
        *bin = acc.re / n_coeff as f64;
    }
    Ok(BinnedDistribution { bins, fourier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apsg::psi4_product;
    use crate::gaussian::random_unitary;
    use crate::oracle::{gaussian_on_apsg, oracle_expectation, OracleObservable};
    use crate::sampling::Sequential;
    use rand::SeedableRng;

    #[test]
    fn correlator_empty_subset_reduces_to_overlap() {
        let psi = psi4_product(1).unwrap();
        let id = GaussianMap::identity(4);
        let est = estimate_transition_correlator(
            &id, &id, &psi, &psi, &[], 0.05, 0.05, 3, &Sequential,
        )
        .unwrap();
        assert!((est.value - Complex64::new(1.0, 0.0)).norm() <= 0.05);
    }

    #[test]
    fn correlator_psi4_pair_density() {
        // ⟨n̂₀n̂₁⟩ on |Ψ₄⟩: 1/2.
        let psi = psi4_product(1).unwrap();
        let id = GaussianMap::identity(4);
        let est = estimate_transition_correlator(
            &id, &id, &psi, &psi, &[0, 1], 0.04, 0.02, 5, &Sequential,
        )
        .unwrap();
        assert!(
            (est.value - Complex64::new(0.5, 0.0)).norm() <= 0.04,
            "value {}",
            est.value
        );
    }

    #[test]
    fn correlator_matches_statevector_oracle() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(101);
        let psi = psi4_product(3).unwrap(); // 12 modes
        let u = random_unitary(12, &mut rng);
        let subset = [0usize, 3, 5, 8, 10];
        let exact = oracle_expectation(
            &OracleObservable::NumberProduct(subset.to_vec()),
            &u,
            &psi,
        )
        .unwrap();
        let mut misses = 0;
        for rep in 0..20 {
            let est = estimate_transition_correlator(
                &u,
                &u,
                &psi,
                &psi,
                &subset,
                0.08,
                0.01,
                900 + rep,
                &Sequential,
            )
            .unwrap();
            if (est.value - exact).norm() > 0.08 {
                misses += 1;
            }
        }
        assert!(misses <= 1, "{misses}/20 misses");
    }

    #[test]
    fn parity_expansion_exact_average() {
        // Exact average over all T ⊆ S of (−1)^{|T|} μ_T (each μ_T by the
        // statevector oracle) equals ⟨Π n̂⟩ to 1e−10.
        let mut rng = rand::rngs::StdRng::seed_from_u64(107);
        let psi = psi4_product(2).unwrap();
        let u = random_unitary(8, &mut rng);
        let subset = [1usize, 2, 4, 6, 7];
        let sv = gaussian_on_apsg(&u, &psi).unwrap();
        let mut acc = 0.0f64;
        for bits in 0u64..(1 << subset.len()) {
            let t: Vec<usize> = subset
                .iter()
                .enumerate()
                .filter(|(pos, _)| bits >> pos & 1 == 1)
                .map(|(_, &m)| m)
                .collect();
            let sign = if t.len() % 2 == 0 { 1.0 } else { -1.0 };
            let mu = crate::oracle::expectation_on_statevector(
                &OracleObservable::Parity(t),
                &sv,
            )
            .unwrap();
            acc += sign * mu.re / (1u64 << subset.len()) as f64;
        }
        let direct = crate::oracle::expectation_on_statevector(
            &OracleObservable::NumberProduct(subset.to_vec()),
            &sv,
        )
        .unwrap();
        assert!((acc - direct.re).abs() <= 1e-10, "{acc} vs {direct}");
    }

    #[test]
    fn marginal_trivial_cases() {
        let psi = psi4_product(1).unwrap();
        let id = GaussianMap::identity(4);
        // S = ∅: total probability 1, exact.
        let est = estimate_marginal(&id, &psi, &[], &[], 0.05, 0.05, 1, &Sequential).unwrap();
        assert_eq!(est.method, Method::Exact);
        assert_eq!(est.value, Complex64::new(1.0, 0.0));
        // P(n₀ = 1) = 1/2 on |Ψ₄⟩.
        let est =
            estimate_marginal(&id, &psi, &[0], &[true], 0.04, 0.02, 2, &Sequential).unwrap();
        assert!((est.value - Complex64::new(0.5, 0.0)).norm() <= 0.04);
    }

    #[test]
    fn marginal_matches_oracle_probability_sum() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(109);
        let psi = psi4_product(2).unwrap();
        let u = random_unitary(8, &mut rng);
        let subset = [0usize, 2, 5];
        let pattern = [true, false, true];
        let sv = gaussian_on_apsg(&u, &psi).unwrap();
        let mut exact = 0.0f64;
        for (s, amp) in sv.amplitudes().iter().enumerate() {
            let ok = subset
                .iter()
                .zip(&pattern)
                .all(|(&m, &a)| ((s >> m) & 1 == 1) == a);
            if ok {
                exact += amp.norm_sqr();
            }
        }
        let mut misses = 0;
        for rep in 0..20 {
            let est = estimate_marginal(
                &u,
                &psi,
                &subset,
                &pattern,
                0.08,
                0.01,
                50 + rep,
                &Sequential,
            )
            .unwrap();
            if (est.value.re - exact).abs() > 0.08 {
                misses += 1;
            }
        }
        assert!(misses <= 1);
    }

    #[test]
    fn marginal_requires_unitary() {
        let psi = psi4_product(1).unwrap();
        let g = GaussianMap::diagonal(&[
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        assert!(estimate_marginal(&g, &psi, &[0], &[true], 0.05, 0.05, 1, &Sequential).is_err());
    }

    #[test]
    fn binned_fixed_particle_number() {
        // ω = (1,1,1,1) on |Ψ₄⟩: all mass at Ω = 2.
        let psi = psi4_product(1).unwrap();
        let id = GaussianMap::identity(4);
        let out =
            estimate_binned_distribution(&id, &psi, &[1, 1, 1, 1], 0.05, 0.05, 9, &Sequential)
                .unwrap();
        assert_eq!(out.bins.len(), 5);
        assert!((out.bins[2] - 1.0).abs() <= 0.05, "bins {:?}", out.bins);
        for b in [0usize, 1, 3, 4] {
            assert!(out.bins[b].abs() <= 0.05, "bins {:?}", out.bins);
        }
    }

    #[test]
    fn binned_block_superposition() {
        // ω = (1,1,0,0): G(0) = G(2) = 1/2.
        let psi = psi4_product(1).unwrap();
        let id = GaussianMap::identity(4);
        let out =
            estimate_binned_distribution(&id, &psi, &[1, 1, 0, 0], 0.05, 0.05, 10, &Sequential)
                .unwrap();
        assert!((out.bins[0] - 0.5).abs() <= 0.05);
        assert!((out.bins[2] - 0.5).abs() <= 0.05);
        assert!(out.bins[1].abs() <= 0.05);
    }

    #[test]
    fn binned_matches_oracle_histogram() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(113);
        let psi = psi4_product(2).unwrap();
        let u = random_unitary(8, &mut rng);
        let omega = [1u32, 0, 2, 1, 0, 1, 2, 0];
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
        let out =
            estimate_binned_distribution(&u, &psi, &omega, 0.08, 0.05, 77, &Sequential).unwrap();
        for (b, (est, exact)) in out.bins.iter().zip(&hist).enumerate() {
            assert!(
                (est - exact).abs() <= 0.08,
                "bin {b}: {est} vs {exact}"
            );
        }
        // normalization consistency: Σ_Ω G(Ω) ≈ G̃(0)
        let total: f64 = out.bins.iter().sum();
        assert!((total - out.fourier[0].value.re).abs() <= 1e-9);
    }

    #[test]
    fn binned_capacity_guard() {
        let psi = psi4_product(1).unwrap();
        let id = GaussianMap::identity(4);
        let err = estimate_binned_distribution(
            &id,
            &psi,
            &[4000, 4000, 1, 1],
            0.05,
            0.05,
            1,
            &Sequential,
        )
        .unwrap_err();
        assert!(err.is_capacity());
    }
}
