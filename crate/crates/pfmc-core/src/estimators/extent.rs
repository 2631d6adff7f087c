//! Extent-based branch sampling for circuits that interleave passive
//! Gaussian layers with two-mode controlled-phase gates.
//!
//! Each gate P_ij(θ) = cosθ·I + i·sinθ·Π̂_{ij} splits into an identity
//! branch and a two-mode parity branch; sampling branches with probability
//! ∝ cosθ/sinθ leaves a passive-FLO kernel per shot, weighted by
//! √ξ·i^{|x|} with extent ξ = Π(cosθ + sinθ)².

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use crate::apsg::ApsgState;
use crate::error::{Error, Result};
use crate::estimators::shot::{estimate_with_family, gather_dense, FamilyState, KernelFamily};
use crate::estimators::Estimate;
use crate::gaussian::GaussianMap;
use crate::sampling::Executor;
use crate::{CMatrix, C64};

/// One element of an alternating Gaussian/phase-gate circuit; elements are
/// listed in application order (index 0 acts first).
#[derive(Debug, Clone)]
pub enum CircuitElement {
    Gaussian(GaussianMap),
    PhaseGate { i: usize, j: usize, theta: f64 },
}

struct ExtentFamily<'a> {
    elements: &'a [CircuitElement],
    sqrt_xi: f64,
    /// Probability of the identity branch per gate.
    p_identity: Vec<f64>,
    m: usize,
    norm_sup: f64,
}

impl KernelFamily for ExtentFamily<'_> {
    fn num_modes(&self) -> usize {
        self.m
    }

    fn draw(&self, rng: &mut ChaCha8Rng, state: &mut FamilyState) -> C64 {
        use rand::Rng;
        let m = self.m;
        if state.mats.len() < 2 {
            state.mats = vec![CMatrix::zeros(m, m); 2];
        }
        let (acc_s, tmp_s) = state.mats.split_at_mut(1);
        let acc = &mut acc_s[0];
        let tmp = &mut tmp_s[0];
        acc.fill(Complex64::new(0.0, 0.0));
        for d in 0..m {
            acc[(d, d)] = Complex64::new(1.0, 0.0);
        }
        let mut branches_taken = 0u32;
        let mut gate_idx = 0usize;
        for elem in self.elements {
            match elem {
                CircuitElement::Gaussian(g) => {
                    tmp.gemm(
                        Complex64::new(1.0, 0.0),
                        g.matrix(),
                        acc,
                        Complex64::new(0.0, 0.0),
                    );
                    core::mem::swap(acc, tmp);
                }
                CircuitElement::PhaseGate { i, j, .. } => {
                    let take_parity = rng.gen::<f64>() >= self.p_identity[gate_idx];
                    gate_idx += 1;
                    if take_parity {
                        branches_taken += 1;
                        for col in 0..m {
                            acc[(*i, col)] = -acc[(*i, col)];
                            acc[(*j, col)] = -acc[(*j, col)];
                        }
                    }
                }
            }
        }
        // √ξ · i^{|x|}
        Complex64::i().powu(branches_taken) * self.sqrt_xi
    }

    fn gather(
        &self,
        state: &FamilyState,
        _kappa: usize,
        rows: &[usize],
        col: usize,
        out: &mut [C64],
    ) {
        gather_dense(&state.mats[0], rows, col, out);
    }

    fn norm_sup(&self) -> f64 {
        self.norm_sup
    }

    fn prefactor_sum(&self) -> f64 {
        self.sqrt_xi
    }
}

/// Additive-error estimate of ⟨Φ|Û|Ψ⟩ for an alternating circuit of
/// passive Gaussian layers and controlled-phase gates with θ ∈ [0, π/2].
/// One-shot bound √ξ (times the state weights), absolute target ε.
pub fn estimate_extent_overlap(
    circuit: &[CircuitElement],
    phi: &ApsgState,
    psi: &ApsgState,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: &dyn Executor,
) -> Result<Estimate> {
    let m = psi.num_modes();
    let mut sqrt_xi = 1.0f64;
    let mut p_identity = Vec::new();
    let mut norm_sup = 1.0f64;
    for (pos, elem) in circuit.iter().enumerate() {
        match elem {
            CircuitElement::Gaussian(g) => {
                if g.dim() != m {
                    return Err(Error::validation(alloc::format!(
                        "circuit element {pos}: map on {} modes in an {m}-mode circuit",
                        g.dim()
                    )));
                }
                norm_sup *= g.op_norm();
            }
            CircuitElement::PhaseGate { i, j, theta } => {
                if i == j || *i >= m || *j >= m {
                    return Err(Error::validation(alloc::format!(
                        "circuit element {pos}: phase gate modes ({i}, {j}) invalid"
                    )));
                }
                if !(0.0..=core::f64::consts::FRAC_PI_2).contains(theta) {
                    return Err(Error::validation(alloc::format!(
                        "circuit element {pos}: phase angle {theta} outside [0, π/2]"
                    )));
                }
                let (s, c) = theta.sin_cos();
                sqrt_xi *= c + s;
                p_identity.push(c / (c + s));
            }
        }
    }
    let family = ExtentFamily {
        elements: circuit,
        sqrt_xi,
        p_identity,
        m,
        norm_sup,
    };
    estimate_with_family(&family, phi, psi, 1.0, eps, delta, seed, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apsg::psi4_product;
    use crate::gaussian::random_unitary;
    use crate::oracle::apsg_to_statevector;
    use crate::sampling::Sequential;
    use rand::SeedableRng;

    #[test]
    fn no_gates_reduces_to_overlap() {
        let psi = psi4_product(1).unwrap();
        let circuit = [CircuitElement::Gaussian(GaussianMap::identity(4))];
        let est =
            estimate_extent_overlap(&circuit, &psi, &psi, 0.05, 0.05, 3, &Sequential).unwrap();
        assert!((est.value - Complex64::new(1.0, 0.0)).norm() <= 0.05);
        assert!((est.bound - 1.0).abs() < 1e-12); // ξ = 1
    }

    #[test]
    fn zero_angle_gate_is_identity_branch() {
        let psi = psi4_product(1).unwrap();
        let circuit = [CircuitElement::PhaseGate {
            i: 0,
            j: 1,
            theta: 0.0,
        }];
        let est =
            estimate_extent_overlap(&circuit, &psi, &psi, 0.05, 0.05, 5, &Sequential).unwrap();
        assert!((est.value - Complex64::new(1.0, 0.0)).norm() <= 0.05);
    }

    #[test]
    fn angle_range_enforced() {
        let psi = psi4_product(1).unwrap();
        let circuit = [CircuitElement::PhaseGate {
            i: 0,
            j: 1,
            theta: 2.0,
        }];
        assert!(
            estimate_extent_overlap(&circuit, &psi, &psi, 0.05, 0.05, 5, &Sequential).is_err()
        );
    }

    #[test]
    fn single_gate_circuit_matches_dense_oracle() {
        // 4-mode circuit G₂ · P₀₁(π/8) · G₁ against the statevector route.
        let mut rng = rand::rngs::StdRng::seed_from_u64(149);
        let psi = psi4_product(1).unwrap();
        let g1 = random_unitary(4, &mut rng);
        let g2 = random_unitary(4, &mut rng);
        let theta = core::f64::consts::PI / 8.0;
        let circuit = [
            CircuitElement::Gaussian(g1.clone()),
            CircuitElement::PhaseGate { i: 0, j: 1, theta },
            CircuitElement::Gaussian(g2.clone()),
        ];
        // oracle: |φ⟩ = G₂ P G₁|Ψ⟩, P diagonal with e^{±iθ} by joint parity
        let mut sv = apsg_to_statevector(&psi).unwrap();
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
        let bra = apsg_to_statevector(&psi).unwrap();
        let exact = bra.inner(&sv);
        let mut misses = 0;
        for rep in 0..20 {
            let est = estimate_extent_overlap(
                &circuit,
                &psi,
                &psi,
                0.08,
                0.01,
                400 + rep,
                &Sequential,
            )
            .unwrap();
            if (est.value - exact).norm() > 0.08 {
                misses += 1;
            }
        }
        assert!(misses <= 1, "{misses}/20 misses vs oracle {exact}");
    }
}
