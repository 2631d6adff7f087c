//! Block-product paired states: tensor products of single-pair geminals on
//! disjoint mode blocks.
//!
//! Each block owns an ordered list of 2·r modes; pair slot j creates on the
//! block's local modes (2j, 2j+1), in that order. Weights may be complex;
//! they are kept as given and the estimators carry the phases through
//! importance weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pfaffian::SkewMatrix;
use crate::{CMatrix, C64};

/// Block-normalization tolerance on Σ|w|².
pub const TOL_BLOCK_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ApsgBlock {
    modes: Vec<usize>,
    weights: Vec<C64>,
}

impl ApsgBlock {
    /// `modes` holds 2·r distinct global mode indices; `weights` the r slot
    /// amplitudes with Σ|w|² = 1.
    pub fn new(modes: Vec<usize>, weights: Vec<C64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("block needs at least one pair slot"));
        }
        if modes.len() != 2 * weights.len() {
            return Err(Error::validation(format!(
                "block with {} slots needs {} modes, got {}",
                weights.len(),
                2 * weights.len(),
                modes.len()
            )));
        }
        let mut seen = modes.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("block modes must be distinct"));
        }
        let norm: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL_BLOCK_NORM {
            return Err(Error::validation(format!(
                "block weights not normalized: sum |w|^2 = {norm} (tolerance {TOL_BLOCK_NORM})"
            )));
        }
        Ok(ApsgBlock { modes, weights })
    }

    pub fn num_slots(&self) -> usize {
        self.weights.len()
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Global (first, second) creation modes of slot j.
    pub fn slot_modes(&self, j: usize) -> (usize, usize) {
        (self.modes[2 * j], self.modes[2 * j + 1])
    }

    pub fn weight(&self, j: usize) -> C64 {
        self.weights[j]
    }

    /// Largest slot weight magnitude.
    pub fn gamma(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// Smallest nonzero slot weight magnitude.
    pub fn min_nonzero_weight(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| w.norm())
            .filter(|&n| n > 0.0)
            .fold(f64::infinity(), f64::min)
    }
}

/// A block-product APSG state on `num_modes` modes: Π_t η̂_t†|0⟩ with one
/// fermion pair per block.
#[derive(Debug, Clone, PartialEq)]
pub struct ApsgState {
    num_modes: usize,
    blocks: Vec<ApsgBlock>,
}

impl ApsgState {
    pub fn new(num_modes: usize, blocks: Vec<ApsgBlock>) -> Result<Self> {
        let mut seen = vec![false; num_modes];
        for (t, b) in blocks.iter().enumerate() {
            for &m in b.modes() {
                if m >= num_modes {
                    return Err(Error::validation(format!(
                        "block {t} uses mode {m}, out of range for {num_modes} modes"
                    )));
                }
                if seen[m] {
                    return Err(Error::validation(format!(
                        "mode {m} shared between blocks (blocks must be disjoint)"
                    )));
                }
                seen[m] = true;
            }
        }
        Ok(ApsgState { num_modes, blocks })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[ApsgBlock] {
        &self.blocks
    }

    /// Total particle number, exactly two per block.
    pub fn particle_number(&self) -> usize {
        2 * self.blocks.len()
    }

    /// γ = Π_t max_j |w_{t,j}|.
    pub fn gamma(&self) -> f64 {
        self.blocks.iter().map(|b| b.gamma()).product()
    }

    /// Number of Fock basis states in the support, Π_t r_t.
    pub fn support_size(&self) -> u128 {
        self.blocks.iter().map(|b| b.num_slots() as u128).product()
    }

    /// The M×M two-form W_t of block t: η̂_t† = ½ Σ_pq (W_t)_pq ĉ_p†ĉ_q†.
    pub fn two_form(&self, t: usize) -> SkewMatrix {
        let m = self.num_modes;
        let b = &self.blocks[t];
        let mut mat = CMatrix::zeros(m, m);
        for j in 0..b.num_slots() {
            let (p, q) = b.slot_modes(j);
            let w = b.weight(j);
            mat[(p, q)] += w;
            mat[(q, p)] -= w;
        }
        SkewMatrix::new(mat).expect("pair two-form is skew by construction")
    }
}

/// |Ψ₄⟩^{⊗N} on 4N modes: each block spans four consecutive modes with
/// equal-weight slots on (local) modes (1,2) and (3,4).
pub fn psi4_product(n: usize) -> Result<ApsgState> {
    if n == 0 {
        return Err(Error::validation("psi4_product needs at least one block"));
    }
    let w = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let blocks = (0..n)
        .map(|t| {
            let base = 4 * t;
            ApsgBlock::new(vec![base, base + 1, base + 2, base + 3], vec![w, w])
        })
        .collect::<Result<Vec<_>>>()?;
    ApsgState::new(4 * n, blocks)
}

/// A single-slot block carrying a definite pair on two modes.
pub fn definite_pair_block(mode_a: usize, mode_b: usize) -> Result<ApsgBlock> {
    ApsgBlock::new(vec![mode_a, mode_b], vec![Complex64::new(1.0, 0.0)])
}

impl ApsgState {
    /// Convenience: the vacuum-free check that a Fock state could overlap
    /// this state (particle numbers match).
    pub fn particle_number_matches(&self, x: &crate::fock::FockState) -> bool {
        x.particle_number() == self.particle_number()
    }
}

/// Assert the zero-weight convention: weights exactly zero are allowed but
/// never sampled on the bra side.
pub(crate) fn cumulative_probabilities(block: &ApsgBlock) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cum = Vec::with_capacity(block.num_slots());
    for w in block.weights() {
        acc += w.norm_sqr();
        cum.push(acc);
    }
    // Guard against rounding: the last entry is the total mass.
    if let Some(last) = cum.last_mut() {
        *last = acc.max(1.0);
    }
    cum
}
