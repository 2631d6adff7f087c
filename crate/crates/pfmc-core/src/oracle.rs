//! Dense Fock-space brute-force oracles.
//!
//! A [`StateVector`] stores all 2^M amplitudes with mode i on bit i of the
//! basis index and the ascending-creation phase convention of [`crate::fock`].
//! Gaussian maps act on block-product states through the two-form congruence
//! W ↦ GWGᵀ, and on arbitrary states through a Givens decomposition into
//! two-mode rotations plus a diagonal. These paths are independent of the
//! Pfaffian machinery and serve as its ground truth in tests and in the
//! `oracle` CLI subcommand.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use num_traits::Zero;

use crate::apsg::ApsgState;
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::gaussian::GaussianMap;
use crate::{CMatrix, C64};

/// Mode guard for 2^M statevectors.
pub const MAX_STATEVECTOR_MODES: usize = 20;
/// Mode guard for expectation-value oracles (which evolve and contract).
pub const MAX_EXPECTATION_MODES: usize = 16;
/// Guard on Π_t r_t slot-choice enumeration in [`oracle_amplitude`].
pub const MAX_AMPLITUDE_TERMS: u128 = 1 << 20;

#[derive(Debug, Clone)]
pub struct StateVector {
    num_modes: usize,
    amp: Vec<C64>,
}

/// (-1)^{|occupied modes of `mask` below bit p|}.
#[inline]
fn sign_below(mask: usize, p: usize) -> f64 {
    if (mask & ((1usize << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl StateVector {
    pub fn vacuum(num_modes: usize) -> Result<Self> {
        if num_modes > MAX_STATEVECTOR_MODES {
            return Err(Error::Capacity {
                what: "statevector modes",
                requested: num_modes,
                guard: MAX_STATEVECTOR_MODES,
                hint: "use the Monte Carlo estimators for larger systems",
            });
        }
        let mut amp = vec![Complex64::zero(); 1usize << num_modes];
        amp[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_modes, amp })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn amplitude(&self, x: &FockState) -> C64 {
        self.amp[x.index()]
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Number of basis states with nonzero amplitude.
    pub fn support_size(&self) -> usize {
        self.amp.iter().filter(|a| a.norm_sqr() > 1e-24).count()
    }

    /// Apply the pair creator β̂†(W) = ½ Σ_pq W_pq ĉ_p†ĉ_q†.
    pub fn apply_pair_creator(&mut self, w: &CMatrix) {
        let m = self.num_modes;
        let dim = self.amp.len();
        let mut out = vec![Complex64::zero(); dim];
        for p in 0..m {
            for q in (p + 1)..m {
                let wpq = w[(p, q)];
                if wpq.norm_sqr() == 0.0 {
                    continue;
                }
                let bp = 1usize << p;
                let bq = 1usize << q;
                for s in 0..dim {
                    if s & (bp | bq) != 0 {
                        continue;
                    }
                    let a = self.amp[s];
                    if a.is_zero() {
                        continue;
                    }
                    let sign = sign_below(s, q) * sign_below(s | bq, p);
                    out[s | bp | bq] += wpq * sign * a;
                }
            }
        }
        self.amp = out;
    }

    /// Apply a single-particle diagonal map: amplitude factor Π_{i∈s} d_i.
    pub fn apply_mode_diagonal(&mut self, d: &[C64]) {
        let dim = self.amp.len();
        let mut factor = vec![Complex64::new(1.0, 0.0); dim];
        for s in 1..dim {
            let low = s.trailing_zeros() as usize;
            factor[s] = factor[s & (s - 1)] * d[low];
        }
        for (a, f) in self.amp.iter_mut().zip(&factor) {
            *a *= *f;
        }
    }

    /// Apply an arbitrary per-basis-state diagonal factor.
    pub fn apply_fock_diagonal(&mut self, f: &dyn Fn(usize) -> C64) {
        for (s, a) in self.amp.iter_mut().enumerate() {
            *a *= f(s);
        }
    }

    /// Apply a map supported on two modes: `block` columns are the images
    /// of ĉ_p† and ĉ_q† on span{p, q}. Works for non-unitary blocks.
    pub fn apply_two_mode(&mut self, p: usize, q: usize, block: [[C64; 2]; 2]) {
        debug_assert!(p != q);
        let [[a, b], [c, d]] = block;
        let det = a * d - c * b;
        let bp = 1usize << p;
        let bq = 1usize << q;
        for s in 0..self.amp.len() {
            let has_p = s & bp != 0;
            let has_q = s & bq != 0;
            if has_p && has_q {
                self.amp[s] *= det;
            } else if has_p && !has_q {
                // paired update with t = s − p + q, processed once
                let r = s & !bp;
                let t = r | bq;
                let phi = sign_below(r, p) * sign_below(r, q);
                let vs = self.amp[s];
                let vt = self.amp[t];
                self.amp[s] = a * vs + b * phi * vt;
                self.amp[t] = c * phi * vs + d * vt;
            }
        }
    }

    /// Apply a unitary Gaussian map by Givens decomposition into two-mode
    /// rotations and a diagonal.
    pub fn apply_unitary(&mut self, u: &GaussianMap) -> Result<()> {
        if !u.is_unitary() {
            return Err(Error::validation(
                "apply_unitary requires a unitary map; non-unitary maps act on \
                 block-product states via gaussian_on_apsg",
            ));
        }
        if u.dim() != self.num_modes {
            return Err(Error::validation(format!(
                "map on {} modes applied to {}-mode state",
                u.dim(),
                self.num_modes
            )));
        }
        let m = self.num_modes;
        let mut r = u.matrix().clone();
        // Left-eliminate below-diagonal entries; record rotations.
        let mut rotations: Vec<(usize, usize, [[C64; 2]; 2])> = Vec::new();
        for j in 0..m {
            for i in (j + 1)..m {
                let rij = r[(i, j)];
                if rij.norm() < 1e-15 {
                    continue;
                }
                let rjj = r[(j, j)];
                let nrm = (rjj.norm_sqr() + rij.norm_sqr()).sqrt();
                let alpha = rjj.conj() / nrm;
                let beta = rij.conj() / nrm;
                let g = [[alpha, beta], [-rij / nrm, rjj / nrm]];
                // rows j, i of r update
                for col in 0..m {
                    let xj = r[(j, col)];
                    let xi = r[(i, col)];
                    r[(j, col)] = g[0][0] * xj + g[0][1] * xi;
                    r[(i, col)] = g[1][0] * xj + g[1][1] * xi;
                }
                rotations.push((j, i, g));
            }
        }
        // r is now diagonal (unitary input): U = G₁†⋯G_K†·D.
        let d: Vec<C64> = (0..m).map(|i| r[(i, i)]).collect();
        self.apply_mode_diagonal(&d);
        for &(j, i, g) in rotations.iter().rev() {
            // adjoint block, columns = images of (ĉ_j†, ĉ_i†)
            let adj = [
                [g[0][0].conj(), g[1][0].conj()],
                [g[0][1].conj(), g[1][1].conj()],
            ];
            self.apply_two_mode(j, i, adj);
        }
        Ok(())
    }

    /// |ψ⟩ ← ĉ_p |ψ⟩.
    pub fn annihilation_applied(&self, p: usize) -> StateVector {
        let dim = self.amp.len();
        let mut out = vec![Complex64::zero(); dim];
        let bp = 1usize << p;
        for s in 0..dim {
            if s & bp != 0 {
                let s1 = s & !bp;
                out[s1] = self.amp[s] * sign_below(s1, p);
            }
        }
        StateVector {
            num_modes: self.num_modes,
            amp: out,
        }
    }

    /// |ψ⟩ ← Σ_pq h_pq ĉ_p†ĉ_q |ψ⟩.
    pub fn one_body_applied(&self, h: &CMatrix) -> StateVector {
        let m = self.num_modes;
        let dim = self.amp.len();
        let mut out = vec![Complex64::zero(); dim];
        for s in 0..dim {
            let a = self.amp[s];
            if a.is_zero() {
                continue;
            }
            for q in 0..m {
                if s & (1 << q) == 0 {
                    continue;
                }
                let s1 = s & !(1 << q);
                let sq = sign_below(s1, q);
                for p in 0..m {
                    let hpq = h[(p, q)];
                    if hpq.norm_sqr() == 0.0 || s1 & (1 << p) != 0 {
                        continue;
                    }
                    let sp = sign_below(s1, p);
                    out[s1 | (1 << p)] += hpq * sq * sp * a;
                }
            }
        }
        StateVector {
            num_modes: m,
            amp: out,
        }
    }

    /// Expectation of a diagonal observable given by a per-basis-state value.
    pub fn expectation_fock_diagonal(&self, f: &dyn Fn(usize) -> f64) -> f64 {
        self.amp
            .iter()
            .enumerate()
            .map(|(s, a)| a.norm_sqr() * f(s))
            .sum()
    }

    /// Expectation ⟨Π_i d_i^{n̂_i}⟩ of a single-particle diagonal operator.
    pub fn expectation_mode_diagonal(&self, d: &[C64]) -> C64 {
        let dim = self.amp.len();
        let mut factor = vec![Complex64::new(1.0, 0.0); dim];
        for s in 1..dim {
            let low = s.trailing_zeros() as usize;
            factor[s] = factor[s & (s - 1)] * d[low];
        }
        self.amp
            .iter()
            .zip(&factor)
            .map(|(a, f)| *f * a.norm_sqr())
            .sum()
    }
}

/// Statevector of Ĝ|Ψ⟩ for a block-product state: each block two-form
/// transforms by congruence W ↦ GWGᵀ and the transformed pair creators act
/// on the vacuum. Valid for arbitrary (also non-unitary, singular) G.
pub fn gaussian_on_apsg(g: &GaussianMap, psi: &ApsgState) -> Result<StateVector> {
    if g.dim() != psi.num_modes() {
        return Err(Error::validation(format!(
            "map on {} modes applied to {}-mode state",
            g.dim(),
            psi.num_modes()
        )));
    }
    let mut sv = StateVector::vacuum(psi.num_modes())?;
    for t in (0..psi.num_blocks()).rev() {
        let w = psi.two_form(t);
        let wt = g.matrix() * w.matrix() * g.matrix().transpose();
        sv.apply_pair_creator(&wt);
    }
    Ok(sv)
}

/// Dense amplitude vector of |Ψ⟩ itself.
pub fn apsg_to_statevector(psi: &ApsgState) -> Result<StateVector> {
    gaussian_on_apsg(&GaussianMap::identity(psi.num_modes()), psi)
}

/// Sign of the permutation sorting `seq` ascending (distinct entries).
pub fn sort_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exact ⟨x|Ĝ|Ψ⟩ by enumerating all block slot choices:
/// Σ_i (Π_t w_{t,i_t}) · sgn(i) · det(G_{S_x, R(i)}), with determinant rows
/// and columns in ascending mode order and sgn(i) the sign reordering the
/// slot creation sequence into ascending order.
pub fn oracle_amplitude(bra: &FockState, g: &GaussianMap, psi: &ApsgState) -> Result<C64> {
    if bra.num_modes() != psi.num_modes() || g.dim() != psi.num_modes() {
        return Err(Error::validation(
            "bra, map, and state must share the mode count",
        ));
    }
    if bra.particle_number() != psi.particle_number() {
        return Ok(Complex64::zero());
    }
    let terms = psi.support_size();
    if terms > MAX_AMPLITUDE_TERMS {
        return Err(Error::Capacity {
            what: "slot-choice enumeration terms",
            requested: terms.min(usize::MAX as u128) as usize,
            guard: MAX_AMPLITUDE_TERMS as usize,
            hint: "use estimate_fock_overlap",
        });
    }
    let rows = bra.occupied_modes();
    let n = psi.num_blocks();
    let two_n = 2 * n;
    let mut choice = vec![0usize; n];
    let mut acc = Complex64::zero();
    let mut seq = vec![0usize; two_n];
    let mut cols = vec![0usize; two_n];
    loop {
        // weight and creation sequence for this slot choice
        let mut weight = Complex64::new(1.0, 0.0);
        for (t, block) in psi.blocks().iter().enumerate() {
            let j = choice[t];
            weight *= block.weight(j);
            let (a, b) = block.slot_modes(j);
            seq[2 * t] = a;
            seq[2 * t + 1] = b;
        }
        if weight.norm_sqr() > 0.0 {
            cols.copy_from_slice(&seq);
            cols.sort_unstable();
            let sub = CMatrix::from_fn(two_n, two_n, |r, c| g.matrix()[(rows[r], cols[c])]);
            acc += weight * sort_sign(&seq) * sub.determinant();
        }
        // next mixed-radix choice
        let mut t = 0;
        loop {
            if t == n {
                return Ok(acc);
            }
            choice[t] += 1;
            if choice[t] < psi.blocks()[t].num_slots() {
                break;
            }
            choice[t] = 0;
            t += 1;
        }
    }
}

/// Observables the expectation oracle evaluates exactly.
#[derive(Debug, Clone)]
pub enum OracleObservable {
    /// Π_{i∈modes} n̂_i.
    NumberProduct(Vec<usize>),
    /// Π_{i∈modes} (−1)^{n̂_i}.
    Parity(Vec<usize>),
    /// Σ_pq h_pq ĉ_p†ĉ_q.
    OneBody(CMatrix),
    /// Π_sites (1 − n̂_a n̂_b) over (a, b) mode pairs.
    DoublonFreeString(Vec<(usize, usize)>),
}

/// Exact ⟨Ψ|Ĝ†ÔĜ|Ψ⟩ by full statevector evolution.
pub fn oracle_expectation(
    obs: &OracleObservable,
    g: &GaussianMap,
    psi: &ApsgState,
) -> Result<C64> {
    if psi.num_modes() > MAX_EXPECTATION_MODES {
        return Err(Error::Capacity {
            what: "expectation oracle modes",
            requested: psi.num_modes(),
            guard: MAX_EXPECTATION_MODES,
            hint: "use the Monte Carlo estimators",
        });
    }
    let sv = gaussian_on_apsg(g, psi)?;
    expectation_on_statevector(obs, &sv)
}

/// Exact ⟨φ|Ô|φ⟩ on an explicit statevector.
pub fn expectation_on_statevector(obs: &OracleObservable, sv: &StateVector) -> Result<C64> {
    match obs {
        OracleObservable::NumberProduct(modes) => {
            let mask = mode_mask(modes, sv.num_modes())?;
            let v = sv.expectation_fock_diagonal(&|s| if s & mask == mask { 1.0 } else { 0.0 });
            Ok(Complex64::new(v, 0.0))
        }
        OracleObservable::Parity(modes) => {
            let mask = mode_mask(modes, sv.num_modes())?;
            let v = sv.expectation_fock_diagonal(&|s| {
                if (s & mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            });
            Ok(Complex64::new(v, 0.0))
        }
        OracleObservable::OneBody(h) => {
            if h.nrows() != sv.num_modes() || h.ncols() != sv.num_modes() {
                return Err(Error::validation("one-body matrix dimension mismatch"));
            }
            Ok(sv.inner(&sv.one_body_applied(h)))
        }
        OracleObservable::DoublonFreeString(pairs) => {
            for &(a, b) in pairs {
                if a >= sv.num_modes() || b >= sv.num_modes() {
                    return Err(Error::validation("projector mode out of range"));
                }
            }
            let pairs = pairs.clone();
            let v = sv.expectation_fock_diagonal(&|s| {
                let mut val = 1.0;
                for &(a, b) in &pairs {
                    if s & (1 << a) != 0 && s & (1 << b) != 0 {
                        val = 0.0;
                        break;
                    }
                }
                val
            });
            Ok(Complex64::new(v, 0.0))
        }
    }
}

fn mode_mask(modes: &[usize], num_modes: usize) -> Result<usize> {
    let mut mask = 0usize;
    for &m in modes {
        if m >= num_modes {
            return Err(Error::validation(format!(
                "observable mode {m} out of range for {num_modes} modes"
            )));
        }
        mask |= 1usize << m;
    }
    Ok(mask)
}
