//! Exterior-algebra test oracles: explicit wedge-product expansion over
//! basis monomials, the top-form coefficient, and exact mixed-Pfaffian
//! coefficient extraction by full sign enumeration.
//!
//! These are deliberately independent of the Parlett–Reid code path so the
//! two can check each other.

use alloc::collections::BTreeMap;
use alloc::format;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::pfaffian::{pfaffian_in_place, SkewMatrix};
use crate::{CMatrix, C64};

/// Guard for the combinatorial wedge expansion: number of forms.
pub const WEDGE_GUARD: usize = 8;
/// Guard for exact 2^N sign enumeration in [`mixed_pfaffian_exact`].
pub const MIXED_EXACT_GUARD: usize = 24;

/// Sign of interleaving the basis monomial `s2` after `s1` (disjoint bit
/// sets): (-1)^{Σ_{j∈s2} |{i∈s1 : i > j}|}.
fn interleave_sign(s1: u32, s2: u32) -> f64 {
    let mut parity = 0u32;
    let mut rest = s2;
    while rest != 0 {
        let j = rest.trailing_zeros();
        parity ^= ((s1 >> (j + 1)).count_ones()) & 1;
        rest &= rest - 1;
    }
    if parity & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A multivector over a 2N-dimensional basis, keyed by occupation bitmask.
#[derive(Debug, Clone)]
struct Multivector {
    terms: BTreeMap<u32, C64>,
}

impl Multivector {
    fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(0u32, Complex64::new(1.0, 0.0));
        Multivector { terms }
    }

    /// α(B) = Σ_{p<q} B_pq e_p ∧ e_q.
    fn two_form(b: &SkewMatrix) -> Self {
        let mut terms = BTreeMap::new();
        let n = b.dim();
        for p in 0..n {
            for q in (p + 1)..n {
                let v = b.matrix()[(p, q)];
                if !v.is_zero() {
                    terms.insert((1u32 << p) | (1u32 << q), v);
                }
            }
        }
        Multivector { terms }
    }

    fn wedge(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<u32, C64> = BTreeMap::new();
        for (&s1, &c1) in &self.terms {
            for (&s2, &c2) in &other.terms {
                if s1 & s2 != 0 {
                    continue;
                }
                let coeff = c1 * c2 * interleave_sign(s1, s2);
                let entry = terms.entry(s1 | s2).or_insert_with(Complex64::zero);
                *entry += coeff;
            }
        }
        Multivector { terms }
    }

    fn coefficient(&self, mask: u32) -> C64 {
        self.terms.get(&mask).copied().unwrap_or_else(Complex64::zero)
    }
}

fn check_form_dims(forms: &[SkewMatrix], expected_dim: usize) -> Result<()> {
    for (t, f) in forms.iter().enumerate() {
        if f.dim() != expected_dim {
            return Err(Error::validation(format!(
                "form {t} has dim {} but expected {expected_dim}",
                f.dim()
            )));
        }
    }
    Ok(())
}

/// Expand α(B₁) ∧ ⋯ ∧ α(B_N) symbolically over the 2N-dimensional basis and
/// return the coefficient of e₁ ∧ ⋯ ∧ e_{2N}.
pub fn wedge_top_coefficient_oracle(forms: &[SkewMatrix]) -> Result<C64> {
    let n = forms.len();
    if n == 0 {
        return Err(Error::validation("need at least one form"));
    }
    if n > WEDGE_GUARD {
        return Err(Error::Capacity {
            what: "wedge expansion forms",
            requested: n,
            guard: WEDGE_GUARD,
            hint: "use mixed_pfaffian_exact or the Monte Carlo estimator",
        });
    }
    let dim = 2 * n;
    check_form_dims(forms, dim)?;
    let mut acc = Multivector::one();
    for f in forms {
        acc = acc.wedge(&Multivector::two_form(f));
    }
    let full: u32 = if dim == 32 { u32::MAX } else { (1u32 << dim) - 1 };
    Ok(acc.coefficient(full))
}

/// Exact mixed-Pfaffian coefficient [y₁⋯y_N] pf(Σ_t y_t B_t) by averaging
/// pf(Σ_t b_t B_t)·Π_t b_t over all 2^N sign vectors. Bit-exact oracle for
/// the Monte Carlo sign filter.
pub fn mixed_pfaffian_exact(blocks: &[SkewMatrix]) -> Result<C64> {
    let n = blocks.len();
    if n == 0 {
        return Err(Error::validation("need at least one block"));
    }
    if n > MIXED_EXACT_GUARD {
        return Err(Error::Capacity {
            what: "mixed-pfaffian sign enumeration blocks",
            requested: n,
            guard: MIXED_EXACT_GUARD,
            hint: "use the Monte Carlo estimator",
        });
    }
    let dim = 2 * n;
    check_form_dims(blocks, dim)?;
    let mut acc = Complex64::zero();
    let mut work = CMatrix::zeros(dim, dim);
    for bits in 0u64..(1u64 << n) {
        work.fill(Complex64::zero());
        let mut sign_prod = 1.0f64;
        for (t, b) in blocks.iter().enumerate() {
            let s = if bits >> t & 1 == 0 { 1.0 } else { -1.0 };
            sign_prod *= s;
            let sc = Complex64::new(s, 0.0);
            work.zip_apply(b.matrix(), |w, b| *w += sc * b);
        }
        acc += pfaffian_in_place(&mut work) * sign_prod;
    }
    Ok(acc / Complex64::new((1u64 << n) as f64, 0.0))
}
