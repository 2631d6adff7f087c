//! Skew-symmetric dense complex matrices and Pfaffian evaluation.
//!
//! The Pfaffian is computed by skew-symmetric tridiagonalization with
//! Parlett–Reid elimination and partial pivoting, accumulating the product
//! of pivots and the permutation sign. Cost is O(n³) and the factorization
//! is stable for complex inputs.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// Relative antisymmetry tolerance: entries must satisfy
/// |A[p][q] + A[q][p]| <= TOL_SKEW * max|entry|.
pub const TOL_SKEW: f64 = 1e-12;

/// A validated skew-symmetric complex matrix.
///
/// Construction symmetrizes the input to (A - Aᵀ)/2 with an exactly zero
/// diagonal, after checking that the adjustment stays within [`TOL_SKEW`].
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    mat: CMatrix,
}

impl SkewMatrix {
    /// Validate and symmetrize a square matrix.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::validation(format!(
                "skew matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let n = mat.nrows();
        let scale = mat
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut worst = 0.0f64;
        let mut worst_pair = (0usize, 0usize);
        for p in 0..n {
            for q in p..n {
                let viol = (mat[(p, q)] + mat[(q, p)]).norm();
                if viol > worst {
                    worst = viol;
                    worst_pair = (p, q);
                }
            }
        }
        if worst > TOL_SKEW * scale {
            let (p, q) = worst_pair;
            return Err(Error::validation(format!(
                "matrix is not skew-symmetric: entries ({p},{q}) and ({q},{p}) \
                 violate antisymmetry by {worst:.3e} (tolerance {:.3e})",
                TOL_SKEW * scale
            )));
        }
        Ok(Self::from_valid(mat))
    }

    /// Symmetrize without the antisymmetry check (for matrices that are skew
    /// by construction, e.g. congruence images and assembled pair forms).
    pub(crate) fn from_valid(mat: CMatrix) -> Self {
        let n = mat.nrows();
        let mut out = CMatrix::zeros(n, n);
        for p in 0..n {
            for q in (p + 1)..n {
                let v = (mat[(p, q)] - mat[(q, p)]) * 0.5;
                out[(p, q)] = v;
                out[(q, p)] = -v;
            }
        }
        SkewMatrix { mat: out }
    }

    /// Build from the strictly upper triangle: `entries` holds (p, q, value)
    /// with p < q meaning A[p][q] = value, A[q][p] = -value.
    pub fn from_upper(dim: usize, entries: &[(usize, usize, C64)]) -> Result<Self> {
        let mut mat = CMatrix::zeros(dim, dim);
        for &(p, q, v) in entries {
            if p >= dim || q >= dim || p == q {
                return Err(Error::validation(format!(
                    "upper-triangle entry ({p},{q}) out of range for dim {dim}"
                )));
            }
            mat[(p, q)] = v;
            mat[(q, p)] = -v;
        }
        Ok(SkewMatrix { mat })
    }

    /// The rank-2 form Ω(u,v) = uvᵀ - vuᵀ.
    pub fn pair_form(u: &CVector, v: &CVector) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::validation(format!(
                "pair form vectors must have equal length, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        let n = u.len();
        let mut mat = CMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                mat[(p, q)] = u[p] * v[q] - v[p] * u[q];
            }
        }
        Ok(SkewMatrix { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Congruence transform XᵀAX; X may be rectangular (mode restriction).
    pub fn congruence(&self, x: &CMatrix) -> Result<SkewMatrix> {
        if x.nrows() != self.dim() {
            return Err(Error::validation(format!(
                "congruence shape mismatch: A is {0}x{0} but X is {1}x{2}",
                self.dim(),
                x.nrows(),
                x.ncols()
            )));
        }
        let m = x.transpose() * &self.mat * x;
        Ok(SkewMatrix::from_valid(m))
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        crate::gaussian::operator_norm(&self.mat)
    }
}

/// Pfaffian of a validated skew-symmetric matrix.
///
/// Odd dimension returns exactly zero.
pub fn pfaffian(a: &SkewMatrix) -> C64 {
    let mut work = a.mat.clone();
    pfaffian_in_place(&mut work)
}

/// Parlett–Reid Pfaffian on a raw matrix assumed skew by construction.
/// The matrix is destroyed. Used on hot paths where validation would be
/// redundant.
pub(crate) fn pfaffian_in_place(a: &mut CMatrix) -> C64 {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return Complex64::zero();
    }
    if n == 2 {
        return a[(0, 1)];
    }
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0usize;
    while k + 1 < n {
        // Pivot: largest |A[i][k]| for i in k+1..n moved to row k+1.
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for i in (k + 2)..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot.is_zero() {
            return Complex64::zero();
        }
        pf *= pivot;
        if k + 2 < n {
            // Eliminate column k below row k+1:
            // A[i][j] += tau[i]*A[j][k+1] - A[i][k+1]*tau[j], tau = A[k+2.., k] / A[k+1][k].
            let inv = Complex64::new(1.0, 0.0) / a[(k + 1, k)];
            let tau: Vec<C64> = ((k + 2)..n).map(|i| a[(i, k)] * inv).collect();
            let col: Vec<C64> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pfaffian_2x2_definition() {
        let a = SkewMatrix::from_upper(2, &[(0, 1, c(1.0, 0.0))]).unwrap();
        assert_eq!(pfaffian(&a), c(1.0, 0.0));
    }

    #[test]
    fn pfaffian_4x4_matching_sum() {
        // a12=2, a13=3, a14=5, a23=7, a24=11, a34=13
        // pf = a12*a34 - a13*a24 + a14*a23 = 26 - 33 + 35 = 28
        let a = SkewMatrix::from_upper(
            4,
            &[
                (0, 1, c(2.0, 0.0)),
                (0, 2, c(3.0, 0.0)),
                (0, 3, c(5.0, 0.0)),
                (1, 2, c(7.0, 0.0)),
                (1, 3, c(11.0, 0.0)),
                (2, 3, c(13.0, 0.0)),
            ],
        )
        .unwrap();
        let pf = pfaffian(&a);
        assert!((pf - c(28.0, 0.0)).norm() < 1e-12, "pf = {pf}");
    }

    #[test]
    fn pfaffian_odd_dimension_is_zero() {
        let a = SkewMatrix::from_upper(3, &[(0, 1, c(4.0, 1.0)), (1, 2, c(-2.0, 0.5))]).unwrap();
        assert_eq!(pfaffian(&a), Complex64::zero());
    }

    #[test]
    fn non_skew_input_names_worst_pair() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(-1.0, 0.0);
        m[(0, 2)] = c(2.0, 0.0);
        m[(2, 0)] = c(2.0, 0.0); // violates antisymmetry
        let err = SkewMatrix::new(m).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("(0,2)"), "unexpected message: {msg}");
    }

    #[test]
    fn non_square_rejected() {
        let m = CMatrix::zeros(2, 3);
        assert!(SkewMatrix::new(m).is_err());
    }

    use rand::Rng;

    fn random_skew(dim: usize, rng: &mut impl Rng) -> SkewMatrix {
        let mut entries = alloc::vec::Vec::new();
        for p in 0..dim {
            for q in (p + 1)..dim {
                entries.push((p, q, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)));
            }
        }
        SkewMatrix::from_upper(dim, &entries).unwrap()
    }

    fn random_mat(n: usize, rng: &mut impl rand::Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for dim in [2usize, 4, 6, 8, 10, 12] {
            for _ in 0..20 {
                let a = random_skew(dim, &mut rng);
                let pf = pfaffian(&a);
                let det = a.matrix().clone().determinant();
                let err = (pf * pf - det).norm();
                assert!(
                    err <= 1e-9 * det.norm().max(1.0),
                    "dim {dim}: pf²={}, det={}",
                    pf * pf,
                    det
                );
            }
        }
    }

    #[test]
    fn congruence_identity_and_scalar() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let a = random_skew(6, &mut rng);
        let id = CMatrix::identity(6, 6);
        let same = a.congruence(&id).unwrap();
        assert!((same.matrix() - a.matrix()).norm() < 1e-14);

        // X = c·I scales pf by c^{2N} = det(X).
        let cc = c(0.7, -0.3);
        let x = CMatrix::from_diagonal_element(6, 6, cc);
        let scaled = a.congruence(&x).unwrap();
        let expect = pfaffian(&a) * cc.powu(6);
        assert!((pfaffian(&scaled) - expect).norm() < 1e-12);
    }

    #[test]
    fn congruence_det_identity_random() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        for _ in 0..20 {
            let a = random_skew(6, &mut rng);
            let x = random_mat(6, &mut rng);
            let lhs = pfaffian(&a.congruence(&x).unwrap());
            let rhs = x.clone().determinant() * pfaffian(&a);
            assert!(
                (lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0),
                "lhs={lhs} rhs={rhs}"
            );
        }
    }

    #[test]
    fn congruence_shape_mismatch() {
        let a = SkewMatrix::from_upper(4, &[(0, 1, c(1.0, 0.0))]).unwrap();
        let x = CMatrix::zeros(3, 4);
        assert!(a.congruence(&x).is_err());
    }

    #[test]
    fn rectangular_congruence_restricts_dim() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        let a = random_skew(6, &mut rng);
        let x = CMatrix::from_fn(6, 4, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let b = a.congruence(&x).unwrap();
        assert_eq!(b.dim(), 4);
    }

    #[test]
    fn pointwise_pfaffian_bound() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(19);
        for _ in 0..50 {
            let a = random_skew(8, &mut rng);
            let bound = a.op_norm().powi(4);
            assert!(pfaffian(&a).norm() <= bound + 1e-9);
        }
    }

    #[test]
    fn pair_form_is_skew() {
        let u = CVector::from_vec(alloc::vec![c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0)]);
        let v = CVector::from_vec(alloc::vec![c(-0.5, 0.0), c(1.0, 1.0), c(0.0, 0.3)]);
        let f = SkewMatrix::pair_form(&u, &v).unwrap();
        SkewMatrix::new(f.matrix().clone()).unwrap();
    }
}
