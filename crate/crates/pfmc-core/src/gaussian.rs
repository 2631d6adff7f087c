//! Number-preserving single-particle maps.
//!
//! A map is stored as its M×M single-particle matrix G together with a
//! unitary flag and the cached operator norm. The induced Fock-space action
//! sends ĉ_j† ↦ Σ_i G_ij ĉ_i† and fixes the vacuum.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Max-norm tolerance on ‖G†G − I‖ for the unitary flag.
pub const TOL_UNITARY: f64 = 1e-10;
/// Max-norm tolerance on ‖H − H†‖ for Hermitian generators.
pub const TOL_HERMITIAN: f64 = 1e-10;

/// Largest singular value of a dense complex matrix, computed as
/// sqrt(λ_max(G†G)) from the Hermitian eigendecomposition.
pub fn operator_norm(mat: &CMatrix) -> f64 {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return 0.0;
    }
    let gram = mat.adjoint() * mat;
    let eig = gram.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.max(0.0)))
        .sqrt()
}

fn max_entry_norm(mat: &CMatrix) -> f64 {
    mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMap {
    mat: CMatrix,
    unitary: bool,
    op_norm: f64,
}

impl GaussianMap {
    pub fn identity(m: usize) -> Self {
        GaussianMap {
            mat: CMatrix::identity(m, m),
            unitary: true,
            op_norm: 1.0,
        }
    }

    /// Wrap a matrix asserted to be unitary; validated to [`TOL_UNITARY`].
    pub fn unitary(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::validation("unitary map must be square"));
        }
        let gram = mat.adjoint() * &mat;
        let dev = max_entry_norm(&(gram - CMatrix::identity(mat.nrows(), mat.ncols())));
        if dev > TOL_UNITARY {
            return Err(Error::validation(format!(
                "matrix is not unitary: max |G†G - I| = {dev:.3e} exceeds {TOL_UNITARY:.1e}"
            )));
        }
        Ok(GaussianMap {
            mat,
            unitary: true,
            op_norm: 1.0,
        })
    }

    /// Wrap a general number-preserving map; the operator norm is computed.
    pub fn general(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::validation("gaussian map must be square"));
        }
        let op_norm = operator_norm(&mat);
        Ok(GaussianMap {
            mat,
            unitary: false,
            op_norm,
        })
    }

    /// diag(e^{iθ₁}, …, e^{iθ_M}).
    pub fn diagonal_phase(thetas: &[f64]) -> Self {
        let m = thetas.len();
        let mut mat = CMatrix::zeros(m, m);
        for (i, &th) in thetas.iter().enumerate() {
            mat[(i, i)] = Complex64::new(th.cos(), th.sin());
        }
        GaussianMap {
            mat,
            unitary: true,
            op_norm: 1.0,
        }
    }

    /// General diagonal map.
    pub fn diagonal(entries: &[C64]) -> Self {
        let m = entries.len();
        let mut mat = CMatrix::zeros(m, m);
        let mut norm = 0.0f64;
        let mut unitary = true;
        for (i, &d) in entries.iter().enumerate() {
            mat[(i, i)] = d;
            norm = norm.max(d.norm());
            unitary &= (d.norm() - 1.0).abs() <= TOL_UNITARY;
        }
        GaussianMap {
            mat,
            unitary,
            op_norm: if unitary { 1.0 } else { norm },
        }
    }

    /// The parity map D_T: −1 on modes in `subset`, +1 elsewhere.
    pub fn parity(m: usize, subset: &[usize]) -> Result<Self> {
        let mut diag = alloc::vec![Complex64::new(1.0, 0.0); m];
        for &i in subset {
            if i >= m {
                return Err(Error::validation(format!(
                    "parity mode {i} out of range for {m} modes"
                )));
            }
            diag[i] = Complex64::new(-1.0, 0.0);
        }
        Ok(Self::diagonal_phase_from(diag))
    }

    fn diagonal_phase_from(diag: Vec<C64>) -> Self {
        let m = diag.len();
        let mut mat = CMatrix::zeros(m, m);
        for (i, d) in diag.into_iter().enumerate() {
            mat[(i, i)] = d;
        }
        GaussianMap {
            mat,
            unitary: true,
            op_norm: 1.0,
        }
    }

    /// e^{scale·H} for Hermitian H via eigendecomposition. Unitary exactly
    /// when `scale` is purely imaginary.
    pub fn expm_hermitian(h: &CMatrix, scale: C64) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::validation("generator must be square"));
        }
        let dev = max_entry_norm(&(h - h.adjoint()));
        let scale_h = max_entry_norm(h).max(1.0);
        if dev > TOL_HERMITIAN * scale_h {
            return Err(Error::validation(format!(
                "generator is not Hermitian: max |H - H†| = {dev:.3e}"
            )));
        }
        let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let m = h.nrows();
        let mut d = CMatrix::zeros(m, m);
        for i in 0..m {
            d[(i, i)] = (scale * eig.eigenvalues[i]).exp();
        }
        let mat = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        if scale.re.abs() < 1e-300 {
            // Purely imaginary scale: clean up to an exactly flagged unitary.
            Ok(GaussianMap {
                mat,
                unitary: true,
                op_norm: 1.0,
            })
        } else {
            Self::general(mat)
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn adjoint(&self) -> GaussianMap {
        GaussianMap {
            mat: self.mat.adjoint(),
            unitary: self.unitary,
            op_norm: self.op_norm,
        }
    }

    /// Matrix product `left · right` (right acts first on states).
    pub fn compose(left: &GaussianMap, right: &GaussianMap) -> Result<GaussianMap> {
        if left.dim() != right.dim() {
            return Err(Error::validation(format!(
                "compose dimension mismatch: {} vs {}",
                left.dim(),
                right.dim()
            )));
        }
        let mat = &left.mat * &right.mat;
        let unitary = left.unitary && right.unitary;
        let op_norm = if unitary { 1.0 } else { operator_norm(&mat) };
        Ok(GaussianMap {
            mat,
            unitary,
            op_norm,
        })
    }
}


#[cfg(test)]
pub(crate) use tests::random_unitary;
