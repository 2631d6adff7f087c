//! Spinful lattice geometry, hopping evolution, and real-time
//! Hubbard–Stratonovich propagators.
//!
//! Mode layout: spin-up modes occupy [0, L), spin-down modes [L, 2L), with
//! site i mapping to modes i and L+i. Sites are indexed row-major on an
//! Lx × Ly grid.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gaussian::GaussianMap;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub i: usize,
    pub j: usize,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    lx: usize,
    ly: usize,
    links: Vec<Link>,
}

impl LatticeSpec {
    pub fn new(lx: usize, ly: usize, links: Vec<Link>) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(Error::validation("lattice dimensions must be positive"));
        }
        let l = lx * ly;
        let mut seen: Vec<(usize, usize)> = Vec::with_capacity(links.len());
        for link in &links {
            if link.i >= l || link.j >= l {
                return Err(Error::validation(format!(
                    "link ({}, {}) out of range for {l} sites",
                    link.i, link.j
                )));
            }
            if link.i == link.j {
                return Err(Error::validation(format!("link ({0}, {0}) is a self-loop", link.i)));
            }
            let (xi, yi) = (link.i % lx, link.i / lx);
            let (xj, yj) = (link.j % lx, link.j / lx);
            let dist = xi.abs_diff(xj) + yi.abs_diff(yj);
            if dist != 1 {
                return Err(Error::validation(format!(
                    "link ({}, {}) is not nearest-neighbor on a {lx}x{ly} grid",
                    link.i, link.j
                )));
            }
            let key = (link.i.min(link.j), link.i.max(link.j));
            if seen.contains(&key) {
                return Err(Error::validation(format!(
                    "link ({}, {}) listed more than once",
                    link.i, link.j
                )));
            }
            seen.push(key);
        }
        Ok(LatticeSpec { lx, ly, links })
    }

    /// All nearest-neighbor links of the grid with zero phases.
    pub fn grid(lx: usize, ly: usize) -> Result<Self> {
        let mut links = Vec::new();
        for y in 0..ly {
            for x in 0..lx {
                let i = y * lx + x;
                if x + 1 < lx {
                    links.push(Link { i, j: i + 1, phi: 0.0 });
                }
                if y + 1 < ly {
                    links.push(Link { i, j: i + lx, phi: 0.0 });
                }
            }
        }
        Self::new(lx, ly, links)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn num_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn num_modes(&self) -> usize {
        2 * self.num_sites()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn mode_up(&self, site: usize) -> usize {
        site
    }

    pub fn mode_down(&self, site: usize) -> usize {
        self.num_sites() + site
    }

    pub fn are_linked(&self, i: usize, j: usize) -> bool {
        self.links
            .iter()
            .any(|l| (l.i == i && l.j == j) || (l.i == j && l.j == i))
    }

    /// The Hermitian single-particle hopping matrix h₀ of
    /// Ĥ₀ = −J Σ_{⟨ij⟩σ} (e^{iφ_ij} ĉ_iσ†ĉ_jσ + h.c.), spin-block-diagonal.
    pub fn hopping_matrix(&self, j_energy: f64) -> CMatrix {
        let l = self.num_sites();
        let m = self.num_modes();
        let mut h = CMatrix::zeros(m, m);
        for link in &self.links {
            let amp = Complex64::new(0.0, link.phi).exp() * (-j_energy);
            for offset in [0usize, l] {
                h[(link.i + offset, link.j + offset)] += amp;
                h[(link.j + offset, link.i + offset)] += amp.conj();
            }
        }
        h
    }
}

/// e^{−i t h₀}: exact free evolution, unitary for all t.
pub fn hopping_evolution(lat: &LatticeSpec, j_energy: f64, t: f64) -> Result<GaussianMap> {
    if !t.is_finite() || !j_energy.is_finite() {
        return Err(Error::validation("time and hopping energy must be finite"));
    }
    let h = lat.hopping_matrix(j_energy);
    GaussianMap::expm_hermitian(&h, Complex64::new(0.0, -t))
}

/// Principal-branch λ with cosh λ = e^{iWΔt/2}.
pub fn hirsch_lambda(w: f64, dt: f64) -> C64 {
    let z = Complex64::new(0.0, w * dt / 2.0).exp();
    // arccosh(z) = ln(z + sqrt(z² − 1)), principal branches throughout;
    // continuous at λ → 0 from either sign of WΔt.
    (z + (z * z - 1.0).sqrt()).ln()
}

/// The diagonal one-body Hubbard–Stratonovich factor V(σ) for one time
/// slice: e^{−λσ_i} on spin-up modes, e^{+λσ_i} on spin-down modes.
pub fn hs_interaction_diagonal(lat: &LatticeSpec, lambda: C64, sigma: &[i8]) -> Result<GaussianMap> {
    let l = lat.num_sites();
    if sigma.len() != l {
        return Err(Error::validation(format!(
            "auxiliary field has {} entries, lattice has {l} sites",
            sigma.len()
        )));
    }
    let mut diag = Vec::with_capacity(2 * l);
    for &s in sigma {
        if s != 1 && s != -1 {
            return Err(Error::validation(format!(
                "auxiliary field entries must be ±1, got {s}"
            )));
        }
    }
    for &s in sigma {
        diag.push((-lambda * (s as f64)).exp());
    }
    for &s in sigma {
        diag.push((lambda * (s as f64)).exp());
    }
    Ok(GaussianMap::diagonal(&diag))
}

/// Non-unitary Strang-split Hubbard–Stratonovich propagator
/// G(σ) = Π_ℓ (U_{Δt/2} V(σ_ℓ) U_{Δt/2}); `sigma_path[0]` acts first.
pub fn hs_propagator(
    lat: &LatticeSpec,
    j_energy: f64,
    w: f64,
    dt: f64,
    sigma_path: &[Vec<i8>],
) -> Result<GaussianMap> {
    let n = sigma_path.len();
    if n == 0 {
        return Err(Error::validation("need at least one time slice"));
    }
    if dt <= 0.0 {
        return Err(Error::validation("time step must be positive"));
    }
    let lambda = hirsch_lambda(w, dt);
    let u_half = hopping_evolution(lat, j_energy, dt / 2.0)?;
    let mut acc = u_half.clone();
    for (l_idx, sigma) in sigma_path.iter().enumerate() {
        let v = hs_interaction_diagonal(lat, lambda, sigma)?;
        acc = GaussianMap::compose(&v, &acc)?;
        acc = GaussianMap::compose(&u_half, &acc)?;
        if l_idx + 1 < n {
            // adjacent half steps of consecutive slices merge into one
            acc = GaussianMap::compose(&u_half, &acc)?;
        }
    }
    let a = lambda.re.abs();
    let bound = (a * n as f64).exp();
    debug_assert!(
        acc.op_norm() <= bound * (1.0 + 1e-6),
        "HS propagator norm {} exceeds envelope {}",
        acc.op_norm(),
        bound
    );
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::TOL_UNITARY;
    use num_traits::Zero;

    #[test]
    fn grid_link_count() {
        let lat = LatticeSpec::grid(2, 3).unwrap();
        assert_eq!(lat.num_sites(), 6);
        assert_eq!(lat.num_modes(), 12);
        assert_eq!(lat.links().len(), 7); // 3 horizontal + 4 vertical on 2x3
    }

    #[test]
    fn malformed_lattices_rejected() {
        assert!(LatticeSpec::new(2, 2, alloc::vec![Link { i: 0, j: 3, phi: 0.0 }]).is_err());
        assert!(LatticeSpec::new(2, 2, alloc::vec![Link { i: 0, j: 0, phi: 0.0 }]).is_err());
        assert!(LatticeSpec::new(
            2,
            2,
            alloc::vec![Link { i: 0, j: 1, phi: 0.0 }, Link { i: 1, j: 0, phi: 0.1 }]
        )
        .is_err());
    }

    #[test]
    fn hopping_at_zero_time_is_identity() {
        let lat = LatticeSpec::grid(2, 1).unwrap();
        let u = hopping_evolution(&lat, 1.3, 0.0).unwrap();
        assert!((u.matrix() - CMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn dimer_full_transfer_at_quarter_period() {
        // Single link, φ=0, J=1: h = −σ_x per spin sector, e^{−ith} has
        // off-diagonal magnitude sin(t); full transfer at t = π/2.
        let lat = LatticeSpec::grid(2, 1).unwrap();
        let u = hopping_evolution(&lat, 1.0, core::f64::consts::FRAC_PI_2).unwrap();
        let m = u.matrix();
        assert!(m[(0, 0)].norm() < 1e-12);
        assert!((m[(0, 1)].norm() - 1.0).abs() < 1e-12);
        // at generic t the transfer probability is sin²(t)
        let t = 0.37;
        let u = hopping_evolution(&lat, 1.0, t).unwrap();
        assert!((u.matrix()[(0, 1)].norm_sqr() - t.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn hopping_is_unitary_on_random_lattices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(37);
        for _ in 0..5 {
            let mut lat = LatticeSpec::grid(3, 2).unwrap();
            for link in &mut lat.links {
                link.phi = rng.gen::<f64>() * 6.28;
            }
            let t = rng.gen::<f64>() * 4.0 - 2.0;
            let u = hopping_evolution(&lat, 0.9, t).unwrap();
            assert!(u.is_unitary());
            let dev = (u.matrix().adjoint() * u.matrix() - CMatrix::identity(12, 12))
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            assert!(dev <= TOL_UNITARY, "unitarity deviation {dev}");
        }
    }

    #[test]
    fn hirsch_lambda_examples() {
        assert!(hirsch_lambda(0.0, 1.0).norm() < 1e-15);

        // WΔt = 2π: cosh λ = e^{iπ} = −1, λ = ±iπ (purely imaginary, a=0).
        // The branch point costs sqrt-of-eps accuracy in λ itself and leaves
        // the Im sign to rounding; cosh λ stays at 1e−12.
        let l = hirsch_lambda(2.0 * core::f64::consts::PI, 1.0);
        assert!(l.re.abs() < 1e-7, "Re λ = {}", l.re);
        assert!((l.im.abs() - core::f64::consts::PI).abs() < 1e-7);
        assert!((l.cosh() - Complex64::new(-1.0, 0.0)).norm() <= 1e-12);

        // W=4, dt=0.5: verify cosh λ = e^{i} directly.
        let l = hirsch_lambda(4.0, 0.5);
        let target = Complex64::new(0.0, 1.0).exp();
        assert!((l.cosh() - target).norm() <= 1e-12);
    }

    #[test]
    fn hirsch_lambda_continuous_at_zero() {
        let eps = 1e-8;
        assert!(hirsch_lambda(eps, 1.0).norm() < 1e-3);
        assert!(hirsch_lambda(-eps, 1.0).norm() < 1e-3);
    }

    #[test]
    fn hs_single_site_slice_diagonal() {
        let lat = LatticeSpec::new(1, 1, Vec::new()).unwrap();
        let lam = hirsch_lambda(2.0, 0.3);
        let v = hs_interaction_diagonal(&lat, lam, &[1]).unwrap();
        assert!((v.matrix()[(0, 0)] - (-lam).exp()).norm() < 1e-15);
        assert!((v.matrix()[(1, 1)] - lam.exp()).norm() < 1e-15);
    }

    #[test]
    fn hs_identity_on_single_site() {
        // (1/2) Σ_σ e^{−iΔtW/4} exp(λσ(n↑−n↓)) = e^{−iΔtW(n↑−½)(n↓−½)}
        // on the four occupation states, to 1e−12.
        let w = 4.0;
        let dt = 0.5;
        let lam = hirsch_lambda(w, dt);
        let scalar = Complex64::new(0.0, -dt * w / 4.0).exp();
        for (nu, nd) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let mut avg = Complex64::zero();
            for s in [1.0f64, -1.0] {
                avg += (lam * s * (nu - nd)).exp() * scalar * 0.5;
            }
            let rhs = Complex64::new(0.0, -dt * w * (nu - 0.5) * (nd - 0.5)).exp();
            assert!(
                (avg - rhs).norm() <= 1e-12,
                "(n↑,n↓)=({nu},{nd}): {avg} vs {rhs}"
            );
        }
    }

    #[test]
    fn hs_propagator_reduces_to_hopping_at_zero_w() {
        let lat = LatticeSpec::grid(2, 1).unwrap();
        let sigma = alloc::vec![alloc::vec![1i8, -1], alloc::vec![-1i8, -1]];
        let g = hs_propagator(&lat, 1.0, 0.0, 0.4, &sigma).unwrap();
        let u = hopping_evolution(&lat, 1.0, 0.8).unwrap();
        assert!((g.matrix() - u.matrix()).norm() < 1e-10);
    }

    #[test]
    fn hs_propagator_norm_envelope() {
        let lat = LatticeSpec::grid(2, 1).unwrap();
        let sigma = alloc::vec![alloc::vec![1i8, -1], alloc::vec![1i8, 1]];
        let g = hs_propagator(&lat, 1.0, 4.0, 0.25, &sigma).unwrap();
        let a = hirsch_lambda(4.0, 0.25).re.abs();
        assert!(g.op_norm() <= (2.0 * a).exp() + 1e-9);
        assert!(!g.is_unitary());
    }

    #[test]
    fn hs_propagator_validates_sigma() {
        let lat = LatticeSpec::grid(2, 1).unwrap();
        let sigma = alloc::vec![alloc::vec![1i8, 0]];
        assert!(hs_propagator(&lat, 1.0, 4.0, 0.25, &sigma).is_err());
    }
}
