//! Resolution of map specifications into concrete Gaussian maps.

use pfmc_core::gaussian::GaussianMap;
use pfmc_core::lattice::{hopping_evolution, hs_propagator};

use crate::config::{MapSpec, ResolutionFlags, Result};

/// Resolve a map spec. `Compose([a, b, c])` is the product a·b·c, with c
/// acting first on states.
pub fn resolve_map(spec: &MapSpec, flags: &mut ResolutionFlags) -> Result<GaussianMap> {
    match spec {
        MapSpec::Identity(m) => Ok(GaussianMap::identity(*m)),
        MapSpec::Hopping { lattice, t, j } => {
            let lat = lattice.resolve(flags)?;
            let j_energy = j.or(lattice.j).unwrap_or(1.0);
            hopping_evolution(&lat, j_energy, *t)
        }
        MapSpec::DiagonalPhases(thetas) => Ok(GaussianMap::diagonal_phase(thetas)),
        MapSpec::Matrix { entries, unitary } => {
            let mat = crate::config::MatrixJson(entries.clone()).resolve()?;
            if *unitary {
                GaussianMap::unitary(mat)
            } else {
                GaussianMap::general(mat)
            }
        }
        MapSpec::Compose(parts) => {
            if parts.is_empty() {
                return Err(pfmc_core::Error::Validation(
                    "compose needs at least one map".into(),
                ));
            }
            let mut acc = resolve_map(&parts[0], flags)?;
            for part in &parts[1..] {
                let next = resolve_map(part, flags)?;
                acc = GaussianMap::compose(&acc, &next)?;
            }
            Ok(acc)
        }
        MapSpec::Adjoint(inner) => Ok(resolve_map(inner, flags)?.adjoint()),
        MapSpec::HsPropagator {
            lattice,
            j,
            w,
            dt,
            sigma,
        } => {
            let lat = lattice.resolve(flags)?;
            hs_propagator(&lat, *j, *w, *dt, sigma)
        }
    }
}
