//! Monte Carlo estimators.
//!
//! Every estimator draws independent one-shot variables whose expectation
//! is the target quantity; budgets follow Hoeffding when a pointwise
//! one-shot bound is available and median-of-means when only the second
//! moment is controlled. Results carry their full confidence metadata.

pub(crate) mod diagonal;
pub(crate) mod shot;

mod extent;
mod hs;
mod overlap;
mod sources;
mod wilson;

pub use diagonal::{
    estimate_binned_distribution, estimate_marginal, estimate_transition_correlator,
    BinnedDistribution,
};
pub use extent::{estimate_extent_overlap, CircuitElement};
pub use hs::estimate_hs_parity;
pub use overlap::{estimate_apsg_overlap, estimate_fock_overlap};
pub use shot::one_shot_fock;
pub use sources::{
    hamiltonian_transition_element, transition_rdm_element, RdmIndices, SquaredFactor,
};
pub use wilson::{charge_phase_decomposition, estimate_wilson_loop};

use crate::C64;

/// Result of one Monte Carlo estimation run.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub value: C64,
    pub std_error: f64,
    pub samples: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// One-shot magnitude bound (mean path) or second-moment bound
    /// (median-of-means path) used for budgeting, in absolute units.
    pub bound: f64,
    /// Guarantee scale: the additive error is at most ε·scale with
    /// probability 1 − δ.
    pub scale: f64,
    pub method: Method,
    /// Finite-difference bias residual, zero for direct estimators.
    pub bias: f64,
    /// γ of the ket state, where meaningful.
    pub gamma: f64,
    /// Kernel operator-norm power ‖G‖^{2N}, where meaningful.
    pub op_norm_pow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mean,
    MedianOfMeans,
    Exact,
    Composite,
}
