//! Additive-error classical simulation of paired fermionic states under
//! number-preserving (passive) fermionic linear optics.
//!
//! The library is built around a single algebraic primitive: transition
//! amplitudes of block-product paired states through a number-preserving
//! Gaussian map collapse to the multilinear coefficient of a multivariate
//! Pfaffian polynomial, which a random sign filter extracts without bias.
//! Everything else — overlaps, number correlators, marginals, binned output
//! statistics, transition RDMs, Hamiltonian matrix elements, Wilson loops,
//! Hubbard–Stratonovich dynamics — is a reweighting or post-processing of
//! that one-shot variable.
//!
//! Modules:
//! - [`pfaffian`]: skew-symmetric matrices and the Parlett–Reid Pfaffian.
//! - [`wedge`]: exterior-algebra oracles for top-form coefficients.
//! - [`fock`], [`apsg`]: basis states and block-product paired states.
//! - [`gaussian`], [`lattice`]: single-particle maps, hopping evolution and
//!   Hubbard–Stratonovich propagators.
//! - [`sampling`], [`rng`]: reproducible counter-based sampling, Hoeffding
//!   and median-of-means budgets, the [`Estimate`] result type.
//! - [`estimators`]: the Monte Carlo estimator suite.
//! - [`oracle`]: dense statevector brute-force references.
//! - [`hubbard`]: the noninteracting-quench benchmark diagnostics and
//!   sample-complexity envelopes.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod apsg;
pub mod error;
pub mod estimators;
pub mod fock;
pub mod gaussian;
pub mod hubbard;
pub mod lattice;
pub mod oracle;
pub mod pfaffian;
pub mod rng;
pub mod sampling;
pub mod wedge;

pub use error::{Error, Result};
pub use estimators::Estimate;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
/// Double-precision complex scalar.
pub type C64 = num_complex::Complex64;
