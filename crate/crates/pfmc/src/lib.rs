//! Config-driven experiment runner over the mixed-Pfaffian estimator
//! library: JSON experiment schemas, a rayon executor with bit-reproducible
//! aggregation, CSV/JSON result emission, and plot-ready reshaping.

pub mod config;
pub mod exec;
pub mod maps;
pub mod output;
pub mod plotdata;
pub mod runner;
