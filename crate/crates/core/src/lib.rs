//! Survival analysis where the hazard function is the solution of an
//! autonomous ODE system.
//!
//! The crate covers the full workflow: right-censored data handling
//! ([`data`]), numerical integration of hazard systems with dense output
//! ([`ode`]), the concrete hazard models and their steady-state analysis
//! ([`models`]), maximum likelihood and adaptive MCMC inference
//! ([`inference`]), survival-time simulation by cumulative-hazard inversion
//! ([`simulation`]) and posterior predictive summaries ([`predictive`]).

pub mod data;
pub mod error;
pub mod inference;
pub mod models;
pub mod ode;
pub mod predictive;
pub mod simulation;

pub use error::{Error, ErrorKind, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
