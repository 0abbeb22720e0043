//! Discretization approximation (DA) for Bayesian computation.
//!
//! An unnormalized density is evaluated on a fixed, uniformly scattered set of
//! quasi-Monte Carlo support points, pushed through a proposal transport, and
//! the self-normalized density ratios become the masses of a fully known
//! discrete distribution. Every posterior summary (moments, quantiles, CDF
//! values) is then read off that discrete distribution.
//!
//! The pipeline is:
//!
//! 1. [`qmc`] builds a [`SupportPointSet`] on the unit hypercube.
//! 2. [`proposal`] maps it onto the target's support through a [`Proposal`].
//! 3. [`posterior::discretize`] turns target and proposal log-densities into a
//!    [`DiscretePosterior`].
//! 4. [`sampling`] draws from it or compresses it into representation points.
//!
//! [`adaptive`] chains several discretizations with moment-matched proposals,
//! [`baselines`] holds the Metropolis-Hastings and exact Monte Carlo
//! comparisons and [`experiments`] reruns the benchmark studies.

pub mod adaptive;
pub mod baselines;
pub mod error;
pub mod experiments;
pub mod export;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod posterior;
pub mod proposal;
pub mod qmc;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod target;

pub use error::{Error, Result};
pub use posterior::{discretize, discretize_with, DiscretePosterior};
pub use proposal::{Proposal, ProposalBlock};
pub use qmc::{Generator, SupportPointSet};
pub use sampling::RepresentationPointSet;
pub use target::{FnTarget, Support, Target};

/// Engine version stamped into every exported artifact.
pub const ENGINE_VERSION: &str = concat!("qda-core ", env!("CARGO_PKG_VERSION"));
