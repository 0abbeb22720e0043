//! Target densities, given as negative log-densities up to an additive constant.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Per-coordinate support of a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Support {
    Real,
    Positive,
    Interval { lower: f64, upper: f64 },
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Real => x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::Interval { lower, upper } => x >= lower && x <= upper,
        }
    }

    /// Nearest point of the support (positive coordinates stay strictly positive).
    pub fn clip(&self, x: f64) -> f64 {
        match *self {
            Support::Real => x,
            Support::Positive => x.max(f64::MIN_POSITIVE),
            Support::Interval { lower, upper } => x.clamp(lower, upper),
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Real => f.write_str("real"),
            Support::Positive => f.write_str("positive"),
            Support::Interval { lower, upper } => write!(f, "interval[{lower},{upper}]"),
        }
    }
}

/// An unnormalized density `f`, exposed through `ℓ(x) = -log f(x) + const`.
///
/// `neg_log_density` returns `+∞` exactly where `f` vanishes. It is called
/// concurrently from several threads during discretization.
pub trait Target: Sync {
    fn dim(&self) -> usize;

    fn neg_log_density(&self, x: &[f64]) -> f64;

    fn support(&self) -> Vec<Support>;

    fn name(&self) -> &str;
}

impl<T: Target + ?Sized> Target for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn neg_log_density(&self, x: &[f64]) -> f64 {
        (**self).neg_log_density(x)
    }
    fn support(&self) -> Vec<Support> {
        (**self).support()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Adapts a closure into a [`Target`].
pub struct FnTarget<F> {
    name: String,
    support: Vec<Support>,
    f: F,
}

impl<F> FnTarget<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(name: impl Into<String>, support: Vec<Support>, f: F) -> Self {
        Self {
            name: name.into(),
            support,
            f,
        }
    }
}

impl<F> Target for FnTarget<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.support.len()
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn support(&self) -> Vec<Support> {
        self.support.clone()
    }

    fn name(&self) -> &str {
        &self.name
    }
}
