//! Bundled targets and their exact reference quantities.

pub mod beta_mixture;
pub mod blasso;
pub mod gp;
pub mod linreg;
pub mod normal;
pub mod subprocess;

pub use beta_mixture::BetaMixture;
pub use blasso::BayesLasso;
pub use gp::{GpBasis, GpConfig, GpPrediction};
pub use linreg::{LinRegData, LinRegPosterior};
pub use normal::{Banana, MvNormalTarget};
pub use subprocess::SubprocessTarget;
