//! Bayesian lasso joint posterior over `(β₀, β₁, …, β_d, σ², λ)`.
//!
//! The density is the joint as usually printed for this hierarchy:
//! `(σ²)^{-n/2-1} exp(-‖y - β₀1 - Xβ‖²/(2σ²) - λ Σ|β_j|)` restricted to
//! `σ² > 0` and `0 ≤ λ ≤ 4σ √(n log d)`. The `λ` factor of the Laplace prior
//! and the `1/(4σ√(n log d))` factor of the uniform prior on `λ` are not
//! included.

use crate::error::Result;
use crate::models::linreg::LinRegData;
use crate::proposal::{Proposal, ProposalBlock};
use crate::special::gamma_quantile;
use crate::target::{Support, Target};

#[derive(Debug, Clone)]
pub struct BayesLasso {
    data: LinRegData,
    lambda_factor: f64,
}

impl BayesLasso {
    pub fn new(data: LinRegData) -> Self {
        let n = data.n() as f64;
        let d = data.d() as f64;
        Self {
            lambda_factor: 4.0 * (n * d.ln()).sqrt(),
            data,
        }
    }

    pub fn data(&self) -> &LinRegData {
        &self.data
    }

    /// Upper end of `λ`'s support for a given `σ²`.
    pub fn lambda_max(&self, sigma2: f64) -> f64 {
        self.lambda_factor * sigma2.sqrt()
    }

    pub fn nlp(&self, gamma: &[f64], sigma2: f64, lambda: f64) -> f64 {
        if !(sigma2 > 0.0) || !(lambda >= 0.0) || lambda > self.lambda_max(sigma2) {
            return f64::INFINITY;
        }
        let l1: f64 = gamma[1..].iter().map(|b| b.abs()).sum();
        self.data.nlp(gamma, sigma2) + lambda * l1
    }

    /// Regression proposal for `(γ, σ²)` times a uniform on `[0, λ_hi]` with
    /// `λ_hi` at the 0.999 quantile of the `σ²` block.
    pub fn proposal(&self) -> Result<Proposal> {
        let reg = self.data.cauchy_gamma_proposal()?;
        let nu = (self.data.n() - self.data.d() - 1) as f64;
        let s2_hi = gamma_quantile(0.999, nu, self.data.s2() / nu)?;
        let lambda_hi = self.lambda_max(s2_hi).max(f64::MIN_POSITIVE);
        let mut blocks = reg.blocks().to_vec();
        blocks.push(ProposalBlock::uniform_box(vec![0.0], vec![lambda_hi])?);
        Proposal::new(blocks)
    }
}

impl Target for BayesLasso {
    fn dim(&self) -> usize {
        self.data.d() + 3
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        let k = self.data.d() + 1;
        self.nlp(&x[..k], x[k], x[k + 1])
    }

    fn support(&self) -> Vec<Support> {
        let mut s = vec![Support::Real; self.data.d() + 1];
        s.push(Support::Positive);
        s.push(Support::Positive);
        s
    }

    fn name(&self) -> &str {
        "blasso"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> BayesLasso {
        BayesLasso::new(LinRegData::synthetic(50, 5, 2).unwrap())
    }

    #[test]
    fn zero_lambda_is_plain_regression() {
        let m = model();
        let g: Vec<f64> = m.data().gamma_hat().iter().copied().collect();
        assert_eq!(m.nlp(&g, 1.1, 0.0), m.data().nlp(&g, 1.1));
    }

    #[test]
    fn penalty_grows_with_lambda() {
        let m = model();
        let g = vec![3.0, -1.0, 2.0, 1.5, 0.1, -0.2];
        let mut prev = m.nlp(&g, 1.0, 0.0);
        for lam in [0.5, 1.0, 5.0, 20.0] {
            let v = m.nlp(&g, 1.0, lam);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn support_limits() {
        let m = model();
        let g = vec![0.0; 6];
        assert_eq!(m.nlp(&g, -1.0, 1.0), f64::INFINITY);
        assert_eq!(m.nlp(&g, 1.0, -0.1), f64::INFINITY);
        let cap = m.lambda_max(1.0);
        assert!((cap - 4.0 * (50.0 * 5f64.ln()).sqrt()).abs() < 1e-12);
        assert!(m.nlp(&g, 1.0, cap).is_finite());
        assert_eq!(m.nlp(&g, 1.0, cap * 1.0001), f64::INFINITY);
    }

    #[test]
    fn proposal_dimension() {
        let m = model();
        assert_eq!(m.proposal().unwrap().dim(), m.dim());
    }
}
