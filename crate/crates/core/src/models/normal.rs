//! Multivariate normal and banana-shaped targets on the plane.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, solve_lower};
use crate::rng::seeded;
use crate::target::{Support, Target};

#[derive(Debug, Clone)]
pub struct MvNormalTarget {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_norm: f64,
}

impl MvNormalTarget {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: cov.nrows(),
                context: "normal covariance",
            });
        }
        let chol = cholesky_lower(&cov, "normal covariance")?;
        let log_det: f64 = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let log_norm = 0.5 * (mean.len() as f64 * (2.0 * PI).ln() + log_det);
        Ok(Self {
            mean,
            cov,
            chol,
            log_norm,
        })
    }

    /// Mean `(2,-1)`, covariance `[[4, 0.5], [0.5, 1]]`.
    pub fn benchmark() -> Self {
        Self::new(
            vec![2.0, -1.0],
            DMatrix::from_row_slice(2, 2, &[4.0, 0.5, 0.5, 1.0]),
        )
        .expect("valid constants")
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `n` i.i.d. draws `μ + L z`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seeded(seed);
        let d = self.mean.len();
        (0..n)
            .map(|_| {
                let z = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(&mut rng)));
                let y = &self.chol * z;
                y.iter().zip(&self.mean).map(|(a, b)| a + b).collect()
            })
            .collect()
    }

    /// Exact marginal quantile of coordinate `j` (zero-based).
    pub fn marginal_quantile(&self, j: usize, alpha: f64) -> Result<f64> {
        Ok(self.mean[j] + self.cov[(j, j)].sqrt() * crate::special::inv_norm_cdf(alpha)?)
    }
}

impl Target for MvNormalTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        let c = DVector::from_iterator(x.len(), x.iter().zip(&self.mean).map(|(a, b)| a - b));
        let z = solve_lower(&self.chol, &c);
        0.5 * z.norm_squared() + self.log_norm
    }

    fn support(&self) -> Vec<Support> {
        vec![Support::Real; self.mean.len()]
    }

    fn name(&self) -> &str {
        "mvnormal"
    }
}

/// `f(x₁,x₂) = φ(x₁; 0, 100) φ(x₂ + 0.03 x₁² - 3; 0, 1)`, mean `(0,0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Banana;

impl Banana {
    pub const X1_VAR: f64 = 100.0;
    pub const BEND: f64 = 0.03;
    pub const SHIFT: f64 = 3.0;

    pub fn nll(x1: f64, x2: f64) -> f64 {
        let inner = x2 + Self::BEND * x1 * x1 - Self::SHIFT;
        x1 * x1 / (2.0 * Self::X1_VAR)
            + 0.5 * inner * inner
            + 0.5 * (2.0 * PI * Self::X1_VAR).ln()
            + 0.5 * (2.0 * PI).ln()
    }

    pub fn mean() -> [f64; 2] {
        [0.0, Self::SHIFT - Self::BEND * Self::X1_VAR]
    }
}

impl Target for Banana {
    fn dim(&self) -> usize {
        2
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        Self::nll(x[0], x[1])
    }

    fn support(&self) -> Vec<Support> {
        vec![Support::Real; 2]
    }

    fn name(&self) -> &str {
        "banana"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_mode_at_mean() {
        let t = MvNormalTarget::benchmark();
        let at_mean = t.neg_log_density(&[2.0, -1.0]);
        for dx in [[0.1, 0.0], [0.0, -0.1], [0.05, 0.05], [-1.0, 2.0]] {
            assert!(t.neg_log_density(&[2.0 + dx[0], -1.0 + dx[1]]) > at_mean);
        }
        // log(2π·sqrt(3.75)).
        let want = (2.0 * PI).ln() + 0.5 * 3.75f64.ln();
        assert!((at_mean - want).abs() < 1e-14);
    }

    #[test]
    fn normal_sample_covariance() {
        let t = MvNormalTarget::benchmark();
        let xs = t.sample(100_000, 12);
        let n = xs.len() as f64;
        let m0 = xs.iter().map(|x| x[0]).sum::<f64>() / n;
        let m1 = xs.iter().map(|x| x[1]).sum::<f64>() / n;
        let c01 = xs.iter().map(|x| (x[0] - m0) * (x[1] - m1)).sum::<f64>() / (n - 1.0);
        let c00 = xs.iter().map(|x| (x[0] - m0).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m0 - 2.0).abs() < 0.03 && (m1 + 1.0).abs() < 0.015);
        assert!((c00 - 4.0).abs() < 0.1);
        assert!((c01 - 0.5).abs() < 0.05);
    }

    #[test]
    fn normal_quantile() {
        let t = MvNormalTarget::benchmark();
        let q = t.marginal_quantile(0, 0.2).unwrap();
        assert!((q - (2.0 - 2.0 * 0.8416212335729143)).abs() < 1e-12);
    }

    #[test]
    fn banana_ridge_and_mean() {
        assert_eq!(Banana::mean(), [0.0, 0.0]);
        for x1 in [-10.0, 0.0, 7.0] {
            let ridge = 3.0 - 0.03 * x1 * x1;
            let at = Banana::nll(x1, ridge);
            assert!(Banana::nll(x1, ridge + 0.2) > at);
            assert!(Banana::nll(x1, ridge - 0.2) > at);
        }
    }
}
