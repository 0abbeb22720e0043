//! Gaussian linear regression with the noninformative prior `p(γ, σ²) ∝ 1/σ²`.
//!
//! With `Z = (1 X)`, `γ̂ = (Z'Z)⁻¹Z'y` and `s² = ‖y - Zγ̂‖²/(n-d-1)` the
//! posterior is available in closed form:
//! `σ² | y ~ (n-d-1)s² Inv-χ²_{n-d-1}` and `γ | y, σ² ~ N(γ̂, σ²(Z'Z)⁻¹)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::cholesky_lower;
use crate::proposal::{Proposal, ProposalBlock};
use crate::rng::seeded;
use crate::special::{gamma_quantile, student_t_quantile};
use crate::target::{Support, Target};

#[derive(Debug, Clone)]
pub struct LinRegData {
    x: DMatrix<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
    ztz_inv: DMatrix<f64>,
    ztz_inv_chol: DMatrix<f64>,
    gamma_hat: DVector<f64>,
    s2: f64,
}

impl LinRegData {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, d) = x.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
                context: "response length vs predictor rows",
            });
        }
        if n <= d + 3 {
            return Err(Error::InvalidParameter(format!(
                "need n > d + 3 observations for posterior moments, got n={n}, d={d}"
            )));
        }
        let mut z = DMatrix::from_element(n, d + 1, 1.0);
        z.view_mut((0, 1), (n, d)).copy_from(&x);
        let ztz = z.transpose() * &z;
        let l = cholesky_lower(&ztz, "Z'Z (design is rank deficient)")?;
        let l_inv = l
            .solve_lower_triangular(&DMatrix::identity(d + 1, d + 1))
            .ok_or_else(|| Error::Factorization("Z'Z factor is singular".into()))?;
        let ztz_inv = l_inv.transpose() * &l_inv;
        let gamma_hat = &ztz_inv * (z.transpose() * &y);
        let resid = &y - &z * &gamma_hat;
        let s2 = resid.norm_squared() / (n - d - 1) as f64;
        let ztz_inv_chol = cholesky_lower(&ztz_inv, "(Z'Z)^-1")?;
        Ok(Self {
            x,
            y,
            z,
            ztz_inv,
            ztz_inv_chol,
            gamma_hat,
            s2,
        })
    }

    /// Synthetic data: `β₀ = 3`, `β = (-1, 2, 1.5, 0, …, 0)`, `σ² = 1` and
    /// predictor rows drawn from `N(0, 0.5·11' + 0.5·I)`.
    pub fn synthetic(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let corr = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { 0.5 });
        let l = cholesky_lower(&corr, "predictor correlation")?;
        let beta = Self::true_beta(d);
        let mut x = DMatrix::zeros(n, d);
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let e = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(&mut rng)));
            let row = &l * e;
            x.row_mut(i).copy_from(&row.transpose());
            let noise: f64 = StandardNormal.sample(&mut rng);
            y[i] = 3.0 + row.dot(&beta) + noise;
        }
        Self::new(x, y)
    }

    pub fn true_beta(d: usize) -> DVector<f64> {
        let head = [-1.0, 2.0, 1.5];
        DVector::from_fn(d, |j, _| head.get(j).copied().unwrap_or(0.0))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of predictors (excluding the intercept).
    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn ztz_inv(&self) -> &DMatrix<f64> {
        &self.ztz_inv
    }

    pub fn gamma_hat(&self) -> &DVector<f64> {
        &self.gamma_hat
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    fn dof(&self) -> f64 {
        (self.n() - self.d() - 1) as f64
    }

    /// `‖y - Zγ‖²`.
    pub fn rss(&self, gamma: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n() {
            let mut fit = 0.0;
            for (j, g) in gamma.iter().enumerate() {
                fit += self.z[(i, j)] * g;
            }
            acc += (self.y[i] - fit).powi(2);
        }
        acc
    }

    /// `(n/2 + 1) log σ² + ‖y - Zγ‖²/(2σ²)`, `+∞` unless `σ² > 0`.
    pub fn nlp(&self, gamma: &[f64], sigma2: f64) -> f64 {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return f64::INFINITY;
        }
        (self.n() as f64 / 2.0 + 1.0) * sigma2.ln() + self.rss(gamma) / (2.0 * sigma2)
    }

    pub fn exact_sigma2_mean(&self) -> f64 {
        let nu = self.dof();
        nu * self.s2 / (nu - 2.0)
    }

    /// Exact posterior quantile of `σ²`.
    pub fn exact_sigma2_quantile(&self, alpha: f64) -> Result<f64> {
        let nu = self.dof();
        // σ² = ν s² / χ², so its α-quantile uses the (1-α)-quantile of χ²_ν.
        Ok(nu * self.s2 / gamma_quantile(1.0 - alpha, nu / 2.0, 2.0)?)
    }

    /// Exact posterior quantile of `γ_j` (zero-based, `γ₀` the intercept):
    /// a Student-t with `n-d-1` degrees of freedom.
    pub fn exact_gamma_quantile(&self, j: usize, alpha: f64) -> Result<f64> {
        let scale = (self.s2 * self.ztz_inv[(j, j)]).sqrt();
        Ok(self.gamma_hat[j] + scale * student_t_quantile(alpha, self.dof())?)
    }

    /// `n` exact posterior draws `(γ₀, …, γ_d, σ²)`.
    pub fn exact_sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seeded(seed);
        let nu = self.dof();
        let chi = ChiSquared::new(nu).expect("positive degrees of freedom");
        let k = self.d() + 1;
        (0..n)
            .map(|_| {
                let sigma2 = nu * self.s2 / chi.sample(&mut rng);
                let e = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
                let g = &self.gamma_hat + (&self.ztz_inv_chol * e) * sigma2.sqrt();
                let mut out: Vec<f64> = g.iter().copied().collect();
                out.push(sigma2);
                out
            })
            .collect()
    }

    /// Cauchy`(γ̂, s²(Z'Z)⁻¹)` for `γ` times Gamma`(n-d-1, s²/(n-d-1))` for `σ²`.
    pub fn cauchy_gamma_proposal(&self) -> Result<Proposal> {
        let nu = self.dof();
        Proposal::new(vec![
            ProposalBlock::mvcauchy(self.gamma_hat.iter().copied().collect(), &self.ztz_inv * self.s2)?,
            ProposalBlock::gamma(nu, self.s2 / nu)?,
        ])
    }

    /// Uniform box `γ̂ ± gamma_half` times `s² ± sigma2_half` (lower end kept positive).
    pub fn uniform_box_proposal(&self, gamma_half: f64, sigma2_half: f64) -> Result<Proposal> {
        let mut lower: Vec<f64> = self.gamma_hat.iter().map(|g| g - gamma_half).collect();
        let mut upper: Vec<f64> = self.gamma_hat.iter().map(|g| g + gamma_half).collect();
        lower.push((self.s2 - sigma2_half).max(f64::MIN_POSITIVE));
        upper.push(self.s2 + sigma2_half);
        Ok(Proposal::single(ProposalBlock::uniform_box(lower, upper)?))
    }
}

/// The posterior of `(γ, σ²)` as a target of dimension `d + 2`.
#[derive(Debug, Clone)]
pub struct LinRegPosterior {
    data: LinRegData,
}

impl LinRegPosterior {
    pub fn new(data: LinRegData) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &LinRegData {
        &self.data
    }
}

impl Target for LinRegPosterior {
    fn dim(&self) -> usize {
        self.data.d() + 2
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        let k = self.data.d() + 1;
        self.data.nlp(&x[..k], x[k])
    }

    fn support(&self) -> Vec<Support> {
        let mut s = vec![Support::Real; self.data.d() + 1];
        s.push(Support::Positive);
        s
    }

    fn name(&self) -> &str {
        "linreg"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_minimizes_quadratic() {
        let data = LinRegData::synthetic(60, 4, 3).unwrap();
        let gh: Vec<f64> = data.gamma_hat().iter().copied().collect();
        let base = data.nlp(&gh, 1.3);
        for j in 0..gh.len() {
            let mut g = gh.clone();
            g[j] += 0.01;
            assert!(data.nlp(&g, 1.3) > base);
        }
        assert_eq!(data.nlp(&gh, 0.0), f64::INFINITY);
        assert_eq!(data.nlp(&gh, -1.0), f64::INFINITY);
    }

    #[test]
    fn synthetic_fit_is_close_to_truth() {
        let data = LinRegData::synthetic(2000, 5, 8).unwrap();
        let gh = data.gamma_hat();
        let want = [3.0, -1.0, 2.0, 1.5, 0.0, 0.0];
        for (a, b) in gh.iter().zip(want) {
            assert!((a - b).abs() < 0.1, "{a} vs {b}");
        }
        assert!((data.s2() - 1.0).abs() < 0.1);
    }

    #[test]
    fn exact_sampler_moments() {
        let data = LinRegData::synthetic(50, 5, 1).unwrap();
        let n = 40_000;
        let draws = data.exact_sample(n, 2);
        let k = 6;
        let s2_mean = draws.iter().map(|d| d[k]).sum::<f64>() / n as f64;
        let s2_sd = (draws.iter().map(|d| (d[k] - s2_mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((s2_mean - data.exact_sigma2_mean()).abs() < 4.0 * s2_sd / (n as f64).sqrt());
        for j in 0..k {
            let m = draws.iter().map(|d| d[j]).sum::<f64>() / n as f64;
            let sd = (draws.iter().map(|d| (d[j] - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            assert!((m - data.gamma_hat()[j]).abs() < 4.0 * sd / (n as f64).sqrt());
        }
        assert_eq!(draws[..3], data.exact_sample(3, 2)[..]);
    }

    #[test]
    fn exact_quantiles_bracket_the_center() {
        let data = LinRegData::synthetic(50, 5, 1).unwrap();
        let lo = data.exact_gamma_quantile(1, 0.05).unwrap();
        let hi = data.exact_gamma_quantile(1, 0.95).unwrap();
        assert!(lo < data.gamma_hat()[1] && data.gamma_hat()[1] < hi);
        let med = data.exact_gamma_quantile(1, 0.5).unwrap();
        assert!((med - data.gamma_hat()[1]).abs() < 1e-9);
        let q = data.exact_sigma2_quantile(0.1).unwrap();
        let draws = data.exact_sample(40_000, 9);
        let below = draws.iter().filter(|d| d[6] <= q).count() as f64 / 40_000.0;
        assert!((below - 0.1).abs() < 0.01);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let x = DMatrix::from_fn(20, 2, |i, _| i as f64);
        let y = DVector::from_fn(20, |i, _| i as f64);
        assert!(matches!(LinRegData::new(x, y), Err(Error::Factorization(_))));
        assert!(LinRegData::new(DMatrix::zeros(5, 3), DVector::zeros(5)).is_err());
    }

    #[test]
    fn proposals_have_matching_dimension() {
        let data = LinRegData::synthetic(50, 5, 1).unwrap();
        let t = LinRegPosterior::new(data.clone());
        assert_eq!(data.cauchy_gamma_proposal().unwrap().dim(), t.dim());
        assert_eq!(data.uniform_box_proposal(0.02, 0.15).unwrap().dim(), t.dim());
    }
}
