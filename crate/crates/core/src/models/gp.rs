//! Full Bayesian Gaussian process regression with random Fourier features.
//!
//! Model: `y = Gβ + Z + ε`, correlation `R(h) = exp(-Σ η_j h_j²)` and
//! nugget ratio `ρ`. The correlation matrix `R + ρI` is replaced by
//! `Σ̂ = Z_m Z_m' + ρI` with `Z_m = (cos(XΠ) sin(XΠ))/√m` and
//! `Π = diag(√(2η)) W`, where the `p×m` standard normal matrix `W` is drawn
//! once per configuration. Fixing `W` keeps the density a deterministic
//! function of `θ`. Inverses and determinants go through the `2m×2m` matrix
//! `A = Z_m'Z_m + ρI`:
//!
//! ```text
//! Σ̂⁻¹    = ρ⁻¹ (I - Z_m A⁻¹ Z_m')
//! log|Σ̂| = log|A| + (n - 2m) log ρ
//! ```
//!
//! Parameters are laid out as `θ = (β, σ², η₁..η_p, ρ)`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::posterior::DiscretePosterior;
use crate::rng::seeded;
use crate::target::{Support, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpBasis {
    /// `g(x) = 1`.
    Constant,
    /// `g(x) = (1, x')'`.
    Linear,
}

impl GpBasis {
    pub fn len(self, p: usize) -> usize {
        match self {
            GpBasis::Constant => 1,
            GpBasis::Linear => p + 1,
        }
    }

    fn eval(self, x: &[f64]) -> Vec<f64> {
        match self {
            GpBasis::Constant => vec![1.0],
            GpBasis::Linear => std::iter::once(1.0).chain(x.iter().copied()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GpConfig {
    x: DMatrix<f64>,
    y: DVector<f64>,
    g: DMatrix<f64>,
    basis: GpBasis,
    base_features: DMatrix<f64>,
}

/// Per-`θ` factorization shared by the density and the predictor.
struct Factor {
    zm: DMatrix<f64>,
    inner: Cholesky<f64, Dyn>,
    rho: f64,
}

impl Factor {
    /// `Σ̂⁻¹ v`.
    fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        let t = self.inner.solve(&(self.zm.transpose() * v));
        (v - &self.zm * t) / self.rho
    }

    fn log_det(&self) -> f64 {
        let n = self.zm.nrows() as f64;
        let k = self.zm.ncols() as f64;
        let l = self.inner.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() + (n - k) * self.rho.ln()
    }
}

impl GpConfig {
    /// `x` is `n×p`; `m` features are drawn from `seed`.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, basis: GpBasis, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("need at least one Fourier feature".into()));
        }
        if y.len() != x.nrows() || x.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
                context: "GP responses vs inputs",
            });
        }
        let p = x.ncols();
        let mut rng = seeded(seed);
        let base_features = DMatrix::from_fn(p, m, |_, _| StandardNormal.sample(&mut rng));
        let g = DMatrix::from_fn(x.nrows(), basis.len(p), |i, j| {
            if j == 0 {
                1.0
            } else {
                x[(i, j - 1)]
            }
        });
        Ok(Self {
            x,
            y,
            g,
            basis,
            base_features,
        })
    }

    /// Inputs uniform on `[0,1]^p`, `y = Σ sin(2π x_j) + 0.1 ε`.
    pub fn synthetic(n: usize, p: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>());
        let y = DVector::from_fn(n, |i, _| {
            let f: f64 = (0..p).map(|j| (2.0 * PI * x[(i, j)]).sin()).sum();
            let e: f64 = StandardNormal.sample(&mut rng);
            f + 0.1 * e
        });
        Self::new(x, y, GpBasis::Constant, m, crate::rng::derive_seed(seed, 1))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Input dimension.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn m(&self) -> usize {
        self.base_features.ncols()
    }

    pub fn q(&self) -> usize {
        self.g.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Length of `θ`.
    pub fn theta_dim(&self) -> usize {
        self.q() + self.p() + 2
    }

    fn split<'a>(&self, theta: &'a [f64]) -> (&'a [f64], f64, &'a [f64], f64) {
        let q = self.q();
        let p = self.p();
        (&theta[..q], theta[q], &theta[q + 1..q + 1 + p], theta[q + 1 + p])
    }

    /// Feature rows `z(x) = (cos(x'Π), sin(x'Π))/√m` for every row of `x`.
    pub fn features(&self, x: &DMatrix<f64>, eta: &[f64]) -> DMatrix<f64> {
        let m = self.m();
        let mut pi = self.base_features.clone();
        for (j, e) in eta.iter().enumerate() {
            pi.row_mut(j).scale_mut((2.0 * e).sqrt());
        }
        let xp = x * pi;
        let s = 1.0 / (m as f64).sqrt();
        DMatrix::from_fn(x.nrows(), 2 * m, |i, k| {
            if k < m {
                xp[(i, k)].cos() * s
            } else {
                xp[(i, k - m)].sin() * s
            }
        })
    }

    fn factor(&self, eta: &[f64], rho: f64) -> Result<Factor> {
        let zm = self.features(&self.x, eta);
        let mut a = zm.transpose() * &zm;
        for i in 0..a.nrows() {
            a[(i, i)] += rho;
        }
        let inner = Cholesky::new(a).ok_or_else(|| {
            Error::Numeric(format!(
                "Cholesky of the {0}x{0} feature matrix failed at rho={rho:e}",
                2 * self.m()
            ))
        })?;
        Ok(Factor { zm, inner, rho })
    }

    fn valid(sigma2: f64, eta: &[f64], rho: f64) -> bool {
        sigma2 > 0.0 && rho > 0.0 && eta.iter().all(|&e| e > 0.0) && sigma2.is_finite() && rho.is_finite()
    }

    /// Negative log posterior of `θ`; `+∞` off `σ², ρ, η_j > 0`.
    pub fn nlp(&self, theta: &[f64]) -> Result<f64> {
        let (beta, sigma2, eta, rho) = self.split(theta);
        if !Self::valid(sigma2, eta, rho) {
            return Ok(f64::INFINITY);
        }
        let f = self.factor(eta, rho)?;
        let r = &self.y - &self.g * DVector::from_column_slice(beta);
        let quad = r.dot(&f.solve(&r));
        let n = self.n() as f64;
        Ok((n / 2.0 + 1.0) * sigma2.ln()
            + 0.5 * f.log_det()
            + quad / (2.0 * sigma2)
            + 0.5 * (eta.iter().sum::<f64>() + rho))
    }

    /// Predictive mean and variance at `x*` for one `θ`.
    ///
    /// The cross-correlation uses the same features as `Σ̂`, `r* = Z_m z(x*)`,
    /// and `z(x*)'z(x*) = 1`, so `ω ≥ σ²ρ > 0`.
    pub fn predict_one(&self, theta: &[f64], x_star: &[f64]) -> Result<(f64, f64)> {
        if x_star.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x_star.len(),
                context: "prediction input",
            });
        }
        let (beta, sigma2, eta, rho) = self.split(theta);
        if !Self::valid(sigma2, eta, rho) {
            return Err(Error::Domain(format!(
                "GP parameters out of support (sigma2={sigma2}, rho={rho}, eta={eta:?})"
            )));
        }
        let f = self.factor(eta, rho)?;
        let zs = self.features(&DMatrix::from_row_slice(1, self.p(), x_star), eta);
        let r_star = &f.zm * zs.transpose().column(0);
        let resid = &self.y - &self.g * DVector::from_column_slice(beta);
        let g_star = self.basis.eval(x_star);
        let trend: f64 = g_star.iter().zip(beta).map(|(a, b)| a * b).sum();
        let mu = trend + r_star.dot(&f.solve(&resid));
        let omega = sigma2 * (1.0 + rho - r_star.dot(&f.solve(&r_star)));
        Ok((mu, omega.max(sigma2 * rho)))
    }
}

impl Target for GpConfig {
    fn dim(&self) -> usize {
        self.theta_dim()
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        self.nlp(x).unwrap_or(f64::NAN)
    }

    fn support(&self) -> Vec<Support> {
        let mut s = vec![Support::Real; self.q()];
        s.extend(std::iter::repeat_n(Support::Positive, self.p() + 2));
        s
    }

    fn name(&self) -> &str {
        "gp"
    }
}

/// Discretized posterior predictive at one input.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPrediction {
    /// `Σ p_i μ(x*, θ_i)`.
    pub point: f64,
    /// `(p_i, μ_i, ω_i)` for atoms with positive mass.
    pub components: Vec<(f64, f64, f64)>,
}

impl GpPrediction {
    /// `Σ p_i φ(y; μ_i, ω_i)`.
    pub fn density(&self, y: f64) -> f64 {
        self.components
            .iter()
            .map(|&(p, mu, om)| p * (-(y - mu).powi(2) / (2.0 * om)).exp() / (2.0 * PI * om).sqrt())
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let second: f64 = self.components.iter().map(|&(p, mu, om)| p * (om + mu * mu)).sum();
        second - self.point * self.point
    }
}

pub fn gp_predict(dp: &DiscretePosterior, cfg: &GpConfig, x_star: &[f64]) -> Result<GpPrediction> {
    if dp.dim() != cfg.theta_dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.theta_dim(),
            got: dp.dim(),
            context: "GP posterior atoms",
        });
    }
    let mut components = Vec::new();
    let mut point = 0.0;
    for (i, &p) in dp.masses().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (mu, om) = cfg.predict_one(dp.point(i), x_star)?;
        point += p * mu;
        components.push((p, mu, om));
    }
    Ok(GpPrediction { point, components })
}

/// `ρ⁻¹[I - Z(Z'Z + ρI)⁻¹Z']`, the inverse of `ZZ' + ρI`.
pub fn woodbury_inverse(z: &DMatrix<f64>, rho: f64) -> Result<DMatrix<f64>> {
    let mut a = z.transpose() * z;
    for i in 0..a.nrows() {
        a[(i, i)] += rho;
    }
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::Numeric(format!("inner Cholesky failed at rho={rho:e}")))?;
    let n = z.nrows();
    Ok((DMatrix::identity(n, n) - z * chol.solve(&z.transpose())) / rho)
}
