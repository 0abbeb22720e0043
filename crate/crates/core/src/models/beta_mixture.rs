//! Finite mixtures of Beta distributions on `[0,1]`.

use rand::Rng as _;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::special::{beta_inc, ln_beta};
use crate::target::{Support, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct BetaMixture {
    /// `(weight, a, b)` with weights summing to one.
    components: Vec<(f64, f64, f64)>,
    name: String,
}

impl BetaMixture {
    pub fn new(components: Vec<(f64, f64, f64)>) -> Result<Self> {
        if components.is_empty()
            || components
                .iter()
                .any(|&(w, a, b)| !(w > 0.0 && a > 0.0 && b > 0.0))
        {
            return Err(Error::InvalidParameter(
                "beta mixture needs components with positive weight and shapes".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        let components: Vec<_> = components.iter().map(|&(w, a, b)| (w / total, a, b)).collect();
        let name = components
            .iter()
            .map(|(w, a, b)| format!("{w}*Beta({a},{b})"))
            .collect::<Vec<_>>()
            .join("+");
        Ok(Self { components, name })
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(1.0, a, b)])
    }

    /// `0.5·Beta(6,3) + 0.5·Beta(2,7)`, mean `4/9`.
    pub fn two_humps() -> Self {
        Self::new(vec![(0.5, 6.0, 3.0), (0.5, 2.0, 7.0)]).expect("valid constants")
    }

    pub fn components(&self) -> &[(f64, f64, f64)] {
        &self.components
    }

    /// Normalized `-log f(x)`, `+∞` outside `(0,1)` and where every component vanishes.
    pub fn nll(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return f64::INFINITY;
        }
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|&(w, a, b)| w.ln() + (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b))
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        -(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        self.components
            .iter()
            .map(|&(w, a, b)| w * beta_inc(a, b, x))
            .sum()
    }

    /// Raw moment `E X^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.components
            .iter()
            .map(|&(w, a, b)| {
                let mut m = 1.0;
                for r in 0..k {
                    let r = r as f64;
                    m *= (a + r) / (a + b + r);
                }
                w * m
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `n` i.i.d. draws: pick a component, then draw from it.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded(seed);
        let dists: Vec<Beta<f64>> = self
            .components
            .iter()
            .map(|&(_, a, b)| Beta::new(a, b).expect("validated shapes"))
            .collect();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut k = self.components.len() - 1;
                for (i, c) in self.components.iter().enumerate() {
                    acc += c.0;
                    if u < acc {
                        k = i;
                        break;
                    }
                }
                dists[k].sample(&mut rng)
            })
            .collect()
    }
}

impl Target for BetaMixture {
    fn dim(&self) -> usize {
        1
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        self.nll(x[0])
    }

    fn support(&self) -> Vec<Support> {
        vec![Support::Interval {
            lower: 0.0,
            upper: 1.0,
        }]
    }

    fn name(&self) -> &str {
        &self.name
    }
}
