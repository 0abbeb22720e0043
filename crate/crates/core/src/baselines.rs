//! Metropolis-Hastings and exact Monte Carlo comparisons.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{BetaMixture, LinRegData, MvNormalTarget};
use crate::proposal::Proposal;
use crate::rng::{derive_seed, open_unit, seeded};
use crate::target::Target;

#[derive(Debug, Clone)]
pub enum MhKind {
    /// Candidates drawn independently from the proposal.
    Independence(Proposal),
    /// Gaussian steps with per-coordinate standard deviations.
    RandomWalk { step: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct MhConfig {
    pub kind: MhKind,
    /// Number of states kept after burn-in.
    pub length: usize,
    /// Steps discarded before the first kept state.
    pub burn_in: usize,
    pub seed: u64,
    /// Starting state; defaults to the proposal center for independence chains.
    pub initial: Option<Vec<f64>>,
}

impl MhConfig {
    /// Burn-in defaults to `length / 10`.
    pub fn new(kind: MhKind, length: usize, seed: u64) -> Self {
        Self {
            kind,
            length,
            burn_in: length / 10,
            seed,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhOutput {
    pub samples: Vec<Vec<f64>>,
    /// Accepted moves over all steps, burn-in included.
    pub acceptance: f64,
}

impl MhOutput {
    pub fn mean(&self) -> Vec<f64> {
        column_means(&self.samples)
    }
}

pub fn column_means(samples: &[Vec<f64>]) -> Vec<f64> {
    let d = samples.first().map(Vec::len).unwrap_or(0);
    let n = samples.len() as f64;
    let mut m = vec![0.0; d];
    for s in samples {
        for (a, v) in m.iter_mut().zip(s) {
            *a += v;
        }
    }
    m.iter().map(|v| v / n).collect()
}

/// Empirical quantile with the same first-crossing rule as the discrete
/// posterior: the smallest sorted value whose cumulative share reaches `alpha`.
pub fn sample_quantile(samples: &[Vec<f64>], coord: usize, alpha: f64) -> f64 {
    let mut v: Vec<f64> = samples.iter().map(|s| s[coord]).collect();
    v.sort_by(f64::total_cmp);
    let k = ((alpha * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

/// Runs a Metropolis-Hastings chain.
///
/// A move from `x` to `y` is accepted with probability
/// `min(1, f(y) q(x|y) / (f(x) q(y|x)))`; for an independence chain
/// `q(y|x) = ψ(y)`, for the random walk the ratio of `q` is one.
pub fn mh_chain(target: &dyn Target, cfg: &MhConfig) -> Result<MhOutput> {
    let d = target.dim();
    if cfg.length == 0 {
        return Err(Error::InvalidParameter("chain length must be at least 1".into()));
    }
    let mut rng = seeded(cfg.seed);
    let mut x = match (&cfg.initial, &cfg.kind) {
        (Some(x0), _) => x0.clone(),
        (None, MhKind::Independence(p)) => p.center(),
        (None, MhKind::RandomWalk { .. }) => {
            return Err(Error::InvalidParameter(
                "random-walk chains need an initial state".into(),
            ))
        }
    };
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
            context: "initial state",
        });
    }
    match &cfg.kind {
        MhKind::Independence(p) if p.dim() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
                context: "chain proposal",
            })
        }
        MhKind::RandomWalk { step } if step.len() != d || step.iter().any(|s| !(*s > 0.0)) => {
            return Err(Error::InvalidParameter(format!(
                "random-walk step needs {d} positive scales, got {step:?}"
            )))
        }
        _ => {}
    }
    let mut lx = target.neg_log_density(&x);
    if !lx.is_finite() {
        return Err(Error::InfeasibleStart(lx));
    }
    let mut qx = match &cfg.kind {
        MhKind::Independence(p) => p.log_density(&x),
        MhKind::RandomWalk { .. } => 0.0,
    };
    let total = cfg.burn_in + cfg.length;
    let mut samples = Vec::with_capacity(cfg.length);
    let mut accepted = 0usize;
    let mut u = vec![0.0; d];
    for t in 0..total {
        let (y, qy) = match &cfg.kind {
            MhKind::Independence(p) => {
                for v in u.iter_mut() {
                    *v = open_unit(&mut rng);
                }
                p.map_point(&u)?
            }
            MhKind::RandomWalk { step } => {
                let y: Vec<f64> = x
                    .iter()
                    .zip(step)
                    .map(|(xi, s)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        xi + s * z
                    })
                    .collect();
                (y, 0.0)
            }
        };
        let ly = target.neg_log_density(&y);
        if ly.is_nan() {
            return Err(Error::TargetEvaluation {
                index: t,
                point: y,
                value: ly,
            });
        }
        let log_ratio = lx - ly + qx - qy;
        let coin: f64 = rng.random();
        if ly.is_finite() && coin.ln() < log_ratio {
            x = y;
            lx = ly;
            qx = qy;
            accepted += 1;
        }
        if t >= cfg.burn_in {
            samples.push(x.clone());
        }
    }
    Ok(MhOutput {
        samples,
        acceptance: accepted as f64 / total as f64,
    })
}

/// Models with a closed-form sampler.
#[derive(Debug, Clone, Copy)]
pub enum ExactModel<'a> {
    BetaMixture(&'a BetaMixture),
    Normal(&'a MvNormalTarget),
    LinReg(&'a LinRegData),
}

/// `n` i.i.d. draws from the model's exact posterior.
pub fn exact_mc(model: ExactModel<'_>, n: usize, seed: u64) -> Vec<Vec<f64>> {
    match model {
        ExactModel::BetaMixture(m) => m.sample(n, seed).into_iter().map(|x| vec![x]).collect(),
        ExactModel::Normal(t) => t.sample(n, seed),
        ExactModel::LinReg(data) => data.exact_sample(n, seed),
    }
}

/// Exact sampler for a bundled model without data (`beta_mixture`, `normal2d`).
pub fn exact_mc_by_name(name: &str, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    match name {
        "beta_mixture" => Ok(exact_mc(ExactModel::BetaMixture(&BetaMixture::two_humps()), n, seed)),
        "normal2d" => Ok(exact_mc(ExactModel::Normal(&MvNormalTarget::benchmark()), n, seed)),
        other => Err(Error::UnsupportedModel(format!(
            "no closed-form sampler for {other:?} (available: beta_mixture, normal2d; linreg needs data)"
        ))),
    }
}

/// Runs `f(rep, seed)` for `reps` repetitions on up to `workers` threads.
/// Each repetition's seed is `derive_seed(master, rep)`; results are
/// returned in repetition order.
pub fn repeat<T, F>(reps: usize, master: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync,
{
    let workers = workers.clamp(1, reps.max(1));
    let chunk = reps.div_ceil(workers).max(1);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..reps)
            .step_by(chunk)
            .map(|start| {
                scope.spawn(move || {
                    (start..(start + chunk).min(reps))
                        .map(|r| f(r, derive_seed(master, r as u64)))
                        .collect::<Vec<T>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("repetition thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proposal::ProposalBlock;
    use crate::target::{FnTarget, Support};

    fn unit() -> Proposal {
        Proposal::single(ProposalBlock::unit_box(1).unwrap())
    }

    #[test]
    fn uniform_target_accepts_everything() {
        let t = FnTarget::new("u", vec![Support::Interval { lower: 0.0, upper: 1.0 }], |x: &[f64]| {
            if (0.0..=1.0).contains(&x[0]) {
                0.0
            } else {
                f64::INFINITY
            }
        });
        let out = mh_chain(&t, &MhConfig::new(MhKind::Independence(unit()), 500, 1)).unwrap();
        assert_eq!(out.acceptance, 1.0);
        assert_eq!(out.samples.len(), 500);
    }

    #[test]
    fn chains_are_reproducible() {
        let t = BetaMixture::two_humps();
        let cfg = MhConfig::new(MhKind::Independence(unit()), 200, 42);
        assert_eq!(mh_chain(&t, &cfg).unwrap(), mh_chain(&t, &cfg).unwrap());
        let other = MhConfig { seed: 43, ..cfg.clone() };
        assert_ne!(mh_chain(&t, &cfg).unwrap(), mh_chain(&t, &other).unwrap());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let t = BetaMixture::two_humps();
        let cfg = MhConfig {
            initial: Some(vec![2.0]),
            ..MhConfig::new(MhKind::Independence(unit()), 10, 1)
        };
        assert!(matches!(mh_chain(&t, &cfg), Err(Error::InfeasibleStart(_))));
        let rw = MhConfig::new(MhKind::RandomWalk { step: vec![0.1] }, 10, 1);
        assert!(mh_chain(&t, &rw).is_err());
    }

    #[test]
    fn detailed_balance_on_three_atoms() {
        // Piecewise-constant density on thirds of [0,1] with masses (0.2, 0.5, 0.3).
        let masses = [0.2, 0.5, 0.3];
        let t = FnTarget::new("steps", vec![Support::Interval { lower: 0.0, upper: 1.0 }], move |x: &[f64]| {
            if !(0.0..1.0).contains(&x[0]) {
                return f64::INFINITY;
            }
            -(masses[(x[0] * 3.0) as usize] * 3.0f64).ln()
        });
        let n = 60_000;
        let out = mh_chain(&t, &MhConfig::new(MhKind::Independence(unit()), n, 5)).unwrap();
        let mut counts = [0usize; 3];
        for s in &out.samples {
            counts[(s[0] * 3.0) as usize] += 1;
        }
        // Effective sample size of an independence chain is smaller than n;
        // a factor of 3 inflation is generous for these masses.
        for (c, p) in counts.iter().zip(masses) {
            let freq = *c as f64 / n as f64;
            let sd = (3.0 * p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * sd * 1.5, "{freq} vs {p}");
        }
    }

    #[test]
    fn random_walk_mean_rate() {
        let t = MvNormalTarget::benchmark();
        let run = |len: usize, reps: usize| -> f64 {
            let ses = repeat(reps, 9, 4, |_, seed| {
                let cfg = MhConfig {
                    initial: Some(vec![2.0, -1.0]),
                    burn_in: 100,
                    ..MhConfig::new(MhKind::RandomWalk { step: vec![2.0, 1.0] }, len, seed)
                };
                let m = mh_chain(&t, &cfg).unwrap().mean();
                (m[0] - 2.0).powi(2) + (m[1] + 1.0).powi(2)
            });
            ses.iter().sum::<f64>() / ses.len() as f64
        };
        let short = run(1000, 200);
        let long = run(4000, 200);
        let ratio = short / long;
        assert!((2.5..=6.5).contains(&ratio), "MSE ratio {ratio}");
    }

    #[test]
    fn exact_samplers() {
        let xs = exact_mc_by_name("normal2d", 10, 3).unwrap();
        assert_eq!(xs.len(), 10);
        assert_eq!(xs, exact_mc_by_name("normal2d", 10, 3).unwrap());
        assert!(matches!(exact_mc_by_name("gp", 1, 1), Err(Error::UnsupportedModel(_))));
        let b = exact_mc_by_name("beta_mixture", 5, 1).unwrap();
        assert!(b.iter().all(|x| x[0] > 0.0 && x[0] < 1.0));
    }

    #[test]
    fn repeat_is_ordered_and_worker_independent() {
        let a = repeat(37, 5, 1, |r, s| (r, s));
        let b = repeat(37, 5, 8, |r, s| (r, s));
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, (r, _))| i == *r));
    }

    #[test]
    fn sample_quantile_first_crossing() {
        let xs: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64]).collect();
        assert_eq!(sample_quantile(&xs, 0, 0.2), 2.0);
        assert_eq!(sample_quantile(&xs, 0, 0.21), 3.0);
    }
}
