//! Benchmark studies at desk scale.
//!
//! Each study returns its raw numbers; [`benchmark`] turns them into a
//! table-shaped CSV plus pass/fail checks.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::adaptive::{run_stages_with, StageOptions, StageReport, StageSpec};
use crate::baselines::{column_means, exact_mc, mh_chain, repeat, sample_quantile, ExactModel, MhConfig, MhKind};
use crate::error::{Error, Result};
use crate::export::{fmt_f64, CsvMeta};
use crate::metrics::{kolmogorov, median, CdfOracle, DiscreteMeasure};
use crate::models::{Banana, BayesLasso, BetaMixture, LinRegData, LinRegPosterior, MvNormalTarget};
use crate::posterior::{discretize_with, DiscretePosterior};
use crate::proposal::{Proposal, ProposalBlock};
use crate::qmc::{midpoint_grid_1d, sobol_points};
use crate::rng::derive_seed;
use crate::sampling::representation_points;

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// A summary value over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, std) = mean_std(xs);
        Self {
            mean,
            std,
            median: median(xs),
        }
    }

    pub fn exact(x: f64) -> Self {
        Self {
            mean: x,
            std: 0.0,
            median: x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub method: String,
    pub size: String,
    pub reps: usize,
    pub values: Vec<Stat>,
}

/// A table-shaped result: one row per method, one [`Stat`] per metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub id: String,
    pub metrics: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn row(&self, method: &str, size: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.method == method && r.size == size)
    }

    /// Columns `method,size,reps` then `<metric>,<metric>_std` per metric.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &CsvMeta) -> std::io::Result<()> {
        meta.write(&mut w)?;
        let mut header = vec!["method".to_string(), "size".into(), "reps".into()];
        for m in &self.metrics {
            header.push(m.clone());
            header.push(format!("{m}_std"));
        }
        writeln!(w, "{}", header.join(","))?;
        for r in &self.rows {
            let mut cells = vec![r.method.clone(), r.size.clone(), r.reps.to_string()];
            for s in &r.values {
                cells.push(fmt_f64(s.mean));
                cells.push(fmt_f64(s.std));
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    ((got - want) / want).abs() <= tol
}

// ---------------------------------------------------------------------------
// Beta mixture on [0,1].

/// Points kept per representation in the mixture study.
pub const TABLE1_RP_SIZE: usize = 30;

fn unit_proposal() -> Proposal {
    Proposal::single(ProposalBlock::unit_box(1).expect("valid box"))
}

/// Discretized mixture on the `m`-point midpoint grid.
pub fn beta_mixture_da(m: usize) -> Result<DiscretePosterior> {
    discretize_with(&BetaMixture::two_humps(), &unit_proposal(), &midpoint_grid_1d(m)?, 1)
}

/// `(squared error of the mean, Kolmogorov distance)` of a sample or
/// discrete measure against the mixture.
pub fn beta_mixture_errors(measure: &DiscreteMeasure) -> Result<(f64, f64)> {
    let mix = BetaMixture::two_humps();
    let oracle = CdfOracle::univariate(|x| mix.cdf(x));
    let se = (measure.mean()[0] - mix.mean()).powi(2);
    Ok((se, kolmogorov(measure, &oracle)?.value))
}

/// MCMC, exact MC, DA and DA representation points for the Beta mixture at
/// `M = 10` and `M = 30`.
pub fn table1(reps: usize, seed: u64, workers: usize) -> Result<Table> {
    let mix = BetaMixture::two_humps();
    let mut rows = Vec::new();
    for m in [10usize, 30] {
        let size = format!("M={m}");
        let mcmc = repeat(reps, derive_seed(seed, m as u64), workers, |_, s| -> Result<(f64, f64)> {
            let out = mh_chain(&mix, &MhConfig::new(MhKind::Independence(unit_proposal()), m, s))?;
            beta_mixture_errors(&DiscreteMeasure::empirical(&out.samples)?)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        rows.push(rep_row("MCMC", &size, &mcmc));

        let exact = repeat(reps, derive_seed(seed, 1000 + m as u64), workers, |_, s| {
            let xs = exact_mc(ExactModel::BetaMixture(&mix), m, s);
            beta_mixture_errors(&DiscreteMeasure::empirical(&xs)?)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        rows.push(rep_row("Exact MC", &size, &exact));

        let dp = beta_mixture_da(m)?;
        let (se, kd) = beta_mixture_errors(&DiscreteMeasure::from_posterior(&dp))?;
        rows.push(Row {
            method: "DA".into(),
            size: size.clone(),
            reps: 1,
            values: vec![Stat::exact(se), Stat::exact(kd)],
        });

        let rp = representation_points(&dp, TABLE1_RP_SIZE)?;
        let (se, kd) = beta_mixture_errors(&DiscreteMeasure::from_representation(&rp))?;
        rows.push(Row {
            method: format!("DA-RP (N={TABLE1_RP_SIZE})"),
            size,
            reps: 1,
            values: vec![Stat::exact(se), Stat::exact(kd)],
        });
    }
    Ok(Table {
        id: "t1".into(),
        metrics: vec!["se".into(), "kd".into()],
        rows,
    })
}

fn rep_row(method: &str, size: &str, pairs: &[(f64, f64)]) -> Row {
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Row {
        method: method.into(),
        size: size.into(),
        reps: pairs.len(),
        values: vec![Stat::of(&a), Stat::of(&b)],
    }
}

pub fn table1_checks(t: &Table) -> Vec<Check> {
    let rp = format!("DA-RP (N={TABLE1_RP_SIZE})");
    let want = [
        ("DA", "M=10", 2.1613e-5, 0.0872),
        ("DA", "M=30", 3.2417e-7, 0.0275),
        (rp.as_str(), "M=10", 6.0494e-5, 0.0951),
        (rp.as_str(), "M=30", 1.2346e-6, 0.0429),
    ];
    want.iter()
        .map(|&(method, size, se, kd)| match t.row(method, size) {
            Some(r) => {
                let (gse, gkd) = (r.values[0].mean, r.values[1].mean);
                Check::new(
                    format!("t1 {method} {size}"),
                    rel_close(gse, se, 0.01) && rel_close(gkd, kd, 0.01),
                    format!("SE {gse:.5e} (want {se:.4e}), KD {gkd:.4} (want {kd})"),
                )
            }
            None => Check::new(format!("t1 {method} {size}"), false, "row missing"),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Bivariate normal.

fn normal_errors(t: &MvNormalTarget, mean: &[f64], cov: &[Vec<f64>], q1: f64, q2: f64) -> Result<[f64; 4]> {
    let mu = t.mean();
    let se_mu = (mean[0] - mu[0]).powi(2) + (mean[1] - mu[1]).powi(2);
    let mut se_cov = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            se_cov += (cov[i][j] - t.cov()[(i, j)]).powi(2);
        }
    }
    let se_q1 = (q1 - t.marginal_quantile(0, 0.2)?).powi(2);
    let se_q2 = (q2 - t.marginal_quantile(1, 0.1)?).powi(2);
    Ok([se_mu, se_cov, se_q1, se_q2])
}

fn dp_normal_errors(t: &MvNormalTarget, dp: &DiscretePosterior) -> Result<[f64; 4]> {
    normal_errors(
        t,
        &dp.mean(),
        &dp.covariance(),
        dp.marginal_quantile(0, 0.2)?,
        dp.marginal_quantile(1, 0.1)?,
    )
}

fn sample_normal_errors(t: &MvNormalTarget, xs: &[Vec<f64>]) -> Result<[f64; 4]> {
    let m = column_means(xs);
    let n = xs.len() as f64;
    let mut cov = vec![vec![0.0; 2]; 2];
    for x in xs {
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += (x[i] - m[i]) * (x[j] - m[j]) / (n - 1.0);
            }
        }
    }
    normal_errors(t, &m, &cov, sample_quantile(xs, 0, 0.2), sample_quantile(xs, 1, 0.1))
}

pub fn cauchy_standard(d: usize) -> Proposal {
    Proposal::single(ProposalBlock::mvcauchy(vec![0.0; d], DMatrix::identity(d, d)).expect("identity scale"))
}

fn stats_row(method: &str, size: &str, errs: &[[f64; 4]]) -> Row {
    Row {
        method: method.into(),
        size: size.into(),
        reps: errs.len(),
        values: (0..4)
            .map(|k| Stat::of(&errs.iter().map(|e| e[k]).collect::<Vec<_>>()))
            .collect(),
    }
}

/// Two-stage DA with Sobol' stages of `m1` and `m2` points from Cauchy(0, I),
/// first stage at `skip`.
pub fn normal_two_stage(m1: usize, m2: usize, skip: u64, workers: usize) -> Result<(DiscretePosterior, Vec<StageReport>)> {
    let opts = StageOptions {
        base_skip: skip,
        workers,
        ..StageOptions::default()
    };
    run_stages_with(
        &MvNormalTarget::benchmark(),
        &cauchy_standard(2),
        &[StageSpec::sobol(m1), StageSpec::sobol(m2)],
        2,
        &opts,
    )
}

/// MCMC, exact MC, one- and two-stage DA on the bivariate normal. Metrics are
/// squared errors of the mean, covariance (Frobenius), 0.2-quantile of `X₁`
/// and 0.1-quantile of `X₂`.
pub fn table2(reps: usize, seed: u64, workers: usize) -> Result<Table> {
    let t = MvNormalTarget::benchmark();
    let mut rows = Vec::new();
    let mcmc = repeat(reps, derive_seed(seed, 2), workers, |_, s| {
        let cfg = MhConfig {
            burn_in: 200,
            ..MhConfig::new(MhKind::Independence(cauchy_standard(2)), 2000, s)
        };
        sample_normal_errors(&t, &mh_chain(&t, &cfg)?.samples)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.push(stats_row("MCMC", "M=2000", &mcmc));

    let exact = repeat(reps, derive_seed(seed, 3), workers, |_, s| {
        sample_normal_errors(&t, &exact_mc(ExactModel::Normal(&t), 2000, s))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.push(stats_row("Exact MC", "M=2000", &exact));

    for m in [1000usize, 2000] {
        let dp = discretize_with(&t, &cauchy_standard(2), &sobol_points(m, 2, 1)?, workers)?;
        rows.push(stats_row("DA", &format!("M={m}"), &[dp_normal_errors(&t, &dp)?]));
    }
    let (dp, _) = normal_two_stage(1000, 1000, 1, workers)?;
    rows.push(stats_row("two-stage DA", "M=1000+1000", &[dp_normal_errors(&t, &dp)?]));
    Ok(Table {
        id: "t2".into(),
        metrics: vec!["se_mean".into(), "se_cov".into(), "se_q02_x1".into(), "se_q01_x2".into()],
        rows,
    })
}

pub fn table2_checks(t: &Table) -> Vec<Check> {
    let get = |m: &str, s: &str| t.row(m, s).map(|r| r.values[0]);
    match (get("two-stage DA", "M=1000+1000"), get("DA", "M=2000"), get("MCMC", "M=2000")) {
        (Some(two), Some(one), Some(mc)) => vec![
            Check::new(
                "t2 ordering",
                two.mean < one.mean && one.mean < mc.median,
                format!(
                    "two-stage {:.3e} < one-stage {:.3e} < median MCMC {:.3e}",
                    two.mean, one.mean, mc.median
                ),
            ),
            Check::new("t2 two-stage SE", two.mean < 1e-4, format!("{:.3e} < 1e-4", two.mean)),
        ],
        _ => vec![Check::new("t2", false, "rows missing")],
    }
}

// ---------------------------------------------------------------------------
// Banana.

/// Two-stage DA on the banana target from Cauchy(0, I).
pub fn banana(m1: usize, m2: usize, workers: usize) -> Result<(DiscretePosterior, Vec<StageReport>)> {
    let opts = StageOptions {
        workers,
        ..StageOptions::default()
    };
    run_stages_with(
        &Banana,
        &cauchy_standard(2),
        &[StageSpec::sobol(m1), StageSpec::sobol(m2)],
        2,
        &opts,
    )
}

// ---------------------------------------------------------------------------
// Linear regression.

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinRegOracle {
    pub da_beta1: f64,
    pub exact_beta1: f64,
    pub mc_se_beta1: f64,
    pub da_sigma2: f64,
    pub exact_sigma2: f64,
    pub mc_se_sigma2: f64,
    pub acceptance_rate: f64,
}

/// DA posterior means against the closed form, with the exact-MC standard
/// error at `n_mc` draws as the yardstick.
pub fn linreg_oracle(n: usize, d: usize, m: usize, n_mc: usize, seed: u64, workers: usize) -> Result<LinRegOracle> {
    let data = LinRegData::synthetic(n, d, seed)?;
    let target = LinRegPosterior::new(data.clone());
    let prop = data.cauchy_gamma_proposal()?;
    let dp = discretize_with(&target, &prop, &sobol_points(m, d + 2, 1)?, workers)?;
    let mean = dp.mean();
    let draws = exact_mc(ExactModel::LinReg(&data), n_mc, derive_seed(seed, 1));
    let sd = |k: usize| {
        let xs: Vec<f64> = draws.iter().map(|x| x[k]).collect();
        mean_std(&xs).1 / (n_mc as f64).sqrt()
    };
    Ok(LinRegOracle {
        da_beta1: mean[1],
        exact_beta1: data.gamma_hat()[1],
        mc_se_beta1: sd(1),
        da_sigma2: mean[d + 1],
        exact_sigma2: data.exact_sigma2_mean(),
        mc_se_sigma2: sd(d + 1),
        acceptance_rate: dp.acceptance_rate(),
    })
}

/// Regression with `d = 20`, `n = 120`: squared errors of the posterior mean
/// and 0.1-quantile of `β₁` and `σ²`, DA (`M = 1000`) against MCMC and exact
/// MC with the same budget. The data set is fixed by `seed`.
pub fn table3_small(reps: usize, seed: u64, workers: usize) -> Result<Table> {
    let (n, d, m) = (120usize, 20usize, 1000usize);
    let data = LinRegData::synthetic(n, d, seed)?;
    let target = LinRegPosterior::new(data.clone());
    let prop = data.cauchy_gamma_proposal()?;
    let truth = [
        data.gamma_hat()[1],
        data.exact_gamma_quantile(1, 0.1)?,
        data.exact_sigma2_mean(),
        data.exact_sigma2_quantile(0.1)?,
    ];
    let errs = |mean_b: f64, q_b: f64, mean_s: f64, q_s: f64| {
        [
            (mean_b - truth[0]).powi(2),
            (q_b - truth[1]).powi(2),
            (mean_s - truth[2]).powi(2),
            (q_s - truth[3]).powi(2),
        ]
    };
    let sample_errs = |xs: &[Vec<f64>]| {
        let mu = column_means(xs);
        errs(mu[1], sample_quantile(xs, 1, 0.1), mu[d + 1], sample_quantile(xs, d + 1, 0.1))
    };
    let mut rows = Vec::new();
    let mcmc = repeat(reps, derive_seed(seed, 2), workers, |_, s| -> Result<[f64; 4]> {
        let cfg = MhConfig::new(MhKind::Independence(prop.clone()), m, s);
        Ok(sample_errs(&mh_chain(&target, &cfg)?.samples))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.push(stats_row("MCMC", &format!("M={m}"), &mcmc));
    let exact = repeat(reps, derive_seed(seed, 3), workers, |_, s| {
        sample_errs(&exact_mc(ExactModel::LinReg(&data), m, s))
    });
    rows.push(stats_row("Exact MC", &format!("M={m}"), &exact));
    let dp = discretize_with(&target, &prop, &sobol_points(m, d + 2, 1)?, workers)?;
    let mu = dp.mean();
    let da = errs(mu[1], dp.marginal_quantile(1, 0.1)?, mu[d + 1], dp.marginal_quantile(d + 1, 0.1)?);
    rows.push(stats_row("DA", &format!("M={m}"), &[da]));
    Ok(Table {
        id: "t3-small".into(),
        metrics: vec![
            "se_mean_beta1".into(),
            "se_q01_beta1".into(),
            "se_mean_sigma2".into(),
            "se_q01_sigma2".into(),
        ],
        rows,
    })
}

pub fn table3_checks(t: &Table) -> Vec<Check> {
    match (t.row("DA", "M=1000"), t.row("MCMC", "M=1000")) {
        (Some(da), Some(mc)) => vec![Check::new(
            "t3-small DA beats MCMC on beta1 mean",
            da.values[0].mean < mc.values[0].mean,
            format!("DA {:.3e} vs MCMC MSE {:.3e}", da.values[0].mean, mc.values[0].mean),
        )],
        _ => vec![Check::new("t3-small", false, "rows missing")],
    }
}

// ---------------------------------------------------------------------------
// Bayesian lasso credible intervals.

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub reps: usize,
    pub beta1_coverage: f64,
    pub beta1_length: Stat,
    pub beta4_coverage: f64,
    pub beta4_length: Stat,
    pub mean_acceptance: f64,
}

/// Frequentist coverage of 90% credible intervals (0.05 and 0.95 marginal
/// quantiles) for `β₁` and `β₄` over `reps` fresh data sets.
pub fn lasso_coverage(reps: usize, n: usize, d: usize, m: usize, seed: u64, workers: usize) -> Result<Coverage> {
    if d < 4 {
        return Err(Error::InvalidParameter(format!("coverage study needs d >= 4, got {d}")));
    }
    let pts = sobol_points(m, d + 3, 1)?;
    let truth = LinRegData::true_beta(d);
    let per_rep = repeat(reps, seed, workers, |_, s| -> Result<[f64; 5]> {
        let model = BayesLasso::new(LinRegData::synthetic(n, d, s)?);
        let dp = discretize_with(&model, &model.proposal()?, &pts, 1)?;
        let ci = |j: usize| -> Result<(f64, f64)> {
            Ok((dp.marginal_quantile(j, 0.05)?, dp.marginal_quantile(j, 0.95)?))
        };
        let (l1, h1) = ci(1)?;
        let (l4, h4) = ci(4)?;
        let hit = |l: f64, h: f64, v: f64| if l <= v && v <= h { 1.0 } else { 0.0 };
        Ok([hit(l1, h1, truth[0]), h1 - l1, hit(l4, h4, truth[3]), h4 - l4, dp.acceptance_rate()])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let col = |k: usize| per_rep.iter().map(|r| r[k]).collect::<Vec<f64>>();
    Ok(Coverage {
        reps,
        beta1_coverage: mean_std(&col(0)).0,
        beta1_length: Stat::of(&col(1)),
        beta4_coverage: mean_std(&col(2)).0,
        beta4_length: Stat::of(&col(3)),
        mean_acceptance: mean_std(&col(4)).0,
    })
}

pub fn table4_small(reps: usize, seed: u64, workers: usize) -> Result<(Table, Coverage)> {
    let c = lasso_coverage(reps, 50, 5, 10_000, seed, workers)?;
    let table = Table {
        id: "t4-small".into(),
        metrics: vec!["coverage_beta1".into(), "length_beta1".into(), "coverage_beta4".into(), "length_beta4".into()],
        rows: vec![Row {
            method: "DA".into(),
            size: "n=50,d=5,M=10000".into(),
            reps,
            values: vec![
                Stat::exact(c.beta1_coverage),
                c.beta1_length,
                Stat::exact(c.beta4_coverage),
                c.beta4_length,
            ],
        }],
    };
    Ok((table, c))
}

pub fn table4_checks(c: &Coverage) -> Vec<Check> {
    vec![Check::new(
        "t4-small beta1 coverage",
        (c.beta1_coverage - 0.8524).abs() <= 0.05,
        format!("{:.4} within 0.8524 +/- 0.05 over {} reps", c.beta1_coverage, c.reps),
    )]
}

// ---------------------------------------------------------------------------
// Rates.

/// Kolmogorov distance between DA on the `m`-point midpoint grid and Beta(2,3).
pub fn beta23_kd(m: usize) -> Result<f64> {
    let b = BetaMixture::beta(2.0, 3.0)?;
    let dp = discretize_with(&b, &unit_proposal(), &midpoint_grid_1d(m)?, 1)?;
    let oracle = CdfOracle::univariate(|x| b.cdf(x));
    Ok(kolmogorov(&DiscreteMeasure::from_posterior(&dp), &oracle)?.value)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BenchId {
    T1,
    T2,
    T3Small,
    T4Small,
}

impl BenchId {
    pub const ALL: [BenchId; 4] = [BenchId::T1, BenchId::T2, BenchId::T3Small, BenchId::T4Small];

    pub fn default_reps(self) -> usize {
        match self {
            BenchId::T1 => 100,
            BenchId::T2 => 20,
            BenchId::T3Small => 100,
            BenchId::T4Small => 500,
        }
    }
}

impl fmt::Display for BenchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchId::T1 => "t1",
            BenchId::T2 => "t2",
            BenchId::T3Small => "t3-small",
            BenchId::T4Small => "t4-small",
        })
    }
}

impl FromStr for BenchId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchId::ALL
            .into_iter()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown table {s:?} (expected t1, t2, t3-small or t4-small)")))
    }
}

/// Runs one study and its checks.
pub fn benchmark(id: BenchId, seed: u64, reps: Option<usize>, workers: usize) -> Result<(Table, Vec<Check>)> {
    let reps = reps.unwrap_or(id.default_reps());
    if reps == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    Ok(match id {
        BenchId::T1 => {
            let t = table1(reps, seed, workers)?;
            let c = table1_checks(&t);
            (t, c)
        }
        BenchId::T2 => {
            let t = table2(reps, seed, workers)?;
            let c = table2_checks(&t);
            (t, c)
        }
        BenchId::T3Small => {
            let t = table3_small(reps, seed, workers)?;
            let c = table3_checks(&t);
            (t, c)
        }
        BenchId::T4Small => {
            let (t, cov) = table4_small(reps, seed, workers)?;
            (t, table4_checks(&cov))
        }
    })
}
