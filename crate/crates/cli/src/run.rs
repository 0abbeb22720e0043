//! Executes a validated config and stages the output files in memory.

use std::collections::BTreeMap;
use std::time::Instant;

use qda_core::adaptive::{run_stages_with, StageOptions, StageReport, StageSpec};
use qda_core::baselines::{column_means, exact_mc, mh_chain, repeat, sample_quantile, ExactModel, MhConfig, MhKind};
use qda_core::export::{fmt_f64, CsvMeta};
use qda_core::linalg::from_rows;
use qda_core::metrics::{kolmogorov, CdfOracle, DiscreteMeasure};
use qda_core::models::{gp::gp_predict, Banana, BayesLasso, BetaMixture, GpConfig, LinRegData, LinRegPosterior, MvNormalTarget, SubprocessTarget};
use qda_core::rng::derive_seed;
use qda_core::sampling::{draw_indices, representation_points, representation_points_jittered, write_draws_csv};
use qda_core::target::Target;
use qda_core::{DiscretePosterior, Error, Proposal, ProposalBlock, Result};
use serde::Serialize;

use crate::config::{BlockSpec, ChainKind, RunConfig, TargetSpec};

/// Seed streams derived from the master seed.
const DRAWS_STREAM: u64 = 1;
const JITTER_STREAM: u64 = 2;
const MCMC_STREAM: u64 = 3;
const EXACT_STREAM: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Rp,
    Sample,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub repetitions: Option<usize>,
    pub config_hash: String,
}

pub enum Model {
    Mixture(BetaMixture),
    Normal(MvNormalTarget),
    Banana(Banana),
    LinReg(LinRegPosterior),
    Lasso(BayesLasso),
    Gp(GpConfig),
    Sub(SubprocessTarget),
}

impl Model {
    pub fn build(spec: &TargetSpec) -> Result<Self> {
        Ok(match spec {
            TargetSpec::BetaMixture { components } => Model::Mixture(BetaMixture::new(components.clone())?),
            TargetSpec::Beta { a, b } => Model::Mixture(BetaMixture::beta(*a, *b)?),
            TargetSpec::Normal2d => Model::Normal(MvNormalTarget::benchmark()),
            TargetSpec::MvNormal { mean, cov } => Model::Normal(MvNormalTarget::new(mean.clone(), from_rows(cov)?)?),
            TargetSpec::Banana => Model::Banana(Banana),
            TargetSpec::LinReg { n, d, data_seed } => {
                Model::LinReg(LinRegPosterior::new(LinRegData::synthetic(*n, *d, *data_seed)?))
            }
            TargetSpec::Lasso { n, d, data_seed } => Model::Lasso(BayesLasso::new(LinRegData::synthetic(*n, *d, *data_seed)?)),
            TargetSpec::Gp { n, p, m, data_seed } => Model::Gp(GpConfig::synthetic(*n, *p, *m, *data_seed)?),
            TargetSpec::Subprocess { program, args, support } => {
                Model::Sub(SubprocessTarget::spawn(program, args, support.clone(), "subprocess")?)
            }
        })
    }

    pub fn target(&self) -> &dyn Target {
        match self {
            Model::Mixture(t) => t,
            Model::Normal(t) => t,
            Model::Banana(t) => t,
            Model::LinReg(t) => t,
            Model::Lasso(t) => t,
            Model::Gp(t) => t,
            Model::Sub(t) => t,
        }
    }

    pub fn default_proposal(&self) -> Result<Proposal> {
        let cauchy = |loc: Vec<f64>, scale| Ok(Proposal::single(ProposalBlock::mvcauchy(loc, scale)?));
        match self {
            Model::Mixture(_) => Ok(Proposal::single(ProposalBlock::unit_box(1)?)),
            Model::Normal(t) => cauchy(t.mean().to_vec(), t.cov().clone()),
            Model::Banana(_) => Ok(qda_core::experiments::cauchy_standard(2)),
            Model::LinReg(t) => t.data().cauchy_gamma_proposal(),
            Model::Lasso(t) => t.proposal(),
            Model::Gp(_) | Model::Sub(_) => Err(Error::InvalidParameter(
                "this target has no default proposal; configure [[proposal]] blocks".into(),
            )),
        }
    }

    fn exact(&self) -> Option<ExactModel<'_>> {
        match self {
            Model::Mixture(m) => Some(ExactModel::BetaMixture(m)),
            Model::Normal(t) => Some(ExactModel::Normal(t)),
            Model::LinReg(t) => Some(ExactModel::LinReg(t.data())),
            _ => None,
        }
    }
}

pub fn build_proposal(blocks: &[BlockSpec]) -> Result<Proposal> {
    let built = blocks
        .iter()
        .map(|b| match b {
            BlockSpec::UniformBox { lower, upper } => ProposalBlock::uniform_box(lower.clone(), upper.clone()),
            BlockSpec::MvNormal { mean, cov } => ProposalBlock::mvnormal(mean.clone(), from_rows(cov)?),
            BlockSpec::MvCauchy { location, scale } => ProposalBlock::mvcauchy(location.clone(), from_rows(scale)?),
            BlockSpec::Gamma { shape, scale } => ProposalBlock::gamma(*shape, *scale),
        })
        .collect::<Result<Vec<_>>>()?;
    Proposal::new(built)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub engine: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_secs: u64,
    pub wall_clock_secs: f64,
    pub target: String,
    pub initial_proposal: String,
    pub stages: Vec<StageReport>,
    pub warnings: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub outputs: Vec<String>,
}

/// Rows of `results.csv`: `quantity,coord,param,value,std`.
#[derive(Default)]
struct Results {
    rows: Vec<[String; 5]>,
}

impl Results {
    fn push(&mut self, quantity: &str, coord: impl ToString, param: impl ToString, value: f64, std: Option<f64>) {
        self.rows.push([
            quantity.to_string(),
            coord.to_string(),
            param.to_string(),
            fmt_f64(value),
            std.map(fmt_f64).unwrap_or_default(),
        ]);
    }

    fn to_bytes(&self, meta: &CsvMeta) -> Vec<u8> {
        let mut out = Vec::new();
        meta.write(&mut out).expect("in-memory write");
        out.extend_from_slice(b"quantity,coord,param,value,std\n");
        for r in &self.rows {
            out.extend_from_slice(r.join(",").as_bytes());
            out.push(b'\n');
        }
        out
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    qda_core::experiments::mean_std(xs)
}

/// Runs the pipeline and returns `(file name, contents)` pairs plus the log.
pub fn execute(cfg: &RunConfig, mode: Mode, settings: &Settings) -> Result<(Vec<(String, Vec<u8>)>, RunLog)> {
    let started = Instant::now();
    let started_unix_secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    match mode {
        Mode::Rp if cfg.outputs.rp.is_none() => {
            return Err(Error::InvalidParameter("the rp command needs outputs.rp = N in the config".into()))
        }
        Mode::Sample if cfg.outputs.draws.is_none() => {
            return Err(Error::InvalidParameter("the sample command needs outputs.draws = N in the config".into()))
        }
        _ => {}
    }
    let model = Model::build(&cfg.target)?;
    let target = model.target();
    let proposal = match &cfg.proposal {
        Some(blocks) => build_proposal(blocks)?,
        None => model.default_proposal()?,
    };
    if proposal.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: proposal.dim(),
            context: "proposal vs target",
        });
    }
    let disc = &cfg.discretization;
    let schedule: Vec<StageSpec> = disc
        .schedule
        .iter()
        .map(|&m| StageSpec {
            m,
            generator: disc.generator,
        })
        .collect();
    let opts = StageOptions {
        family: disc.refit,
        base_skip: disc.skip,
        workers: settings.threads,
    };
    let (dp, stages) = run_stages_with(target, &proposal, &schedule, disc.stages, &opts).map_err(|e| match e {
        Error::TargetEvaluation { .. } => match &model {
            Model::Sub(s) => Error::Subprocess(format!(
                "{e}; last protocol error: {}",
                s.last_error().unwrap_or_else(|| "none".into())
            )),
            _ => e,
        },
        e => e,
    })?;

    let mut warnings = Vec::new();
    for r in &stages {
        if r.acceptance_rate < disc.warn_below {
            warnings.push(format!(
                "stage {}: acceptance rate {:.4} is below {}; consider revising the proposal",
                r.stage_index, r.acceptance_rate, disc.warn_below
            ));
        }
    }

    let mut seeds = BTreeMap::new();
    seeds.insert("seed".to_string(), settings.seed);
    let mut meta = CsvMeta::new();
    meta.push("config_hash", &settings.config_hash)
        .push("seed", settings.seed)
        .push("target", cfg.target.model_name());

    let mut files = Vec::new();
    if mode == Mode::Run {
        let results = summarize(cfg, &model, &dp, settings, &mut seeds)?;
        let mut rmeta = meta.clone();
        for (k, v) in &seeds {
            if k != "seed" {
                rmeta.push(k, v);
            }
        }
        files.push(("results.csv".to_string(), results.to_bytes(&rmeta)));
        let mut buf = Vec::new();
        dp.write_csv(&mut buf, &meta)?;
        files.push(("posterior.csv".to_string(), buf));
    }
    if mode != Mode::Sample {
        if let Some(n) = cfg.outputs.rp {
            let mut m = meta.clone();
            let rp = if cfg.outputs.rp_jitter {
                let s = derive_seed(settings.seed, JITTER_STREAM);
                seeds.insert("jitter_seed".into(), s);
                m.push("jitter_seed", s);
                representation_points_jittered(&dp, n, s, &target.support())?
            } else {
                representation_points(&dp, n)?
            };
            let mut buf = Vec::new();
            rp.write_csv(&mut buf, &m)?;
            files.push(("rp.csv".to_string(), buf));
        }
    }
    if mode != Mode::Rp {
        if let Some(n) = cfg.outputs.draws {
            let s = cfg
                .outputs
                .draws_seed
                .unwrap_or_else(|| derive_seed(settings.seed, DRAWS_STREAM));
            seeds.insert("draws_seed".into(), s);
            let mut m = meta.clone();
            m.push("draws_seed", s);
            let idx = draw_indices(&dp, n, s);
            let mut buf = Vec::new();
            write_draws_csv(&dp, &idx, &mut buf, &m)?;
            files.push(("draws.csv".to_string(), buf));
        }
    }

    let mut outputs: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    outputs.push("run_log.json".into());
    let log = RunLog {
        engine: qda_core::ENGINE_VERSION.to_string(),
        command: match mode {
            Mode::Run => "run",
            Mode::Rp => "rp",
            Mode::Sample => "sample",
        }
        .into(),
        config_hash: settings.config_hash.clone(),
        seed: settings.seed,
        threads: settings.threads,
        started_unix_secs,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        target: cfg.target.model_name().into(),
        initial_proposal: proposal.to_string(),
        stages,
        warnings,
        seeds,
        outputs,
    };
    Ok((files, log))
}

fn summarize(
    cfg: &RunConfig,
    model: &Model,
    dp: &DiscretePosterior,
    settings: &Settings,
    seeds: &mut BTreeMap<String, u64>,
) -> Result<Results> {
    let out = &cfg.outputs;
    let d = dp.dim();
    let mut res = Results::default();
    res.push("acceptance_rate", "", "", dp.acceptance_rate(), None);
    res.push("support_size", "", "", dp.len() as f64, None);
    if out.mean {
        for (k, v) in dp.mean().iter().enumerate() {
            res.push("mean", k + 1, "", *v, None);
        }
    }
    if out.covariance {
        let c = dp.covariance();
        for i in 0..d {
            for j in 0..d {
                res.push("covariance", i + 1, j + 1, c[i][j], None);
            }
        }
    }
    for q in &out.quantiles {
        res.push("quantile", q.coord, q.alpha, dp.marginal_quantile(q.coord - 1, q.alpha)?, None);
    }
    if out.kd {
        if let Model::Mixture(mix) = model {
            let oracle = CdfOracle::univariate(|x| mix.cdf(x));
            let kd = kolmogorov(&DiscreteMeasure::from_posterior(dp), &oracle)?;
            res.push("kd", "", if kd.exact { "exact" } else { "lower_bound" }, kd.value, None);
            if let Some(n) = out.rp {
                let rp = representation_points(dp, n)?;
                let kd = kolmogorov(&DiscreteMeasure::from_representation(&rp), &oracle)?;
                res.push("rp_kd", "", n, kd.value, None);
            }
        }
    }
    if let Some(n) = out.rp {
        let rp = representation_points(dp, n)?;
        for (k, v) in rp.mean().iter().enumerate() {
            res.push("rp_mean", k + 1, n, *v, None);
        }
    }
    if let Model::Gp(gp) = model {
        for (i, x) in out.predict.iter().enumerate() {
            let p = gp_predict(dp, gp, x)?;
            res.push("predict_point", "", i + 1, p.point, None);
            res.push("predict_variance", "", i + 1, p.variance(), None);
        }
    }
    if let Some(b) = &cfg.baselines {
        let reps = settings.repetitions.unwrap_or(b.repetitions);
        if reps == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        let target = model.target();
        let mut summarize_runs = |name: &str, runs: Vec<(Vec<Vec<f64>>, f64)>| {
            let means: Vec<Vec<f64>> = runs.iter().map(|(s, _)| column_means(s)).collect();
            for k in 0..d {
                let (m, s) = mean_std(&means.iter().map(|v| v[k]).collect::<Vec<_>>());
                res.push(&format!("{name}_mean"), k + 1, reps, m, Some(s));
            }
            for q in &out.quantiles {
                let xs: Vec<f64> = runs.iter().map(|(s, _)| sample_quantile(s, q.coord - 1, q.alpha)).collect();
                let (m, s) = mean_std(&xs);
                res.push(&format!("{name}_quantile"), q.coord, q.alpha, m, Some(s));
            }
            if name == "mcmc" {
                let (m, s) = mean_std(&runs.iter().map(|r| r.1).collect::<Vec<_>>());
                res.push("mcmc_acceptance", "", reps, m, Some(s));
            }
        };
        if let Some(len) = b.mcmc_length {
            let master = derive_seed(settings.seed, MCMC_STREAM);
            seeds.insert("mcmc_seed".into(), master);
            let initial_proposal = match &cfg.proposal {
                Some(blocks) => build_proposal(blocks)?,
                None => model.default_proposal()?,
            };
            let kind = match &b.chain {
                ChainKind::Independence => MhKind::Independence(initial_proposal.clone()),
                ChainKind::RandomWalk { step } => MhKind::RandomWalk { step: step.clone() },
            };
            let initial = match b.chain {
                ChainKind::Independence => None,
                ChainKind::RandomWalk { .. } => Some(initial_proposal.center()),
            };
            let runs = repeat(reps, master, settings.threads, |_, s| {
                let mut c = MhConfig::new(kind.clone(), len, s);
                if let Some(bi) = b.burn_in {
                    c.burn_in = bi;
                }
                c.initial = initial.clone();
                mh_chain(target, &c).map(|o| (o.samples, o.acceptance))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            summarize_runs("mcmc", runs);
        }
        if let Some(n) = b.exact_draws {
            let exact = model
                .exact()
                .ok_or_else(|| Error::UnsupportedModel(format!("no closed-form sampler for {}", cfg.target.model_name())))?;
            let master = derive_seed(settings.seed, EXACT_STREAM);
            seeds.insert("exact_mc_seed".into(), master);
            let runs = repeat(reps, master, settings.threads, |_, s| (exact_mc(exact, n, s), 1.0));
            summarize_runs("exact_mc", runs);
        }
    }
    Ok(res)
}
