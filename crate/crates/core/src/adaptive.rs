//! Multi-stage discretization with moment-matched proposals.
//!
//! Stage 1 uses the initial proposal. Every later stage replaces each
//! real-line block (mvnormal or mvcauchy) with the chosen family centered at
//! the previous stage's mean, with the matching covariance sub-block as scale.
//! Positive and interval blocks are carried through unchanged.

use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{default_workers, discretize_with, DiscretePosterior};
use crate::proposal::{Proposal, ProposalBlock};
use crate::qmc::{generate, Generator};
use crate::target::Target;

/// Below this acceptance rate a stage is flagged.
pub const LOW_ACCEPTANCE: f64 = 0.1;

/// Relative ridge added to a covariance estimate before it becomes a scale.
pub const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefitFamily {
    #[default]
    MvCauchy,
    MvNormal,
}

impl fmt::Display for RefitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefitFamily::MvCauchy => "mvcauchy",
            RefitFamily::MvNormal => "mvnormal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub m: usize,
    pub generator: Generator,
}

impl StageSpec {
    pub fn sobol(m: usize) -> Self {
        Self {
            m,
            generator: Generator::Sobol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    /// 1-based.
    pub stage_index: usize,
    pub proposal: String,
    pub m: usize,
    pub generator: Generator,
    pub skip: u64,
    pub acceptance_rate: f64,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub wall_clock_secs: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOptions {
    pub family: RefitFamily,
    /// Skip of the first stage; stage `k` skips `base_skip + M_1 + … + M_{k-1}`
    /// so no two stages share support points.
    pub base_skip: u64,
    pub workers: usize,
}

impl Default for StageOptions {
    fn default() -> Self {
        Self {
            family: RefitFamily::MvCauchy,
            base_skip: 1,
            workers: default_workers(),
        }
    }
}

/// Runs `n_stages` stages following `schedule` with default options and the
/// given refit family.
pub fn run_stages(
    target: &dyn Target,
    initial: &Proposal,
    schedule: &[StageSpec],
    n_stages: usize,
    family: RefitFamily,
) -> Result<(DiscretePosterior, Vec<StageReport>)> {
    let opts = StageOptions {
        family,
        ..StageOptions::default()
    };
    run_stages_with(target, initial, schedule, n_stages, &opts)
}

pub fn run_stages_with(
    target: &dyn Target,
    initial: &Proposal,
    schedule: &[StageSpec],
    n_stages: usize,
    opts: &StageOptions,
) -> Result<(DiscretePosterior, Vec<StageReport>)> {
    if n_stages == 0 || schedule.len() < n_stages {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= n_stages <= schedule length, got n_stages={n_stages} with {} scheduled stages",
            schedule.len()
        )));
    }
    let mut proposal = initial.clone();
    let mut skip = opts.base_skip;
    let mut reports = Vec::with_capacity(n_stages);
    let mut last = None;
    for (k, spec) in schedule.iter().take(n_stages).enumerate() {
        if k > 0 {
            let prev: &DiscretePosterior = last.as_ref().expect("previous stage ran");
            proposal = refit(&proposal, prev, opts.family)?;
        }
        let start = Instant::now();
        let pts = generate(spec.generator, spec.m, target.dim(), skip)?;
        let outcome = discretize_with(target, &proposal, &pts, opts.workers);
        let elapsed = start.elapsed().as_secs_f64();
        let dp = match outcome {
            Ok(dp) => dp,
            Err(Error::NoMass) => {
                let report = StageReport {
                    stage_index: k + 1,
                    proposal: proposal.to_string(),
                    m: spec.m,
                    generator: spec.generator,
                    skip,
                    acceptance_rate: 0.0,
                    mean: Vec::new(),
                    covariance: Vec::new(),
                    wall_clock_secs: elapsed,
                    warning: Some("no support point received positive mass".into()),
                };
                return Err(Error::StageFailed {
                    report: Box::new(report),
                    source: Box::new(Error::NoMass),
                });
            }
            Err(e) => return Err(e),
        };
        let r = dp.acceptance_rate();
        reports.push(StageReport {
            stage_index: k + 1,
            proposal: proposal.to_string(),
            m: spec.m,
            generator: spec.generator,
            skip,
            acceptance_rate: r,
            mean: dp.mean(),
            covariance: dp.covariance(),
            wall_clock_secs: elapsed,
            warning: (r < LOW_ACCEPTANCE).then(|| {
                format!("acceptance rate {r:.4} is below {LOW_ACCEPTANCE}; consider revising the proposal")
            }),
        });
        skip += spec.m as u64;
        last = Some(dp);
    }
    Ok((last.expect("at least one stage"), reports))
}

/// Proposal for the next stage from the previous stage's moments.
pub fn refit(current: &Proposal, dp: &DiscretePosterior, family: RefitFamily) -> Result<Proposal> {
    let mean = dp.mean();
    let cov = dp.covariance();
    let mut blocks = Vec::with_capacity(current.blocks().len());
    for (off, b) in current.slices() {
        if !b.is_real_line() {
            blocks.push(b.clone());
            continue;
        }
        let k = b.dim();
        let loc = mean[off..off + k].to_vec();
        let mut c = DMatrix::from_fn(k, k, |i, j| cov[off + i][off + j]);
        let trace = c.trace();
        let ridge = if trace > 0.0 {
            RIDGE * trace / k as f64
        } else {
            RIDGE
        };
        for i in 0..k {
            c[(i, i)] += ridge;
        }
        blocks.push(match family {
            RefitFamily::MvCauchy => ProposalBlock::mvcauchy(loc, c)?,
            RefitFamily::MvNormal => ProposalBlock::mvnormal(loc, c)?,
        });
    }
    Proposal::new(blocks)
}
