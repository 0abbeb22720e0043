//! The discrete posterior and everything read off it.
//!
//! For support points `a_i`, transport `h` and proposal ψ, the log-weights are
//! `g_i = -ℓ(h(a_i)) - log ψ(h(a_i))` and the masses are
//! `p_i = exp(g_i - τ*) / Σ_j exp(g_j - τ*)` with `τ* = max_j g_j`. Shifting by
//! the largest finite log-weight makes the largest term exactly one, so the
//! normalizer never overflows and atoms only vanish when they are more than
//! ~745 nats below the best one.
//!
//! Density evaluations can be split across worker threads. The per-point
//! results are stored by index and every reduction runs sequentially in index
//! order afterwards, so the output does not depend on the worker count.

use std::io::Write;
use std::num::NonZeroUsize;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{fmt_f64, join_f64, CsvMeta};
use crate::proposal::Proposal;
use crate::qmc::{Generator, SupportPointSet};
use crate::target::Target;

/// Where a discrete posterior came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub target: String,
    pub generator: Generator,
    pub skip: u64,
    pub proposal: String,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePosterior {
    dim: usize,
    support: Vec<f64>,
    masses: Vec<f64>,
    log_weights: Vec<f64>,
    shift: f64,
    acceptance_rate: f64,
    source: Provenance,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}

/// Discretizes `target` on `pts` pushed through `proposal`, using all cores.
pub fn discretize(
    target: &dyn Target,
    proposal: &Proposal,
    pts: &SupportPointSet,
) -> Result<DiscretePosterior> {
    discretize_with(target, proposal, pts, default_workers())
}

/// Like [`discretize`] with an explicit worker count (`0` is treated as `1`).
pub fn discretize_with(
    target: &dyn Target,
    proposal: &Proposal,
    pts: &SupportPointSet,
    workers: usize,
) -> Result<DiscretePosterior> {
    let d = target.dim();
    if proposal.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: proposal.dim(),
            context: "proposal vs target",
        });
    }
    if pts.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: pts.dim(),
            context: "support points vs target",
        });
    }
    let m = pts.len();
    let mut support = vec![0.0; m * d];
    let mut log_weights = vec![0.0; m];

    let workers = workers.clamp(1, m.max(1));
    let chunk = m.div_ceil(workers);
    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let handles: Vec<_> = support
            .chunks_mut(chunk * d)
            .zip(log_weights.chunks_mut(chunk))
            .enumerate()
            .map(|(c, (ys, gs))| {
                scope.spawn(move || evaluate_chunk(target, proposal, pts, c * chunk, ys, gs))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("density evaluation thread panicked"))
            .collect()
    });
    // Chunks are in index order, so the first error is the lowest index.
    for r in results {
        r?;
    }

    let source = Provenance {
        target: target.name().to_string(),
        generator: pts.generator(),
        skip: pts.skip(),
        proposal: proposal.to_string(),
        m,
    };
    DiscretePosterior::from_log_weights(d, support, log_weights, source)
}

fn evaluate_chunk(
    target: &dyn Target,
    proposal: &Proposal,
    pts: &SupportPointSet,
    start: usize,
    ys: &mut [f64],
    gs: &mut [f64],
) -> Result<()> {
    let d = pts.dim();
    for (k, (y, g)) in ys.chunks_exact_mut(d).zip(gs.iter_mut()).enumerate() {
        let i = start + k;
        let logpsi = proposal.map_point_into(pts.point(i), y)?;
        let nll = target.neg_log_density(y);
        if nll.is_nan() || nll == f64::NEG_INFINITY || logpsi.is_nan() {
            return Err(Error::TargetEvaluation {
                index: i,
                point: y.to_vec(),
                value: nll,
            });
        }
        *g = -nll - logpsi;
    }
    Ok(())
}

impl DiscretePosterior {
    /// Builds the normalized distribution from raw log-weights.
    ///
    /// `-∞` log-weights are zero-mass atoms; any NaN or `+∞` is rejected.
    pub fn from_log_weights(
        dim: usize,
        support: Vec<f64>,
        log_weights: Vec<f64>,
        source: Provenance,
    ) -> Result<Self> {
        let m = log_weights.len();
        if dim == 0 || m == 0 || support.len() != m * dim {
            return Err(Error::InvalidParameter(format!(
                "discrete posterior needs M >= 1 atoms of dimension >= 1 (M={m}, d={dim}, {} coordinates)",
                support.len()
            )));
        }
        if let Some(i) = log_weights
            .iter()
            .position(|g| g.is_nan() || *g == f64::INFINITY)
        {
            return Err(Error::TargetEvaluation {
                index: i,
                point: support[i * dim..(i + 1) * dim].to_vec(),
                value: log_weights[i],
            });
        }
        let shift = log_weights
            .iter()
            .copied()
            .filter(|g| g.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Err(Error::NoMass);
        }
        let mut masses: Vec<f64> = log_weights.iter().map(|g| (g - shift).exp()).collect();
        let total: f64 = masses.iter().sum();
        for p in &mut masses {
            *p /= total;
        }
        let positive = masses.iter().filter(|&&p| p > 0.0).count();
        Ok(Self {
            dim,
            support,
            masses,
            log_weights,
            shift,
            acceptance_rate: positive as f64 / m as f64,
            source,
        })
    }

    /// Discrete distribution with given (not necessarily normalized) masses.
    pub fn from_masses(dim: usize, support: Vec<f64>, masses: &[f64]) -> Result<Self> {
        if masses.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "masses must be finite and nonnegative".into(),
            ));
        }
        let log_weights = masses.iter().map(|p| p.ln()).collect();
        let source = Provenance {
            target: "explicit".into(),
            generator: Generator::User,
            skip: 0,
            proposal: "none".into(),
            m: masses.len(),
        };
        Self::from_log_weights(dim, support, log_weights, source)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.support[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.support.chunks_exact(self.dim)
    }

    pub fn support_flat(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// The stabilization shift τ* (largest finite log-weight).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Fraction of atoms with strictly positive mass.
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    pub fn source(&self) -> &Provenance {
        &self.source
    }

    /// `Σ p_i Π_j y_ij^{k_j}`.
    pub fn moment(&self, k: &[u32]) -> Result<f64> {
        if k.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: k.len(),
                context: "moment exponents",
            });
        }
        let mut acc = 0.0;
        for (y, &p) in self.points().zip(&self.masses) {
            if p == 0.0 {
                continue;
            }
            let term: f64 = y.iter().zip(k).map(|(v, &e)| v.powi(e as i32)).product();
            acc += p * term;
        }
        Ok(acc)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for (y, &p) in self.points().zip(&self.masses) {
            if p == 0.0 {
                continue;
            }
            for (m, v) in mean.iter_mut().zip(y) {
                *m += p * v;
            }
        }
        mean
    }

    /// Covariance matrix (row-major `d×d`), two-pass around the mean.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let mean = self.mean();
        let d = self.dim;
        let mut cov = vec![vec![0.0; d]; d];
        let mut centered = vec![0.0; d];
        for (y, &p) in self.points().zip(&self.masses) {
            if p == 0.0 {
                continue;
            }
            for j in 0..d {
                centered[j] = y[j] - mean[j];
            }
            for a in 0..d {
                for b in 0..=a {
                    cov[a][b] += p * centered[a] * centered[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                cov[b][a] = cov[a][b];
            }
        }
        cov
    }

    pub fn std_devs(&self) -> Vec<f64> {
        let cov = self.covariance();
        (0..self.dim).map(|j| cov[j][j].sqrt()).collect()
    }

    /// Smallest coordinate value (in stable sorted order) whose cumulative mass
    /// reaches `alpha`. `coord` is zero-based.
    pub fn marginal_quantile(&self, coord: usize, alpha: f64) -> Result<f64> {
        if coord >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: coord + 1,
                context: "quantile coordinate (zero-based)",
            });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("quantile level must be in (0,1), got {alpha}")));
        }
        let order = self.sorted_by_coord(coord);
        let mut cum = 0.0;
        let mut last_positive = order[0];
        for &i in &order {
            cum += self.masses[i];
            if self.masses[i] > 0.0 {
                last_positive = i;
            }
            if cum >= alpha {
                return Ok(self.point(i)[coord]);
            }
        }
        // Rounding left the total just below alpha.
        Ok(self.point(last_positive)[coord])
    }

    fn sorted_by_coord(&self, coord: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.point(a)[coord].total_cmp(&self.point(b)[coord]));
        order
    }

    /// Mass of the box `(-∞, x]`.
    pub fn cdf_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
                context: "cdf evaluation point",
            });
        }
        let mut acc = 0.0;
        for (y, &p) in self.points().zip(&self.masses) {
            if y.iter().zip(x).all(|(a, b)| a <= b) {
                acc += p;
            }
        }
        Ok(acc)
    }

    /// Columns `y_1..y_d, mass, log_weight`, preceded by `# M`, `# R`,
    /// `# tau` metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &CsvMeta) -> std::io::Result<()> {
        meta.write(&mut w)?;
        writeln!(w, "# M={}", self.len())?;
        writeln!(w, "# R={}", fmt_f64(self.acceptance_rate))?;
        writeln!(w, "# tau={}", fmt_f64(self.shift))?;
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("y_{j}")).collect();
        header.push("mass".into());
        header.push("log_weight".into());
        writeln!(w, "{}", header.join(","))?;
        for (i, y) in self.points().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                join_f64(y),
                fmt_f64(self.masses[i]),
                fmt_f64(self.log_weights[i])
            )?;
        }
        Ok(())
    }
}
