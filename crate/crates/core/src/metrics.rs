//! Kolmogorov distances and error statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::posterior::DiscretePosterior;
use crate::sampling::RepresentationPointSet;

/// Largest number of boxes the multivariate estimator evaluates.
pub const MAX_KD_BOXES: usize = 10_000;

/// Reference CDF `F(x) = μ((-∞, x])`.
pub struct CdfOracle<'a> {
    dim: usize,
    f: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
}

impl<'a> CdfOracle<'a> {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Sync + 'a) -> Self {
        Self {
            dim,
            f: Box::new(f),
        }
    }

    pub fn univariate(f: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        Self::new(1, move |x: &[f64]| f(x[0]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// A finite weighted point set: a discrete posterior, an empirical sample or
/// a representation point set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || weights.is_empty() || points.len() != dim * weights.len() {
            return Err(Error::InvalidParameter(format!(
                "weighted point set: {} coordinates for {} weights of dimension {dim}",
                points.len(),
                weights.len()
            )));
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    pub fn from_posterior(dp: &DiscretePosterior) -> Self {
        Self {
            dim: dp.dim(),
            points: dp.support_flat().to_vec(),
            weights: dp.masses().to_vec(),
        }
    }

    /// Equal weights `1/N` on each sample.
    pub fn empirical(samples: &[Vec<f64>]) -> Result<Self> {
        let dim = samples.first().map(Vec::len).unwrap_or(0);
        if samples.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidParameter("ragged sample".into()));
        }
        let w = 1.0 / samples.len() as f64;
        Self::new(dim, samples.concat(), vec![w; samples.len()])
    }

    pub fn from_representation(rp: &RepresentationPointSet) -> Self {
        Self::empirical(rp.points()).expect("representation points are nonempty")
    }

    pub fn empirical_1d(samples: &[f64]) -> Result<Self> {
        let w = 1.0 / samples.len() as f64;
        Self::new(1, samples.to_vec(), vec![w; samples.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.len() {
            for (a, v) in m.iter_mut().zip(self.point(i)) {
                *a += self.weights[i] * v;
            }
        }
        m
    }

    /// 1D atoms sorted by location with ties merged.
    fn sorted_atoms_1d(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self.points.iter().copied().zip(self.weights.iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        merged
    }
}

/// A Kolmogorov distance value. `exact` is false for the grid-capped
/// multivariate estimator, whose value is a lower bound on the true supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KdEstimate {
    pub value: f64,
    pub exact: bool,
    pub boxes: usize,
}

/// `sup_x |μ̂((-∞,x]) - F(x)|` between a weighted point set and a continuous
/// reference CDF.
///
/// In one dimension the supremum is attained next to an atom, so both
/// one-sided limits of the step function are compared at every atom and the
/// result is exact. In higher dimensions the boxes are anchored at a grid
/// built from each coordinate's atom values, thinned evenly to at most
/// [`MAX_KD_BOXES`] corners.
pub fn kolmogorov(measure: &DiscreteMeasure, oracle: &CdfOracle<'_>) -> Result<KdEstimate> {
    if measure.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: measure.dim(),
            context: "Kolmogorov distance",
        });
    }
    if measure.dim() == 1 {
        let atoms = measure.sorted_atoms_1d();
        let mut cum = 0.0;
        let mut sup: f64 = 0.0;
        for (x, w) in &atoms {
            let f = oracle.eval(&[*x]);
            sup = sup.max((cum - f).abs());
            cum += w;
            sup = sup.max((cum - f).abs());
        }
        return Ok(KdEstimate {
            value: sup,
            exact: true,
            boxes: atoms.len(),
        });
    }
    let d = measure.dim();
    let per_axis = ((MAX_KD_BOXES as f64).powf(1.0 / d as f64).floor() as usize).max(1);
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut vals: Vec<f64> = (0..measure.len()).map(|i| measure.point(i)[j]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            thin_evenly(&vals, per_axis)
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut sup: f64 = 0.0;
    for _ in 0..total {
        for j in 0..d {
            x[j] = axes[j][idx[j]];
        }
        let mut emp = 0.0;
        for i in 0..measure.len() {
            if measure.point(i).iter().zip(&x).all(|(a, b)| a <= b) {
                emp += measure.weights[i];
            }
        }
        sup = sup.max((emp - oracle.eval(&x)).abs());
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(KdEstimate {
        value: sup,
        exact: false,
        boxes: total,
    })
}

fn thin_evenly(vals: &[f64], k: usize) -> Vec<f64> {
    if vals.len() <= k {
        return vals.to_vec();
    }
    // Always keep the largest value; spread the rest by rank.
    (1..=k).map(|t| vals[t * vals.len() / k - 1]).collect()
}

/// Exact Kolmogorov distance between two discrete distributions on the line.
pub fn kolmogorov_between_1d(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: a.dim().max(b.dim()),
            context: "two-sample Kolmogorov distance",
        });
    }
    let xa = a.sorted_atoms_1d();
    let xb = b.sorted_atoms_1d();
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0, 0.0);
    let mut sup: f64 = 0.0;
    // Both step functions are right-continuous, so the supremum is attained
    // at some atom after all jumps there have been applied.
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        if i < xa.len() && xa[i].0 == x {
            fa += xa[i].1;
            i += 1;
        }
        if j < xb.len() && xb[j].0 == x {
            fb += xb[j].1;
            j += 1;
        }
        sup = sup.max((fa - fb).abs());
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorStats {
    /// Squared Euclidean error of each run.
    pub se: Vec<f64>,
    pub mse: f64,
    /// Sample standard deviation of `se`; `0` when there is a single run.
    pub std: f64,
    pub std_defined: bool,
}

pub fn error_stats(estimates: &[Vec<f64>], truth: &[f64]) -> Result<ErrorStats> {
    if estimates.is_empty() {
        return Err(Error::InvalidParameter("error_stats needs at least one run".into()));
    }
    let se = estimates
        .iter()
        .map(|e| {
            if e.len() != truth.len() {
                return Err(Error::DimensionMismatch {
                    expected: truth.len(),
                    got: e.len(),
                    context: "estimate vs truth",
                });
            }
            Ok(e.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = se.len() as f64;
    let mse = se.iter().sum::<f64>() / n;
    let (std, std_defined) = if se.len() > 1 {
        let var = se.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (n - 1.0);
        (var.sqrt(), true)
    } else {
        (0.0, false)
    };
    Ok(ErrorStats {
        se,
        mse,
        std,
        std_defined,
    })
}

/// Median of a nonempty slice (mean of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
