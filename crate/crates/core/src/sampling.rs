//! Random draws and deterministic representation points from a discrete posterior.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::export::{join_f64, CsvMeta};
use crate::posterior::DiscretePosterior;
use crate::rng::seeded;
use crate::target::Support;

/// Cumulative masses `q_1..q_M` summed in index order.
fn cumulative(dp: &DiscretePosterior) -> Vec<f64> {
    let mut acc = 0.0;
    dp.masses()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn last_positive(dp: &DiscretePosterior) -> usize {
    dp.masses()
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("a discrete posterior always has a positive atom")
}

/// Atom indices of `n` i.i.d. categorical draws (inverse CDF, ChaCha8 seeded
/// with `seed`, one `f64` in `[0,1)` per draw).
pub fn draw_indices(dp: &DiscretePosterior, n: usize, seed: u64) -> Vec<usize> {
    let q = cumulative(dp);
    let fallback = last_positive(dp);
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let i = q.partition_point(|&c| c <= u);
            if i < q.len() {
                i
            } else {
                fallback
            }
        })
        .collect()
}

/// `n` i.i.d. draws from `dp`, materialized as support points.
pub fn draw(dp: &DiscretePosterior, n: usize, seed: u64) -> Vec<Vec<f64>> {
    draw_indices(dp, n, seed)
        .into_iter()
        .map(|i| dp.point(i).to_vec())
        .collect()
}

/// Writes draws as `y_1..y_d,atom`.
pub fn write_draws_csv<W: Write>(
    dp: &DiscretePosterior,
    indices: &[usize],
    mut w: W,
    meta: &CsvMeta,
) -> std::io::Result<()> {
    meta.write(&mut w)?;
    let mut header: Vec<String> = (1..=dp.dim()).map(|j| format!("y_{j}")).collect();
    header.push("atom".into());
    writeln!(w, "{}", header.join(","))?;
    for &i in indices {
        writeln!(w, "{},{}", join_f64(dp.point(i)), i)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationPointSet {
    dim: usize,
    /// Atom chosen for each `u_j`, in construction order.
    indices: Vec<usize>,
    points: Vec<Vec<f64>>,
    multiplicities: BTreeMap<usize, usize>,
    jitter_scale: f64,
}

impl RepresentationPointSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Atom index → number of representation points placed on it.
    pub fn multiplicities(&self) -> &BTreeMap<usize, usize> {
        &self.multiplicities
    }

    /// Half-width of the uniform jitter, `0` when off.
    pub fn jitter_scale(&self) -> f64 {
        self.jitter_scale
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.points.len() as f64;
        let mut m = vec![0.0; self.dim];
        for p in &self.points {
            for (a, v) in m.iter_mut().zip(p) {
                *a += v;
            }
        }
        m.iter().map(|v| v / n).collect()
    }

    /// Unjittered sets are written one row per distinct atom
    /// (`y_1..y_d,atom,multiplicity`); jittered ones one row per point with
    /// multiplicity 1.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &CsvMeta) -> std::io::Result<()> {
        meta.write(&mut w)?;
        writeln!(w, "# N={}", self.len())?;
        writeln!(w, "# jitter_scale={}", crate::export::fmt_f64(self.jitter_scale))?;
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("y_{j}")).collect();
        header.push("atom".into());
        header.push("multiplicity".into());
        writeln!(w, "{}", header.join(","))?;
        if self.jitter_scale > 0.0 {
            for (p, i) in self.points.iter().zip(&self.indices) {
                writeln!(w, "{},{},1", join_f64(p), i)?;
            }
        } else {
            let mut j = 0;
            for (&atom, &count) in &self.multiplicities {
                writeln!(w, "{},{},{}", join_f64(&self.points[j]), atom, count)?;
                j += count;
            }
        }
        Ok(())
    }
}

/// Deterministic `n`-point representation of `dp`.
///
/// With `u_j = (2j-1)/(2n)` and cumulative masses `q_0 = 0, q_i = p_1 + … + p_i`,
/// point `j` sits on the first atom `i ≥ i_{j-1}` with `u_j ∈ [q_{i-1}, q_i)`.
/// Zero-mass atoms have empty intervals and are never chosen. If rounding
/// leaves `u_j ≥ q_M`, the point goes to the last positive-mass atom.
pub fn representation_points(dp: &DiscretePosterior, n: usize) -> Result<RepresentationPointSet> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "number of representation points must be at least 1".into(),
        ));
    }
    let q = cumulative(dp);
    let fallback = last_positive(dp);
    let mut indices = Vec::with_capacity(n);
    let mut i = 0;
    for j in 1..=n {
        let u = (2 * j - 1) as f64 / (2 * n) as f64;
        while i < q.len() && u >= q[i] {
            i += 1;
        }
        indices.push(if i < q.len() { i } else { fallback });
    }
    let mut multiplicities = BTreeMap::new();
    for &i in &indices {
        *multiplicities.entry(i).or_insert(0) += 1;
    }
    let points = indices.iter().map(|&i| dp.point(i).to_vec()).collect();
    Ok(RepresentationPointSet {
        dim: dp.dim(),
        indices,
        points,
        multiplicities,
        jitter_scale: 0.0,
    })
}

/// [`representation_points`] plus independent uniform noise of half-width
/// `1/(2n)` per coordinate, clipped back into `support`.
pub fn representation_points_jittered(
    dp: &DiscretePosterior,
    n: usize,
    seed: u64,
    support: &[Support],
) -> Result<RepresentationPointSet> {
    if support.len() != dp.dim() {
        return Err(Error::DimensionMismatch {
            expected: dp.dim(),
            got: support.len(),
            context: "jitter support",
        });
    }
    let mut rp = representation_points(dp, n)?;
    let h = 0.5 / n as f64;
    let mut rng = seeded(seed);
    for p in &mut rp.points {
        for (v, s) in p.iter_mut().zip(support) {
            let e: f64 = rng.random_range(-h..h);
            *v = s.clip(*v + e);
        }
    }
    rp.jitter_scale = h;
    Ok(rp)
}
