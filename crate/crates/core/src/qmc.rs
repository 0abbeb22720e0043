//! Support point sets on the unit hypercube.
//!
//! Sobol' points use the Joe-Kuo `new-joe-kuo-6.21201` direction numbers for
//! the first 100 dimensions (embedded from `data/sobol_joe_kuo_100.txt`) with
//! 32-bit direction integers and Gray-code ordering. Halton points use the
//! first 50 primes as bases.

use std::fmt;
use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SOBOL_MAX_DIM: usize = 100;
pub const HALTON_MAX_DIM: usize = 50;
const SOBOL_BITS: usize = 32;

const JOE_KUO_TABLE: &str = include_str!("../data/sobol_joe_kuo_100.txt");

const PRIMES: [u64; HALTON_MAX_DIM] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Sobol,
    Halton,
    Midpoint1d,
    User,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Generator::Sobol => "sobol",
            Generator::Halton => "halton",
            Generator::Midpoint1d => "midpoint1d",
            Generator::User => "user",
        };
        f.write_str(name)
    }
}

/// M points in `[0,1)^d`, stored row-major, with the generator that made them.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPointSet {
    data: Vec<f64>,
    dim: usize,
    generator: Generator,
    skip: u64,
}

impl SupportPointSet {
    /// Wraps user-supplied points. Every coordinate must lie in `[0,1)`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if points.is_empty() || dim == 0 {
            return Err(Error::InvalidParameter(
                "support point set must contain at least one point of positive dimension".into(),
            ));
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                    context: "user support point",
                });
            }
            if let Some(c) = p.iter().find(|c| !(**c >= 0.0 && **c < 1.0)) {
                return Err(Error::Domain(format!(
                    "support point {i} has coordinate {c} outside [0,1)"
                )));
            }
            data.extend_from_slice(p);
        }
        Ok(Self {
            data,
            dim,
            generator: Generator::User,
            skip: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn skip(&self) -> u64 {
        self.skip
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// One row per point, `dim` columns, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|j| format!("u_{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.iter() {
            writeln!(w, "{}", crate::export::join_f64(p))?;
        }
        Ok(())
    }
}

struct SobolDirections {
    /// `v[dim][bit]`
    v: Vec<[u32; SOBOL_BITS]>,
}

fn sobol_directions() -> &'static SobolDirections {
    static TABLE: OnceLock<SobolDirections> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(SOBOL_MAX_DIM);
        let mut first = [0u32; SOBOL_BITS];
        for (k, slot) in first.iter_mut().enumerate() {
            *slot = 1u32 << (SOBOL_BITS - 1 - k);
        }
        v.push(first);
        for line in JOE_KUO_TABLE.lines().skip(1) {
            let fields: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().expect("malformed direction-number table"))
                .collect();
            if fields.is_empty() {
                continue;
            }
            let s = fields[1] as usize;
            let a = fields[2];
            let m = &fields[3..3 + s];
            let mut dirs = [0u32; SOBOL_BITS];
            for k in 0..s.min(SOBOL_BITS) {
                dirs[k] = m[k] << (SOBOL_BITS - 1 - k);
            }
            for k in s..SOBOL_BITS {
                let mut x = dirs[k - s] ^ (dirs[k - s] >> s);
                for r in 1..s {
                    if (a >> (s - 1 - r)) & 1 == 1 {
                        x ^= dirs[k - r];
                    }
                }
                dirs[k] = x;
            }
            v.push(dirs);
        }
        assert_eq!(v.len(), SOBOL_MAX_DIM, "direction-number table is incomplete");
        SobolDirections { v }
    })
}

/// Points `skip .. skip+m-1` of the Gray-code Sobol' sequence in `d` dimensions.
pub fn sobol_points(m: usize, d: usize, skip: u64) -> Result<SupportPointSet> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "sobol_points needs M >= 1 and d >= 1, got M={m} d={d}"
        )));
    }
    if d > SOBOL_MAX_DIM {
        return Err(Error::Capacity(format!(
            "Sobol' dimension {d} exceeds the direction-number table ({SOBOL_MAX_DIM})"
        )));
    }
    let end = skip
        .checked_add(m as u64)
        .filter(|e| *e <= 1u64 << SOBOL_BITS)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "Sobol' index range {skip}+{m} exceeds 2^{SOBOL_BITS} points"
            ))
        })?;
    let dirs = sobol_directions();
    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;

    // State at index `skip` is the XOR of directions over the bits of gray(skip).
    let gray = skip ^ (skip >> 1);
    let mut state = vec![0u32; d];
    for (j, s) in state.iter_mut().enumerate() {
        for k in 0..SOBOL_BITS {
            if (gray >> k) & 1 == 1 {
                *s ^= dirs.v[j][k];
            }
        }
    }

    let mut data = Vec::with_capacity(m * d);
    let mut index = skip;
    loop {
        data.extend(state.iter().map(|&s| s as f64 * scale));
        index += 1;
        if index == end {
            break;
        }
        // Moving from index-1 to index flips the direction at the lowest zero
        // bit of index-1.
        let c = (index - 1).trailing_ones() as usize;
        for (j, s) in state.iter_mut().enumerate() {
            *s ^= dirs.v[j][c];
        }
    }
    Ok(SupportPointSet {
        data,
        dim: d,
        generator: Generator::Sobol,
        skip,
    })
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    acc
}

/// Halton points with indices `1..=m` (the origin index 0 is never used).
pub fn halton_points(m: usize, d: usize) -> Result<SupportPointSet> {
    halton_points_skip(m, d, 0)
}

/// Halton points with indices `skip+1 ..= skip+m`.
pub fn halton_points_skip(m: usize, d: usize, skip: u64) -> Result<SupportPointSet> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "halton_points needs M >= 1 and d >= 1, got M={m} d={d}"
        )));
    }
    if d > HALTON_MAX_DIM {
        return Err(Error::Capacity(format!(
            "Halton dimension {d} exceeds the prime table ({HALTON_MAX_DIM})"
        )));
    }
    let mut data = Vec::with_capacity(m * d);
    for i in 1..=m as u64 {
        data.extend(PRIMES[..d].iter().map(|&b| radical_inverse(skip + i, b)));
    }
    Ok(SupportPointSet {
        data,
        dim: d,
        generator: Generator::Halton,
        skip,
    })
}

/// `{(2i-1)/(2M)}` for `i = 1..=M`.
pub fn midpoint_grid_1d(m: usize) -> Result<SupportPointSet> {
    if m == 0 {
        return Err(Error::InvalidParameter("midpoint grid needs M >= 1".into()));
    }
    let denom = 2.0 * m as f64;
    let data = (1..=m).map(|i| (2 * i - 1) as f64 / denom).collect();
    Ok(SupportPointSet {
        data,
        dim: 1,
        generator: Generator::Midpoint1d,
        skip: 0,
    })
}

/// Dispatches on `generator`; `skip` is ignored by the midpoint grid.
pub fn generate(generator: Generator, m: usize, d: usize, skip: u64) -> Result<SupportPointSet> {
    match generator {
        Generator::Sobol => sobol_points(m, d, skip),
        Generator::Halton => halton_points_skip(m, d, skip),
        Generator::Midpoint1d => {
            if d != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: d,
                    context: "midpoint grid is one-dimensional",
                });
            }
            midpoint_grid_1d(m)
        }
        Generator::User => Err(Error::InvalidParameter(
            "user point sets cannot be generated; load them with SupportPointSet::from_points"
                .into(),
        )),
    }
}
