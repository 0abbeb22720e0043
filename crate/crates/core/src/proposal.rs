//! Proposal densities ψ and their transports `h: (0,1)^d → support`.
//!
//! A [`Proposal`] is a product of blocks laid out over contiguous coordinate
//! slices. Normalizing constants are dropped where they would only shift every
//! log-weight by the same amount:
//!
//! | block       | transport                              | log ψ                         |
//! |-------------|----------------------------------------|-------------------------------|
//! | uniform box | `L + (U - L) u`                        | `-Σ log(U - L)`               |
//! | mvnormal    | `μ + L (Φ⁻¹(u₁), …, Φ⁻¹(u_d))`         | `-½ Σ zᵢ²`                    |
//! | mvcauchy    | `μ + L (tan(π(u₁-½)), …)`              | `-Σ log(1 + zᵢ²)`             |
//! | gamma       | `θ · P⁻¹(k, u)`                        | Gamma(k, θ) log-pdf           |
//!
//! `L` is the lower Cholesky factor of the covariance / scale matrix and
//! `z = L⁻¹(y - μ)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, solve_lower};
use crate::special::{self, gamma_p, ln_gamma, norm_cdf};
use crate::target::Support;

pub use crate::special::{gamma_quantile, inv_norm_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockFamily {
    UniformBox,
    MvNormal,
    MvCauchy,
    Gamma,
}

#[derive(Debug, Clone)]
enum Kind {
    UniformBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
        log_volume: f64,
    },
    MvNormal {
        mean: Vec<f64>,
        cov: DMatrix<f64>,
        chol: DMatrix<f64>,
    },
    MvCauchy {
        location: Vec<f64>,
        scale: DMatrix<f64>,
        chol: DMatrix<f64>,
    },
    Gamma {
        shape: f64,
        scale: f64,
        log_norm: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ProposalBlock {
    kind: Kind,
}

impl ProposalBlock {
    pub fn uniform_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidParameter(format!(
                "uniform box needs matching nonempty bounds, got {} lower and {} upper",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(j) = (0..lower.len())
            .find(|&j| !(lower[j] < upper[j]) || !lower[j].is_finite() || !upper[j].is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "uniform box coordinate {j}: need finite lower < upper, got [{}, {}]",
                lower[j], upper[j]
            )));
        }
        let log_volume = lower.iter().zip(&upper).map(|(l, u)| (u - l).ln()).sum();
        Ok(Self {
            kind: Kind::UniformBox {
                lower,
                upper,
                log_volume,
            },
        })
    }

    /// Uniform on `[0,1]^d`.
    pub fn unit_box(d: usize) -> Result<Self> {
        Self::uniform_box(vec![0.0; d], vec![1.0; d])
    }

    pub fn mvnormal(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_location_scale(&mean, &cov, "mvnormal")?;
        let chol = cholesky_lower(&cov, "mvnormal covariance")?;
        Ok(Self {
            kind: Kind::MvNormal { mean, cov, chol },
        })
    }

    pub fn mvcauchy(location: Vec<f64>, scale: DMatrix<f64>) -> Result<Self> {
        check_location_scale(&location, &scale, "mvcauchy")?;
        let chol = cholesky_lower(&scale, "mvcauchy scale")?;
        Ok(Self {
            kind: Kind::MvCauchy {
                location,
                scale,
                chol,
            },
        })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma block needs shape > 0 and scale > 0, got shape={shape} scale={scale}"
            )));
        }
        Ok(Self {
            kind: Kind::Gamma {
                shape,
                scale,
                log_norm: -ln_gamma(shape) - shape * scale.ln(),
            },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::UniformBox { lower, .. } => lower.len(),
            Kind::MvNormal { mean, .. } => mean.len(),
            Kind::MvCauchy { location, .. } => location.len(),
            Kind::Gamma { .. } => 1,
        }
    }

    pub fn family(&self) -> BlockFamily {
        match self.kind {
            Kind::UniformBox { .. } => BlockFamily::UniformBox,
            Kind::MvNormal { .. } => BlockFamily::MvNormal,
            Kind::MvCauchy { .. } => BlockFamily::MvCauchy,
            Kind::Gamma { .. } => BlockFamily::Gamma,
        }
    }

    /// Whether the block lives on the whole real line (normal or Cauchy).
    pub fn is_real_line(&self) -> bool {
        matches!(self.family(), BlockFamily::MvNormal | BlockFamily::MvCauchy)
    }

    pub fn support(&self) -> Vec<Support> {
        match &self.kind {
            Kind::UniformBox { lower, upper, .. } => lower
                .iter()
                .zip(upper)
                .map(|(&lower, &upper)| Support::Interval { lower, upper })
                .collect(),
            Kind::MvNormal { mean, .. } => vec![Support::Real; mean.len()],
            Kind::MvCauchy { location, .. } => vec![Support::Real; location.len()],
            Kind::Gamma { .. } => vec![Support::Positive],
        }
    }

    /// Applies the transport to `u` (length `dim`) and returns `log ψ(y)`.
    pub fn transport(&self, u: &[f64], y: &mut [f64]) -> Result<f64> {
        match &self.kind {
            Kind::UniformBox {
                lower,
                upper,
                log_volume,
            } => {
                for j in 0..u.len() {
                    if !(0.0..=1.0).contains(&u[j]) {
                        return Err(boundary_error(u[j]));
                    }
                    y[j] = lower[j] + (upper[j] - lower[j]) * u[j];
                }
                Ok(-log_volume)
            }
            Kind::MvNormal { mean, chol, .. } => {
                let mut z = DVector::zeros(u.len());
                for j in 0..u.len() {
                    check_open(u[j])?;
                    z[j] = special::inv_norm_cdf(u[j])?;
                }
                affine(mean, chol, &z, y);
                Ok(-0.5 * z.norm_squared())
            }
            Kind::MvCauchy { location, chol, .. } => {
                let mut z = DVector::zeros(u.len());
                for j in 0..u.len() {
                    check_open(u[j])?;
                    z[j] = (PI * (u[j] - 0.5)).tan();
                }
                affine(location, chol, &z, y);
                Ok(-z.iter().map(|zi| (zi * zi).ln_1p()).sum::<f64>())
            }
            Kind::Gamma {
                shape,
                scale,
                log_norm,
            } => {
                check_open(u[0])?;
                let x = special::gamma_quantile(u[0], *shape, *scale)?;
                y[0] = x;
                Ok(log_norm + (shape - 1.0) * x.ln() - x / scale)
            }
        }
    }

    /// `log ψ(y)` at an arbitrary point, `-∞` outside the block's support.
    pub fn log_density(&self, y: &[f64]) -> f64 {
        match &self.kind {
            Kind::UniformBox {
                lower,
                upper,
                log_volume,
            } => {
                let inside = (0..y.len()).all(|j| y[j] >= lower[j] && y[j] <= upper[j]);
                if inside {
                    -log_volume
                } else {
                    f64::NEG_INFINITY
                }
            }
            Kind::MvNormal { mean, chol, .. } => {
                let z = whiten(mean, chol, y);
                -0.5 * z.norm_squared()
            }
            Kind::MvCauchy { location, chol, .. } => {
                let z = whiten(location, chol, y);
                -z.iter().map(|zi| (zi * zi).ln_1p()).sum::<f64>()
            }
            Kind::Gamma {
                shape,
                scale,
                log_norm,
            } => {
                let x = y[0];
                if x > 0.0 && x.is_finite() {
                    log_norm + (shape - 1.0) * x.ln() - x / scale
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Inverse transport: the unit-cube coordinates that map to `y`.
    pub fn inverse_transport(&self, y: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::UniformBox { lower, upper, .. } => (0..y.len())
                .map(|j| (y[j] - lower[j]) / (upper[j] - lower[j]))
                .collect(),
            Kind::MvNormal { mean, chol, .. } => {
                whiten(mean, chol, y).iter().map(|&z| norm_cdf(z)).collect()
            }
            Kind::MvCauchy { location, chol, .. } => whiten(location, chol, y)
                .iter()
                .map(|&z| z.atan() / PI + 0.5)
                .collect(),
            Kind::Gamma { shape, scale, .. } => vec![gamma_p(*shape, y[0] / scale)],
        }
    }
}

impl fmt::Display for ProposalBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::UniformBox { lower, upper, .. } => {
                write!(f, "uniform_box(lower={lower:?}, upper={upper:?})")
            }
            Kind::MvNormal { mean, cov, .. } => {
                write!(f, "mvnormal(mean={mean:?}, cov={:?})", crate::linalg::to_rows(cov))
            }
            Kind::MvCauchy {
                location, scale, ..
            } => write!(
                f,
                "mvcauchy(location={location:?}, scale={:?})",
                crate::linalg::to_rows(scale)
            ),
            Kind::Gamma { shape, scale, .. } => write!(f, "gamma(shape={shape}, scale={scale})"),
        }
    }
}

fn check_location_scale(loc: &[f64], scale: &DMatrix<f64>, what: &str) -> Result<()> {
    if loc.is_empty() {
        return Err(Error::InvalidParameter(format!("{what}: empty location")));
    }
    if scale.nrows() != loc.len() || scale.ncols() != loc.len() {
        return Err(Error::DimensionMismatch {
            expected: loc.len(),
            got: scale.nrows(),
            context: "proposal scale matrix",
        });
    }
    if loc.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what}: non-finite location")));
    }
    Ok(())
}

fn boundary_error(u: f64) -> Error {
    Error::Domain(format!(
        "unit-cube coordinate {u} is on or outside the boundary of (0,1)"
    ))
}

fn check_open(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(boundary_error(u))
    }
}

fn affine(loc: &[f64], chol: &DMatrix<f64>, z: &DVector<f64>, y: &mut [f64]) {
    let n = loc.len();
    for i in 0..n {
        let mut acc = loc[i];
        for k in 0..=i {
            acc += chol[(i, k)] * z[k];
        }
        y[i] = acc;
    }
}

fn whiten(loc: &[f64], chol: &DMatrix<f64>, y: &[f64]) -> DVector<f64> {
    let centered = DVector::from_iterator(loc.len(), y.iter().zip(loc).map(|(a, b)| a - b));
    solve_lower(chol, &centered)
}

/// Product of [`ProposalBlock`]s over contiguous coordinate slices.
#[derive(Debug, Clone)]
pub struct Proposal {
    blocks: Vec<ProposalBlock>,
    dim: usize,
}

impl Proposal {
    pub fn new(blocks: Vec<ProposalBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter(
                "proposal needs at least one block".into(),
            ));
        }
        let dim = blocks.iter().map(ProposalBlock::dim).sum();
        Ok(Self { blocks, dim })
    }

    pub fn single(block: ProposalBlock) -> Self {
        let dim = block.dim();
        Self {
            blocks: vec![block],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[ProposalBlock] {
        &self.blocks
    }

    /// `(offset, block)` pairs in declaration order.
    pub fn slices(&self) -> impl Iterator<Item = (usize, &ProposalBlock)> {
        self.blocks.iter().scan(0usize, |off, b| {
            let start = *off;
            *off += b.dim();
            Some((start, b))
        })
    }

    pub fn support(&self) -> Vec<Support> {
        self.blocks.iter().flat_map(ProposalBlock::support).collect()
    }

    /// `y = h(u)` written into `y`; returns `log ψ(y)`.
    pub fn map_point_into(&self, u: &[f64], y: &mut [f64]) -> Result<f64> {
        if u.len() != self.dim || y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
                context: "proposal input point",
            });
        }
        let mut logpsi = 0.0;
        for (off, b) in self.slices() {
            let r = off..off + b.dim();
            logpsi += b.transport(&u[r.clone()], &mut y[r])?;
        }
        Ok(logpsi)
    }

    pub fn map_point(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut y = vec![0.0; self.dim];
        let lp = self.map_point_into(u, &mut y)?;
        Ok((y, lp))
    }

    pub fn log_density(&self, y: &[f64]) -> f64 {
        self.slices()
            .map(|(off, b)| b.log_density(&y[off..off + b.dim()]))
            .sum()
    }

    pub fn inverse_map(&self, y: &[f64]) -> Vec<f64> {
        self.slices()
            .flat_map(|(off, b)| b.inverse_transport(&y[off..off + b.dim()]))
            .collect()
    }

    /// Image of the cube's center, `h(½, …, ½)`.
    pub fn center(&self) -> Vec<f64> {
        self.map_point(&vec![0.5; self.dim])
            .map(|(y, _)| y)
            .expect("center of the unit cube is interior")
    }
}

impl fmt::Display for Proposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmc::halton_points;

    fn cov2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[4.0, 0.5, 0.5, 1.0])
    }

    #[test]
    fn cauchy_center_maps_to_location() {
        let p = Proposal::single(
            ProposalBlock::mvcauchy(vec![2.0, -1.0], DMatrix::identity(2, 2)).unwrap(),
        );
        let (y, lp) = p.map_point(&[0.5, 0.5]).unwrap();
        assert_eq!(y, vec![2.0, -1.0]);
        assert_eq!(lp, 0.0);
    }

    #[test]
    fn normal_quantile_transport() {
        let p = Proposal::single(
            ProposalBlock::mvnormal(vec![0.0], DMatrix::identity(1, 1)).unwrap(),
        );
        let (y, _) = p.map_point(&[0.975]).unwrap();
        assert!((y[0] - 1.959_964).abs() < 1e-6);
    }

    #[test]
    fn unit_box_is_identity() {
        let p = Proposal::single(ProposalBlock::unit_box(3).unwrap());
        for u in halton_points(20, 3).unwrap().iter() {
            let (y, lp) = p.map_point(u).unwrap();
            assert_eq!(y, u);
            assert_eq!(lp, 0.0);
        }
    }

    #[test]
    fn uniform_box_log_density_is_negative_log_volume() {
        let b = ProposalBlock::uniform_box(vec![-1.0, 0.0], vec![1.0, 4.0]).unwrap();
        let mut y = [0.0; 2];
        let lp = b.transport(&[0.3, 0.6], &mut y).unwrap();
        assert!((lp + 8f64.ln()).abs() < 1e-15);
        assert_eq!(b.log_density(&[5.0, 1.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn boundary_inputs_are_rejected() {
        let p = Proposal::new(vec![
            ProposalBlock::mvcauchy(vec![0.0], DMatrix::identity(1, 1)).unwrap(),
            ProposalBlock::gamma(2.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert!(matches!(p.map_point(&[0.0, 0.5]), Err(Error::Domain(_))));
        assert!(matches!(p.map_point(&[0.5, 1.0]), Err(Error::Domain(_))));
        assert!(p.map_point(&[0.5]).is_err());
    }

    #[test]
    fn invalid_blocks_fail_at_construction() {
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            ProposalBlock::mvcauchy(vec![0.0, 0.0], not_pd.clone()),
            Err(Error::Factorization(_))
        ));
        assert!(ProposalBlock::mvnormal(vec![0.0, 0.0], not_pd).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(ProposalBlock::mvnormal(vec![0.0, 0.0], asym).is_err());
        assert!(ProposalBlock::gamma(0.0, 1.0).is_err());
        assert!(ProposalBlock::gamma(1.0, -1.0).is_err());
        assert!(ProposalBlock::uniform_box(vec![1.0], vec![1.0]).is_err());
        assert!(ProposalBlock::uniform_box(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn map_point_log_density_agree() {
        let p = Proposal::new(vec![
            ProposalBlock::mvcauchy(vec![1.0, 2.0], cov2()).unwrap(),
            ProposalBlock::mvnormal(vec![-3.0, 0.5], cov2()).unwrap(),
            ProposalBlock::gamma(3.5, 0.7).unwrap(),
            ProposalBlock::uniform_box(vec![-2.0], vec![5.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(p.dim(), 6);
        for u in halton_points(100, 6).unwrap().iter() {
            let (y, lp) = p.map_point(u).unwrap();
            let direct = p.log_density(&y);
            assert!((lp - direct).abs() < 1e-9 * (1.0 + lp.abs()), "{lp} vs {direct}");
        }
    }

    #[test]
    fn round_trip_recovers_unit_coordinates() {
        let blocks = vec![
            ProposalBlock::mvcauchy(vec![1.0, 2.0], cov2()).unwrap(),
            ProposalBlock::mvnormal(vec![-3.0, 0.5], cov2()).unwrap(),
            ProposalBlock::gamma(3.5, 0.7).unwrap(),
            ProposalBlock::gamma(0.4, 2.0).unwrap(),
            ProposalBlock::uniform_box(vec![-2.0], vec![5.0]).unwrap(),
        ];
        let p = Proposal::new(blocks).unwrap();
        for u in halton_points(100, p.dim()).unwrap().iter() {
            let (y, _) = p.map_point(u).unwrap();
            let back = p.inverse_map(&y);
            for (a, b) in u.iter().zip(&back) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn scalar_transports_are_increasing() {
        let blocks = [
            ProposalBlock::mvcauchy(vec![0.3], DMatrix::from_element(1, 1, 2.0)).unwrap(),
            ProposalBlock::mvnormal(vec![0.3], DMatrix::from_element(1, 1, 2.0)).unwrap(),
            ProposalBlock::gamma(2.5, 1.5).unwrap(),
            ProposalBlock::uniform_box(vec![-1.0], vec![3.0]).unwrap(),
        ];
        for b in &blocks {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..1000 {
                let mut y = [0.0];
                b.transport(&[i as f64 / 1000.0], &mut y).unwrap();
                assert!(y[0] > prev, "{b} at {i}");
                prev = y[0];
            }
        }
    }

    #[test]
    fn display_lists_blocks_in_order() {
        let p = Proposal::new(vec![
            ProposalBlock::unit_box(1).unwrap(),
            ProposalBlock::gamma(2.0, 1.0).unwrap(),
        ])
        .unwrap();
        let s = p.to_string();
        assert!(s.starts_with("uniform_box"));
        assert!(s.ends_with("gamma(shape=2, scale=1)"));
    }
}
