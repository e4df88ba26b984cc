//! Grids and level-set point clouds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psh::Polydisc;
use crate::Complex64;

/// Real axis `[lo, hi]` with `n` equispaced points; `n = 1` gives `lo`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v, n: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n <= 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordAxes {
    pub re: Axis,
    pub im: Axis,
}

impl CoordAxes {
    pub fn real(lo: f64, hi: f64, n: usize) -> Self {
        Self { re: Axis { lo, hi, n }, im: Axis::fixed(0.0) }
    }

    pub fn fixed(z: Complex64) -> Self {
        Self { re: Axis::fixed(z.re), im: Axis::fixed(z.im) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// Tensor grid, one pair of real axes per complex coordinate.
    Tensor(Vec<CoordAxes>),
    Points(Vec<Vec<Complex64>>),
}

pub const DEFAULT_AXIS_POINTS: usize = 41;

impl GridSpec {
    /// The default tensor grid over a polydisc: 41 points per real axis
    /// across each coordinate disc.
    pub fn covering(domain: &Polydisc, n: usize) -> Self {
        GridSpec::Tensor(
            domain
                .center
                .iter()
                .zip(&domain.radii)
                .map(|(c, r)| CoordAxes {
                    re: Axis { lo: c.re - r, hi: c.re + r, n },
                    im: Axis { lo: c.im - r, hi: c.im + r, n },
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            GridSpec::Tensor(a) => Some(a.len()),
            GridSpec::Points(p) => p.first().map(|v| v.len()),
        }
    }

    /// Grid points in row-major order (last coordinate fastest), keeping
    /// those inside the open polydisc.
    pub fn points(&self, domain: &Polydisc) -> Result<Vec<Vec<Complex64>>> {
        if let Some(d) = self.dim() {
            if d != domain.dim() {
                return Err(Error::DimensionMismatch { expected: domain.dim(), got: d });
            }
        }
        let all = match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Tensor(axes) => {
                let coords: Vec<Vec<Complex64>> = axes
                    .iter()
                    .map(|a| {
                        let im = a.im.values();
                        a.re.values()
                            .into_iter()
                            .flat_map(|x| im.iter().map(move |&y| Complex64::new(x, y)))
                            .collect()
                    })
                    .collect();
                let mut out: Vec<Vec<Complex64>> = vec![Vec::new()];
                for c in &coords {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            c.iter().map(move |z| {
                                let mut q = p.clone();
                                q.push(*z);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
        };
        Ok(all.into_iter().filter(|p| domain.contains(p)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    E,
    X,
    F,
    Y,
}

impl Kind {
    /// E and X are upper level sets of the Lelong number; F and Y are
    /// sublevel sets of the singularity exponent.
    pub fn uses_lelong(self) -> bool {
        matches!(self, Kind::E | Kind::X)
    }

    pub fn is_fiberwise(self) -> bool {
        matches!(self, Kind::X | Kind::Y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub point: Vec<Complex64>,
    #[serde(with = "crate::ext_f64")]
    pub value: f64,
    #[serde(with = "crate::ext_f64")]
    pub uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetCloud {
    pub kind: Kind,
    pub c: f64,
    pub grid: GridSpec,
    /// Number of grid points scanned.
    pub scanned: usize,
    /// Members: points satisfying the defining inequality.
    pub points: Vec<CloudPoint>,
    /// Points within their uncertainty of the threshold.
    #[serde(default)]
    pub borderline: Vec<CloudPoint>,
    /// Points where the estimator was inconclusive.
    #[serde(default)]
    pub unresolved: Vec<CloudPoint>,
}

impl LevelSetCloud {
    pub fn contains(&self, p: &[Complex64]) -> bool {
        self.points.iter().any(|q| q.point == p)
    }

    pub fn is_excluded(&self, p: &[Complex64]) -> bool {
        self.borderline.iter().chain(&self.unresolved).any(|q| q.point == p)
    }
}
