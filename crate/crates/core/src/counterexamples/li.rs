//! A continuous family whose level sets meet the parameter line in a Cantor set.
//!
//! Chart on the blow-up: `(ζ, w) ↦ ζ·(1, w)`, so `|z|² = |ζ|²(1+|w|²)` and
//! `φ(ζ, w) = max{2 log|z|², log|z|² + p(w)}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cantor::{CantorPotential, CantorSpec};
use super::CatalogRow;
use crate::cloud::{CloudPoint, GridSpec, Kind, LevelSetCloud};
use crate::error::{Error, Result};
use crate::families::{analyticity_probe, ProbeParams, ProbeReport};
use crate::invariants::{lelong_radial_centered, InvariantEstimate, Method, RadialParams};
use crate::psh::{AnalyticSingularityPsh, Polydisc, PshExpr, PshFamily, ScalarField};
use crate::{Complex64, ComplexPoly};

#[derive(Clone, Debug)]
pub struct LiExample {
    pub potential: Arc<CantorPotential>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiParams {
    /// Top of the slope window.
    pub r_hi: f64,
    /// The window starts this factor above the radius where the depth
    /// truncation becomes visible on the set.
    pub margin: f64,
    pub n_radii: usize,
    pub n_angles: usize,
}

impl Default for LiParams {
    fn default() -> Self {
        Self { r_hi: 0.25, margin: std::f64::consts::E, n_radii: 24, n_angles: 8 }
    }
}

fn log_sq(gens: Vec<ComplexPoly>) -> PshExpr {
    PshExpr::Analytic(AnalyticSingularityPsh::new(2.0, gens).expect("nonzero generator"))
}

/// `max{2L, L + p}` from the pieces `L` and `p`.
fn branches(l: PshExpr, p: PshExpr) -> PshExpr {
    let four = PshExpr::sum(vec![(2.0, l.clone())]).expect("non-empty");
    let two = PshExpr::sum(vec![(1.0, l), (1.0, p)]).expect("non-empty");
    PshExpr::max(four, two).expect("same dimension")
}

impl LiExample {
    pub fn new(spec: CantorSpec) -> Self {
        Self { potential: Arc::new(CantorPotential::new(spec)) }
    }

    pub fn polar(depth: usize) -> Self {
        Self::new(CantorSpec::polar(depth))
    }

    pub fn spec(&self) -> &CantorSpec {
        &self.potential.spec
    }

    pub fn p(&self, w: Complex64) -> f64 {
        self.potential.value(w)
    }

    /// Domain covering the parameter segment `[0, 1]`.
    pub fn domain() -> Polydisc {
        Polydisc::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)], vec![1.0, 0.6]).expect("valid radii")
    }

    pub fn family(&self) -> PshFamily {
        let zeta = log_sq(vec![ComplexPoly::var(2, 0)]);
        let lift = log_sq(vec![ComplexPoly::one(2), ComplexPoly::var(2, 1)]);
        let l = PshExpr::sum(vec![(1.0, zeta), (1.0, lift)]).expect("non-empty");
        let field: Arc<dyn ScalarField> = self.potential.clone();
        PshFamily::new(branches(l, PshExpr::field(field, 1, 2)), Self::domain(), 1).expect("chart domain")
    }

    /// Radius below which the depth truncation shows on the set: the
    /// branch crossover for the closed-form potential bound.
    pub fn resolution_radius(&self) -> f64 {
        (0.5 * self.spec().potential_bound()).exp()
    }
}

/// The fiber `ζ ↦ φ(ζ, w)` for a given value `p` of the potential.
pub fn li_fiber(w: Complex64, p: f64) -> PshExpr {
    let lift = w.norm_sqr().ln_1p();
    let l = PshExpr::sum(vec![(1.0, log_sq(vec![ComplexPoly::var(1, 0)])), (1.0, PshExpr::constant(1, lift))])
        .expect("non-empty");
    branches(l, PshExpr::constant(1, p))
}

/// `|ζ|` where the two branches cross: `2 log|ζ|² + log(1+|w|²) = p`.
pub fn crossover_radius(w: Complex64, p: f64) -> f64 {
    (0.5 * (p - w.norm_sqr().ln_1p())).exp()
}

pub fn li_fiber_lelong(ex: &LiExample, w: Complex64, params: &LiParams) -> Result<InvariantEstimate> {
    li_fiber_lelong_with(ex, w, ex.p(w), params)
}

/// [`li_fiber_lelong`] with the potential value supplied.
///
/// The slope is read on `[margin · ρ_K, r_hi]`, `ρ_K` the resolution radius.
/// When the crossover falls inside the window the slope below it is
/// returned and the crossover is noted.
pub fn li_fiber_lelong_with(ex: &LiExample, w: Complex64, p: f64, params: &LiParams) -> Result<InvariantEstimate> {
    if p == f64::NEG_INFINITY {
        let mut e = InvariantEstimate::exact(4.0, Method::ExactMultiplicity);
        e.meta.note = Some("potential is -inf: single branch".into());
        return Ok(e);
    }
    let lo = params.margin * ex.resolution_radius();
    if !(lo < params.r_hi) {
        return Err(Error::Precondition(format!("depth {} too small: window starts at {lo}", ex.spec().depth)));
    }
    let rc = crossover_radius(w, p);
    let (hi, note) = if rc <= lo || rc >= params.r_hi {
        (params.r_hi, None)
    } else {
        let below = rc / std::f64::consts::E;
        (if below > lo * 1.5 { below } else { rc }, Some(format!("branch crossover at r = {rc:e}")))
    };
    let radial =
        RadialParams { r_min: lo, r_max: hi, n_radii: params.n_radii, n_angles: Some(params.n_angles), ..Default::default() };
    let mut e = lelong_radial_centered(&li_fiber(w, p), &radial)?;
    e.meta.note = note;
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonanalyticityReport {
    pub c: f64,
    pub samples: Vec<CatalogRow>,
    pub cloud: LevelSetCloud,
    pub members: Vec<f64>,
    /// Distance between the members and the level-`hausdorff_level`
    /// interval union.
    #[serde(with = "crate::ext_f64")]
    pub hausdorff: f64,
    pub hausdorff_level: usize,
    pub probe: ProbeReport,
}

/// Scans `{ζ = 0} × ws` for membership in `X_c` and probes the cloud for an
/// algebraic description.
pub fn nonanalyticity_demo(
    ex: &LiExample,
    c: f64,
    ws: &[f64],
    params: &LiParams,
    probe: &ProbeParams,
) -> Result<NonanalyticityReport> {
    if ws.is_empty() {
        return Err(Error::InvalidInput("empty parameter grid".into()));
    }
    let pts: Vec<Vec<Complex64>> = ws.iter().map(|&w| vec![Complex64::new(0.0, 0.0), Complex64::new(w, 0.0)]).collect();
    let mut cloud = LevelSetCloud {
        kind: Kind::X,
        c,
        grid: GridSpec::Points(pts.clone()),
        scanned: pts.len(),
        points: Vec::new(),
        borderline: Vec::new(),
        unresolved: Vec::new(),
    };
    let mut members = Vec::new();
    let mut samples = Vec::with_capacity(ws.len());
    for (p, &w) in pts.iter().zip(ws) {
        let row = CatalogRow::new(w, li_fiber_lelong(ex, p[1], params)?, c);
        let e = &row.estimate;
        let cp = CloudPoint { point: p.clone(), value: e.value, uncertainty: e.uncertainty };
        if row.member {
            if (e.value - c).abs() <= e.uncertainty {
                cloud.borderline.push(cp.clone());
            }
            cloud.points.push(cp);
            members.push(w);
        }
        samples.push(row);
    }
    let level = ex.spec().depth.min(12);
    let hausdorff = hausdorff(&members, &ex.spec().intervals(level));
    let report = analyticity_probe(&cloud, &LiExample::domain(), probe)?;
    Ok(NonanalyticityReport { c, samples, cloud, members, hausdorff, hausdorff_level: level, probe: report })
}

fn hausdorff(members: &[f64], intervals: &[(f64, f64)]) -> f64 {
    if members.is_empty() || intervals.is_empty() {
        return f64::INFINITY;
    }
    let to_set = |x: f64| {
        intervals
            .iter()
            .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    };
    let to_members = |x: f64| members.iter().map(|m| (m - x).abs()).fold(f64::INFINITY, f64::min);
    let a = members.iter().map(|&m| to_set(m)).fold(0.0, f64::max);
    let b = intervals.iter().flat_map(|&(a, b)| [a, b]).map(to_members).fold(0.0, f64::max);
    a.max(b)
}
