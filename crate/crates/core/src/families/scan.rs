//! Level-set scans and containment between clouds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{CloudPoint, GridSpec, Kind, LevelSetCloud};
use crate::error::{Error, Result};
use crate::invariants::{cse, lelong, CseParams, InvariantEstimate, RadialParams};
use crate::psh::PshFamily;
use crate::Complex64;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanParams {
    pub radial: RadialParams,
    pub cse: CseParams,
}

impl ScanParams {
    /// Estimator seeds are derived from the point coordinates, so a point
    /// gets the same estimate whatever grid it belongs to.
    fn at(&self, p: &[Complex64]) -> Self {
        let path: Vec<u64> = p.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect();
        let mut out = self.clone();
        out.radial.seed = crate::rng::derive(self.radial.seed, &path);
        out.cse.profile.seed = crate::rng::derive(self.cse.profile.seed, &path);
        out
    }
}

/// The invariant that decides membership of `p` in the level set of `kind`.
pub fn point_invariant(family: &PshFamily, kind: Kind, p: &[Complex64], params: &ScanParams) -> Result<InvariantEstimate> {
    let params = params.at(p);
    let (z, w) = p.split_at(family.n_z);
    match kind {
        Kind::E => lelong(&family.expr, p, &params.radial),
        Kind::F => cse(&family.expr, p, &params.cse),
        Kind::X => lelong(&family.restrict_fiber(w)?, z, &params.radial),
        Kind::Y => cse(&family.restrict_fiber(w)?, z, &params.cse),
    }
}

enum Class {
    Out,
    In,
    Borderline,
    Unresolved,
}

fn classify(kind: Kind, c: f64, e: &InvariantEstimate) -> Class {
    if e.is_inconclusive() || e.value.is_nan() {
        return Class::Unresolved;
    }
    let u = e.uncertainty;
    if u > 0.0 && (e.value - c).abs() <= u {
        return Class::Borderline;
    }
    let inside = if kind.uses_lelong() { e.value >= c } else { e.value <= c };
    if inside {
        Class::In
    } else {
        Class::Out
    }
}

/// Scans `grid` for the level set of `kind` at `c`. Points within their
/// uncertainty of the threshold satisfy the inequality within uncertainty,
/// so they are kept as members and also listed as borderline.
pub fn scan_level_set(
    family: &PshFamily,
    kind: Kind,
    c: f64,
    grid: &GridSpec,
    params: &ScanParams,
) -> Result<LevelSetCloud> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput("c must be positive".into()));
    }
    let pts = grid.points(&family.domain)?;
    let results = pts
        .par_iter()
        .map(|p| {
            let e = point_invariant(family, kind, p, params)?;
            let cp = CloudPoint { point: p.clone(), value: e.value, uncertainty: e.uncertainty };
            Ok((classify(kind, c, &e), cp))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cloud = LevelSetCloud {
        kind,
        c,
        grid: grid.clone(),
        scanned: pts.len(),
        points: Vec::new(),
        borderline: Vec::new(),
        unresolved: Vec::new(),
    };
    for (class, cp) in results {
        match class {
            Class::Out => {}
            Class::In => cloud.points.push(cp),
            Class::Borderline => {
                cloud.points.push(cp.clone());
                cloud.borderline.push(cp);
            }
            Class::Unresolved => cloud.unresolved.push(cp),
        }
    }
    Ok(cloud)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub a: Kind,
    pub b: Kind,
    pub c: f64,
    /// Members of `a` compared against `b`.
    pub checked: usize,
    /// Members of `a` skipped because either cloud flags them.
    pub excluded: usize,
    pub violations: Vec<Vec<Complex64>>,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Points of `a` missing from `b`, skipping points flagged borderline or
/// unresolved in either cloud. Both clouds must share grid and level.
pub fn containment_check(a: &LevelSetCloud, b: &LevelSetCloud) -> Result<ContainmentReport> {
    if a.c != b.c {
        return Err(Error::GridMismatch(format!("clouds have different levels {} and {}", a.c, b.c)));
    }
    subset_check(a, b)
}

/// [`containment_check`] without the level check, for comparing level sets
/// at different `c`.
pub fn subset_check(a: &LevelSetCloud, b: &LevelSetCloud) -> Result<ContainmentReport> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch("clouds were scanned on different grids".into()));
    }
    let mut report = ContainmentReport { a: a.kind, b: b.kind, c: a.c, checked: 0, excluded: 0, violations: Vec::new() };
    for p in &a.points {
        if a.is_excluded(&p.point) || b.is_excluded(&p.point) {
            report.excluded += 1;
            continue;
        }
        report.checked += 1;
        if !b.contains(&p.point) {
            report.violations.push(p.point.clone());
        }
    }
    Ok(report)
}
