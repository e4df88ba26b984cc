//! Complex singularity exponents: exact paths and integrability bisection.

use serde::{Deserialize, Serialize};

use super::integrability::{IntegrabilityProfile, ProfileConfig, Region, SpatialAnnuli, Verdict};
use super::{check_dim, cse_monomial, EstimateMeta, InvariantEstimate, Method, NewtonPolyhedron};
use crate::error::Result;
use crate::psh::{PshExpr, PshFn};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CseParams {
    /// Defaults to 0.01.
    pub c_lo: Option<f64>,
    /// Defaults to `dim + 1`.
    pub c_hi: Option<f64>,
    pub tol: f64,
    /// Radius of the integration ball around the point.
    pub radius: f64,
    pub profile: ProfileConfig,
}

impl Default for CseParams {
    fn default() -> Self {
        Self { c_lo: None, c_hi: None, tol: 0.02, radius: 0.25, profile: ProfileConfig::default() }
    }
}

/// Convergence verdicts for `∫ e^{-2cφ}` as a function of `c`.
trait Classifier {
    fn verdict(&self, c: f64) -> Verdict;
    fn evals(&self) -> u64;
}

impl Classifier for IntegrabilityProfile {
    fn verdict(&self, c: f64) -> Verdict {
        self.classify(c).verdict
    }
    fn evals(&self) -> u64 {
        self.evals
    }
}

impl Classifier for SpatialAnnuli {
    fn verdict(&self, c: f64) -> Verdict {
        self.classify(c).verdict
    }
    fn evals(&self) -> u64 {
        self.evals
    }
}

/// Bisection on `c` for a function centered at the origin. In one
/// variable the annuli are spatial and integrated deterministically;
/// otherwise they are sublevel annuli of `−2φ` from subset simulation.
pub fn cse_bisection_centered(f: &dyn PshFn, params: &CseParams) -> InvariantEstimate {
    let dim = f.dim();
    let h = |z: &[Complex64]| -2.0 * f.eval(z);
    if dim == 1 {
        let a = SpatialAnnuli::build(&h, params.radius, 40, params.profile.q);
        return bisect(&a, dim, params);
    }
    let prof = IntegrabilityProfile::build(&h, &Region::ball(dim, params.radius), &params.profile);
    bisect(&prof, dim, params)
}

fn bisect(prof: &dyn Classifier, dim: usize, params: &CseParams) -> InvariantEstimate {
    let c_lo = params.c_lo.unwrap_or(0.01);
    let c_hi = params.c_hi.unwrap_or(dim as f64 + 1.0);
    let mut meta = EstimateMeta { samples: Some(prof.evals()), ..Default::default() };
    let mut borderline = Vec::new();
    let (mut lo, mut hi) = (c_lo, c_hi);
    let mut unresolved = Vec::new();

    let start = prof.verdict(c_lo);
    if start != Verdict::Convergent {
        meta.interval = Some([0.0, c_lo]);
        if start == Verdict::Inconclusive {
            meta.inconclusive = true;
            meta.unresolved = vec![c_lo];
        }
        meta.note = Some("exponent at or below c_lo".into());
        return InvariantEstimate::estimated(c_lo / 2.0, Method::IntegrabilityBisection, c_lo / 2.0, meta);
    }
    match prof.verdict(c_hi) {
        Verdict::Convergent => {
            meta.interval = Some([c_hi, f64::INFINITY]);
            meta.note = Some("exponent at or above c_hi".into());
            return InvariantEstimate::estimated(c_hi, Method::IntegrabilityBisection, f64::INFINITY, meta);
        }
        Verdict::Inconclusive => unresolved.push(c_hi),
        _ => {}
    }
    while (hi - lo) / 2.0 > params.tol / 2.0 {
        let mid = 0.5 * (lo + hi);
        match prof.verdict(mid) {
            Verdict::Convergent => lo = mid,
            Verdict::Divergent => hi = mid,
            // the threshold sits where the annulus ratio crosses 1
            Verdict::Borderline => {
                borderline.push(mid);
                lo = mid;
            }
            Verdict::Inconclusive => {
                unresolved.push(mid);
                break;
            }
        }
    }
    meta.interval = Some([lo, hi]);
    if !unresolved.is_empty() {
        meta.inconclusive = true;
        meta.unresolved = unresolved;
    }
    if !borderline.is_empty() {
        meta.note = Some(format!("near-threshold ratios at c = {borderline:?}"));
    }
    InvariantEstimate::estimated(0.5 * (lo + hi), Method::IntegrabilityBisection, 0.5 * (hi - lo), meta)
}

pub fn cse_bisection(phi: &PshExpr, x: &[Complex64], params: &CseParams) -> Result<InvariantEstimate> {
    check_dim(phi.dim(), x.len())?;
    Ok(cse_bisection_centered(&phi.recenter(x), params))
}

/// Exact value where a closed form applies, bisection otherwise.
///
/// Exact paths: `φ(x) > −∞` gives `+∞`; generators all vanishing identically
/// give 0; generators that are monomials times units after recentering use
/// Howald's formula; a
/// one-variable analytic singularity gives `1/(α·ord)`.
pub fn cse(phi: &PshExpr, x: &[Complex64], params: &CseParams) -> Result<InvariantEstimate> {
    check_dim(phi.dim(), x.len())?;
    if phi.eval(x) > f64::NEG_INFINITY {
        let mut e = InvariantEstimate::exact(f64::INFINITY, Method::ExactMultiplicity);
        e.meta.note = Some("finite at point".into());
        return Ok(e);
    }
    if let Some(a) = phi.as_analytic() {
        let nonzero: Vec<_> = a.gens.iter().filter(|g| !g.recenter(x).is_zero()).collect();
        if nonzero.is_empty() {
            let mut e = InvariantEstimate::exact(0.0, Method::ExactMultiplicity);
            e.meta.note = Some("identically -inf".into());
            return Ok(e);
        }
        if let Some(exps) = a.local_monomial_exponents_at(x) {
            return Ok(cse_monomial(&NewtonPolyhedron::new(exps)?, a.alpha));
        }
        if a.dim() == 1 {
            let ord = nonzero.iter().map(|g| g.vanishing_order(x)).collect::<Result<Vec<_>>>()?;
            let m = *ord.iter().min().expect("nonempty");
            let mut e = InvariantEstimate::exact(1.0 / (a.alpha * m as f64), Method::ExactMultiplicity);
            e.meta.note = Some(format!("one variable, order {m}"));
            return Ok(e);
        }
    }
    cse_bisection(phi, x, params)
}
