//! Consistency checks built on the estimators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cse::{cse_bisection, CseParams};
use super::lelong::{lelong_radial, RadialParams};
use super::{lct_monomial, InvariantEstimate, NewtonPolyhedron};
use crate::error::{Error, Result};
use crate::psh::{AnalyticSingularityPsh, PshExpr};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    pub nu: InvariantEstimate,
    pub c: InvariantEstimate,
    /// `|ν·c − 1|`.
    pub defect: f64,
    /// First-order bound on the error of `ν·c` from the two uncertainties.
    pub uncertainty: f64,
}

/// In one variable `c_x(φ) = 1/ν_x(φ)`; both sides are measured numerically.
/// The bisection tolerance is taken relative to `1/ν` so that the product
/// is resolved to `cse.tol` whatever the pole order.
pub fn dim1_reciprocity_check(
    phi: &PshExpr,
    x: Complex64,
    radial: &RadialParams,
    cse: &CseParams,
) -> Result<ReciprocityReport> {
    if phi.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: phi.dim() });
    }
    let nu = lelong_radial(phi, &[x], radial)?;
    let params = CseParams { tol: cse.tol / nu.value.max(1.0), ..cse.clone() };
    let c = cse_bisection(phi, &[x], &params)?;
    let defect = (nu.value * c.value - 1.0).abs();
    let uncertainty = nu.uncertainty * c.value + c.uncertainty * nu.value;
    Ok(ReciprocityReport { nu, c, defect, uncertainty })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionSample {
    pub w: Vec<Complex64>,
    /// Fiber lct at the origin; `None` when the fiber ideal is zero.
    pub lct: Option<InvariantEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub samples: Vec<RestrictionSample>,
    /// Most frequent fiber value (exact rational string, or `"inf"`).
    pub generic: Option<String>,
    #[serde(with = "crate::ext_f64")]
    pub generic_value: f64,
    /// Indices of samples differing from the generic value or flagged.
    pub exceptional: Vec<usize>,
    /// Indices whose fiber ideal vanished identically.
    pub flagged: Vec<usize>,
}

fn value_key(e: &InvariantEstimate) -> String {
    e.meta.exact.clone().unwrap_or_else(|| {
        if e.value.is_infinite() {
            "inf".into()
        } else {
            format!("{}", e.value)
        }
    })
}

/// Fiber lct at `z = 0` for each sampled `w`, for generators that become
/// monomials in `z` once `w` is frozen.
pub fn generic_restriction_check(
    phi: &AnalyticSingularityPsh,
    n_z: usize,
    w_samples: &[Vec<Complex64>],
) -> Result<RestrictionReport> {
    let mut samples = Vec::with_capacity(w_samples.len());
    let mut flagged = Vec::new();
    for (i, w) in w_samples.iter().enumerate() {
        if n_z + w.len() != phi.dim() {
            return Err(Error::DimensionMismatch { expected: phi.dim() - n_z, got: w.len() });
        }
        let mut exps = Vec::new();
        for g in &phi.gens {
            let f = g.freeze_tail(w);
            match f.terms().len() {
                0 => {}
                1 => exps.push(f.terms()[0].0.clone()),
                _ => {
                    return Err(Error::Precondition(format!(
                        "fiber generator at sample {i} is not a monomial"
                    )))
                }
            }
        }
        let lct = if exps.is_empty() {
            flagged.push(i);
            None
        } else {
            let mut e = lct_monomial(&NewtonPolyhedron::new(exps)?);
            e.value /= phi.alpha;
            if phi.alpha != 1.0 {
                e.meta.exact = e.meta.exact.map(|s| format!("({s})/{}", phi.alpha));
            }
            Some(e)
        };
        samples.push(RestrictionSample { w: w.clone(), lct });
    }
    let mut counts: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for s in &samples {
        if let Some(e) = &s.lct {
            let entry = counts.entry(value_key(e)).or_insert((0, e.value));
            entry.0 += 1;
        }
    }
    let generic = counts.iter().max_by_key(|(_, (n, _))| *n).map(|(k, (_, v))| (k.clone(), *v));
    let exceptional = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| match (&s.lct, &generic) {
            (Some(e), Some((g, _))) => &value_key(e) != g,
            _ => true,
        })
        .map(|(i, _)| i)
        .collect();
    Ok(RestrictionReport {
        samples,
        generic_value: generic.as_ref().map_or(f64::NAN, |g| g.1),
        generic: generic.map(|g| g.0),
        exceptional,
        flagged,
    })
}
