//! Lelong numbers and complex singularity exponents.

pub mod checks;
pub mod cse;
pub mod integrability;
pub mod lelong;
pub mod newton;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::psh::AnalyticSingularityPsh;
use crate::Complex64;

pub use checks::{dim1_reciprocity_check, generic_restriction_check, ReciprocityReport, RestrictionReport};
pub use cse::{cse, cse_bisection, cse_bisection_centered, CseParams};
pub use integrability::{IntegrabilityProfile, ProfileConfig, Region, Verdict};
pub use lelong::{lelong, lelong_radial, lelong_radial_centered, RadialParams};
pub use newton::NewtonPolyhedron;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactMultiplicity,
    RadialSlope,
    HowaldLp,
    IntegrabilityBisection,
}

impl Method {
    pub fn is_exact(self) -> bool {
        matches!(self, Method::ExactMultiplicity | Method::HowaldLp)
    }
}

/// Sampling metadata attached to an estimate. Empty fields are omitted
/// from reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_radii: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_angles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unresolved: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inconclusive: bool,
    /// Exact rational value, when one is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantEstimate {
    #[serde(with = "crate::ext_f64")]
    pub value: f64,
    pub method: Method,
    #[serde(with = "crate::ext_f64")]
    pub uncertainty: f64,
    #[serde(default)]
    pub meta: EstimateMeta,
}

impl InvariantEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        debug_assert!(method.is_exact());
        Self { value, method, uncertainty: 0.0, meta: EstimateMeta::default() }
    }

    /// Numerical estimate; the uncertainty is kept strictly positive so that
    /// `uncertainty == 0` singles out the exact methods.
    pub fn estimated(value: f64, method: Method, uncertainty: f64, meta: EstimateMeta) -> Self {
        debug_assert!(!method.is_exact());
        let floor = f64::EPSILON * value.abs().max(1.0);
        let uncertainty = if uncertainty.is_nan() { f64::INFINITY } else { uncertainty.max(floor) };
        Self { value, method, uncertainty, meta }
    }

    pub fn with_exact(mut self, r: &BigRational) -> Self {
        self.meta.exact = Some(newton::rational_to_string(r));
        self
    }

    pub fn is_inconclusive(&self) -> bool {
        self.meta.inconclusive
    }
}

/// `ν_x = α · min_i ord_x f_i`; `+∞` when every generator vanishes identically.
pub fn lelong_exact(phi: &AnalyticSingularityPsh, x: &[Complex64]) -> Result<InvariantEstimate> {
    check_dim(phi.dim(), x.len())?;
    let mut best: Option<u32> = None;
    for g in &phi.gens {
        if g.is_zero() {
            continue;
        }
        let o = g.vanishing_order(x)?;
        best = Some(best.map_or(o, |b| b.min(o)));
    }
    let value = match best {
        Some(o) => phi.alpha * o as f64,
        None => f64::INFINITY,
    };
    let mut e = InvariantEstimate::exact(value, Method::ExactMultiplicity);
    if let Some(o) = best {
        e.meta.note = Some(format!("min order {o}"));
    }
    Ok(e)
}

/// Exact lct of a monomial ideal by Howald's formula.
pub fn lct_monomial(np: &NewtonPolyhedron) -> InvariantEstimate {
    match np.lct() {
        Some(r) => InvariantEstimate::exact(newton::rational_to_f64(&r), Method::HowaldLp).with_exact(&r),
        None => {
            let mut e = InvariantEstimate::exact(f64::INFINITY, Method::HowaldLp);
            e.meta.note = Some("unit ideal".into());
            e
        }
    }
}

/// Exact cse of `(α/2) log Σ|z^{a_i}|²` about the point where the generators
/// are monomial: `lct / α`.
pub fn cse_monomial(np: &NewtonPolyhedron, alpha: f64) -> InvariantEstimate {
    let mut e = lct_monomial(np);
    e.value /= alpha;
    if let Some(r) = np.lct() {
        if let Some(a) = rational_from_f64(alpha) {
            e.meta.exact = Some(newton::rational_to_string(&(r / a)));
        } else {
            e.meta.exact = None;
        }
    }
    e
}

/// Small-denominator rational matching `x` exactly, if any.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    for d in 1..=1000i64 {
        let n = (x * d as f64).round();
        if (n / d as f64) == x {
            return Some(BigRational::new(BigInt::from(n as i64), BigInt::from(d)));
        }
    }
    None
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(crate::Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
