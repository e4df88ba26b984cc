//! A family whose fiber Lelong numbers jump at the origin.

use serde::{Deserialize, Serialize};

use super::CatalogRow;
use crate::error::{Error, Result};
use crate::invariants::{lelong, InvariantEstimate, RadialParams};
use crate::psh::{LogHoelderTerm, Polydisc, PshExpr, PshFamily};
use crate::{Complex64, ComplexPoly};

/// `φ(z, w) = Σ_{k ≤ K} log(|w − w_k − z^{m_k}|^{α_k} + |z|^{β_k})` with
/// `w_k = 1/(k+1)`, `α_k = k^{−2}`, `m_k = ⌈c k²⌉`, `β_k = c + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WangFamily {
    pub c: f64,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WangTerm {
    pub w: f64,
    pub alpha: f64,
    pub m: u32,
    pub beta: f64,
}

impl WangTerm {
    /// `min(m α, β)`.
    pub fn target(&self) -> f64 {
        (self.m as f64 * self.alpha).min(self.beta)
    }
}

impl WangFamily {
    pub fn new(c: f64, k: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || k == 0 {
            return Err(Error::InvalidInput("need c > 0 and at least one term".into()));
        }
        Ok(Self { c, k })
    }

    pub fn term(&self, k: usize) -> WangTerm {
        let kf = k as f64;
        WangTerm { w: 1.0 / (kf + 1.0), alpha: 1.0 / (kf * kf), m: (self.c * kf * kf).ceil() as u32, beta: self.c + 1.0 }
    }

    pub fn terms(&self) -> Vec<WangTerm> {
        (1..=self.k).map(|k| self.term(k)).collect()
    }

    /// `m_k α_k − c`, the rounding overshoot of each term.
    pub fn overshoot(&self) -> Vec<f64> {
        self.terms().iter().map(|t| t.m as f64 * t.alpha - self.c).collect()
    }

    pub fn expr(&self) -> PshExpr {
        let terms = self
            .terms()
            .into_iter()
            .map(|t| {
                let a = ComplexPoly::from_real_terms(2, &[(&[0, 1], 1.0), (&[0, 0], -t.w), (&[t.m, 0], -1.0)])
                    .expect("two variables");
                LogHoelderTerm::new(a, t.alpha, t.beta, vec![0]).expect("positive exponents")
            })
            .collect();
        PshExpr::log_hoelder(terms).expect("non-empty")
    }

    pub fn family(&self) -> PshFamily {
        PshFamily::new(self.expr(), Polydisc::unit(2), 1).expect("unit bidisc")
    }
}

pub fn wang_phi(fam: &WangFamily, z: Complex64, w: Complex64) -> f64 {
    fam.expr().evaluate(&[z, w]).expect("two coordinates")
}

/// Lelong number at `z = 0` of the fiber over `w_k`, or over `w = 0` for `k = 0`.
pub fn wang_fiber_lelong(fam: &WangFamily, k: usize, params: &RadialParams) -> Result<InvariantEstimate> {
    if k > fam.k {
        return Err(Error::InvalidInput(format!("term {k} beyond the truncation {}", fam.k)));
    }
    let w = if k == 0 { 0.0 } else { fam.term(k).w };
    let fiber = fam.family().restrict_fiber(&[Complex64::new(w, 0.0)])?;
    lelong(&fiber, &[Complex64::new(0.0, 0.0)], params)
}

/// Fiber Lelong numbers at `z = 0` over `w = 0` and each `w_k`, with
/// membership in `X_c`.
pub fn wang_catalog(fam: &WangFamily, c: f64, params: &RadialParams) -> Result<Vec<CatalogRow>> {
    (0..=fam.k)
        .map(|k| {
            let w = if k == 0 { 0.0 } else { fam.term(k).w };
            Ok(CatalogRow::new(w, wang_fiber_lelong(fam, k, params)?, c))
        })
        .collect()
}
