//! Catalog families with discontinuous or non-analytic level sets.

pub mod cantor;
pub mod li;
pub mod wang;

use std::sync::Arc;

pub use cantor::{cantor_build, cantor_cdf, cantor_potential, CantorPotential, CantorSpec};
pub use li::{
    crossover_radius, li_fiber, li_fiber_lelong, li_fiber_lelong_with, nonanalyticity_demo, LiExample, LiParams,
    NonanalyticityReport,
};
pub use wang::{wang_catalog, wang_fiber_lelong, wang_phi, WangFamily, WangTerm};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::invariants::InvariantEstimate;
use crate::psh::{FieldDef, ScalarField};

/// One plot-ready sample: the fiber Lelong number over a real parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub w: f64,
    pub estimate: InvariantEstimate,
    /// `ν ≥ c`, borderline points included.
    pub member: bool,
}

impl CatalogRow {
    pub fn new(w: f64, estimate: InvariantEstimate, c: f64) -> Self {
        let e = &estimate;
        let member = e.value >= c || (e.value - c).abs() <= e.uncertainty;
        Self { w, member, estimate }
    }
}

/// Rebuilds a field from its serialized description.
pub fn field_from_def(def: &FieldDef) -> Result<Arc<dyn ScalarField>> {
    match def {
        FieldDef::CantorPotential { depth, log_lengths } => {
            Ok(Arc::new(CantorPotential::from_def(*depth, log_lengths.clone())?))
        }
    }
}

#[cfg(test)]
mod tests;
