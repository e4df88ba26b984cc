//! Numerical laboratory for singularity invariants of plurisubharmonic functions.

pub mod bergman;
pub mod cloud;
pub mod counterexamples;
pub mod error;
pub mod families;
pub mod ext_f64;
pub mod invariants;
pub mod poly;
pub mod psh;
pub mod quadrature;
pub mod rational;
pub mod rng;
pub mod scenario;
pub mod stability;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use poly::ComplexPoly;
pub use psh::{AnalyticSingularityPsh, Polydisc, PshExpr, PshFamily, PshFn};
