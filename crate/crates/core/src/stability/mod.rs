//! Integral stability of rational-power families over a parameter disc.

pub mod integral;
pub mod nondeg;
pub mod siu;

pub use integral::{
    fiber_integral, hypothesis_check, integral_family, ConditionResult, DiscIntegral, FamilyReport, FamilySample,
    FiberPowers, QuadParams, RationalPowerIntegrand, StabilityHypotheses,
};
pub use nondeg::{find_eta, nondegenerate_check, NondegeneracyReport};
pub use siu::{lemma_constant, lemma_nb_check, siu_limit_check, LemmaReport, SiuReport};
