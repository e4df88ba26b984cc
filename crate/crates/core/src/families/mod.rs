//! Level-set scans over families, the ball-supremum approximation and the
//! analyticity probe.

pub mod approx;
pub mod probe;
pub mod scan;

pub use approx::{approx_cse, level_identity_sample, radial_form, sandwich_check, ApproxFamily, BallSampling, SandwichReport};
pub use probe::{analyticity_probe, ProbeParams, ProbeReport};
pub use scan::{containment_check, point_invariant, scan_level_set, subset_check, ContainmentReport, ScanParams};

#[cfg(test)]
mod tests;
