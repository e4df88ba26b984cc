use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::Status;
use crate::bergman::{log_psh_check, pole_scan, BasisParams, BergmanKernelField, CircleSample, LogPshReport};
use crate::cloud::{GridSpec, Kind, LevelSetCloud, DEFAULT_AXIS_POINTS};
use crate::counterexamples::{nonanalyticity_demo, wang_catalog, CatalogRow, LiExample, LiParams, NonanalyticityReport, WangFamily};
use crate::error::{Error, Result};
use crate::families::{
    analyticity_probe, containment_check, sandwich_check, scan_level_set, ApproxFamily, ContainmentReport, ProbeParams,
    ProbeReport, SandwichReport, ScanParams,
};
use crate::invariants::integrability::Verdict;
use crate::invariants::{
    cse, cse_bisection, dim1_reciprocity_check, generic_restriction_check, lct_monomial, lelong, CseParams,
    InvariantEstimate, NewtonPolyhedron, RadialParams, ReciprocityReport, RestrictionReport,
};
use crate::psh::{AnalyticSingularityPsh, PshExpr, PshFamily};
use crate::rng::derive;
use crate::stability::{
    hypothesis_check, integral_family, lemma_nb_check, nondegenerate_check, siu_limit_check, FamilyReport, LemmaReport,
    NondegeneracyReport, QuadParams, RationalPowerIntegrand, SiuReport, StabilityHypotheses,
};
use crate::{Complex64, ComplexPoly};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Task {
    Lelong {
        #[serde(rename = "fn")]
        phi: PshExpr,
        point: Vec<Complex64>,
        #[serde(default)]
        radial: RadialParams,
    },
    /// Exact threshold of a monomial ideal.
    Lct { generators: Vec<Vec<u32>> },
    Cse {
        #[serde(rename = "fn")]
        phi: PshExpr,
        point: Vec<Complex64>,
        #[serde(default)]
        cse: CseParams,
        /// Skip the exact path.
        #[serde(default)]
        bisection: bool,
    },
    Reciprocity {
        #[serde(rename = "fn")]
        phi: PshExpr,
        point: Complex64,
        #[serde(default)]
        radial: RadialParams,
        #[serde(default)]
        cse: CseParams,
    },
    RestrictionScan {
        #[serde(rename = "fn")]
        phi: AnalyticSingularityPsh,
        n_z: usize,
        w_samples: Vec<Vec<Complex64>>,
    },
    Scan {
        family: PshFamily,
        kind: Kind,
        c: f64,
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default)]
        params: ScanParams,
    },
    Probe {
        family: PshFamily,
        kind: Kind,
        c: f64,
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default)]
        params: ScanParams,
        #[serde(default)]
        probe: ProbeParams,
    },
    /// `E_c ⊂ X_c` or `F_c ⊂ Y_c` on one grid.
    Containment {
        family: PshFamily,
        pair: ContainmentPair,
        c: f64,
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default)]
        params: ScanParams,
    },
    Sandwich {
        family: PshFamily,
        k: usize,
        z: Vec<Complex64>,
        w: Vec<Complex64>,
        #[serde(default)]
        radial: RadialParams,
        #[serde(default)]
        cse: CseParams,
    },
    /// Diagonal kernel values on a grid of `(z, w)` points.
    Bergman {
        family: PshFamily,
        c: f64,
        #[serde(default)]
        basis: BasisParams,
        grid: GridSpec,
    },
    PoleScan {
        family: PshFamily,
        c: f64,
        #[serde(default)]
        basis: BasisParams,
        grid: GridSpec,
    },
    LogPsh {
        family: PshFamily,
        c: f64,
        #[serde(default)]
        basis: BasisParams,
        samples: Vec<CircleSample>,
        #[serde(default = "default_psh_tol")]
        tol: f64,
    },
    Stability {
        #[serde(default)]
        integrand: Option<RationalPowerIntegrand>,
        #[serde(flatten)]
        check: StabilityCheck,
    },
    Catalog {
        #[serde(flatten)]
        example: CatalogExample,
    },
}

fn default_psh_tol() -> f64 {
    1e-4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContainmentPair {
    EX,
    FY,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum StabilityCheck {
    /// Resonances of the integrand exponents.
    Nondeg {
        #[serde(default = "six")]
        m: u32,
        #[serde(default = "six")]
        n: u32,
    },
    Hyp {
        d: f64,
        q1: f64,
        q2: f64,
        eps: f64,
        #[serde(default, with = "opt_rational", skip_serializing_if = "Option::is_none")]
        beta: Option<BigRational>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default)]
        quad: QuadParams,
    },
    Family {
        #[serde(default)]
        center: Complex64,
        radius: f64,
        ws: Vec<Complex64>,
        threshold: f64,
        #[serde(default)]
        quad: QuadParams,
    },
    Siu {
        r1: f64,
        r3: f64,
        eps_sequence: Vec<f64>,
        #[serde(default = "default_siu_tol")]
        tolerance: f64,
        #[serde(default)]
        quad: QuadParams,
    },
    Nb {
        psi: AnalyticSingularityPsh,
        #[serde(default)]
        shift: f64,
        f: ComplexPoly,
        eps: f64,
        alpha: f64,
        radius: f64,
        #[serde(default)]
        quad: QuadParams,
    },
}

fn six() -> u32 {
    6
}

fn default_siu_tol() -> f64 {
    0.02
}

mod opt_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => crate::rational::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "crate::rational")] BigRational);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "example", rename_all = "lowercase")]
pub enum CatalogExample {
    Wang {
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "five")]
        k: usize,
        #[serde(default)]
        radial: RadialParams,
    },
    Li {
        #[serde(default = "three")]
        c: f64,
        #[serde(default = "twenty")]
        depth: usize,
        /// Defaults to the level-3 endpoints and the level-4 gap midpoints.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ws: Option<Vec<f64>>,
        #[serde(default)]
        li: LiParams,
        #[serde(default)]
        probe: ProbeParams,
    },
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

fn five() -> usize {
    5
}

fn twenty() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    #[serde(with = "crate::ext_f64")]
    pub k: f64,
    #[serde(with = "crate::ext_f64")]
    pub log_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityOutput {
    Nondeg(NondegeneracyReport),
    Hyp(StabilityHypotheses),
    Family(FamilyReport),
    Siu(SiuReport),
    Nb(LemmaReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOutput {
    Estimate { point: Vec<Complex64>, estimate: InvariantEstimate },
    Reciprocity(ReciprocityReport),
    Restriction(RestrictionReport),
    Cloud(LevelSetCloud),
    Probe { cloud: LevelSetCloud, probe: ProbeReport },
    Containment(ContainmentReport),
    Sandwich(SandwichReport),
    Kernel(Vec<KernelRow>),
    LogPsh { tol: f64, report: LogPshReport },
    Stability(StabilityOutput),
    Wang(Vec<CatalogRow>),
    Li(NonanalyticityReport),
}

impl TaskOutput {
    pub fn status(&self) -> Status {
        use Status::*;
        let est = |e: &InvariantEstimate| if e.is_inconclusive() { Inconclusive } else { Ok };
        let cloud = |c: &LevelSetCloud| if c.unresolved.is_empty() { Ok } else { Inconclusive };
        let pass = |b: bool| if b { Ok } else { Failed };
        match self {
            TaskOutput::Estimate { estimate, .. } => est(estimate),
            TaskOutput::Reciprocity(r) => {
                if r.nu.is_inconclusive() || r.c.is_inconclusive() {
                    Inconclusive
                } else {
                    Ok
                }
            }
            TaskOutput::Restriction(r) => est_all(r.samples.iter().filter_map(|s| s.lct.as_ref())),
            TaskOutput::Cloud(c) | TaskOutput::Probe { cloud: c, .. } => cloud(c),
            TaskOutput::Containment(r) => pass(r.passed()),
            TaskOutput::Sandwich(r) => pass(r.passed()),
            TaskOutput::Kernel(_) => Ok,
            TaskOutput::LogPsh { tol, report } => pass(report.worst <= *tol),
            TaskOutput::Stability(s) => match s {
                StabilityOutput::Hyp(h) => {
                    let conds = [&h.finite_at_zero, &h.improved_at_zero, &h.weighted];
                    if conds.iter().any(|c| c.as_ref().is_some_and(|c| c.verdict == Verdict::Borderline)) {
                        Inconclusive
                    } else {
                        Ok
                    }
                }
                StabilityOutput::Siu(r) => pass(r.converging),
                StabilityOutput::Nb(r) => pass(r.holds),
                StabilityOutput::Nondeg(_) | StabilityOutput::Family(_) => Ok,
            },
            TaskOutput::Wang(rows) => est_all(rows.iter().map(|r| &r.estimate)),
            TaskOutput::Li(r) => est_all(r.samples.iter().map(|r| &r.estimate)),
        }
    }
}

fn est_all<'a>(mut it: impl Iterator<Item = &'a InvariantEstimate>) -> Status {
    if it.any(|e| e.is_inconclusive()) {
        Status::Inconclusive
    } else {
        Status::Ok
    }
}

fn seeded_radial(r: &RadialParams, seed: u64) -> RadialParams {
    RadialParams { seed: derive(seed, &[0]), ..r.clone() }
}

fn seeded_cse(c: &CseParams, seed: u64, tol: Option<f64>) -> CseParams {
    let mut c = c.clone();
    c.profile.seed = derive(seed, &[1]);
    if let Some(t) = tol {
        c.tol = t;
    }
    c
}

fn seeded_scan(p: &ScanParams, seed: u64, tol: Option<f64>) -> ScanParams {
    ScanParams { radial: seeded_radial(&p.radial, seed), cse: seeded_cse(&p.cse, seed, tol) }
}

fn grid_or_default(grid: &Option<GridSpec>, family: &PshFamily) -> GridSpec {
    grid.clone().unwrap_or_else(|| GridSpec::covering(&family.domain, DEFAULT_AXIS_POINTS))
}

fn need(r: &Option<RationalPowerIntegrand>) -> Result<&RationalPowerIntegrand> {
    r.as_ref().ok_or_else(|| Error::InvalidInput("this check needs an integrand".into()))
}

impl Task {
    pub fn op(&self) -> &'static str {
        match self {
            Task::Lelong { .. } => "lelong",
            Task::Lct { .. } => "lct",
            Task::Cse { .. } => "cse",
            Task::Reciprocity { .. } => "reciprocity",
            Task::RestrictionScan { .. } => "restriction-scan",
            Task::Scan { .. } => "scan",
            Task::Probe { .. } => "probe",
            Task::Containment { .. } => "containment",
            Task::Sandwich { .. } => "sandwich",
            Task::Bergman { .. } => "bergman",
            Task::PoleScan { .. } => "pole-scan",
            Task::LogPsh { .. } => "log-psh",
            Task::Stability { .. } => "stability",
            Task::Catalog { .. } => "catalog",
        }
    }

    /// Runs the task with every estimator seed derived from `seed`.
    pub fn run(&self, seed: u64, tol: Option<f64>) -> Result<TaskOutput> {
        Ok(match self {
            Task::Lelong { phi, point, radial } => {
                TaskOutput::Estimate { point: point.clone(), estimate: lelong(phi, point, &seeded_radial(radial, seed))? }
            }
            Task::Lct { generators } => {
                TaskOutput::Estimate { point: Vec::new(), estimate: lct_monomial(&NewtonPolyhedron::new(generators.clone())?) }
            }
            Task::Cse { phi, point, cse: p, bisection } => {
                let p = seeded_cse(p, seed, tol);
                let estimate = if *bisection { cse_bisection(phi, point, &p)? } else { cse(phi, point, &p)? };
                TaskOutput::Estimate { point: point.clone(), estimate }
            }
            Task::Reciprocity { phi, point, radial, cse } => TaskOutput::Reciprocity(dim1_reciprocity_check(
                phi,
                *point,
                &seeded_radial(radial, seed),
                &seeded_cse(cse, seed, tol),
            )?),
            Task::RestrictionScan { phi, n_z, w_samples } => {
                TaskOutput::Restriction(generic_restriction_check(phi, *n_z, w_samples)?)
            }
            Task::Scan { family, kind, c, grid, params } => TaskOutput::Cloud(scan_level_set(
                family,
                *kind,
                *c,
                &grid_or_default(grid, family),
                &seeded_scan(params, seed, tol),
            )?),
            Task::Probe { family, kind, c, grid, params, probe } => {
                let cloud =
                    scan_level_set(family, *kind, *c, &grid_or_default(grid, family), &seeded_scan(params, seed, tol))?;
                let probe = analyticity_probe(&cloud, &family.domain, probe)?;
                TaskOutput::Probe { cloud, probe }
            }
            Task::Containment { family, pair, c, grid, params } => {
                let (a, b) = match pair {
                    ContainmentPair::EX => (Kind::E, Kind::X),
                    ContainmentPair::FY => (Kind::F, Kind::Y),
                };
                let (g, p) = (grid_or_default(grid, family), seeded_scan(params, seed, tol));
                let ca = scan_level_set(family, a, *c, &g, &p)?;
                let cb = scan_level_set(family, b, *c, &g, &p)?;
                TaskOutput::Containment(containment_check(&ca, &cb)?)
            }
            Task::Sandwich { family, k, z, w, radial, cse } => {
                let fam = ApproxFamily::new(family.clone(), *k)?;
                TaskOutput::Sandwich(sandwich_check(&fam, z, w, &seeded_radial(radial, seed), &seeded_cse(cse, seed, tol))?)
            }
            Task::Bergman { family, c, basis, grid } => {
                let pts = grid.points(&family.domain)?;
                let ws: Vec<Vec<Complex64>> = pts.iter().map(|p| p[family.n_z..].to_vec()).collect();
                let field = BergmanKernelField::build(family, *c, basis, &ws)?;
                let rows = pts
                    .iter()
                    .map(|p| {
                        let (z, w) = p.split_at(family.n_z);
                        let k = field.kernel_at(z, w)?;
                        Ok(KernelRow { z: z.to_vec(), w: w.to_vec(), k, log_k: k.ln() })
                    })
                    .collect::<Result<Vec<_>>>()?;
                TaskOutput::Kernel(rows)
            }
            Task::PoleScan { family, c, basis, grid } => {
                let pts = grid.points(&family.domain)?;
                let ws: Vec<Vec<Complex64>> = pts.iter().map(|p| p[family.n_z..].to_vec()).collect();
                let field = BergmanKernelField::build(family, *c, basis, &ws)?;
                TaskOutput::Cloud(pole_scan(&field, grid)?)
            }
            Task::LogPsh { family, c, basis, samples, tol } => {
                let ws: Vec<Vec<Complex64>> = samples.iter().map(|s| s.w.clone()).collect();
                let field = BergmanKernelField::build(family, *c, basis, &ws)?;
                TaskOutput::LogPsh { tol: *tol, report: log_psh_check(&field, samples)? }
            }
            Task::Stability { integrand, check } => TaskOutput::Stability(run_stability(integrand, check)?),
            Task::Catalog { example } => match example {
                CatalogExample::Wang { c, k, radial } => {
                    TaskOutput::Wang(wang_catalog(&WangFamily::new(*c, *k)?, *c, &seeded_radial(radial, seed))?)
                }
                CatalogExample::Li { c, depth, ws, li, probe } => {
                    let ex = LiExample::polar(*depth);
                    let ws = ws.clone().unwrap_or_else(|| {
                        let mut v = ex.spec().endpoints(3.min(*depth));
                        v.extend(ex.spec().gap_midpoints(4.min(*depth)));
                        v.sort_by(f64::total_cmp);
                        v
                    });
                    TaskOutput::Li(nonanalyticity_demo(&ex, *c, &ws, li, probe)?)
                }
            },
        })
    }
}

fn run_stability(integrand: &Option<RationalPowerIntegrand>, check: &StabilityCheck) -> Result<StabilityOutput> {
    Ok(match check {
        StabilityCheck::Nondeg { m, n } => {
            let r = need(integrand)?;
            StabilityOutput::Nondeg(nondegenerate_check(&r.eps, &r.delta, *m, *n)?)
        }
        StabilityCheck::Hyp { d, q1, q2, eps, beta, alpha, quad } => {
            let r = need(integrand)?;
            let hyp = match beta {
                Some(b) => {
                    let a = alpha.unwrap_or(1.0 - crate::invariants::newton::rational_to_f64(b) / 2.0);
                    StabilityHypotheses::new(b.clone(), a, *d, *q1, *q2, *eps)?
                }
                None => StabilityHypotheses::defaults(r, *d, *q1, *q2, *eps, quad)?,
            };
            StabilityOutput::Hyp(hypothesis_check(r, &hyp, quad)?)
        }
        StabilityCheck::Family { center, radius, ws, threshold, quad } => {
            StabilityOutput::Family(integral_family(need(integrand)?, *center, *radius, ws, *threshold, quad)?)
        }
        StabilityCheck::Siu { r1, r3, eps_sequence, tolerance, quad } => {
            StabilityOutput::Siu(siu_limit_check(need(integrand)?, *r1, *r3, eps_sequence, *tolerance, quad)?)
        }
        StabilityCheck::Nb { psi, shift, f, eps, alpha, radius, quad } => {
            StabilityOutput::Nb(lemma_nb_check(psi, *shift, f, *eps, *alpha, *radius, quad)?)
        }
    })
}
