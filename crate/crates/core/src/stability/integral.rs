//! Rational-power integrands and their fiber integrals over discs.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::integrability::{Classification, SpatialAnnuli, Verdict};
use crate::invariants::newton::rational_to_f64;
use crate::psh::AnalyticSingularityPsh;
use crate::quadrature::{disc_rule, DiscRule};
use crate::{Complex64, ComplexPoly};

/// `R(z, w) = (Σ|F_i|²)^{eps/2} / (Σ|G_j|²)^{delta/2}`; the last variable is `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalPowerIntegrand {
    pub f: Vec<ComplexPoly>,
    pub g: Vec<ComplexPoly>,
    #[serde(with = "crate::rational")]
    pub eps: BigRational,
    #[serde(with = "crate::rational")]
    pub delta: BigRational,
}

impl RationalPowerIntegrand {
    pub fn new(f: Vec<ComplexPoly>, g: Vec<ComplexPoly>, eps: BigRational, delta: BigRational) -> Result<Self> {
        let r = Self { f, g, eps, delta };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let (Some(a), Some(_)) = (self.f.first(), self.g.first()) else {
            return Err(Error::InvalidInput("numerator and denominator tuples must be non-empty".into()));
        };
        let d = a.dim();
        if d < 2 {
            return Err(Error::InvalidInput("need at least one z variable and the parameter w".into()));
        }
        if let Some(p) = self.f.iter().chain(&self.g).find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
        }
        if self.f.iter().all(|p| p.is_zero()) {
            return Err(Error::InvalidInput("at least one numerator entry must be nonzero".into()));
        }
        if rational_to_f64(&self.eps) < 0.0 || rational_to_f64(&self.delta) < 0.0 {
            return Err(Error::InvalidInput("exponents must be non-negative".into()));
        }
        Ok(())
    }

    /// Number of `z` variables.
    pub fn n(&self) -> usize {
        self.f[0].dim() - 1
    }

    pub fn log_value(&self, p: &[Complex64]) -> f64 {
        let fam = FiberPowers::new(self, p[self.n()], rational_to_f64(&self.eps), rational_to_f64(&self.delta));
        fam.log_at(&p[..self.n()])
    }
}

/// `|F(·,w)|^a / |G(·,w)|^b` on one fiber, with exponents given as floats.
#[derive(Clone, Debug)]
pub struct FiberPowers {
    pub f: AnalyticSingularityPsh,
    pub g: AnalyticSingularityPsh,
    pub a: f64,
    pub b: f64,
}

impl FiberPowers {
    pub fn new(r: &RationalPowerIntegrand, w: Complex64, a: f64, b: f64) -> Self {
        let freeze = |ps: &[ComplexPoly]| AnalyticSingularityPsh { alpha: 1.0, gens: ps.iter().map(|p| p.freeze_tail(&[w])).collect() };
        Self { f: freeze(&r.f), g: freeze(&r.g), a, b }
    }

    pub fn log_at(&self, z: &[Complex64]) -> f64 {
        let lf = self.f.eval(z);
        if lf == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let lg = if self.b == 0.0 { 0.0 } else { self.g.eval(z) };
        self.a * lf - self.b * lg
    }

    fn recenter(&self, x: Complex64) -> Self {
        Self { f: self.f.recenter(&[x]), g: self.g.recenter(&[x]), a: self.a, b: self.b }
    }
}

/// Zeros inside the open disc of every nonzero polynomial of the list, and
/// the common zeros of the whole list.
pub(crate) fn zeros(ps: &[ComplexPoly]) -> (Vec<Complex64>, Vec<Complex64>) {
    let nz: Vec<&ComplexPoly> = ps.iter().filter(|p| !p.is_zero()).collect();
    let mut all: Vec<Complex64> = Vec::new();
    for p in &nz {
        for (r, _) in p.roots() {
            if all.iter().all(|a| (a - r).norm() > 1e-12) {
                all.push(r);
            }
        }
    }
    let common = all
        .iter()
        .copied()
        .filter(|r| {
            nz.iter().all(|p| {
                let scale: f64 = p.terms().iter().map(|(e, c)| c.norm() * r.norm().powi(e[0] as i32)).sum();
                p.eval(&[*r]).norm() <= 1e-10 * scale.max(1e-300)
            })
        })
        .collect();
    (all, common)
}

const UNIT_RATIO_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscIntegral {
    /// `+∞` when divergent.
    #[serde(with = "crate::ext_f64")]
    pub value: f64,
    pub verdict: Verdict,
    /// Points where the integrand blows up, with their annulus tests.
    pub poles: Vec<Complex64>,
    pub tests: Vec<Classification>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadParams {
    pub rule: DiscRule,
    /// Annuli per singular point for the divergence test.
    pub annuli: usize,
    pub q: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self { rule: DiscRule::default(), annuli: 40, q: 0.98 }
    }
}

/// `∫_{|z − c| < r} |F(z,w)|^a / |G(z,w)|^b dV` in one variable. Every zero
/// of an entry of `F` or `G` is a refinement point; common zeros of `G`
/// get an annulus test first.
pub fn fiber_integral(p: &FiberPowers, center: Complex64, radius: f64, params: &QuadParams) -> DiscIntegral {
    if p.f.gens.iter().all(|g| g.is_zero()) {
        return DiscIntegral { value: 0.0, verdict: Verdict::Convergent, poles: Vec::new(), tests: Vec::new() };
    }
    let (fz, _) = zeros(&p.f.gens);
    let (gz, gc) = if p.b > 0.0 { zeros(&p.g.gens) } else { (Vec::new(), Vec::new()) };
    if p.b > 0.0 && p.g.gens.iter().all(|g| g.is_zero()) {
        return DiscIntegral { value: f64::INFINITY, verdict: Verdict::Divergent, poles: Vec::new(), tests: Vec::new() };
    }
    let mut singular: Vec<Complex64> = gc.clone();
    for z in gz.into_iter().chain(fz) {
        if singular.iter().all(|a| (a - z).norm() > 1e-12) {
            singular.push(z);
        }
    }
    singular.retain(|a| (a - center).norm() < radius);
    let poles: Vec<usize> = (0..singular.len()).filter(|&i| gc.iter().any(|g| (g - singular[i]).norm() <= 1e-12)).collect();
    let near: Vec<FiberPowers> = singular.iter().map(|&a| p.recenter(a)).collect();
    let log_at = |i: Option<usize>, u: Complex64| match i {
        Some(i) => near[i].log_at(&[u]),
        None => p.log_at(&[u]),
    };
    singular_integral(&log_at, &singular, &poles, center, radius, params)
}

/// `∫ exp(h)` over a disc, where `h(Some(i), u)` is the log-integrand at
/// `singular[i] + u` and `h(None, z)` at `z`. The points listed in `poles`
/// get an annulus test before quadrature.
pub(crate) fn singular_integral(
    h: &(dyn Fn(Option<usize>, Complex64) -> f64 + Sync),
    singular: &[Complex64],
    poles: &[usize],
    center: Complex64,
    radius: f64,
    params: &QuadParams,
) -> DiscIntegral {
    let mut verdict = Verdict::Convergent;
    let mut tests = Vec::new();
    let pole_points: Vec<Complex64> = poles.iter().map(|&k| singular[k]).collect();
    for &i in poles {
        let a = singular[i];
        let mut rho = radius - (a - center).norm();
        for (j, b) in singular.iter().enumerate() {
            if j != i {
                rho = rho.min(0.5 * (a - b).norm());
            }
        }
        let f = |u: &[Complex64]| h(Some(i), u[0]);
        let mut t = SpatialAnnuli::build(&f, rho, params.annuli, params.q).classify(1.0);
        // a unit ratio is a logarithmic divergence, seen only up to rounding
        if t.verdict == Verdict::Borderline && t.ratio > 1.0 - UNIT_RATIO_TOL {
            t.verdict = Verdict::Divergent;
        }
        match t.verdict {
            Verdict::Divergent => {
                tests.push(t);
                return DiscIntegral { value: f64::INFINITY, verdict: Verdict::Divergent, poles: pole_points, tests };
            }
            Verdict::Convergent => {}
            v => verdict = v,
        }
        tests.push(t);
    }
    let nodes = disc_rule(center, radius, singular, &params.rule);
    let value: f64 = nodes
        .par_chunks(256)
        .map(|ch| {
            ch.iter()
                .map(|n| {
                    let l = match n.pole {
                        Some(i) => h(Some(i), n.u),
                        None => h(None, n.z()),
                    };
                    n.w * l.exp()
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    DiscIntegral { value, verdict, poles: pole_points, tests }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySample {
    pub w: Complex64,
    pub integral: DiscIntegral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub center: Complex64,
    pub radius: f64,
    pub samples: Vec<FamilySample>,
    /// `|value(w_{i+1}) − value(w_i)|` for consecutive samples.
    #[serde(with = "crate::ext_f64::vec")]
    pub jumps: Vec<f64>,
    #[serde(with = "crate::ext_f64")]
    pub max_jump: f64,
    pub threshold: f64,
    pub continuous: bool,
    /// Indices of samples whose integral diverged or was not classified.
    pub flagged: Vec<usize>,
}

fn check_one_variable(r: &RationalPowerIntegrand) -> Result<()> {
    r.validate()?;
    if r.n() != 1 {
        return Err(Error::Precondition("disc quadrature needs exactly one z variable".into()));
    }
    Ok(())
}

/// `w ↦ ∫_{|z − c| < r} R(z, w) dV` at each sample, in the given order.
pub fn integral_family(
    r: &RationalPowerIntegrand,
    center: Complex64,
    radius: f64,
    ws: &[Complex64],
    threshold: f64,
    params: &QuadParams,
) -> Result<FamilyReport> {
    check_one_variable(r)?;
    let (a, b) = (rational_to_f64(&r.eps), rational_to_f64(&r.delta));
    let samples: Vec<FamilySample> = ws
        .par_iter()
        .map(|&w| FamilySample { w, integral: fiber_integral(&FiberPowers::new(r, w, a, b), center, radius, params) })
        .collect();
    let jumps: Vec<f64> = samples
        .windows(2)
        .map(|p| {
            let (x, y) = (p[0].integral.value, p[1].integral.value);
            if x == y {
                0.0
            } else {
                (x - y).abs()
            }
        })
        .collect();
    let max_jump = jumps.iter().cloned().fold(0.0, f64::max);
    let flagged: Vec<usize> =
        samples.iter().enumerate().filter(|(_, s)| s.integral.verdict != Verdict::Convergent).map(|(i, _)| i).collect();
    Ok(FamilyReport {
        center,
        radius,
        continuous: flagged.is_empty() && max_jump <= threshold,
        samples,
        jumps,
        max_jump,
        threshold,
        flagged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub verdict: Verdict,
    #[serde(with = "crate::ext_f64")]
    pub value: f64,
    pub evidence: Vec<Classification>,
}

impl From<DiscIntegral> for ConditionResult {
    fn from(d: DiscIntegral) -> Self {
        Self { verdict: d.verdict, value: d.value, evidence: d.tests }
    }
}

/// Hypotheses of the stability theorem on discs centered at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityHypotheses {
    #[serde(with = "crate::rational")]
    pub beta: BigRational,
    pub alpha: f64,
    /// Radius of the domain `D`.
    pub d: f64,
    pub q1: f64,
    pub q2: f64,
    /// Radius of the parameter disc.
    pub eps: f64,
    #[serde(default)]
    pub finite_at_zero: Option<ConditionResult>,
    #[serde(default)]
    pub improved_at_zero: Option<ConditionResult>,
    #[serde(default)]
    pub weighted: Option<ConditionResult>,
}

impl StabilityHypotheses {
    pub fn new(beta: BigRational, alpha: f64, d: f64, q1: f64, q2: f64, eps: f64) -> Result<Self> {
        let b = rational_to_f64(&beta);
        if !(b > 0.0) {
            return Err(Error::InvalidInput("beta must be a positive rational".into()));
        }
        if !(alpha > 1.0 - b && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} is outside (1 − beta, 1)")));
        }
        if !(0.0 < q2 && q2 < q1 && q1 < d && eps > 0.0) {
            return Err(Error::InvalidInput("need 0 < q2 < q1 < d and eps > 0".into()));
        }
        Ok(Self { beta, alpha, d, q1, q2, eps, finite_at_zero: None, improved_at_zero: None, weighted: None })
    }

    /// β from a coarse bisection on the improved-integrability condition,
    /// kept on the convergent side, and `α = 1 − β/2`.
    pub fn defaults(r: &RationalPowerIntegrand, d: f64, q1: f64, q2: f64, eps: f64, params: &QuadParams) -> Result<Self> {
        check_one_variable(r)?;
        let improved = |beta: f64| {
            let p = FiberPowers::new(r, Complex64::new(0.0, 0.0), rational_to_f64(&r.eps), rational_to_f64(&r.delta) * (1.0 + beta));
            fiber_integral(&p, Complex64::new(0.0, 0.0), q1, params).verdict == Verdict::Convergent
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        if improved(hi) {
            lo = hi;
        } else {
            for _ in 0..6 {
                let mid = 0.5 * (lo + hi);
                if improved(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        if lo == 0.0 {
            return Err(Error::Precondition("no beta > 0 found with the improved integral finite".into()));
        }
        let beta = crate::invariants::rational_from_f64(lo).expect("dyadic");
        Self::new(beta, 1.0 - lo / 2.0, d, q1, q2, eps)
    }
}

/// Fills in the three conditions: `∫_D R(·,0)`, `∫_{Q₁} |F|^eps/|G|^{δ(1+β)}`
/// at `w = 0`, and the `|w|^{−2α}`-weighted integral over `Q₂ × Δ(eps)`.
///
/// The weighted condition is decided by Fubini: the fiber integrals over
/// `Q₂` must be finite at sampled `w`, and their angular means on geometric
/// radii, weighted by `|w|^{2 − 2α}`, must decay geometrically.
pub fn hypothesis_check(r: &RationalPowerIntegrand, hyp: &StabilityHypotheses, params: &QuadParams) -> Result<StabilityHypotheses> {
    check_one_variable(r)?;
    let o = Complex64::new(0.0, 0.0);
    let (a, b) = (rational_to_f64(&r.eps), rational_to_f64(&r.delta));
    let beta = rational_to_f64(&hyp.beta);
    let b1 = b * (1.0 + beta);
    let mut out = hyp.clone();
    out.finite_at_zero = Some(fiber_integral(&FiberPowers::new(r, o, a, b), o, hyp.d, params).into());
    out.improved_at_zero = Some(fiber_integral(&FiberPowers::new(r, o, a, b1), o, hyp.q1, params).into());

    const RADII: usize = 20;
    const ANGLES: usize = 8;
    let ws: Vec<(usize, Complex64)> = (0..RADII)
        .flat_map(|j| {
            let rr = hyp.eps * 2f64.powf(-(j as f64) - 0.5);
            (0..ANGLES).map(move |k| (j, Complex64::from_polar(rr, std::f64::consts::TAU * (k as f64 + 0.5) / ANGLES as f64)))
        })
        .collect();
    let fibers: Vec<DiscIntegral> =
        ws.par_iter().map(|&(_, w)| fiber_integral(&FiberPowers::new(r, w, a, b1), o, hyp.q2, params)).collect();
    let weighted = if let Some(d) = fibers.iter().find(|f| f.verdict == Verdict::Divergent) {
        ConditionResult { verdict: Verdict::Divergent, value: f64::INFINITY, evidence: d.tests.clone() }
    } else {
        // log of the annulus masses up to a common constant
        let masses: Vec<f64> = (0..RADII)
            .map(|j| {
                let mean = fibers[j * ANGLES..(j + 1) * ANGLES].iter().map(|f| f.value).sum::<f64>() / ANGLES as f64;
                let rr = hyp.eps * 2f64.powf(-(j as f64) - 0.5);
                mean.ln() + (2.0 - 2.0 * hyp.alpha) * rr.ln()
            })
            .collect();
        let xs: Vec<f64> = (RADII / 4..RADII).map(|j| j as f64).collect();
        let ys: Vec<f64> = masses[RADII / 4..].to_vec();
        let (_, slope, _) = crate::invariants::lelong::fit_line(&xs, &ys);
        let ratio = slope.exp();
        let verdict = if fibers.iter().any(|f| f.verdict != Verdict::Convergent) {
            Verdict::Inconclusive
        } else if ratio < params.q {
            Verdict::Convergent
        } else if ratio >= 1.0 {
            Verdict::Divergent
        } else {
            Verdict::Borderline
        };
        let value = if verdict == Verdict::Divergent { f64::INFINITY } else { f64::NAN };
        ConditionResult {
            verdict,
            value,
            evidence: vec![Classification { verdict, ratio, log_power: 0.0, annuli_used: xs.len() }],
        }
    };
    out.weighted = Some(weighted);
    Ok(out)
}
