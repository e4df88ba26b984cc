//! The closed class of plurisubharmonic functions used throughout the crate.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::ComplexPoly;

/// `ln(e^a + e^b)` with the usual conventions at `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln Σ e^{x_i}`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Anything that can be evaluated as a function on `C^dim` with values in `[-inf, inf)`.
pub trait PshFn: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[Complex64]) -> f64;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polydisc {
    pub center: Vec<Complex64>,
    pub radii: Vec<f64>,
}

impl Polydisc {
    pub fn new(center: Vec<Complex64>, radii: Vec<f64>) -> Result<Self> {
        if center.len() != radii.len() || center.is_empty() {
            return Err(Error::InvalidInput("polydisc center/radii length mismatch".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidInput("polydisc radii must be positive".into()));
        }
        Ok(Self { center, radii })
    }

    pub fn unit(dim: usize) -> Self {
        Self { center: vec![Complex64::new(0.0, 0.0); dim], radii: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }

    pub fn contains(&self, p: &[Complex64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.center)
                .zip(&self.radii)
                .all(|((z, c), r)| (z - c).norm() < *r)
    }

    pub fn product(&self, other: &Polydisc) -> Polydisc {
        let mut center = self.center.clone();
        center.extend(other.center.iter().cloned());
        let mut radii = self.radii.clone();
        radii.extend(other.radii.iter().cloned());
        Polydisc { center, radii }
    }

    /// Factor on coordinates `range`.
    pub fn factor(&self, range: std::ops::Range<usize>) -> Polydisc {
        Polydisc {
            center: self.center[range.clone()].to_vec(),
            radii: self.radii[range].to_vec(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.radii.iter().map(|r| std::f64::consts::PI * r * r).product()
    }
}

/// `(alpha/2) log Σ |f_i|²` with polynomial generators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticSingularityPsh {
    pub alpha: f64,
    pub gens: Vec<ComplexPoly>,
}

impl<'de> Deserialize<'de> for AnalyticSingularityPsh {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Def {
            alpha: f64,
            gens: Vec<ComplexPoly>,
        }
        let v = Def::deserialize(d)?;
        Self::new(v.alpha, v.gens).map_err(serde::de::Error::custom)
    }
}

impl AnalyticSingularityPsh {
    pub fn new(alpha: f64, gens: Vec<ComplexPoly>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be positive".into()));
        }
        let Some(first) = gens.first() else {
            return Err(Error::InvalidInput("at least one generator required".into()));
        };
        let dim = first.dim();
        if let Some(g) = gens.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
        }
        if gens.iter().all(|g| g.is_zero()) {
            return Err(Error::InvalidInput("all generators are zero".into()));
        }
        Ok(Self { alpha, gens })
    }

    /// `(alpha/2) log Σ |z^{a_i}|²` for exponent vectors `a_i`.
    pub fn monomial(alpha: f64, exps: &[Vec<u32>]) -> Result<Self> {
        let dim = exps.first().map(|e| e.len()).unwrap_or(0);
        let gens = exps
            .iter()
            .map(|e| ComplexPoly::monomial(dim, e.clone(), Complex64::new(1.0, 0.0)))
            .collect();
        Self::new(alpha, gens)
    }

    pub fn dim(&self) -> usize {
        self.gens[0].dim()
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        let s = log_sum_exp(self.gens.iter().map(|g| 2.0 * g.log_abs(z)));
        if s == f64::NEG_INFINITY {
            s
        } else {
            0.5 * self.alpha * s
        }
    }

    pub fn recenter(&self, x: &[Complex64]) -> Self {
        Self { alpha: self.alpha, gens: self.gens.iter().map(|g| g.recenter(x)).collect() }
    }

    /// Generators recentered at `x`, if every one is a single monomial (zeros dropped).
    pub fn monomial_exponents_at(&self, x: &[Complex64]) -> Option<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        for g in &self.gens {
            let r = g.recenter(x);
            match r.terms().len() {
                0 => {}
                1 => out.push(r.terms()[0].0.clone()),
                _ => return None,
            }
        }
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }

    /// Like [`Self::monomial_exponents_at`], but also accepts generators of
    /// the form `u^a · h` with `h(0) ≠ 0` after recentering, which generate
    /// the same ideal germ as `u^a`.
    pub fn local_monomial_exponents_at(&self, x: &[Complex64]) -> Option<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        for g in &self.gens {
            let r = g.recenter(x);
            if r.is_zero() {
                continue;
            }
            let a: Vec<u32> =
                (0..r.dim()).map(|i| r.terms().iter().map(|(e, _)| e[i]).min().unwrap_or(0)).collect();
            if r.coefficient(&a) == Complex64::new(0.0, 0.0) {
                return None;
            }
            out.push(a);
        }
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }
}

/// `log(|a|^alpha + |z|^beta)` where `z` collects the coordinates `z_vars`
/// (each shifted by the matching entry of `z_shift`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHoelderTerm {
    pub a: ComplexPoly,
    pub alpha: f64,
    pub beta: f64,
    pub z_vars: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z_shift: Vec<Complex64>,
}

impl LogHoelderTerm {
    pub fn new(a: ComplexPoly, alpha: f64, beta: f64, z_vars: Vec<usize>) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidInput("log-Hoelder exponents must be positive".into()));
        }
        if z_vars.iter().any(|&i| i >= a.dim()) {
            return Err(Error::InvalidInput("z variable index out of range".into()));
        }
        Ok(Self { a, alpha, beta, z_vars, z_shift: Vec::new() })
    }

    fn log_z_norm(&self, p: &[Complex64]) -> f64 {
        let sq: f64 = self
            .z_vars
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let s = self.z_shift.get(k).copied().unwrap_or_default();
                (p[i] + s).norm_sqr()
            })
            .sum();
        if sq > 0.0 && sq.is_normal() {
            0.5 * sq.ln()
        } else {
            // log-domain fallback for subnormal magnitudes
            log_sum_exp(self.z_vars.iter().enumerate().map(|(k, &i)| {
                let s = self.z_shift.get(k).copied().unwrap_or_default();
                2.0 * (p[i] + s).norm().ln()
            })) * 0.5
        }
    }

    pub fn eval(&self, p: &[Complex64]) -> f64 {
        let la = self.a.log_abs(p);
        let lz = self.log_z_norm(p);
        log_add_exp(self.alpha * la, self.beta * lz)
    }
}

/// A scalar potential of one complex variable plugged into a psh expression.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn value(&self, w: Complex64) -> f64;
    fn def(&self) -> FieldDef;
}

/// Serializable description of a [`ScalarField`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldDef {
    /// Logarithmic potential of the depth-`depth` Cantor measure with
    /// level lengths `exp(-2^k)`, or the given log-lengths.
    CantorPotential {
        depth: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log_lengths: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldArg {
    /// Coordinate `var` of the point, plus `shift`.
    Var {
        var: usize,
        #[serde(default)]
        shift: Complex64,
    },
    Fixed { value: Complex64 },
}

#[derive(Clone)]
pub struct FieldTerm {
    pub field: Arc<dyn ScalarField>,
    pub arg: FieldArg,
    pub dim: usize,
}

impl fmt::Debug for FieldTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTerm")
            .field("field", &self.field.def())
            .field("arg", &self.arg)
            .field("dim", &self.dim)
            .finish()
    }
}

impl PartialEq for FieldTerm {
    fn eq(&self, o: &Self) -> bool {
        self.field.def() == o.field.def() && self.arg == o.arg && self.dim == o.dim
    }
}

impl FieldTerm {
    fn eval(&self, p: &[Complex64]) -> f64 {
        let w = match self.arg {
            FieldArg::Var { var, shift } => p[var] + shift,
            FieldArg::Fixed { value } => value,
        };
        self.field.value(w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PshExpr {
    Analytic(AnalyticSingularityPsh),
    Max(Box<PshExpr>, Box<PshExpr>),
    /// Non-negative weighted sum.
    Sum(Vec<(f64, PshExpr)>),
    LogHoelder { dim: usize, terms: Vec<LogHoelderTerm> },
    Field(FieldTerm),
    Const { dim: usize, value: f64 },
}

impl PshExpr {
    pub fn analytic(alpha: f64, gens: Vec<ComplexPoly>) -> Result<Self> {
        Ok(PshExpr::Analytic(AnalyticSingularityPsh::new(alpha, gens)?))
    }

    /// `k log|z_var - center|` style helper: `alpha * log|f|` for one generator.
    pub fn log_abs(alpha: f64, f: ComplexPoly) -> Result<Self> {
        Self::analytic(alpha, vec![f])
    }

    pub fn max(a: PshExpr, b: PshExpr) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        Ok(PshExpr::Max(Box::new(a), Box::new(b)))
    }

    pub fn sum(terms: Vec<(f64, PshExpr)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidInput("empty sum".into()));
        };
        let d = first.1.dim();
        for (w, e) in &terms {
            if !(*w >= 0.0) {
                return Err(Error::InvalidInput("sum weights must be non-negative".into()));
            }
            if e.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: e.dim() });
            }
        }
        Ok(PshExpr::Sum(terms))
    }

    pub fn log_hoelder(terms: Vec<LogHoelderTerm>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidInput("empty log-Hoelder sum".into()));
        };
        let dim = first.a.dim();
        if let Some(t) = terms.iter().find(|t| t.a.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: t.a.dim() });
        }
        Ok(PshExpr::LogHoelder { dim, terms })
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        PshExpr::Const { dim, value }
    }

    pub fn field(field: Arc<dyn ScalarField>, var: usize, dim: usize) -> Self {
        PshExpr::Field(FieldTerm {
            field,
            arg: FieldArg::Var { var, shift: Complex64::new(0.0, 0.0) },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            PshExpr::Analytic(a) => a.dim(),
            PshExpr::Max(a, _) => a.dim(),
            PshExpr::Sum(t) => t[0].1.dim(),
            PshExpr::LogHoelder { dim, .. } => *dim,
            PshExpr::Field(f) => f.dim,
            PshExpr::Const { dim, .. } => *dim,
        }
    }

    pub fn as_analytic(&self) -> Option<&AnalyticSingularityPsh> {
        match self {
            PshExpr::Analytic(a) => Some(a),
            _ => None,
        }
    }

    /// Checked evaluation.
    pub fn evaluate(&self, p: &[Complex64]) -> Result<f64> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        Ok(self.value(p))
    }

    fn value(&self, p: &[Complex64]) -> f64 {
        match self {
            PshExpr::Analytic(a) => a.eval(p),
            PshExpr::Max(a, b) => a.value(p).max(b.value(p)),
            PshExpr::Sum(terms) => {
                let mut acc = 0.0;
                for (w, e) in terms {
                    if *w == 0.0 {
                        continue;
                    }
                    acc += w * e.value(p);
                }
                acc
            }
            PshExpr::LogHoelder { terms, .. } => terms.iter().map(|t| t.eval(p)).sum(),
            PshExpr::Field(f) => f.eval(p),
            PshExpr::Const { value, .. } => *value,
        }
    }

    /// Expression in the shifted variable `u = p - x`.
    pub fn recenter(&self, x: &[Complex64]) -> Self {
        match self {
            PshExpr::Analytic(a) => PshExpr::Analytic(a.recenter(x)),
            PshExpr::Max(a, b) => PshExpr::Max(Box::new(a.recenter(x)), Box::new(b.recenter(x))),
            PshExpr::Sum(t) => {
                PshExpr::Sum(t.iter().map(|(w, e)| (*w, e.recenter(x))).collect())
            }
            PshExpr::LogHoelder { dim, terms } => PshExpr::LogHoelder {
                dim: *dim,
                terms: terms
                    .iter()
                    .map(|t| {
                        let z_shift = t
                            .z_vars
                            .iter()
                            .enumerate()
                            .map(|(k, &i)| t.z_shift.get(k).copied().unwrap_or_default() + x[i])
                            .collect();
                        LogHoelderTerm { a: t.a.recenter(x), z_shift, ..t.clone() }
                    })
                    .collect(),
            },
            PshExpr::Field(f) => {
                let arg = match f.arg {
                    FieldArg::Var { var, shift } => FieldArg::Var { var, shift: shift + x[var] },
                    fixed => fixed,
                };
                PshExpr::Field(FieldTerm { arg, ..f.clone() })
            }
            PshExpr::Const { .. } => self.clone(),
        }
    }

    /// Freezes the trailing `w.len()` variables.
    pub fn freeze_tail(&self, w: &[Complex64]) -> Result<Self> {
        let d = self.dim();
        if w.len() >= d {
            return Err(Error::InvalidInput("nothing left after freezing".into()));
        }
        let n = d - w.len();
        Ok(match self {
            PshExpr::Analytic(a) => PshExpr::Analytic(AnalyticSingularityPsh {
                alpha: a.alpha,
                gens: a.gens.iter().map(|g| g.freeze_tail(w)).collect(),
            }),
            PshExpr::Max(a, b) => {
                PshExpr::Max(Box::new(a.freeze_tail(w)?), Box::new(b.freeze_tail(w)?))
            }
            PshExpr::Sum(t) => PshExpr::Sum(
                t.iter()
                    .map(|(wt, e)| Ok((*wt, e.freeze_tail(w)?)))
                    .collect::<Result<_>>()?,
            ),
            PshExpr::LogHoelder { terms, .. } => {
                let mut out = Vec::with_capacity(terms.len());
                for t in terms {
                    if t.z_vars.iter().any(|&i| i >= n) {
                        return Err(Error::InvalidInput(
                            "log-Hoelder |z| part must only involve fiber variables".into(),
                        ));
                    }
                    out.push(LogHoelderTerm { a: t.a.freeze_tail(w), ..t.clone() });
                }
                PshExpr::LogHoelder { dim: n, terms: out }
            }
            PshExpr::Field(f) => {
                // a field frozen at a fixed point is a constant on the fiber
                match f.arg {
                    FieldArg::Var { var, shift } if var >= n => {
                        PshExpr::Const { dim: n, value: f.field.value(w[var - n] + shift) }
                    }
                    FieldArg::Fixed { value } => PshExpr::Const { dim: n, value: f.field.value(value) },
                    arg => PshExpr::Field(FieldTerm { arg, field: f.field.clone(), dim: n }),
                }
            }
            PshExpr::Const { value, .. } => PshExpr::Const { dim: n, value: *value },
        })
    }
}

impl PshFn for PshExpr {
    fn dim(&self) -> usize {
        PshExpr::dim(self)
    }
    fn eval(&self, z: &[Complex64]) -> f64 {
        self.value(z)
    }
}

impl PshFn for AnalyticSingularityPsh {
    fn dim(&self) -> usize {
        AnalyticSingularityPsh::dim(self)
    }
    fn eval(&self, z: &[Complex64]) -> f64 {
        AnalyticSingularityPsh::eval(self, z)
    }
}

/// A psh function on a product polydisc `Δⁿ_z × Δᵐ_w`; the first `n_z`
/// coordinates are the fiber variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PshFamily {
    pub expr: PshExpr,
    pub domain: Polydisc,
    pub n_z: usize,
}

impl PshFamily {
    pub fn new(expr: PshExpr, domain: Polydisc, n_z: usize) -> Result<Self> {
        if expr.dim() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: expr.dim() });
        }
        if n_z == 0 || n_z >= domain.dim() {
            return Err(Error::InvalidInput("need at least one fiber and one parameter variable".into()));
        }
        Ok(Self { expr, domain, n_z })
    }

    pub fn m_w(&self) -> usize {
        self.domain.dim() - self.n_z
    }

    pub fn z_domain(&self) -> Polydisc {
        self.domain.factor(0..self.n_z)
    }

    pub fn w_domain(&self) -> Polydisc {
        self.domain.factor(self.n_z..self.domain.dim())
    }

    /// `φ_{w0} = φ(·, w0)`.
    pub fn restrict_fiber(&self, w0: &[Complex64]) -> Result<PshExpr> {
        if w0.len() != self.m_w() {
            return Err(Error::DimensionMismatch { expected: self.m_w(), got: w0.len() });
        }
        if !self.w_domain().contains(w0) {
            return Err(Error::OutsideDomain);
        }
        self.expr.freeze_tail(w0)
    }
}

/// Wire form of [`PshExpr`]: an externally tagged tree, rebuilt through
/// the validating constructors.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ExprDef {
    Analytic { alpha: f64, gens: Vec<ComplexPoly> },
    Max(Box<ExprDef>, Box<ExprDef>),
    Sum(Vec<(f64, ExprDef)>),
    LogHoelder { terms: Vec<LogHoelderTerm> },
    Field {
        field: FieldDef,
        arg: FieldArg,
        dim: usize,
    },
    Const { dim: usize, value: f64 },
}

impl From<&PshExpr> for ExprDef {
    fn from(e: &PshExpr) -> Self {
        match e {
            PshExpr::Analytic(a) => ExprDef::Analytic { alpha: a.alpha, gens: a.gens.clone() },
            PshExpr::Max(a, b) => ExprDef::Max(Box::new(a.as_ref().into()), Box::new(b.as_ref().into())),
            PshExpr::Sum(t) => ExprDef::Sum(t.iter().map(|(w, e)| (*w, e.into())).collect()),
            PshExpr::LogHoelder { terms, .. } => ExprDef::LogHoelder { terms: terms.clone() },
            PshExpr::Field(f) => ExprDef::Field { field: f.field.def(), arg: f.arg, dim: f.dim },
            PshExpr::Const { dim, value } => ExprDef::Const { dim: *dim, value: *value },
        }
    }
}

impl TryFrom<ExprDef> for PshExpr {
    type Error = Error;

    fn try_from(d: ExprDef) -> Result<Self> {
        Ok(match d {
            ExprDef::Analytic { alpha, gens } => PshExpr::analytic(alpha, gens)?,
            ExprDef::Max(a, b) => PshExpr::max((*a).try_into()?, (*b).try_into()?)?,
            ExprDef::Sum(t) => {
                PshExpr::sum(t.into_iter().map(|(w, e)| Ok((w, e.try_into()?))).collect::<Result<_>>()?)?
            }
            ExprDef::LogHoelder { terms } => {
                let terms = terms
                    .into_iter()
                    .map(|t| {
                        let shift = t.z_shift;
                        let mut v = LogHoelderTerm::new(t.a, t.alpha, t.beta, t.z_vars)?;
                        if !shift.is_empty() && shift.len() != v.z_vars.len() {
                            return Err(Error::InvalidInput("z_shift must match z_vars".into()));
                        }
                        v.z_shift = shift;
                        Ok(v)
                    })
                    .collect::<Result<_>>()?;
                PshExpr::log_hoelder(terms)?
            }
            ExprDef::Field { field, arg, dim } => {
                if let FieldArg::Var { var, .. } = arg {
                    if var >= dim {
                        return Err(Error::InvalidInput(format!("field variable {var} out of range")));
                    }
                }
                PshExpr::Field(FieldTerm { field: crate::counterexamples::field_from_def(&field)?, arg, dim })
            }
            ExprDef::Const { dim, value } => {
                if value.is_nan() || value == f64::INFINITY {
                    return Err(Error::InvalidInput("constant must be finite or -inf".into()));
                }
                PshExpr::constant(dim, value)
            }
        })
    }
}

impl Serialize for PshExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExprDef::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PshExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ExprDef::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyDef {
    expr: PshExpr,
    domain: Polydisc,
    n_z: usize,
}

impl Serialize for PshFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyDef { expr: self.expr.clone(), domain: self.domain.clone(), n_z: self.n_z }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PshFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = FamilyDef::deserialize(d)?;
        let domain = Polydisc::new(f.domain.center, f.domain.radii).map_err(serde::de::Error::custom)?;
        PshFamily::new(f.expr, domain, f.n_z).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn z_minus_w() -> ComplexPoly {
        ComplexPoly::var(2, 0).sub(&ComplexPoly::var(2, 1))
    }

    #[test]
    fn log_abs_at_pole() {
        let phi = PshExpr::log_abs(1.0, ComplexPoly::var(1, 0)).unwrap();
        assert_eq!(phi.evaluate(&[c(0.0)]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn direct_substitution() {
        let phi = PshExpr::Analytic(
            AnalyticSingularityPsh::monomial(1.0, &[vec![2, 0], vec![0, 3]]).unwrap(),
        );
        let v = phi.evaluate(&[c(1.0), c(1.0)]).unwrap();
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn max_branches() {
        // max{2 log|z|², log|z|² + p}, p = -3 at |z| = 1/e
        let a = PshExpr::analytic(4.0, vec![ComplexPoly::var(1, 0)]).unwrap();
        let b = PshExpr::sum(vec![
            (1.0, PshExpr::analytic(2.0, vec![ComplexPoly::var(1, 0)]).unwrap()),
            (1.0, PshExpr::constant(1, -3.0)),
        ])
        .unwrap();
        let phi = PshExpr::max(a, b).unwrap();
        let v = phi.evaluate(&[c((-1.0f64).exp())]).unwrap();
        assert!((v + 4.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let phi = PshExpr::log_abs(1.0, ComplexPoly::var(2, 0)).unwrap();
        assert!(matches!(phi.evaluate(&[c(0.0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn restrict_diagonal() {
        let fam = PshFamily::new(
            PshExpr::log_abs(1.0, z_minus_w()).unwrap(),
            Polydisc::unit(2),
            1,
        )
        .unwrap();
        let f = fam.restrict_fiber(&[c(0.3)]).unwrap();
        for z in [c(0.3), c(-0.2), Complex64::new(0.1, 0.4)] {
            let want = (z - c(0.3)).norm().ln();
            assert!((f.evaluate(&[z]).unwrap() - want).abs() < 1e-14 || want == f64::NEG_INFINITY);
        }
        assert_eq!(fam.restrict_fiber(&[c(1.2)]), Err(Error::OutsideDomain));
    }

    #[test]
    fn restrict_zero_fiber() {
        // (1/2) log(|z|^4 + |w|^2) at w = 0 -> 2 log|z|
        let z2 = ComplexPoly::monomial(2, vec![2, 0], c(1.0));
        let fam = PshFamily::new(
            PshExpr::analytic(1.0, vec![z2, ComplexPoly::var(2, 1)]).unwrap(),
            Polydisc::unit(2),
            1,
        )
        .unwrap();
        let f = fam.restrict_fiber(&[c(0.0)]).unwrap();
        let z = Complex64::new(0.3, -0.2);
        assert!((f.evaluate(&[z]).unwrap() - 2.0 * z.norm().ln()).abs() < 1e-14);
    }

    #[test]
    fn recenter_preserves_values() {
        let phi = PshExpr::log_abs(1.0, z_minus_w()).unwrap();
        let x = [c(0.25), c(0.25)];
        let r = phi.recenter(&x);
        let p = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.05)];
        let u = [p[0] - x[0], p[1] - x[1]];
        assert!((phi.evaluate(&p).unwrap() - r.evaluate(&u).unwrap()).abs() < 1e-14);
        // tiny offsets survive recentering
        let u = [c(1e-20), c(0.0)];
        assert!((r.evaluate(&u).unwrap() - 1e-20f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn expression_json_round_trip() {
        let fam = crate::counterexamples::LiExample::polar(6).family();
        let s = serde_json::to_string(&fam).unwrap();
        let back: PshFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(back, fam);
        let p = [c(0.0), c(0.3)];
        assert_eq!(back.expr.evaluate(&p).unwrap(), fam.expr.evaluate(&p).unwrap());
        let w = crate::counterexamples::WangFamily::new(1.0, 3).unwrap().family();
        let back: PshFamily = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn expression_json_validates() {
        let ok = r#"{"analytic": {"alpha": 1, "gens": [{"dim": 1, "terms": [{"exp": [1], "re": 1}]}]}}"#;
        let e: PshExpr = serde_json::from_str(ok).unwrap();
        assert_eq!(e, PshExpr::log_abs(1.0, ComplexPoly::var(1, 0)).unwrap());
        let bad = r#"{"analytic": {"alpha": -1, "gens": [{"dim": 1, "terms": [{"exp": [1], "re": 1}]}]}}"#;
        assert!(serde_json::from_str::<PshExpr>(bad).is_err());
        let mixed = r#"{"max": [{"const": {"dim": 1, "value": 0}}, {"const": {"dim": 2, "value": 0}}]}"#;
        assert!(serde_json::from_str::<PshExpr>(mixed).is_err());
    }
}
