//! Truncated fibrewise Bergman kernels on weighted polydiscs.
//!
//! For a fiber weight `e^{-2cφ_w}` the admissible polynomials of degree at
//! most the cap are spanned by explicit elements, their Gram matrix is
//! computed by singular quadrature, and the kernel on the diagonal is
//! `Σ_j |e_j(z)|²` over the orthonormalized span.

use std::borrow::Cow;

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{CloudPoint, GridSpec, Kind, LevelSetCloud};
use crate::error::{Error, Result};
use crate::invariants::integrability::SpatialAnnuli;
use crate::invariants::NewtonPolyhedron;
use crate::psh::{PshExpr, PshFamily, PshFn, Polydisc};
use crate::quadrature::{disc_rule, DiscRule, Node};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisParams {
    /// Total degree cap.
    pub degree_cap: usize,
    /// One-variable rule; two-variable fibers use [`DiscRule::coarse`] unless set.
    pub rule: Option<DiscRule>,
    /// Extra points where the fiber weight may be singular.
    pub poles: Vec<Vec<Complex64>>,
    /// Eigenvalues below `discard · λ_max` are dropped.
    pub discard: f64,
    /// Smaller eigenvalue ratios are reported as a conditioning failure.
    pub singular: f64,
}

impl Default for BasisParams {
    fn default() -> Self {
        Self { degree_cap: 8, rule: None, poles: Vec::new(), discard: 1e-10, singular: 1e-15 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// No singular point found.
    Unweighted,
    /// Vanishing order against the Lelong number, or Howald membership.
    Exact,
    /// Annulus test on the recentered weight.
    AnnulusTest,
}

/// Factor `(z − point)^order` carried by every element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleFactor {
    pub point: Complex64,
    pub order: u32,
    /// Lelong number of the fiber at the point, when known exactly.
    pub lelong: Option<f64>,
}

/// Truncated weighted space at one fiber.
///
/// Element `j` is `Π_p (z − p)^{m_p} · (z − origin)^{k_j}`; the prefactor
/// only occurs in one variable.
#[derive(Clone, Debug)]
pub struct WeightedBasis {
    pub degree_cap: usize,
    pub c: f64,
    pub origin: Vec<Complex64>,
    pub prefactor: Vec<PoleFactor>,
    pub exponents: Vec<Vec<u32>>,
    pub criterion: Criterion,
    /// `‖element_j‖²`.
    pub norms: Vec<f64>,
    pub gram: DMatrix<Complex64>,
    /// Orthonormal basis: column `λ` holds the coefficients of `e_λ`.
    pub coeffs: DMatrix<Complex64>,
    pub discarded: usize,
    pub nodes: usize,
}

fn required_order(c: f64, nu: f64) -> u32 {
    // |u|^{2m} |u|^{-2cν} is integrable iff m > cν − 1
    let t = c * nu - 1.0;
    if t < 0.0 {
        0
    } else {
        t.floor() as u32 + 1
    }
}

fn exponents_up_to(dim: usize, cap: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|e| {
                let used: u32 = e.iter().sum();
                (0..=(cap as u32 - used)).map(move |k| {
                    let mut f = e.clone();
                    f.push(k);
                    f
                })
            })
            .collect();
    }
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

/// Singular points of a one-variable analytic fiber inside the disc, with
/// their Lelong numbers.
fn analytic_poles_1d(phi: &PshExpr, c: Complex64, r: f64) -> Result<Option<Vec<(Complex64, f64)>>> {
    let Some(a) = phi.as_analytic() else { return Ok(None) };
    let nz: Vec<_> = a.gens.iter().filter(|g| !g.is_zero()).collect();
    let Some(g) = nz.iter().min_by_key(|g| g.total_degree()) else {
        return Err(Error::Degenerate("fiber weight is identically -inf".into()));
    };
    let mut out = Vec::new();
    for (root, _) in g.roots() {
        if (root - c).norm() >= r {
            continue;
        }
        let ord = nz.iter().map(|f| f.vanishing_order(&[root])).collect::<Result<Vec<_>>>()?;
        let m = ord.into_iter().min().unwrap_or(0);
        if m > 0 {
            out.push((root, a.alpha * m as f64));
        }
    }
    Ok(Some(out))
}

fn candidate_poles(phi: &PshExpr, domain: &Polydisc, hints: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for p in hints.iter().chain(std::iter::once(&domain.center)) {
        if p.len() == domain.dim() && domain.contains(p) && phi.eval(p) == f64::NEG_INFINITY && !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

impl WeightedBasis {
    /// Element values at a point.
    pub fn elements(&self, z: &[Complex64]) -> Vec<Complex64> {
        let pre: Complex64 = self.prefactor.iter().map(|p| (z[0] - p.point).powu(p.order)).product();
        self.exponents
            .iter()
            .map(|k| {
                k.iter().zip(z).zip(&self.origin).map(|((&ki, zi), oi)| (zi - oi).powu(ki)).product::<Complex64>() * pre
            })
            .collect()
    }

    /// Element values at a quadrature node; offsets from an anchoring pole
    /// are used as given.
    fn elements_at(&self, nodes: &[Node]) -> Vec<Complex64> {
        let mut pre = Complex64::new(1.0, 0.0);
        for p in &self.prefactor {
            let n = &nodes[0];
            let d = if n.anchor == p.point && n.pole.is_some() { n.u } else { (n.anchor - p.point) + n.u };
            pre *= d.powu(p.order);
        }
        self.exponents
            .iter()
            .map(|k| {
                k.iter()
                    .zip(nodes)
                    .zip(&self.origin)
                    .map(|((&ki, n), oi)| {
                        let d = if n.anchor == *oi && n.pole.is_some() { n.u } else { (n.anchor - oi) + n.u };
                        d.powu(ki)
                    })
                    .product::<Complex64>()
                    * pre
            })
            .collect()
    }

    pub fn kernel(&self, z: &[Complex64]) -> f64 {
        if self.coeffs.ncols() == 0 {
            return 0.0;
        }
        let b = self.elements(z);
        (0..self.coeffs.ncols())
            .map(|j| (0..b.len()).map(|i| self.coeffs[(i, j)] * b[i]).sum::<Complex64>().norm_sqr())
            .sum()
    }

    /// Highest-degree exponent of each element.
    pub fn admissible(&self) -> Vec<Vec<u32>> {
        let m: u32 = self.prefactor.iter().map(|p| p.order).sum();
        self.exponents
            .iter()
            .map(|k| {
                let mut e = k.clone();
                if !e.is_empty() {
                    e[0] += m;
                }
                e
            })
            .collect()
    }

    /// Whether every element vanishes at `z`, decided from the structure:
    /// `z` is a pole of the weight whose required vanishing order is positive.
    pub fn vanishes_structurally(&self, phi_w: &PshExpr, z: &[Complex64]) -> bool {
        if self.exponents.is_empty() {
            return true;
        }
        if phi_w.eval(z) > f64::NEG_INFINITY {
            return false;
        }
        if z.len() == 1 {
            let near = self
                .prefactor
                .iter()
                .min_by(|a, b| (a.point - z[0]).norm().total_cmp(&(b.point - z[0]).norm()));
            return near.is_some_and(|p| p.order > 0);
        }
        // several variables: the monomial span at the pole misses 1
        self.exponents.iter().all(|k| k.iter().any(|&x| x > 0)) && z == self.origin.as_slice()
    }

    /// Builds the truncated weighted space for `φ_w` on `domain`.
    pub fn build(phi_w: &PshExpr, c: f64, domain: &Polydisc, params: &BasisParams) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidInput("c must be positive".into()));
        }
        let dim = phi_w.dim();
        if dim != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: dim });
        }
        if dim > 2 {
            return Err(Error::InvalidInput("fibers of dimension at most 2".into()));
        }
        let cap = params.degree_cap;
        let mut prefactor = Vec::new();
        let mut origin = domain.center.clone();
        let mut exponents = exponents_up_to(dim, cap);
        let mut criterion = Criterion::Unweighted;
        let mut singular: Vec<Vec<Complex64>> = Vec::new();

        if dim == 1 {
            let (cc, r) = (domain.center[0], domain.radii[0]);
            let poles: Vec<(Complex64, Option<f64>)> = match analytic_poles_1d(phi_w, cc, r)? {
                Some(p) => {
                    criterion = Criterion::Exact;
                    p.into_iter().map(|(a, nu)| (a, Some(nu))).collect()
                }
                None => {
                    criterion = Criterion::AnnulusTest;
                    candidate_poles(phi_w, domain, &params.poles).into_iter().map(|p| (p[0], None)).collect()
                }
            };
            for (a, nu) in poles {
                let order = match nu {
                    Some(nu) => required_order(c, nu),
                    None => annulus_order(phi_w, a, c, r - (a - cc).norm(), cap)?,
                };
                singular.push(vec![a]);
                prefactor.push(PoleFactor { point: a, order, lelong: nu });
            }
            if singular.is_empty() {
                criterion = Criterion::Unweighted;
            }
            let m: usize = prefactor.iter().map(|p| p.order as usize).sum();
            exponents = if m > cap { Vec::new() } else { exponents_up_to(1, cap - m) };
        } else {
            let poles = candidate_poles(phi_w, domain, &params.poles);
            if poles.len() > 1 {
                return Err(Error::Precondition("two-variable fibers with several poles".into()));
            }
            if let Some(a) = poles.into_iter().next() {
                let exps = phi_w.as_analytic().and_then(|f| f.monomial_exponents_at(&a).map(|e| (f.alpha, e)));
                let Some((alpha, exps)) = exps else {
                    return Err(Error::Precondition(
                        "two-variable fibers need monomial generators at the pole".into(),
                    ));
                };
                let np = NewtonPolyhedron::new(exps)?;
                let lambda = BigRational::from_float(c * alpha)
                    .ok_or_else(|| Error::InvalidInput("non-finite exponent".into()))?;
                exponents.retain(|k| np.in_multiplier_ideal(k, &lambda));
                origin = a.clone();
                criterion = Criterion::Exact;
                singular.push(a);
            }
        }

        let mut basis = WeightedBasis {
            degree_cap: cap,
            c,
            origin,
            prefactor,
            exponents,
            criterion,
            norms: Vec::new(),
            gram: DMatrix::zeros(0, 0),
            coeffs: DMatrix::zeros(0, 0),
            discarded: 0,
            nodes: 0,
        };
        let nb = basis.exponents.len();
        if nb == 0 {
            return Ok(basis);
        }

        let mut rule = params.rule.clone().unwrap_or_else(|| if dim == 1 { DiscRule::default() } else { DiscRule::coarse() });
        rule.n_theta = rule.n_theta.max(2 * cap + if dim == 1 { 16 } else { 4 });
        let rules: Vec<Vec<Node>> = (0..dim)
            .map(|i| {
                let pts: Vec<Complex64> = singular.iter().map(|p| p[i]).collect();
                disc_rule(domain.center[i], domain.radii[i], &pts, &rule)
            })
            .collect();
        let recentered: Vec<PshExpr> = singular.iter().map(|p| phi_w.recenter(p)).collect();
        basis.nodes = rules.iter().map(|r| r.len()).product();

        // tensor nodes are streamed: the outer rule is split across threads
        let tail: usize = rules[1..].iter().map(|r| r.len()).product();
        let chunks: Vec<Result<DMatrix<Complex64>>> = rules[0]
            .par_chunks(64)
            .map(|chunk| {
                let mut g = DMatrix::<Complex64>::zeros(nb, nb);
                let mut ns = vec![rules[0][0]; dim];
                for n0 in chunk {
                    ns[0] = *n0;
                    for t in 0..tail {
                        let mut w = n0.w;
                        if dim == 2 {
                            ns[1] = rules[1][t];
                            w *= ns[1].w;
                        }
                        let phi = weight_exponent(phi_w, &recentered, &singular, &ns);
                        if phi == f64::NEG_INFINITY {
                            return Err(Error::Degenerate("quadrature node on the polar set".into()));
                        }
                        let wt = w * (-2.0 * c * phi).exp();
                        let b = basis.elements_at(&ns);
                        for i in 0..nb {
                            let bi = b[i].conj() * wt;
                            for j in 0..nb {
                                g[(i, j)] += bi * b[j];
                            }
                        }
                    }
                }
                Ok(g)
            })
            .collect();
        let mut gram = DMatrix::<Complex64>::zeros(nb, nb);
        for g in chunks {
            gram += g?;
        }
        // exact Hermitian symmetry
        for i in 0..nb {
            gram[(i, i)] = Complex64::new(gram[(i, i)].re, 0.0);
            for j in 0..i {
                let v = 0.5 * (gram[(i, j)] + gram[(j, i)].conj());
                gram[(i, j)] = v;
                gram[(j, i)] = v.conj();
            }
        }
        basis.norms = (0..nb).map(|i| gram[(i, i)].re).collect();

        let eig = SymmetricEigen::new(gram.clone());
        let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = lmin / lmax;
        if !(lmax > 0.0) || !(ratio >= params.singular) {
            return Err(Error::Conditioning { cap, ratio });
        }
        let keep: Vec<usize> = (0..nb).filter(|&j| eig.eigenvalues[j] >= params.discard * lmax).collect();
        let mut coeffs = DMatrix::<Complex64>::zeros(nb, keep.len());
        for (col, &j) in keep.iter().enumerate() {
            let s = 1.0 / eig.eigenvalues[j].sqrt();
            for i in 0..nb {
                coeffs[(i, col)] = eig.eigenvectors[(i, j)] * s;
            }
        }
        basis.discarded = nb - keep.len();
        basis.gram = gram;
        basis.coeffs = coeffs;
        Ok(basis)
    }
}

/// `φ_w` at a tensor node, through the expression recentered at the pole
/// the node is anchored to.
fn weight_exponent(phi: &PshExpr, recentered: &[PshExpr], singular: &[Vec<Complex64>], nodes: &[Node]) -> f64 {
    for (p, rec) in singular.iter().zip(recentered) {
        if nodes.iter().zip(p).any(|(n, a)| n.pole.is_some() && n.anchor == *a) {
            let v: Vec<Complex64> = nodes.iter().zip(p).map(|(n, a)| (n.anchor - a) + n.u).collect();
            return rec.eval(&v);
        }
    }
    let z: Vec<Complex64> = nodes.iter().map(|n| n.z()).collect();
    phi.eval(&z)
}

/// Least `m` with `∫ |u|^{2m} e^{-2cφ(a+u)}` convergent near `u = 0`.
fn annulus_order(phi: &PshExpr, a: Complex64, c: f64, room: f64, cap: usize) -> Result<u32> {
    let rec = phi.recenter(&[a]);
    let radius = (0.5 * room).min(0.25);
    for m in 0..=(cap as u32 + 1) {
        let h = |u: &[Complex64]| 2.0 * m as f64 * u[0].norm().ln() - 2.0 * c * rec.eval(u);
        let v = SpatialAnnuli::build(&h, radius, 40, 0.98).classify(1.0).verdict;
        if v != crate::invariants::Verdict::Divergent && v != crate::invariants::Verdict::Inconclusive {
            return Ok(m);
        }
    }
    Ok(cap as u32 + 1)
}

/// Weighted spaces over a sample of fibers of a family.
#[derive(Clone, Debug)]
pub struct BergmanKernelField {
    pub family: PshFamily,
    pub c: f64,
    pub params: BasisParams,
    pub fibers: Vec<(Vec<Complex64>, WeightedBasis)>,
}

impl BergmanKernelField {
    pub fn build(family: &PshFamily, c: f64, params: &BasisParams, ws: &[Vec<Complex64>]) -> Result<Self> {
        let mut uniq: Vec<Vec<Complex64>> = Vec::new();
        for w in ws {
            if !uniq.contains(w) {
                uniq.push(w.clone());
            }
        }
        let fibers = uniq
            .par_iter()
            .map(|w| {
                let phi_w = family.restrict_fiber(w)?;
                Ok((w.clone(), WeightedBasis::build(&phi_w, c, &family.z_domain(), params)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { family: family.clone(), c, params: params.clone(), fibers })
    }

    /// The cached fiber at `w`, or a freshly built one.
    pub fn fiber(&self, w: &[Complex64]) -> Result<Cow<'_, WeightedBasis>> {
        if let Some((_, b)) = self.fibers.iter().find(|(v, _)| v.as_slice() == w) {
            return Ok(Cow::Borrowed(b));
        }
        let phi_w = self.family.restrict_fiber(w)?;
        Ok(Cow::Owned(WeightedBasis::build(&phi_w, self.c, &self.family.z_domain(), &self.params)?))
    }

    pub fn kernel_at(&self, z: &[Complex64], w: &[Complex64]) -> Result<f64> {
        if !self.family.z_domain().contains(z) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.fiber(w)?.kernel(z))
    }
}

/// Grid points of the family's domain where the truncated kernel vanishes,
/// decided structurally.
pub fn pole_scan(field: &BergmanKernelField, grid: &GridSpec) -> Result<LevelSetCloud> {
    let fam = &field.family;
    let pts = grid.points(&fam.domain)?;
    let n = fam.n_z;
    let ws: Vec<Vec<Complex64>> = pts.iter().map(|p| p[n..].to_vec()).collect();
    let extra = BergmanKernelField::build(fam, field.c, &field.params, &ws)?;
    let members = pts
        .par_iter()
        .map(|p| {
            let (z, w) = p.split_at(n);
            let basis = extra.fiber(w)?;
            let phi_w = fam.restrict_fiber(w)?;
            Ok(basis.vanishes_structurally(&phi_w, z).then(|| CloudPoint { point: p.clone(), value: 0.0, uncertainty: 0.0 }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSetCloud {
        kind: Kind::Y,
        c: field.c,
        grid: grid.clone(),
        scanned: pts.len(),
        points: members.into_iter().flatten().collect(),
        borderline: Vec::new(),
        unresolved: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Circle in fiber coordinate `i`, parameter frozen.
    Z(usize),
    /// Circle in parameter coordinate `i`, fiber point frozen.
    W(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleSample {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub direction: Direction,
    pub radius: f64,
    #[serde(default = "default_circle_points")]
    pub n: usize,
}

fn default_circle_points() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleResult {
    #[serde(with = "crate::ext_f64")]
    pub center: f64,
    #[serde(with = "crate::ext_f64")]
    pub mean: f64,
    /// `log K(center) − mean`; positive values violate the sub-mean-value inequality.
    #[serde(with = "crate::ext_f64")]
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPshReport {
    #[serde(with = "crate::ext_f64")]
    pub worst: f64,
    pub samples: Vec<CircleResult>,
}

/// Sub-mean-value test of `log K` on circles in `z` and in `w`.
pub fn log_psh_check(field: &BergmanKernelField, samples: &[CircleSample]) -> Result<LogPshReport> {
    let results = samples
        .iter()
        .map(|s| {
            let center = field.kernel_at(&s.z, &s.w)?.ln();
            let circle: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..s.n)
                .map(|k| {
                    let e = Complex64::from_polar(s.radius, std::f64::consts::TAU * k as f64 / s.n as f64);
                    let (mut z, mut w) = (s.z.clone(), s.w.clone());
                    match s.direction {
                        Direction::Z(i) => z[i] += e,
                        Direction::W(i) => w[i] += e,
                    }
                    (z, w)
                })
                .collect();
            let vals = circle
                .par_iter()
                .map(|(z, w)| Ok(field.kernel_at(z, w)?.ln()))
                .collect::<Result<Vec<f64>>>()?;
            let mean = vals.iter().sum::<f64>() / s.n as f64;
            let violation = if center == f64::NEG_INFINITY { f64::NEG_INFINITY } else { center - mean };
            Ok(CircleResult { center, mean, violation })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.violation).fold(f64::NEG_INFINITY, f64::max);
    Ok(LogPshReport { worst, samples: results })
}
