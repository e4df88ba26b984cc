//! Fitting the lowest-degree polynomials that vanish on a level-set cloud.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cloud::LevelSetCloud;
use crate::error::Result;
use crate::poly::Exponent;
use crate::psh::Polydisc;
use crate::{Complex64, ComplexPoly};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeParams {
    /// Largest total degree tried.
    pub cap: usize,
    /// Singular values below `cutoff · σ_max` span the fitted null space.
    pub cutoff: f64,
    /// A grid point lies on the locus when every fitted polynomial is below
    /// `locus_tol` relative to the sum of its term magnitudes there.
    pub locus_tol: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self { cap: 10, cutoff: 1e-8, locus_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeAttempt {
    pub degree: usize,
    pub monomials: usize,
    pub null_dim: usize,
    /// Grid points on the fitted locus outside the cloud.
    pub extra: usize,
    /// Cloud points off the fitted locus.
    pub missing: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub certified: bool,
    pub degree: Option<usize>,
    /// Fitted polynomials at the certified degree, scaled so the largest
    /// coefficient is 1.
    pub polys: Vec<ComplexPoly>,
    /// Largest relative value of a fitted polynomial on the cloud.
    pub residual: Option<f64>,
    pub attempts: Vec<DegreeAttempt>,
}

/// Exponents of total degree `≤ d` in `n` variables, graded.
pub fn monomials_upto(n: usize, d: usize) -> Vec<Exponent> {
    let mut out = Vec::new();
    for deg in 0..=d as u32 {
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, deg);
    }
    out
}

fn fill(out: &mut Vec<Exponent>, cur: &mut Vec<u32>, i: usize, left: u32) {
    if i + 1 == cur.len() {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e;
        fill(out, cur, i + 1, left - e);
    }
}

fn monomial_values(p: &[Complex64], exps: &[Exponent]) -> Vec<Complex64> {
    exps.iter()
        .map(|e| p.iter().zip(e).fold(Complex64::new(1.0, 0.0), |acc, (x, &k)| acc * x.powu(k)))
        .collect()
}

/// Relative size of the polynomial with coefficients `c` at a point.
fn relative_value(vals: &[Complex64], c: &[Complex64]) -> f64 {
    let (mut s, mut m) = (Complex64::new(0.0, 0.0), 0.0);
    for (v, a) in vals.iter().zip(c) {
        s += v * a;
        m += (v * a).norm();
    }
    if m == 0.0 {
        0.0
    } else {
        s.norm() / m
    }
}

/// Null space of the Vandermonde matrix of `rows`, as coefficient vectors.
fn null_space(rows: &[Vec<Complex64>], cols: usize, cutoff: f64) -> Vec<Vec<Complex64>> {
    // zero rows keep the full right-singular basis available
    let m = rows.len().max(cols);
    let mut a = DMatrix::<Complex64>::zeros(m, cols);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cutoff * smax)
        .map(|(i, _)| {
            let v: Vec<Complex64> = (0..cols).map(|j| vt[(i, j)].conj()).collect();
            // roundoff in vanishing coefficients would dominate at points
            // where the true terms are zero
            let big = v.iter().map(|a| a.norm()).fold(0.0, f64::max);
            v.into_iter().map(|a| if a.norm() > 1e-12 * big { a } else { Complex64::new(0.0, 0.0) }).collect()
        })
        .collect()
}

fn to_poly(n: usize, exps: &[Exponent], c: &[Complex64]) -> Result<ComplexPoly> {
    let big = c.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).copied().unwrap_or(Complex64::new(1.0, 0.0));
    ComplexPoly::from_terms(n, exps.iter().zip(c).map(|(e, a)| (e.clone(), a / big)))
}

/// Fits, for increasing total degree, the polynomials vanishing on the
/// cloud and compares their common zero set on the grid with the cloud.
/// Borderline and unresolved points are left out of both sides.
pub fn analyticity_probe(cloud: &LevelSetCloud, domain: &Polydisc, params: &ProbeParams) -> Result<ProbeReport> {
    let n = domain.dim();
    let grid: Vec<Vec<Complex64>> =
        cloud.grid.points(domain)?.into_iter().filter(|p| !cloud.is_excluded(p)).collect();
    let members: Vec<bool> = grid.iter().map(|p| cloud.contains(p)).collect();
    let mut attempts = Vec::new();
    for d in 0..=params.cap {
        let exps = monomials_upto(n, d);
        let vals: Vec<Vec<Complex64>> = grid.iter().map(|p| monomial_values(p, &exps)).collect();
        let rows: Vec<Vec<Complex64>> =
            vals.iter().zip(&members).filter(|(_, m)| **m).map(|(v, _)| v.clone()).collect();
        let null = null_space(&rows, exps.len(), params.cutoff);
        let mut att = DegreeAttempt { degree: d, monomials: exps.len(), null_dim: null.len(), extra: 0, missing: 0 };
        if null.is_empty() {
            attempts.push(att);
            continue;
        }
        let mut residual: f64 = 0.0;
        for (v, &m) in vals.iter().zip(&members) {
            let worst = null.iter().map(|c| relative_value(v, c)).fold(0.0, f64::max);
            let on = worst <= params.locus_tol;
            if m {
                residual = residual.max(worst);
            }
            match (on, m) {
                (true, false) => att.extra += 1,
                (false, true) => att.missing += 1,
                _ => {}
            }
        }
        let ok = att.extra == 0 && att.missing == 0;
        attempts.push(att);
        if ok {
            let polys = null.iter().map(|c| to_poly(n, &exps, c)).collect::<Result<Vec<_>>>()?;
            return Ok(ProbeReport { certified: true, degree: Some(d), polys, residual: Some(residual), attempts });
        }
    }
    Ok(ProbeReport { certified: false, degree: None, polys: Vec::new(), residual: None, attempts })
}
