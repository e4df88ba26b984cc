//! Sparse multivariate complex polynomials.
//!
//! Terms are kept sorted by exponent with zero coefficients dropped, so two
//! polynomials with the same terms compare equal. Evaluation comes in two
//! flavours: plain complex arithmetic and a log-magnitude form that factors
//! out the largest term, which stays finite for |f| far below `f64::MIN_POSITIVE`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent multi-index of a monomial.
pub type Exponent = Vec<u32>;

/// Relative size below which a recentered coefficient counts as cancelled.
const CANCEL_TOL: f64 = 1e-12;
/// `log_abs` sums directly while the largest term is within `e^{±600}`.
const DIRECT_RANGE: f64 = 600.0;

#[derive(Clone, PartialEq)]
pub struct ComplexPoly {
    dim: usize,
    terms: Vec<(Exponent, Complex64)>,
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexPoly[{}](", self.dim)?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)z^{:?}", c.re, c.im, e)?;
        }
        write!(f, ")")
    }
}

impl ComplexPoly {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "polynomial dimension must be positive");
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::monomial(dim, vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function `z_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(dim, e, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(dim: usize, exp: Exponent, c: Complex64) -> Self {
        assert_eq!(exp.len(), dim);
        let mut p = Self::zero(dim);
        if c != Complex64::new(0.0, 0.0) {
            p.terms.push((exp, c));
        }
        p
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, merging repeats.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::InvalidInput("polynomial dimension must be positive".into()));
        }
        let mut map: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.len() });
            }
            *map.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self::from_map(dim, map))
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real_terms(dim: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        Self::from_terms(
            dim,
            terms.iter().map(|(e, c)| (e.to_vec(), Complex64::new(*c, 0.0))),
        )
    }

    fn from_map(dim: usize, map: BTreeMap<Exponent, Complex64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        Self { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Exponent, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e[var]).max()
    }

    pub fn coefficient(&self, exp: &[u32]) -> Complex64 {
        self.terms
            .binary_search_by(|(e, _)| e.as_slice().cmp(exp))
            .map(|i| self.terms[i].1)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut map: BTreeMap<Exponent, Complex64> = self.terms.iter().cloned().collect();
        for (e, c) in &other.terms {
            *map.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Self::from_map(self.dim, map)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut p = self.clone();
        for t in &mut p.terms {
            t.1 *= s;
        }
        p.terms.retain(|(_, c)| *c != Complex64::new(0.0, 0.0));
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut map: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *map.entry(e).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        Self::from_map(self.dim, map)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (zi, &ei) in z.iter().zip(e) {
                if ei > 0 {
                    t *= zi.powu(ei);
                }
            }
            acc += t;
        }
        acc
    }

    /// `ln |f(z)|`, computed term by term in log-magnitude form.
    ///
    /// Returns `-inf` exactly when every term vanishes or the terms cancel.
    pub fn log_abs(&self, z: &[Complex64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        if self.terms.is_empty() {
            return f64::NEG_INFINITY;
        }
        let logs: Vec<f64> = z.iter().map(|zi| zi.norm().ln()).collect();
        let args: Vec<f64> = z.iter().map(|zi| zi.arg()).collect();
        let mut lmax = f64::NEG_INFINITY;
        // (log magnitude, phase) per surviving term
        let mut parts: Vec<(f64, f64)> = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let mut l = c.norm().ln();
            let mut th = c.arg();
            let mut vanishes = false;
            for i in 0..self.dim {
                let ei = e[i];
                if ei == 0 {
                    continue;
                }
                if logs[i] == f64::NEG_INFINITY {
                    vanishes = true;
                    break;
                }
                l += ei as f64 * logs[i];
                th += ei as f64 * args[i];
            }
            if vanishes {
                continue;
            }
            lmax = lmax.max(l);
            parts.push((l, th));
        }
        if parts.is_empty() {
            return f64::NEG_INFINITY;
        }
        if parts.len() == 1 {
            return parts[0].0;
        }
        // terms of moderate size: direct summation keeps exact cancellation exact
        if lmax.abs() < DIRECT_RANGE {
            let v = self.eval(z).norm();
            return if v == 0.0 { f64::NEG_INFINITY } else { v.ln() };
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (l, th) in parts {
            s += Complex64::from_polar((l - lmax).exp(), th);
        }
        let n = s.norm();
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            lmax + n.ln()
        }
    }

    /// Expansion of `f(x + u)` as a polynomial in `u`.
    ///
    /// Coefficients that cancel to within rounding of the contributing terms
    /// are dropped, so a point of the zero set yields an exact zero constant term.
    pub fn recenter(&self, x: &[Complex64]) -> Self {
        assert_eq!(x.len(), self.dim);
        let mut map: BTreeMap<Exponent, (Complex64, f64)> = BTreeMap::new();
        for (e, c) in &self.terms {
            // per-variable expansions (x_i + u_i)^{e_i}
            let mut partial: Vec<(Exponent, Complex64)> = vec![(vec![0; self.dim], *c)];
            for i in 0..self.dim {
                let ei = e[i];
                if ei == 0 {
                    continue;
                }
                let mut next = Vec::with_capacity(partial.len() * (ei as usize + 1));
                for (pe, pc) in &partial {
                    for k in 0..=ei {
                        let coef = binomial(ei, k) * x[i].powu(ei - k);
                        if coef == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne[i] = k;
                        next.push((ne, pc * coef));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                let entry = map.entry(pe).or_insert((Complex64::new(0.0, 0.0), 0.0));
                entry.0 += pc;
                entry.1 += pc.norm();
            }
        }
        let terms = map
            .into_iter()
            .filter(|(_, (c, mag))| c.norm() > CANCEL_TOL * mag)
            .map(|(e, (c, _))| (e, c))
            .collect();
        Self { dim: self.dim, terms }
    }

    /// Least total degree of a nonzero term of `f` recentered at `x`.
    pub fn vanishing_order(&self, x: &[Complex64]) -> Result<u32> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let r = self.recenter(x);
        r.terms
            .iter()
            .map(|(e, _)| e.iter().sum())
            .min()
            .ok_or(Error::ZeroPolynomial)
    }

    /// Substitutes `values[i]` for every variable with `Some`, keeping the
    /// remaining variables in their original order.
    pub fn partial_eval(&self, values: &[Option<Complex64>]) -> Self {
        assert_eq!(values.len(), self.dim);
        let keep: Vec<usize> = (0..self.dim).filter(|&i| values[i].is_none()).collect();
        let new_dim = keep.len().max(1);
        let mut map: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut coef = *c;
            for (i, v) in values.iter().enumerate() {
                if let Some(v) = v {
                    if e[i] > 0 {
                        coef *= v.powu(e[i]);
                    }
                }
            }
            let mut ne: Exponent = keep.iter().map(|&i| e[i]).collect();
            if ne.is_empty() {
                ne.push(0);
            }
            *map.entry(ne).or_insert(Complex64::new(0.0, 0.0)) += coef;
        }
        Self::from_map(new_dim, map)
    }

    /// Freezes the trailing variables at `w`, leaving a polynomial in the leading ones.
    pub fn freeze_tail(&self, w: &[Complex64]) -> Self {
        let n = self.dim - w.len();
        let vals: Vec<Option<Complex64>> = (0..self.dim)
            .map(|i| if i < n { None } else { Some(w[i - n]) })
            .collect();
        self.partial_eval(&vals)
    }

    /// Embeds into `new_dim` variables, sending variable `i` to `map[i]`.
    pub fn embed(&self, new_dim: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.dim);
        let terms = self.terms.iter().map(|(e, c)| {
            let mut ne = vec![0; new_dim];
            for (i, &ei) in e.iter().enumerate() {
                ne[map[i]] += ei;
            }
            (ne, *c)
        });
        Self::from_terms(new_dim, terms).expect("embedding preserves dimensions")
    }

    /// Coefficients of a univariate polynomial, lowest degree first.
    pub fn univariate_coeffs(&self) -> Vec<Complex64> {
        assert_eq!(self.dim, 1);
        let deg = self.total_degree().unwrap_or(0) as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] = *c;
        }
        out
    }

    /// Distinct roots of a univariate polynomial with their multiplicities.
    pub fn roots(&self) -> Vec<(Complex64, u32)> {
        roots_with_multiplicity(&self.univariate_coeffs())
    }
}

fn binomial(n: u32, k: u32) -> Complex64 {
    let mut b = 1.0f64;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    Complex64::new(b.round(), 0.0)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// Aberth iteration followed by clustering; multiple roots are refined as
/// simple roots of the appropriate derivative.
pub fn roots_with_multiplicity(coeffs: &[Complex64]) -> Vec<(Complex64, u32)> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    // factor out the root at zero exactly
    let mut zero_mult = 0u32;
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        zero_mult += 1;
    }
    let mut out = Vec::new();
    if zero_mult > 0 {
        out.push((Complex64::new(0.0, 0.0), zero_mult));
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return out;
    }
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let bound = 1.0 + monic[..deg].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
            Complex64::from_polar(0.5 * bound, th)
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        s += 1.0 / d;
                    }
                }
            }
            let step = ratio / (1.0 - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    // cluster
    let scale = 1.0 + z.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let tol = 1e-5 * scale;
    let mut used = vec![false; deg];
    for i in 0..deg {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        for j in i + 1..deg {
            if !used[j] && (z[j] - z[i]).norm() < tol {
                used[j] = true;
                members.push(j);
            }
        }
        let m = members.len() as u32;
        let mut center =
            members.iter().map(|&k| z[k]).sum::<Complex64>() / members.len() as f64;
        // Newton on f^{(m-1)}, where the cluster is a simple root
        let mut d = monic.clone();
        for _ in 1..m {
            d = derivative(&d);
        }
        for _ in 0..50 {
            let (p, dp) = horner(&d, center);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            center -= step;
            if step.norm() < 1e-17 * (1.0 + center.norm()) {
                break;
            }
        }
        out.push((center, m));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct TermDef {
    exp: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyDef {
    dim: usize,
    terms: Vec<TermDef>,
}

impl Serialize for ComplexPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyDef {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermDef { exp: e.clone(), re: c.re, im: c.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let def = PolyDef::deserialize(d)?;
        ComplexPoly::from_terms(
            def.dim,
            def.terms.into_iter().map(|t| (t.exp, Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}
