//! Ball-supremum approximation `φ_k(z, w, ξ) = sup_{B(z,|ξ|)} φ(·, w)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::lelong::sphere_directions;
use crate::invariants::{cse_bisection_centered, lelong, CseParams, InvariantEstimate, Method, RadialParams};
use crate::psh::{PshExpr, PshFamily, PshFn};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallSampling {
    /// Interior points per complex dimension.
    pub interior: usize,
    /// Boundary-sphere points per complex dimension.
    pub sphere: usize,
    /// One more interior pass around the argmax with a quarter of the radius.
    pub refine: bool,
    pub seed: u64,
}

impl Default for BallSampling {
    fn default() -> Self {
        Self { interior: 512, sphere: 256, refine: true, seed: 0xba11 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxFamily {
    pub base: PshFamily,
    pub k: usize,
    pub sampling: BallSampling,
}

/// `a·log|z − pole| + b` with `a ≥ 0`; `a = 0` is a constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Radial {
    pub a: f64,
    pub b: f64,
    pub pole: Vec<Complex64>,
}

impl Radial {
    fn sup_on_ball(&self, z: &[Complex64], t: f64) -> f64 {
        if self.a == 0.0 {
            return self.b;
        }
        let d = z.iter().zip(&self.pole).map(|(x, p)| (x - p).norm_sqr()).sum::<f64>().sqrt();
        self.a * (d + t).ln() + self.b
    }
}

/// Recognizes fiber functions radial about one pole.
pub fn radial_form(phi: &PshExpr) -> Option<Radial> {
    let n = phi.dim();
    match phi {
        PshExpr::Const { value, .. } => Some(Radial { a: 0.0, b: *value, pole: vec![Complex64::new(0.0, 0.0); n] }),
        PshExpr::Analytic(s) => {
            let gens: Vec<_> = s.gens.iter().filter(|g| !g.is_zero()).collect();
            if n == 1 && gens.len() == 1 {
                let g = gens[0];
                let deg = g.total_degree()?;
                let lead = g.coefficient(&[deg]);
                if deg == 0 {
                    return Some(Radial { a: 0.0, b: s.alpha * lead.norm().ln(), pole: vec![Complex64::new(0.0, 0.0)] });
                }
                let roots = g.roots();
                if roots.len() != 1 || roots[0].1 != deg {
                    return None;
                }
                // exact check that g = lead·(z − p)^deg
                let p = roots[0].0;
                let shifted = g.recenter(&[p]);
                if shifted.terms().len() != 1 {
                    return None;
                }
                return Some(Radial { a: s.alpha * deg as f64, b: s.alpha * lead.norm().ln(), pole: vec![p] });
            }
            // generators c·(z_i − p_i), one per coordinate, with a common |c|
            if gens.len() != n {
                return None;
            }
            let mut pole = vec![Complex64::new(0.0, 0.0); n];
            let mut scale = None;
            let mut seen = vec![false; n];
            for g in &gens {
                if g.total_degree()? != 1 {
                    return None;
                }
                let lin: Vec<_> = g.terms().iter().filter(|(e, _)| e.iter().sum::<u32>() == 1).collect();
                if lin.len() != 1 {
                    return None;
                }
                let i = lin[0].0.iter().position(|&e| e == 1)?;
                if seen[i] {
                    return None;
                }
                seen[i] = true;
                let ci = lin[0].1;
                pole[i] = -g.coefficient(&vec![0; n]) / ci;
                match scale {
                    None => scale = Some(ci.norm()),
                    Some(m) if m == ci.norm() => {}
                    _ => return None,
                }
            }
            Some(Radial { a: s.alpha, b: s.alpha * scale?.ln(), pole })
        }
        PshExpr::Sum(terms) => {
            let mut acc: Option<Radial> = None;
            for (wt, e) in terms {
                let r = radial_form(e)?;
                acc = Some(match acc {
                    None => Radial { a: wt * r.a, b: wt * r.b, pole: r.pole },
                    Some(s) => {
                        if s.a != 0.0 && r.a != 0.0 && s.pole != r.pole {
                            return None;
                        }
                        let pole = if s.a != 0.0 { s.pole } else { r.pole };
                        Radial { a: s.a + wt * r.a, b: s.b + wt * r.b, pole }
                    }
                });
            }
            acc
        }
        _ => None,
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// `count` Halton points of the unit ball of `C^n`, by rejection from the cube.
pub fn halton_ball(n: usize, count: usize, skip: u64) -> Vec<Vec<Complex64>> {
    assert!(2 * n <= PRIMES.len(), "ball dimension too large for the Halton table");
    let mut out = Vec::with_capacity(count);
    let mut i = skip + 1;
    while out.len() < count {
        let x: Vec<f64> = (0..2 * n).map(|d| 2.0 * radical_inverse(i, PRIMES[d]) - 1.0).collect();
        i += 1;
        if x.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            out.push(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
        }
    }
    out
}

impl ApproxFamily {
    pub fn new(base: PshFamily, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be a positive integer".into()));
        }
        Ok(Self { base, k, sampling: BallSampling::default() })
    }

    pub fn n(&self) -> usize {
        self.base.n_z
    }

    fn check_ball(&self, z: &[Complex64], t: f64) -> Result<()> {
        let d = self.base.z_domain();
        let inside = z.iter().zip(&d.center).zip(&d.radii).all(|((x, c), r)| (x - c).norm() + t < *r);
        if z.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: z.len() });
        }
        if !(t >= 0.0) || !inside {
            return Err(Error::OutsideDomain);
        }
        Ok(())
    }

    /// `φ_k(z, w, ξ)` for `|ξ| = t`.
    pub fn phi_k(&self, z: &[Complex64], w: &[Complex64], t: f64) -> Result<f64> {
        self.check_ball(z, t)?;
        let fiber = self.base.restrict_fiber(w)?;
        Ok(self.fiber_sup(&fiber, radial_form(&fiber).as_ref(), z, t))
    }

    fn fiber_sup(&self, fiber: &PshExpr, radial: Option<&Radial>, z: &[Complex64], t: f64) -> f64 {
        if t == 0.0 {
            return fiber.eval(z);
        }
        if let Some(r) = radial {
            return r.sup_on_ball(z, t);
        }
        let n = z.len();
        let s = &self.sampling;
        let at = |u: &[Complex64], rad: f64, c: &[Complex64]| -> Vec<Complex64> {
            c.iter().zip(u).map(|(c, u)| c + u * rad).collect()
        };
        let mut best = (fiber.eval(z), z.to_vec());
        let consider = |best: &mut (f64, Vec<Complex64>), p: Vec<Complex64>| {
            let v = fiber.eval(&p);
            if v > best.0 {
                *best = (v, p);
            }
        };
        for u in halton_ball(n, s.interior * n, 0) {
            consider(&mut best, at(&u, t, z));
        }
        for u in sphere_directions(n, s.sphere * n, s.seed) {
            consider(&mut best, at(&u, t, z));
        }
        if s.refine {
            let center = best.1.clone();
            for u in halton_ball(n, s.interior * n, (s.interior * n * 4) as u64) {
                let mut p = at(&u, t / 4.0, &center);
                // pull points back into the closed ball
                let d = p.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                if d > t {
                    p = z.iter().zip(&p).map(|(c, q)| c + (q - c) * (t / d)).collect();
                }
                consider(&mut best, p);
            }
        }
        best.0
    }

    /// `u ↦ φ_k(z + u_z, w, |u_ξ|)` on `C^{n+k}`, centered at `(z, 0)`.
    pub fn centered(&self, z: &[Complex64], w: &[Complex64]) -> Result<Centered<'_>> {
        self.check_ball(z, 0.0)?;
        let fiber = self.base.restrict_fiber(w)?;
        let radial = radial_form(&fiber);
        Ok(Centered { fam: self, z: z.to_vec(), fiber, radial })
    }
}

pub struct Centered<'a> {
    fam: &'a ApproxFamily,
    z: Vec<Complex64>,
    fiber: PshExpr,
    radial: Option<Radial>,
}

impl Centered<'_> {
    pub fn is_radial(&self) -> bool {
        self.radial.is_some()
    }
}

impl PshFn for Centered<'_> {
    fn dim(&self) -> usize {
        self.fam.n() + self.fam.k
    }

    fn eval(&self, u: &[Complex64]) -> f64 {
        let n = self.fam.n();
        let z: Vec<Complex64> = self.z.iter().zip(&u[..n]).map(|(a, b)| a + b).collect();
        let t = u[n..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        self.fam.fiber_sup(&self.fiber, self.radial.as_ref(), &z, t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub k: usize,
    pub n: usize,
    pub nu: InvariantEstimate,
    /// `c_{(z,0)}(φ_{k,w})`.
    pub c: InvariantEstimate,
    #[serde(with = "crate::ext_f64")]
    pub lower: f64,
    #[serde(with = "crate::ext_f64")]
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Singularity exponent of `φ_k` at `(z, 0)`: `+∞` where `φ(z, w)` is
/// finite, bisection on the `(n+k)`-variable function otherwise.
pub fn approx_cse(fam: &ApproxFamily, z: &[Complex64], w: &[Complex64], cse: &CseParams) -> Result<InvariantEstimate> {
    let f = fam.centered(z, w)?;
    let dim = f.dim();
    let reach = 2.0f64.sqrt() * cse.radius;
    fam.check_ball(z, reach).map_err(|_| {
        Error::Precondition(format!("integration ball of radius {} leaves the domain", cse.radius))
    })?;
    if f.eval(&vec![Complex64::new(0.0, 0.0); dim]) > f64::NEG_INFINITY {
        let mut e = InvariantEstimate::exact(f64::INFINITY, Method::ExactMultiplicity);
        e.meta.note = Some("finite at point".into());
        return Ok(e);
    }
    Ok(cse_bisection_centered(&f, cse))
}

/// Checks `k/ν ≤ c_{(z,0)}(φ_{k,w}) ≤ (n+k)/ν` within the reported
/// uncertainties; a bisection estimate is also given its resolution `tol`.
pub fn sandwich_check(
    fam: &ApproxFamily,
    z: &[Complex64],
    w: &[Complex64],
    radial: &RadialParams,
    cse: &CseParams,
) -> Result<SandwichReport> {
    let fiber = fam.base.restrict_fiber(w)?;
    let nu = lelong(&fiber, z, radial)?;
    if !(nu.value > 0.0) || nu.value.is_infinite() {
        return Err(Error::Precondition(format!("need 0 < ν < ∞, got {}", nu.value)));
    }
    let c = approx_cse(fam, z, w, cse)?;
    let (n, k) = (fam.n(), fam.k);
    let lower = k as f64 / nu.value;
    let upper = (n + k) as f64 / nu.value;
    // first-order spread of the bounds from the uncertainty on ν
    let rel = nu.uncertainty / nu.value;
    let slack = c.uncertainty + if c.method.is_exact() { 0.0 } else { cse.tol };
    let lower_ok = c.value + slack >= lower * (1.0 - rel);
    let upper_ok = c.value - slack <= upper * (1.0 + rel);
    Ok(SandwichReport { k, n, nu, c, lower, upper, lower_ok, upper_ok })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelIdentitySample {
    pub point: Vec<Complex64>,
    pub in_x: bool,
    /// `c_{(z,0)}((n+k)φ_{k,w}) = c_{(z,0)}(φ_{k,w}) / (n+k)`.
    pub scaled: InvariantEstimate,
    pub in_y: bool,
    /// The exponent lies within its uncertainty of `1/c`.
    pub borderline: bool,
}

/// Compares `(z, w) ∈ X_c` with `c_{(z,0)}((n+k)φ_{k,w}) ≤ 1/c` at one point.
pub fn level_identity_sample(
    fam: &ApproxFamily,
    p: &[Complex64],
    c: f64,
    radial: &RadialParams,
    cse: &CseParams,
) -> Result<LevelIdentitySample> {
    let (z, w) = p.split_at(fam.n());
    let nu = lelong(&fam.base.restrict_fiber(w)?, z, radial)?;
    let mut scaled = approx_cse(fam, z, w, cse)?;
    let s = (fam.n() + fam.k) as f64;
    scaled.value /= s;
    scaled.uncertainty /= s;
    let in_y = scaled.value <= 1.0 / c;
    let borderline = (scaled.value - 1.0 / c).abs() <= scaled.uncertainty
        || (nu.uncertainty > 0.0 && (nu.value - c).abs() <= nu.uncertainty);
    Ok(LevelIdentitySample { point: p.to_vec(), in_x: nu.value >= c, scaled, in_y, borderline })
}

/// `max |e^{f(a)} − e^{f(b)}| / |a − b|^α` over the given pairs.
pub fn empirical_hoelder(pairs: &[(f64, f64, f64)], alpha: f64) -> f64 {
    pairs
        .iter()
        .filter(|(_, _, d)| *d > 0.0)
        .map(|(fa, fb, d)| (fa.exp() - fb.exp()).abs() / d.powf(alpha))
        .fold(0.0, f64::max)
}
