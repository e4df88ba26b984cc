//! Fixed quadrature rules.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("n >= 1");
    GaussLegendre::new(n).iter().map(|&(x, w)| (x, w)).collect()
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre(n).into_iter().map(|(x, w)| (m + h * x, h * w)).collect()
}

/// Smooth step: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
fn bump(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let x = 2.0 * (1.0 - t);
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

const TRANSITION: usize = 6;
const GRADING: u32 = 12;
const HOLE_THETA: f64 = 64.0;

/// Parameters of [`disc_rule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscRule {
    /// Gauss-Legendre nodes per radial panel.
    pub n_gl: usize,
    /// Angular nodes (trapezoid); raised where a hole needs resolving.
    pub n_theta: usize,
    /// Dyadic radial panels around each singular point.
    pub depth: usize,
    /// Radial panels of the smooth remainder.
    pub outer_panels: usize,
}

impl Default for DiscRule {
    fn default() -> Self {
        Self { n_gl: 8, n_theta: 64, depth: 60, outer_panels: 8 }
    }
}

impl DiscRule {
    /// A lighter rule for tensor products.
    pub fn coarse() -> Self {
        Self { n_gl: 4, n_theta: 12, depth: 16, outer_panels: 4 }
    }
}

/// A quadrature node `anchor + u`. Nodes near a singular point keep the
/// offset `u` separately, since `anchor + u` may round to `anchor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub anchor: Complex64,
    pub u: Complex64,
    /// Index into the singular points, or `None` for the remainder.
    pub pole: Option<usize>,
    pub w: f64,
}

impl Node {
    pub fn z(&self) -> Complex64 {
        self.anchor + self.u
    }
}

/// Nodes and weights for `∫_{|z−c|<R} f dV` where `f` may have integrable
/// point singularities at `singular`.
///
/// Each singular point `a` inside the disc gets a smooth cutoff `χ_a` of
/// radius `ρ_a`; `χ_a f` is integrated in polar coordinates about `a` on
/// dyadic radial panels, and `(1 − Σχ_a) f` in polar coordinates about `c`.
pub fn disc_rule(center: Complex64, radius: f64, singular: &[Complex64], rule: &DiscRule) -> Vec<Node> {
    let mut inside: Vec<Complex64> = Vec::new();
    let mut index: Vec<usize> = Vec::new();
    for (i, &a) in singular.iter().enumerate() {
        if (a - center).norm() < radius && inside.iter().all(|b| (a - b).norm() > 1e-14 * radius) {
            inside.push(a);
            index.push(i);
        }
    }
    let rho: Vec<f64> = inside
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut r = radius - (a - center).norm();
            for (j, &b) in inside.iter().enumerate() {
                if i != j {
                    r = r.min(0.5 * (a - b).norm());
                }
            }
            r.min(0.5 * radius)
        })
        .collect();
    let cut = |z: Complex64| -> f64 {
        inside.iter().zip(&rho).map(|(a, r)| bump((z - a).norm() / r)).sum()
    };
    let gl = gauss_legendre(rule.n_gl);
    let mut out = Vec::new();

    for ((&a, &r0), &pi) in inside.iter().zip(&rho).zip(&index) {
        let nt = rule.n_theta;
        let dt = TAU / nt as f64;
        // the cutoff transition [ρ/2, ρ] gets finer panels
        let mut panels: Vec<(f64, f64)> =
            (0..TRANSITION).map(|p| (r0 * (0.5 + 0.5 * p as f64 / TRANSITION as f64), r0 * (0.5 + 0.5 * (p + 1) as f64 / TRANSITION as f64))).collect();
        for i in 1..rule.depth {
            let hi = r0 * 0.5f64.powi(i as i32);
            panels.push((0.5 * hi, hi));
        }
        let mut radial: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in panels {
            radial.extend(gl.iter().map(|&(x, w)| (0.5 * (lo + hi) + 0.5 * (hi - lo) * x, 0.5 * (hi - lo) * w)));
        }
        // innermost disc: r = h t^p flattens r^γ for any γ > −1
        let h = r0 * 0.5f64.powi(rule.depth as i32);
        let p = GRADING as f64;
        for &(x, w) in &gl {
            let t = 0.5 * (1.0 + x);
            radial.push((h * t.powf(p), 0.5 * w * h * p * t.powf(p - 1.0)));
        }
        for (r, wr) in radial {
            let wr = wr * r * dt * bump(r / r0);
            for k in 0..nt {
                let t = dt * (k as f64 + 0.5);
                out.push(Node { anchor: a, u: Complex64::from_polar(r, t), pole: Some(pi), w: wr });
            }
        }
    }

    // breakpoints of the remainder: the hole boundaries
    let base_nt = rule.n_theta;
    let mut breaks = vec![0.0, radius];
    for (&a, &r0) in inside.iter().zip(&rho) {
        let d = (a - center).norm();
        for s in [d - r0, d - 0.5 * r0, d, d + 0.5 * r0, d + r0] {
            if s > 0.0 && s < radius {
                breaks.push(s);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-14 * radius);
    for win in breaks.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        // holes crossing this ring need their angular width resolved
        let mut nt = base_nt;
        let mut fine = false;
        for (c0, r0) in inside.iter().zip(&rho) {
            let d = (c0 - center).norm();
            if lo < d + r0 && hi > d - r0 {
                fine = true;
                if d > 0.0 {
                    nt = nt.max((HOLE_THETA * PI * d / r0).ceil() as usize);
                }
            }
        }
        let m = ((hi - lo) / radius * rule.outer_panels as f64)
            .ceil()
            .max(if fine { TRANSITION as f64 } else { 1.0 }) as usize;
        let dt = TAU / nt as f64;
        for p in 0..m {
            let a = lo + (hi - lo) * p as f64 / m as f64;
            let b = lo + (hi - lo) * (p + 1) as f64 / m as f64;
            for (r, w) in gauss_legendre_on(rule.n_gl, a, b) {
                for k in 0..nt {
                    let u = Complex64::from_polar(r, dt * (k as f64 + 0.5));
                    let rest = 1.0 - cut(center + u);
                    if rest > 0.0 {
                        out.push(Node { anchor: center, u, pole: None, w: w * r * dt * rest });
                    }
                }
            }
        }
    }
    out
}
