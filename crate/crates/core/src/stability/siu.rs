//! Fiber limits of averaged integrals, and the pointwise lemma inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integral::{fiber_integral, singular_integral, zeros, DiscIntegral, FiberPowers, QuadParams, RationalPowerIntegrand};
use crate::error::{Error, Result};
use crate::invariants::integrability::Verdict;
use crate::invariants::newton::rational_to_f64;
use crate::psh::AnalyticSingularityPsh;
use crate::quadrature::gauss_legendre;
use crate::{Complex64, ComplexPoly};

const OUTER_RADIAL: usize = 8;
const OUTER_ANGLES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiuReport {
    pub r1: f64,
    pub r3: f64,
    pub fiber: f64,
    pub eps: Vec<f64>,
    /// Averages of the fiber integrals over `|w| < ε`.
    pub averages: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub tolerance: f64,
    pub converging: bool,
    /// `inf A(ε) / fiber`, the measured constant of the infimum bound.
    pub inf_ratio: f64,
    /// `sup A(ε) ≥ fiber − tolerance·fiber`.
    pub sup_ok: bool,
}

/// `A(ε) = (1/πε²) ∫_{|w|<ε} ∫_{|z|<r₁} R dV` against the fiber integral at
/// `w = 0`, for one `z` and one `w` variable. The integrand plays the role
/// of `|F|² e^{−φ}`.
pub fn siu_limit_check(
    r: &RationalPowerIntegrand,
    r1: f64,
    r3: f64,
    eps_sequence: &[f64],
    tolerance: f64,
    params: &QuadParams,
) -> Result<SiuReport> {
    r.validate()?;
    if r.n() != 1 {
        return Err(Error::Precondition("disc quadrature needs exactly one z variable".into()));
    }
    if !(0.0 < r1 && r1 < r3) || eps_sequence.is_empty() || eps_sequence.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("need 0 < r1 < r3 and a non-empty positive eps sequence".into()));
    }
    let o = Complex64::new(0.0, 0.0);
    let (a, b) = (rational_to_f64(&r.eps), rational_to_f64(&r.delta));
    let at = |w: Complex64, radius: f64| fiber_integral(&FiberPowers::new(r, w, a, b), o, radius, params);
    let big = at(o, r3);
    if big.verdict != Verdict::Convergent {
        return Err(Error::Precondition(format!("fiber integral over the r3 disc is not finite ({:?})", big.verdict)));
    }
    let fiber = at(o, r1).value;
    // J(w) is smooth in polar coordinates about w = 0
    let gl = gauss_legendre(OUTER_RADIAL);
    let averages: Vec<f64> = eps_sequence
        .iter()
        .map(|&e| {
            let nodes: Vec<(Complex64, f64)> = gl
                .iter()
                .flat_map(|&(x, wx)| {
                    let rr = 0.5 * e * (1.0 + x);
                    (0..OUTER_ANGLES).map(move |k| {
                        let t = std::f64::consts::TAU * (k as f64 + 0.5) / OUTER_ANGLES as f64;
                        (Complex64::from_polar(rr, t), 0.5 * e * wx * rr)
                    })
                })
                .collect();
            let parts: Vec<f64> = nodes.par_iter().map(|(w, wt)| wt * at(*w, r1).value).collect();
            // the rule's own area, so constant fibers average exactly
            parts.iter().sum::<f64>() / nodes.iter().map(|n| n.1).sum::<f64>()
        })
        .collect();
    let rel_errors: Vec<f64> = averages.iter().map(|a| (a - fiber).abs() / fiber).collect();
    let mut order: Vec<usize> = (0..eps_sequence.len()).collect();
    order.sort_by(|&i, &j| eps_sequence[j].total_cmp(&eps_sequence[i]));
    let monotone = order.windows(2).all(|p| rel_errors[p[1]] <= rel_errors[p[0]] + 1e-9);
    let last = *order.last().expect("non-empty");
    let inf = averages.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup = averages.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SiuReport {
        r1,
        r3,
        fiber,
        eps: eps_sequence.to_vec(),
        converging: monotone && rel_errors[last] <= tolerance,
        inf_ratio: inf / fiber,
        sup_ok: sup >= fiber * (1.0 - tolerance),
        averages,
        rel_errors,
        tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub eps: f64,
    pub alpha: f64,
    pub x_star: f64,
    /// `inf_{x ≥ 1} e^{εx}/x^α`.
    pub c: f64,
    pub lhs: DiscIntegral,
    /// The right side, already divided by `c`.
    pub rhs: DiscIntegral,
    pub slack: f64,
    pub holds: bool,
}

/// Minimizer and value of `e^{εx}/x^α` on `x ≥ 1`.
pub fn lemma_constant(eps: f64, alpha: f64) -> (f64, f64) {
    let x = (alpha / eps).max(1.0);
    (x, (eps * x).exp() / x.powf(alpha))
}

/// Checks `∫|f|² e^{−2(1+ε/2)φ} ≤ C⁻¹ ∫|f|² e^{−2(1+ε)φ}/(−φ)^α` on the disc
/// `|z| < radius` for `φ = psi + shift` in one variable.
pub fn lemma_nb_check(
    psi: &AnalyticSingularityPsh,
    shift: f64,
    f: &ComplexPoly,
    eps: f64,
    alpha: f64,
    radius: f64,
    params: &QuadParams,
) -> Result<LemmaReport> {
    if psi.dim() != 1 || f.dim() != 1 {
        return Err(Error::Precondition("the lemma check runs in one variable".into()));
    }
    if !(eps > 0.0 && alpha > 0.0 && radius > 0.0) {
        return Err(Error::InvalidInput("eps, alpha and radius must be positive".into()));
    }
    let o = Complex64::new(0.0, 0.0);
    // φ ≤ −1 on polar samples reaching the boundary
    for i in 0..=64 {
        let rr = radius * i as f64 / 64.0;
        for k in 0..32 {
            let z = Complex64::from_polar(rr, std::f64::consts::TAU * k as f64 / 32.0);
            let v = psi.eval(&[z]) + shift;
            if v > -1.0 {
                return Err(Error::Precondition(format!("phi = {v} > -1 at {z}")));
            }
        }
    }
    let (x_star, c) = lemma_constant(eps, alpha);
    let empty = |v| DiscIntegral { value: v, verdict: Verdict::Convergent, poles: Vec::new(), tests: Vec::new() };
    if f.is_zero() {
        return Ok(LemmaReport { eps, alpha, x_star, c, lhs: empty(0.0), rhs: empty(0.0), slack: 0.0, holds: true });
    }
    let (pz, pc) = zeros(&psi.gens);
    let (fz, _) = zeros(std::slice::from_ref(f));
    let mut singular = pc.clone();
    for z in pz.into_iter().chain(fz) {
        if singular.iter().all(|a| (a - z).norm() > 1e-12) {
            singular.push(z);
        }
    }
    singular.retain(|a| a.norm() < radius);
    let poles: Vec<usize> = (0..singular.len()).filter(|&i| pc.iter().any(|g| (g - singular[i]).norm() <= 1e-12)).collect();
    let near: Vec<(AnalyticSingularityPsh, ComplexPoly)> =
        singular.iter().map(|&a| (psi.recenter(&[a]), f.recenter(&[a]))).collect();
    let parts = |i: Option<usize>, u: Complex64| match i {
        Some(i) => (near[i].0.eval(&[u]) + shift, near[i].1.log_abs(&[u])),
        None => (psi.eval(&[u]) + shift, f.log_abs(&[u])),
    };
    let lhs_h = |i: Option<usize>, u: Complex64| {
        let (phi, lf) = parts(i, u);
        2.0 * lf - 2.0 * (1.0 + eps / 2.0) * phi
    };
    let rhs_h = |i: Option<usize>, u: Complex64| {
        let (phi, lf) = parts(i, u);
        2.0 * lf - 2.0 * (1.0 + eps) * phi - alpha * (-phi).ln() - c.ln()
    };
    let lhs = singular_integral(&lhs_h, &singular, &poles, o, radius, params);
    let rhs = singular_integral(&rhs_h, &singular, &poles, o, radius, params);
    if rhs.verdict != Verdict::Convergent {
        return Err(Error::Precondition(format!("right-hand integral is not finite ({:?})", rhs.verdict)));
    }
    Ok(LemmaReport { eps, alpha, x_star, c, slack: rhs.value - lhs.value, holds: lhs.value <= rhs.value, lhs, rhs })
}
