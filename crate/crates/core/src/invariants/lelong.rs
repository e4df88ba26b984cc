//! Lelong numbers from the growth of sphere maxima.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dim, lelong_exact, EstimateMeta, InvariantEstimate, Method};
use crate::error::{Error, Result};
use crate::psh::{PshExpr, PshFn};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadialParams {
    pub r_min: f64,
    pub r_max: f64,
    pub n_radii: usize,
    /// Defaults to `64 · dim`.
    pub n_angles: Option<usize>,
    pub seed: u64,
}

impl Default for RadialParams {
    fn default() -> Self {
        Self { r_min: 1e-30, r_max: 1e-2, n_radii: 24, n_angles: None, seed: 0x5eed }
    }
}

/// Unit vectors of `C^dim`: the coordinate axes followed by normalized
/// complex Gaussians.
pub fn sphere_directions(dim: usize, n: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = crate::rng::stream(seed, &[dim as u64]);
    let mut out = Vec::with_capacity(n);
    for i in 0..dim.min(n) {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[i] = Complex64::new(1.0, 0.0);
        out.push(e);
    }
    while out.len() < n {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    out
}

pub fn log_radii(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Least-squares line `y ≈ a + b x`; returns `(a, b, max |residual|)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).abs()).fold(0.0, f64::max);
    (a, b, res)
}

/// Radial-slope estimate for a function already centered at the point of
/// interest (the origin).
pub fn lelong_radial_centered(f: &dyn PshFn, params: &RadialParams) -> Result<InvariantEstimate> {
    if !(params.r_min > 0.0 && params.r_min < params.r_max) || params.n_radii < 3 {
        return Err(Error::InvalidInput("need 0 < r_min < r_max and n_radii >= 3".into()));
    }
    let dim = f.dim();
    let n_angles = params.n_angles.unwrap_or(64 * dim).max(1);
    let dirs = sphere_directions(dim, n_angles, params.seed);
    let lr = log_radii(params.r_min, params.r_max, params.n_radii);
    let maxima: Vec<f64> = lr
        .par_iter()
        .map(|&l| {
            let r = l.exp();
            let mut p = vec![Complex64::new(0.0, 0.0); dim];
            dirs.iter().fold(f64::NEG_INFINITY, |m, d| {
                for (pi, di) in p.iter_mut().zip(d) {
                    *pi = di * r;
                }
                m.max(f.eval(&p))
            })
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        lr.iter().zip(&maxima).filter(|(_, m)| m.is_finite()).map(|(l, m)| (*l, *m)).unzip();
    if xs.len() < 2 {
        return Err(Error::Degenerate("function is -inf on the sampled spheres".into()));
    }
    let (_, slope, residual) = fit_line(&xs, &ys);
    let meta = EstimateMeta {
        radii: Some([params.r_min, params.r_max]),
        n_radii: Some(params.n_radii),
        n_angles: Some(n_angles),
        ..Default::default()
    };
    Ok(InvariantEstimate::estimated(slope.max(0.0), Method::RadialSlope, residual, meta))
}

pub fn lelong_radial(phi: &PshExpr, x: &[Complex64], params: &RadialParams) -> Result<InvariantEstimate> {
    check_dim(phi.dim(), x.len())?;
    lelong_radial_centered(&phi.recenter(x), params)
}

/// Exact when possible: analytic leaves use multiplicities, and any psh
/// function finite at `x` has Lelong number 0. Otherwise radial slope.
pub fn lelong(phi: &PshExpr, x: &[Complex64], params: &RadialParams) -> Result<InvariantEstimate> {
    check_dim(phi.dim(), x.len())?;
    if let Some(a) = phi.as_analytic() {
        return lelong_exact(a, x);
    }
    if phi.eval(x) > f64::NEG_INFINITY {
        let mut e = InvariantEstimate::exact(0.0, Method::ExactMultiplicity);
        e.meta.note = Some("finite at point".into());
        return Ok(e);
    }
    lelong_radial(phi, x, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ComplexPoly;

    fn z0(d: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); d]
    }

    #[test]
    fn log_abs_is_exact_line() {
        let phi = PshExpr::log_abs(1.0, ComplexPoly::var(1, 0)).unwrap();
        let e = lelong_radial(&phi, &z0(1), &RadialParams::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12, "{}", e.value);
        assert!(e.uncertainty > 0.0 && e.uncertainty < 1e-9);
    }

    /// Two-branch max along the sampled range: `max{4 log r, 2 log r − 40}`.
    /// The branches cross at `log r = −20`; below the crossover the
    /// slope-2 branch is the larger one.
    #[test]
    fn two_branch_max() {
        let b4 = PshExpr::log_abs(4.0, ComplexPoly::var(1, 0)).unwrap();
        let b2 = PshExpr::sum(vec![
            (1.0, PshExpr::log_abs(2.0, ComplexPoly::var(1, 0)).unwrap()),
            (1.0, PshExpr::constant(1, -40.0)),
        ])
        .unwrap();
        let phi = PshExpr::max(b4, b2).unwrap();
        let below = RadialParams { r_min: 1e-30, r_max: 1e-12, ..Default::default() };
        let e = lelong_radial(&phi, &z0(1), &below).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{}", e.value);
        let above = RadialParams { r_min: 1e-8, r_max: 1e-2, ..Default::default() };
        let e = lelong_radial(&phi, &z0(1), &above).unwrap();
        assert!((e.value - 4.0).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn radial_matches_exact_on_monomials() {
        let cases: Vec<(f64, Vec<Vec<u32>>)> = vec![
            (1.0, vec![vec![2, 0], vec![0, 3]]),
            (3.0, vec![vec![1, 1]]),
            (1.0, vec![vec![1, 0], vec![0, 1]]),
            (0.5, vec![vec![3, 1, 0], vec![0, 0, 2]]),
        ];
        for (alpha, gens) in cases {
            let d = gens[0].len();
            let a = crate::AnalyticSingularityPsh::monomial(alpha, &gens).unwrap();
            let exact = lelong_exact(&a, &z0(d)).unwrap().value;
            let e = lelong_radial(&PshExpr::Analytic(a), &z0(d), &RadialParams::default()).unwrap();
            assert!((e.value - exact).abs() <= 0.02 * exact, "{gens:?}: {} vs {exact}", e.value);
        }
    }

    #[test]
    fn off_center_point_uses_recentering() {
        // (z1 - 1)^2 (z2 + 2): order 3 at (1, -2)
        let f = ComplexPoly::from_real_terms(2, &[(&[1, 0], 1.0), (&[0, 0], -1.0)])
            .unwrap()
            .pow(2)
            .mul(&ComplexPoly::from_real_terms(2, &[(&[0, 1], 1.0), (&[0, 0], 2.0)]).unwrap());
        let phi = PshExpr::log_abs(1.0, f).unwrap();
        let x = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)];
        let e = lelong_radial(&phi, &x, &RadialParams::default()).unwrap();
        assert!((e.value - 3.0).abs() < 0.02, "{}", e.value);
    }

    #[test]
    fn identically_minus_infinity_is_degenerate() {
        let phi = PshExpr::Analytic(crate::AnalyticSingularityPsh {
            alpha: 1.0,
            gens: vec![ComplexPoly::zero(1)],
        });
        assert!(matches!(
            lelong_radial(&phi, &z0(1), &RadialParams::default()),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(lelong(&phi, &z0(1), &RadialParams::default()).unwrap().value, f64::INFINITY);
    }
}
