use proptest::prelude::*;

use super::approx::{empirical_hoelder, halton_ball};
use super::*;
use crate::cloud::{CoordAxes, GridSpec, Kind};
use crate::invariants::{lelong_radial_centered, CseParams, RadialParams};
use crate::psh::{LogHoelderTerm, Polydisc, PshExpr, PshFamily, PshFn};
use crate::{Complex64, ComplexPoly, Error};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn diagonal() -> PshFamily {
    let f = ComplexPoly::var(2, 0).sub(&ComplexPoly::var(2, 1));
    PshFamily::new(PshExpr::log_abs(1.0, f).unwrap(), Polydisc::unit(2), 1).unwrap()
}

fn diag_grid() -> GridSpec {
    GridSpec::Tensor(vec![CoordAxes::real(-0.75, 0.75, 7), CoordAxes::real(-0.75, 0.75, 7)])
}

/// `log|z|` as a family over one parameter.
fn log_z(alpha: f64) -> PshFamily {
    PshFamily::new(PshExpr::log_abs(alpha, ComplexPoly::var(2, 0)).unwrap(), Polydisc::unit(2), 1).unwrap()
}

/// `(1/2) log(|z₁²|² + |w z₂³|²)`.
fn cusp_family() -> PshFamily {
    let g1 = ComplexPoly::from_real_terms(3, &[(&[2, 0, 0], 1.0)]).unwrap();
    let g2 = ComplexPoly::from_real_terms(3, &[(&[0, 3, 1], 1.0)]).unwrap();
    PshFamily::new(PshExpr::analytic(1.0, vec![g1, g2]).unwrap(), Polydisc::unit(3), 2).unwrap()
}

/// `log(|z₁|² + |z₂ − w|²)^{1/2}`.
fn curve_family() -> PshFamily {
    let g1 = ComplexPoly::var(3, 0);
    let g2 = ComplexPoly::var(3, 1).sub(&ComplexPoly::var(3, 2));
    PshFamily::new(PshExpr::analytic(1.0, vec![g1, g2]).unwrap(), Polydisc::unit(3), 2).unwrap()
}

fn grid3() -> GridSpec {
    GridSpec::Tensor(vec![CoordAxes::real(-0.5, 0.5, 3), CoordAxes::real(-0.5, 0.5, 5), CoordAxes::real(-0.5, 0.5, 5)])
}

#[test]
fn diagonal_fiber_exponents() {
    let p = ScanParams::default();
    let y = scan_level_set(&diagonal(), Kind::Y, 1.0, &diag_grid(), &p).unwrap();
    assert_eq!(y.scanned, 49);
    assert_eq!(y.points.len(), 7);
    assert!(y.points.iter().all(|q| q.point[0] == q.point[1]));
    assert!(y.borderline.is_empty() && y.unresolved.is_empty());
    let y = scan_level_set(&diagonal(), Kind::Y, 0.5, &diag_grid(), &p).unwrap();
    assert!(y.points.is_empty());
}

#[test]
fn lelong_level_sets_nest() {
    let p = ScanParams::default();
    let e = scan_level_set(&diagonal(), Kind::E, 1.0, &diag_grid(), &p).unwrap();
    let x = scan_level_set(&diagonal(), Kind::X, 1.0, &diag_grid(), &p).unwrap();
    assert_eq!(e.points.len(), 7);
    let r = containment_check(&e, &x).unwrap();
    assert!(r.passed() && r.checked == 7, "{r:?}");
    assert!(containment_check(&x, &x).unwrap().passed());
    let other = scan_level_set(&diagonal(), Kind::X, 2.0, &diag_grid(), &p).unwrap();
    assert!(matches!(containment_check(&e, &other), Err(Error::GridMismatch(_))));
    let coarse = GridSpec::covering(&Polydisc::unit(2), 3);
    let x3 = scan_level_set(&diagonal(), Kind::X, 1.0, &coarse, &p).unwrap();
    assert!(matches!(containment_check(&e, &x3), Err(Error::GridMismatch(_))));
}

#[test]
fn restriction_containment() {
    let p = ScanParams::default();
    let fam = cusp_family();
    let f = scan_level_set(&fam, Kind::F, 5.0 / 6.0, &grid3(), &p).unwrap();
    let y = scan_level_set(&fam, Kind::Y, 5.0 / 6.0, &grid3(), &p).unwrap();
    // F: z = 0 for each of the 5 parameter values. Y adds the line
    // {z₁ = 0} of the special fiber w = 0, where the exponent is 1/2.
    assert_eq!(f.points.len(), 5);
    assert_eq!(y.points.len(), 9);
    assert!(containment_check(&f, &y).unwrap().passed());
    let y = scan_level_set(&fam, Kind::Y, 0.6, &grid3(), &p).unwrap();
    assert_eq!(y.points.len(), 5);
    assert!(y.points.iter().all(|q| q.point[0] == c(0.0) && q.point[2] == c(0.0)));
}

#[test]
fn borderline_points_are_flagged() {
    let phi = PshExpr::log_hoelder(vec![LogHoelderTerm::new(
        ComplexPoly::var(2, 1).sub(&ComplexPoly::var(2, 0)),
        1.0,
        2.0,
        vec![0],
    )
    .unwrap()])
    .unwrap();
    let fam = PshFamily::new(phi, Polydisc::unit(2), 1).unwrap();
    let grid = GridSpec::Points(vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(0.5)]]);
    let x = scan_level_set(&fam, Kind::X, 1.0, &grid, &ScanParams::default()).unwrap();
    // radial slope 1 at the origin, exactly 0 at the finite point
    assert_eq!(x.points.len(), 1);
    let v = &x.points[0];
    assert!((v.value - 1.0).abs() < 1e-3 && v.uncertainty > 0.0, "{v:?}");
    assert_eq!(x.borderline.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_in_level(a in 0.1f64..3.0, b in 0.1f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p = ScanParams::default();
        let fam = cusp_family();
        for kind in [Kind::E, Kind::X] {
            let big = scan_level_set(&fam, kind, hi, &grid3(), &p).unwrap();
            let small = scan_level_set(&fam, kind, lo, &grid3(), &p).unwrap();
            prop_assert!(subset_check(&big, &small).unwrap().passed());
        }
        for kind in [Kind::F, Kind::Y] {
            let small = scan_level_set(&fam, kind, lo, &grid3(), &p).unwrap();
            let big = scan_level_set(&fam, kind, hi, &grid3(), &p).unwrap();
            prop_assert!(subset_check(&small, &big).unwrap().passed());
        }
    }

    #[test]
    fn approx_depends_on_modulus_only(t in 0.0f64..0.4, x in -0.4f64..0.4) {
        let fam = ApproxFamily::new(log_z(1.0), 2).unwrap();
        let f = fam.centered(&[c(x)], &[c(0.1)]).unwrap();
        let a = f.eval(&[c(0.0), Complex64::new(t, 0.0), c(0.0)]);
        let b = f.eval(&[c(0.0), Complex64::new(0.0, t / 2.0f64.sqrt()), Complex64::new(t / 2.0f64.sqrt(), 0.0)]);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert_eq!(fam.phi_k(&[c(x)], &[c(0.1)], 0.0).unwrap(), fam.base.expr.eval(&[c(x), c(0.1)]));
    }
}

#[test]
fn approx_closed_forms() {
    let fam = ApproxFamily::new(log_z(1.0), 1).unwrap();
    for t in [1e-8, 0.01, 0.3] {
        let v = fam.phi_k(&[c(0.0)], &[c(0.2)], t).unwrap();
        assert!((v - t.ln()).abs() < 1e-14);
    }
    assert_eq!(fam.phi_k(&[c(0.0)], &[c(0.2)], 0.0).unwrap(), f64::NEG_INFINITY);
    let k = PshFamily::new(PshExpr::constant(2, -0.7), Polydisc::unit(2), 1).unwrap();
    let fam = ApproxFamily::new(k, 3).unwrap();
    assert_eq!(fam.phi_k(&[c(0.1)], &[c(0.0)], 0.5).unwrap(), -0.7);
    assert!(matches!(fam.phi_k(&[c(0.6)], &[c(0.0)], 0.5), Err(Error::OutsideDomain)));
}

#[test]
fn radial_recognition() {
    // 3 log|z - w| at w = 0.2 is 3 log|z - 0.2|
    let f = ComplexPoly::var(2, 0).sub(&ComplexPoly::var(2, 1)).pow(3);
    let fam = PshFamily::new(PshExpr::log_abs(1.0, f).unwrap(), Polydisc::unit(2), 1).unwrap();
    let r = radial_form(&fam.restrict_fiber(&[c(0.2)]).unwrap()).unwrap();
    assert!((r.a - 3.0).abs() < 1e-15 && (r.pole[0] - c(0.2)).norm() < 1e-12 && r.b.abs() < 1e-12);
    // log|z| in two variables, scaled and summed with a constant
    let lin = PshExpr::analytic(0.5, vec![ComplexPoly::var(2, 0).scale(c(2.0)), ComplexPoly::var(2, 1).scale(c(-2.0))]).unwrap();
    let s = PshExpr::sum(vec![(2.0, lin), (1.0, PshExpr::constant(2, 1.0))]).unwrap();
    let r = radial_form(&s).unwrap();
    assert!((r.a - 1.0).abs() < 1e-15 && (r.b - (1.0 + 2.0f64.ln())).abs() < 1e-14);
    // z(z - 1) is not radial
    let g = ComplexPoly::from_real_terms(1, &[(&[2], 1.0), (&[1], -1.0)]).unwrap();
    assert!(radial_form(&PshExpr::log_abs(1.0, g).unwrap()).is_none());
}

#[test]
fn sampled_sup_matches_closed_form() {
    // max(log|z|, log|z|) hides the radial structure and forces sampling
    let e = PshExpr::log_abs(1.0, ComplexPoly::var(2, 0)).unwrap();
    let fam = PshFamily::new(PshExpr::max(e.clone(), e).unwrap(), Polydisc::unit(2), 1).unwrap();
    let fam = ApproxFamily::new(fam, 1).unwrap();
    for (x, t) in [(0.0, 0.1), (0.3, 0.2), (-0.2, 0.05)] {
        let v = fam.phi_k(&[c(x)], &[c(0.0)], t).unwrap();
        let exact = (x.abs() + t).ln();
        assert!(v <= exact + 1e-12 && exact - v < 1e-3, "x={x} t={t}: {v} vs {exact}");
    }
    let pts = halton_ball(2, 100, 0);
    assert_eq!(pts.len(), 100);
    assert!(pts.iter().all(|p| p.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1.0));
}

#[test]
fn sandwich_upper_bound_attained() {
    let radial = RadialParams::default();
    let cse = CseParams::default();
    for (alpha, k, target) in [(1.0, 1, 2.0), (2.0, 1, 1.0)] {
        let fam = ApproxFamily::new(log_z(alpha), k).unwrap();
        let r = sandwich_check(&fam, &[c(0.0)], &[c(0.0)], &radial, &cse).unwrap();
        assert!((r.c.value - target).abs() <= 0.05, "{r:?}");
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.upper, target);
    }
}

#[test]
fn approx_keeps_lelong_number() {
    let fam = ApproxFamily::new(log_z(1.0), 1).unwrap();
    let f = fam.centered(&[c(0.0)], &[c(0.3)]).unwrap();
    let e = lelong_radial_centered(&f, &RadialParams::default()).unwrap();
    assert!((e.value - 1.0).abs() <= 0.05, "{e:?}");
}

#[test]
fn hoelder_constant_propagates() {
    // e^φ = |w − z|^{1/2} + |z|², Hölder of order 1/2 in w
    let term = LogHoelderTerm::new(ComplexPoly::var(2, 1).sub(&ComplexPoly::var(2, 0)), 0.5, 2.0, vec![0]).unwrap();
    let base = PshFamily::new(PshExpr::log_hoelder(vec![term]).unwrap(), Polydisc::unit(2), 1).unwrap();
    let fam = ApproxFamily::new(base.clone(), 1).unwrap();
    let ws: Vec<f64> = (0..9).map(|i| -0.4 + 0.1 * i as f64).collect();
    let (z, t) = (c(0.05), 0.1);
    let mut base_pairs = Vec::new();
    let mut approx_pairs = Vec::new();
    for &a in &ws {
        for &b in &ws {
            let d = (a - b).abs();
            approx_pairs.push((fam.phi_k(&[z], &[c(a)], t).unwrap(), fam.phi_k(&[z], &[c(b)], t).unwrap(), d));
            // the base constant is taken over the ball the supremum ranges over
            for u in halton_ball(1, 64, 0) {
                let zeta = z + u[0] * t;
                base_pairs.push((base.expr.eval(&[zeta, c(a)]), base.expr.eval(&[zeta, c(b)]), d));
            }
        }
    }
    let hb = empirical_hoelder(&base_pairs, 0.5);
    let ha = empirical_hoelder(&approx_pairs, 0.5);
    assert!(ha <= 1.1 * hb, "{ha} vs {hb}");
}

#[test]
fn level_identity_on_diagonal() {
    let radial = RadialParams::default();
    let cse = CseParams::default();
    for k in [1, 2] {
        let fam = ApproxFamily::new(diagonal(), k).unwrap();
        for p in [[c(0.25), c(0.25)], [c(0.25), c(-0.25)]] {
            let s = level_identity_sample(&fam, &p, 0.8, &radial, &cse).unwrap();
            assert!(s.borderline || s.in_x == s.in_y, "{s:?}");
        }
    }
}

#[test]
fn probe_fits_diagonal() {
    let y = scan_level_set(&diagonal(), Kind::Y, 1.0, &diag_grid(), &ScanParams::default()).unwrap();
    let r = analyticity_probe(&y, &Polydisc::unit(2), &ProbeParams::default()).unwrap();
    assert!(r.certified && r.degree == Some(1), "{r:?}");
    let p = &r.polys[0];
    assert_eq!(p.terms().len(), 2);
    assert!((p.coefficient(&[1, 0]) + p.coefficient(&[0, 1])).norm() < 1e-12);
}

#[test]
fn probe_fits_curve() {
    let fam = curve_family();
    let y = scan_level_set(&fam, Kind::Y, 2.0, &grid3(), &ScanParams::default()).unwrap();
    assert_eq!(y.points.len(), 5);
    let r = analyticity_probe(&y, &Polydisc::unit(3), &ProbeParams::default()).unwrap();
    assert!(r.certified && r.degree == Some(1), "{r:?}");
    assert_eq!(r.polys.len(), 2);
}

#[test]
fn probe_rejects_scattered_points() {
    // 12 points on a line with irregular spacing: only {ζ = 0} of low degree
    // vanishes there, and that picks up the rest of the line
    let ws: Vec<f64> = (0..24).map(|i| -0.9 + 0.075 * i as f64).collect();
    let grid = GridSpec::Points(ws.iter().map(|&w| vec![c(0.0), c(w)]).collect());
    let members: Vec<usize> = vec![0, 1, 3, 4, 7, 9, 10, 13, 15, 18, 19, 22];
    let cloud = crate::cloud::LevelSetCloud {
        kind: Kind::X,
        c: 3.0,
        grid,
        scanned: ws.len(),
        points: members
            .iter()
            .map(|&i| crate::cloud::CloudPoint { point: vec![c(0.0), c(ws[i])], value: 4.0, uncertainty: 0.0 })
            .collect(),
        borderline: Vec::new(),
        unresolved: Vec::new(),
    };
    let r = analyticity_probe(&cloud, &Polydisc::unit(2), &ProbeParams::default()).unwrap();
    assert!(!r.certified, "{r:?}");
    assert!(r.attempts[1].null_dim >= 1 && r.attempts[1].extra > 0);
}
