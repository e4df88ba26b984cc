use proptest::prelude::*;

use super::*;
use crate::families::ProbeParams;
use crate::invariants::RadialParams;
use crate::psh::ScalarField;
use crate::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn wang_terms_and_values() {
    let f = WangFamily::new(1.0, 5).unwrap();
    let t1 = f.term(1);
    assert_eq!((t1.m, t1.alpha, t1.beta, t1.w), (1, 1.0, 2.0, 0.5));
    let t3 = f.term(3);
    assert_eq!(t3.m, 9);
    assert!((t3.target() - 1.0).abs() < 1e-15);
    assert!(f.overshoot().iter().all(|o| o.abs() < 1e-12));
    // non-integer c: m_k = ⌈c k²⌉ overshoots
    let g = WangFamily::new(0.3, 3).unwrap();
    assert_eq!(g.term(2).m, 2);
    assert!((g.term(2).target() - 0.5).abs() < 1e-15);

    for k in 1..=5 {
        assert_eq!(wang_phi(&f, c(0.0), c(f.term(k).w)), f64::NEG_INFINITY);
    }
    let at0 = wang_phi(&f, c(0.0), c(0.0));
    let want: f64 = f.terms().iter().map(|t| t.alpha * t.w.ln()).sum();
    assert!((at0 - want).abs() < 1e-12);

    let two = WangFamily::new(1.0, 2).unwrap();
    let hand = (0.5f64 + 0.25).ln() + ((0.5f64 - 1.0 / 3.0 - 0.0625).abs().powf(0.25) + 0.25).ln();
    assert!((wang_phi(&two, c(0.5), c(0.5)) - hand).abs() < 1e-14);
}

#[test]
fn wang_fiber_numbers() {
    let f = WangFamily::new(1.0, 5).unwrap();
    let p = RadialParams::default();
    for k in 1..=5 {
        let e = wang_fiber_lelong(&f, k, &p).unwrap();
        let t = f.term(k).target();
        assert!((e.value - t).abs() <= 0.05 * t, "k = {k}: {e:?}");
    }
    let e = wang_fiber_lelong(&f, 0, &p).unwrap();
    assert!(e.value.abs() <= 0.05);
    assert!(wang_fiber_lelong(&f, 6, &p).is_err());
}

#[test]
fn cantor_cdf_values() {
    let classic = cantor_build(&[1.0 / 3.0; 12], 12).unwrap();
    assert_eq!(cantor_cdf(&classic, 0.0), 0.0);
    assert_eq!(cantor_cdf(&classic, 1.0), 1.0);
    assert!((cantor_cdf(&classic, 0.5) - 0.5).abs() < 1e-15);
    assert!((cantor_cdf(&classic, 1.0 / 3.0) - 0.5).abs() < 1e-12);
    assert!((cantor_cdf(&classic, 0.25) - 1.0 / 3.0).abs() < 1e-3);
    let one = cantor_build(&[1.0 / 3.0], 1).unwrap();
    let iv = one.intervals(1);
    assert!((iv[0].1 - 1.0 / 3.0).abs() < 1e-15 && (iv[1].0 - 2.0 / 3.0).abs() < 1e-15);
    assert!((cantor_cdf(&one, 1.0 / 3.0) - 0.5).abs() < 1e-15);
    assert!(cantor_build(&[1.0], 1).is_err());
    assert!(cantor_build(&[0.5], 3).is_err());
}

#[test]
fn polar_parameters() {
    let s = CantorSpec::polar(20);
    assert_eq!(s.log_lengths[3], -8.0);
    let r = s.ratios();
    assert!((r[0] - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-15);
    assert!((r[1] - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-15);
    assert!(r.iter().all(|x| *x > 0.0 && *x <= 1.0));
    // polarity sum Σ 2^{-k} log(1/l_k) grows by one per level
    let sum: f64 = (1..=20).map(|k| 0.5f64.powi(k) * -s.log_lengths[k as usize]).sum();
    assert!((sum - 20.0).abs() < 1e-12);
    assert!((s.potential_bound() + 10.5).abs() < 1e-12);
}

/// Midpoint sum over level-`K` intervals with the holding interval split once.
fn brute_potential(spec: &CantorSpec, w: Complex64) -> f64 {
    let k = spec.depth;
    let chi = |t: f64| (w - t).norm().ln() - 0.5 * w.norm_sqr().ln_1p() - 0.5 * (t * t).ln_1p();
    let fine = spec.intervals(k + 1);
    let mut s = 0.0;
    for (i, (a, b)) in spec.intervals(k).into_iter().enumerate() {
        let m = 0.5f64.powi(k as i32);
        if w.im == 0.0 && a <= w.re && w.re <= b {
            for (fa, fb) in &fine[2 * i..2 * i + 2] {
                s += 0.5 * m * chi(0.5 * (fa + fb));
            }
        } else {
            s += m * chi(0.5 * (a + b));
        }
    }
    s
}

#[test]
fn potential_matches_brute_force() {
    let spec = cantor_build(&[0.4, 0.2, 0.5, 1.0 / 3.0, 0.3, 0.6, 0.25, 0.45], 8).unwrap();
    for w in [c(0.5), c(0.13), c(-0.7), Complex64::new(0.3, 0.2), Complex64::new(2.0, 1.0), c(10.0)] {
        let (a, b) = (cantor_potential(&spec, w), brute_potential(&spec, w));
        assert!((a - b).abs() < 1e-10, "{w}: {a} vs {b}");
    }
    let ends = spec.endpoints(3);
    for &e in &ends {
        let (a, b) = (cantor_potential(&spec, c(e)), brute_potential(&spec, c(e)));
        assert!((a - b).abs() < 1e-10, "{e}: {a} vs {b}");
    }
    assert!((cantor_potential(&spec, c(10.0)) - brute_potential(&spec, c(10.0))).abs() < 1e-12);
}

#[test]
fn polar_potential_diverges_on_the_set() {
    let ends = CantorSpec::polar(4).endpoints(4);
    let mut prev = vec![f64::INFINITY; ends.len()];
    for k in 4..=20 {
        let spec = CantorSpec::polar(k);
        for (i, &e) in ends.iter().enumerate() {
            let p = cantor_potential(&spec, c(e));
            assert!(p <= prev[i] + 1e-12, "depth {k} at {e}");
            assert!(p <= spec.potential_bound() + 1e-12);
            prev[i] = p;
        }
    }
    assert!(prev.iter().all(|p| *p < -10.5));
    let gaps = CantorSpec::polar(4).gap_midpoints(4);
    for &g in &gaps {
        let a = cantor_potential(&CantorSpec::polar(10), c(g));
        for k in 11..=20 {
            assert!((cantor_potential(&CantorSpec::polar(k), c(g)) - a).abs() < 1e-6);
        }
        assert!(a > -4.0);
    }
    // the euclidean part is mirror symmetric
    let spec = CantorSpec::polar(20);
    let eucl = |w: f64| cantor_potential(&spec, c(w)) + 0.5 * (w * w).ln_1p();
    for w in [0.5, 0.3, 0.05, -0.2, 1.7] {
        let d = eucl(w) - eucl(1.0 - w);
        assert!(d.abs() < 1e-10, "{w}: {d}");
    }
}

#[test]
fn field_round_trip() {
    let f = CantorPotential::new(CantorSpec::polar(6));
    let g = field_from_def(&f.def()).unwrap();
    assert_eq!(g.def(), f.def());
    assert_eq!(g.value(c(0.5)), f.value(c(0.5)));
    let s = cantor_build(&[0.5; 3], 3).unwrap();
    let h = field_from_def(&CantorPotential::new(s.clone()).def()).unwrap();
    assert_eq!(h.value(c(0.2)), cantor_potential(&s, c(0.2)));
}

#[test]
fn li_fiber_numbers() {
    let ex = LiExample::polar(20);
    let p = LiParams::default();
    let spec = ex.spec().clone();
    let ends = spec.endpoints(3);
    assert_eq!(ends.len(), 16);
    for &e in &ends {
        let v = li_fiber_lelong(&ex, c(e), &p).unwrap();
        assert!((v.value - 4.0).abs() < 0.05, "{e}: {v:?}");
    }
    let gaps = spec.gap_midpoints(4);
    assert_eq!(gaps.len(), 15);
    for &g in &gaps {
        let v = li_fiber_lelong(&ex, c(g), &p).unwrap();
        assert!((v.value - 2.0).abs() < 0.05, "{g}: {v:?}");
    }
    let hook = li_fiber_lelong_with(&ex, c(0.5), f64::NEG_INFINITY, &p).unwrap();
    assert_eq!(hook.value, 4.0);
    assert_eq!(hook.uncertainty, 0.0);
    // the explicit family agrees with the fiber formula
    let fam = ex.family();
    let fiber = fam.restrict_fiber(&[c(0.3)]).unwrap();
    let direct = li_fiber(c(0.3), ex.p(c(0.3)));
    for r in [1e-3, 0.1, 0.7] {
        let z = [Complex64::new(r, 0.0)];
        assert!((fiber.evaluate(&z).unwrap() - direct.evaluate(&z).unwrap()).abs() < 1e-12);
    }
    assert!(li_fiber_lelong(&LiExample::polar(2), c(0.5), &p).is_err());
}

#[test]
fn cantor_level_set_is_not_analytic() {
    let ex = LiExample::polar(20);
    let p = LiParams::default();
    let q = ProbeParams::default();
    let spec = ex.spec().clone();
    let gaps = nonanalyticity_demo(&ex, 3.0, &spec.gap_midpoints(4), &p, &q).unwrap();
    assert!(gaps.members.is_empty());
    let ends = spec.endpoints(3);
    let on = nonanalyticity_demo(&ex, 3.0, &ends, &p, &q).unwrap();
    assert_eq!(on.members.len(), ends.len());
    assert!(on.hausdorff < 0.2);
    let mut ws: Vec<f64> = (0..=60).map(|i| i as f64 / 60.0).collect();
    ws.extend(spec.endpoints(3));
    let mixed = nonanalyticity_demo(&ex, 3.0, &ws, &p, &q).unwrap();
    assert!(!mixed.probe.certified);
    assert_eq!(mixed.probe.attempts.len(), 11);
}

proptest! {
    #[test]
    fn cantor_levels_nest(s in proptest::collection::vec(0.05f64..0.95, 6)) {
        let spec = cantor_build(&s, 6).unwrap();
        for k in 0..6 {
            let outer = spec.intervals(k);
            let inner = spec.intervals(k + 1);
            prop_assert_eq!(inner.len(), 2 * outer.len());
            let mass: f64 = inner.iter().map(|_| 0.5f64.powi(k as i32 + 1)).sum();
            prop_assert_eq!(mass, 1.0);
            for (i, (a, b)) in inner.iter().enumerate() {
                let (oa, ob) = outer[i / 2];
                prop_assert!(oa <= *a && b <= &ob && a < b);
            }
        }
    }

    #[test]
    fn cdf_is_monotone(s in proptest::collection::vec(0.05f64..0.95, 8), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let spec = cantor_build(&s, 8).unwrap();
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(cantor_cdf(&spec, lo) <= cantor_cdf(&spec, hi));
    }
}

