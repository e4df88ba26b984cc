//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use pshlab::bergman::{log_psh_check, pole_scan, BasisParams, BergmanKernelField, CircleSample, Direction, WeightedBasis};
use pshlab::cloud::{CoordAxes, GridSpec, Kind, LevelSetCloud};
use pshlab::counterexamples::{li_fiber_lelong, nonanalyticity_demo, wang_catalog, wang_fiber_lelong, LiExample, LiParams, WangFamily};
use pshlab::families::{analyticity_probe, containment_check, sandwich_check, scan_level_set, ApproxFamily, ProbeParams, ScanParams};
use pshlab::invariants::{cse_bisection, dim1_reciprocity_check, lct_monomial, CseParams, NewtonPolyhedron, RadialParams};
use pshlab::scenario::{load_scenario, run, to_csv, to_json};
use pshlab::stability::{
    hypothesis_check, integral_family, nondegenerate_check, siu_limit_check, QuadParams, RationalPowerIntegrand,
    StabilityHypotheses,
};
use pshlab::{AnalyticSingularityPsh, Complex64, ComplexPoly, Polydisc, PshExpr, PshFamily};

type Outcome = Result<String, String>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn diagonal() -> PshFamily {
    let f = ComplexPoly::var(2, 0).sub(&ComplexPoly::var(2, 1));
    PshFamily::new(PshExpr::log_abs(1.0, f).unwrap(), Polydisc::unit(2), 1).unwrap()
}

fn diag_grid() -> GridSpec {
    GridSpec::Tensor(vec![CoordAxes::real(-0.75, 0.75, 7), CoordAxes::real(-0.75, 0.75, 7)])
}

fn wang() -> Outcome {
    let fam = WangFamily::new(1.0, 5).map_err(|e| e.to_string())?;
    let p = RadialParams::default();
    let mut worst = 0.0f64;
    for k in 1..=5 {
        let t = fam.term(k);
        let want = (t.m as f64 * t.alpha).min(t.beta);
        let e = wang_fiber_lelong(&fam, k, &p).map_err(|e| e.to_string())?;
        let rel = (e.value - want).abs() / want;
        worst = worst.max(rel);
        ensure(rel <= 0.05, || format!("k = {k}: {} vs {want}", e.value))?;
    }
    let at0 = wang_fiber_lelong(&fam, 0, &p).map_err(|e| e.to_string())?;
    ensure(at0.value <= 0.05, || format!("nu at (0,0) = {}", at0.value))?;
    let rows = wang_catalog(&fam, 1.0, &p).map_err(|e| e.to_string())?;
    ensure(rows.len() == 6, || format!("{} catalog rows", rows.len()))?;
    for r in &rows {
        ensure(r.member == (r.w != 0.0), || format!("membership of (0, {}) is {}", r.w, r.member))?;
    }
    Ok(format!("worst relative error {worst:.2e}, nu(0,0) = {:.2e}", at0.value))
}

fn oracle_agreement() -> Outcome {
    let ideals: Vec<Vec<Vec<u32>>> = vec![
        vec![vec![1]],
        vec![vec![3]],
        vec![vec![2, 0], vec![0, 3]],
        vec![vec![1, 0], vec![0, 1]],
        vec![vec![1, 1]],
        vec![vec![3, 0], vec![1, 1], vec![0, 3]],
        vec![vec![4, 0], vec![0, 1]],
        vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]],
        vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 3]],
    ];
    let p = CseParams::default();
    let mut worst = 0.0f64;
    for g in ideals {
        let n = g[0].len();
        let exact = lct_monomial(&NewtonPolyhedron::new(g.clone()).map_err(|e| e.to_string())?);
        let phi = PshExpr::Analytic(AnalyticSingularityPsh::monomial(1.0, &g).map_err(|e| e.to_string())?);
        let e = cse_bisection(&phi, &vec![c(0.0); n], &p).map_err(|e| e.to_string())?;
        let d = (e.value - exact.value).abs();
        worst = worst.max(d - e.uncertainty);
        ensure(d <= 0.02 + e.uncertainty, || {
            format!("{g:?}: bisection {} ± {} vs {}", e.value, e.uncertainty, exact.meta.exact.clone().unwrap_or_default())
        })?;
    }
    Ok(format!("worst excess over uncertainty {worst:.3}"))
}

fn reciprocity() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1u32..=5 {
        let phi = PshExpr::log_abs(1.0, ComplexPoly::var(1, 0).pow(k)).unwrap();
        let r = dim1_reciprocity_check(&phi, c(0.0), &RadialParams::default(), &CseParams::default())
            .map_err(|e| e.to_string())?;
        worst = worst.max(r.defect);
        ensure(r.defect <= 0.02, || format!("k = {k}: |nu c - 1| = {}", r.defect))?;
    }
    Ok(format!("worst |nu c - 1| = {worst:.2e}"))
}

fn bergman() -> Outcome {
    let disc = Polydisc::unit(1);
    let p = BasisParams::default();
    let k = WeightedBasis::build(&PshExpr::constant(1, 0.0), 1.0, &disc, &p).map_err(|e| e.to_string())?.kernel(&[c(0.0)]);
    ensure((k - 1.0 / PI).abs() <= 1e-3, || format!("unweighted K(0) = {k}"))?;
    let log_z = PshExpr::log_abs(1.0, ComplexPoly::var(1, 0)).unwrap();
    for cc in [0.25, 0.5, 0.75] {
        let k = WeightedBasis::build(&log_z, cc, &disc, &p).map_err(|e| e.to_string())?.kernel(&[c(0.0)]);
        ensure((k - (1.0 - cc) / PI).abs() <= 1e-3, || format!("c = {cc}: K(0) = {k}"))?;
    }
    for cc in [1.0, 1.5] {
        let k = WeightedBasis::build(&log_z, cc, &disc, &p).map_err(|e| e.to_string())?.kernel(&[c(0.0)]);
        ensure(k == 0.0, || format!("c = {cc}: K(0) = {k}"))?;
    }
    let fam = diagonal();
    let grid = diag_grid();
    let field = BergmanKernelField::build(&fam, 1.5, &BasisParams { degree_cap: 4, ..Default::default() }, &[])
        .map_err(|e| e.to_string())?;
    let poles = pole_scan(&field, &grid).map_err(|e| e.to_string())?;
    let on_diag = |cl: &LevelSetCloud| cl.points.iter().all(|p| p.point[0] == p.point[1]);
    ensure(poles.points.len() == 7 && on_diag(&poles), || format!("pole scan found {} points", poles.points.len()))?;
    let y = scan_level_set(&fam, Kind::Y, 1.5, &grid, &ScanParams::default()).map_err(|e| e.to_string())?;
    let flagged = |p: &[Complex64]| {
        [&poles, &y].iter().any(|cl| cl.borderline.iter().chain(&cl.unresolved).any(|b| b.point == p))
    };
    let mut compared = 0;
    for p in grid.points(&fam.domain).map_err(|e| e.to_string())? {
        if flagged(&p) {
            continue;
        }
        compared += 1;
        ensure(poles.contains(&p) == y.contains(&p), || format!("pole scan and Y disagree at {p:?}"))?;
    }
    Ok(format!("pole scan = diagonal, agreement with Y on {compared} grid points"))
}

fn log_psh_kernel() -> Outcome {
    let circle = |z: f64, w: f64, d: Direction, r: f64| CircleSample { z: vec![c(z)], w: vec![c(w)], direction: d, radius: r, n: 32 };
    let constant = PshFamily::new(PshExpr::constant(2, 0.0), Polydisc::unit(2), 1).unwrap();
    let log_z = PshFamily::new(PshExpr::log_abs(1.0, ComplexPoly::var(2, 0)).unwrap(), Polydisc::unit(2), 1).unwrap();
    let cases = [(constant, 1.0), (log_z, 0.5), (diagonal(), 0.5), (diagonal(), 0.75)];
    let mut worst = f64::NEG_INFINITY;
    for (fam, cc) in cases {
        let samples: Vec<CircleSample> = [
            circle(0.0, 0.0, Direction::Z(0), 0.2),
            circle(0.3, 0.0, Direction::Z(0), 0.2),
            circle(0.0, 0.3, Direction::Z(0), 0.25),
            circle(0.2, 0.0, Direction::W(0), 0.3),
            circle(0.0, 0.1, Direction::W(0), 0.2),
            circle(-0.3, 0.2, Direction::W(0), 0.15),
        ]
        .into_iter()
        .collect();
        let mut ws: Vec<Vec<Complex64>> = Vec::new();
        for s in &samples {
            ws.push(s.w.clone());
            if let Direction::W(_) = s.direction {
                for k in 0..s.n {
                    ws.push(vec![s.w[0] + Complex64::from_polar(s.radius, std::f64::consts::TAU * k as f64 / s.n as f64)]);
                }
            }
        }
        let field = BergmanKernelField::build(&fam, cc, &BasisParams::default(), &ws).map_err(|e| e.to_string())?;
        let r = log_psh_check(&field, &samples).map_err(|e| e.to_string())?;
        worst = worst.max(r.worst);
    }
    ensure(worst <= 1e-4, || format!("worst violation {worst:e}"))?;
    Ok(format!("worst sub-mean-value violation {worst:.2e}"))
}

fn sandwich() -> Outcome {
    let base = PshFamily::new(PshExpr::log_abs(1.0, ComplexPoly::var(2, 0)).unwrap(), Polydisc::unit(2), 1).unwrap();
    let mut got = Vec::new();
    for k in [1usize, 2] {
        let fam = ApproxFamily::new(base.clone(), k).map_err(|e| e.to_string())?;
        let r = sandwich_check(&fam, &[c(0.0)], &[c(0.0)], &RadialParams::default(), &CseParams::default())
            .map_err(|e| e.to_string())?;
        let target = (k + 1) as f64;
        ensure((r.c.value - target).abs() <= 0.05, || format!("k = {k}: c = {}", r.c.value))?;
        ensure(r.passed(), || format!("k = {k}: {} outside [{}, {}]", r.c.value, r.lower, r.upper))?;
        got.push(r.c.value);
    }
    Ok(format!("c = {:.4}, {:.4}", got[0], got[1]))
}

/// Pairs with `ν a/b + 2 = l c/(d (⌊c/d⌋ + 1))`, cleared of denominators.
fn degenerate_pairs(a: i64, b: i64, cn: i64, d: i64, m: u32, n: u32) -> Vec<(u32, u32)> {
    let f = cn / d + 1;
    let mut out = Vec::new();
    for nu in 0..=m {
        for l in 0..=n {
            if nu as i64 * a * d * f + 2 * b * d * f == l as i64 * cn * b {
                out.push((nu, l));
            }
        }
    }
    out
}

fn nondegeneracy() -> Outcome {
    let mut found = Vec::new();
    for (eps, delta) in [((2, 1), (2, 1)), ((2, 1), (1, 2)), ((2, 1), (0, 1))] {
        let r = nondegenerate_check(&q(eps.0, eps.1), &q(delta.0, delta.1), 6, 6).map_err(|e| e.to_string())?;
        let want = degenerate_pairs(eps.0, eps.1, delta.0, delta.1, 6, 6);
        ensure(r.degenerate == want, || format!("{eps:?} {delta:?}: {:?} vs {want:?}", r.degenerate))?;
        found.push(format!("{:?}", r.degenerate));
    }
    Ok(format!("degenerate pairs {}", found.join(" ")))
}

fn stability() -> Outcome {
    let p = QuadParams::default();
    let one = ComplexPoly::one(2);
    let z = ComplexPoly::var(2, 0);
    let ws: Vec<Complex64> = (-5..=5).map(|i| c(0.04 * i as f64)).collect();
    let inverse = RationalPowerIntegrand::new(vec![one.clone()], vec![z.clone()], q(2, 1), q(1, 1)).unwrap();
    let fam = integral_family(&inverse, c(0.0), 0.5, &ws, 1e-3, &p).map_err(|e| e.to_string())?;
    for s in &fam.samples {
        ensure((s.integral.value - PI).abs() <= 1e-3, || format!("w = {}: {}", s.w, s.integral.value))?;
    }
    // a zero-free smooth family gives the reference jump size
    let g = ComplexPoly::from_real_terms(2, &[(&[1, 0], 1.0), (&[0, 0], -2.0), (&[0, 1], -1.0)]).unwrap();
    let smooth = RationalPowerIntegrand::new(vec![one.clone()], vec![g], q(2, 1), q(1, 1)).unwrap();
    let bound = integral_family(&smooth, c(0.0), 0.5, &ws, 1.0, &p).map_err(|e| e.to_string())?.max_jump;
    let f = z.sub(&ComplexPoly::var(2, 1));
    let counter = RationalPowerIntegrand::new(vec![f], vec![z], q(1, 1), q(2, 1)).unwrap();
    let h = StabilityHypotheses::new(q(1, 4), 0.9, 1.0, 0.8, 0.5, 0.5).map_err(|e| e.to_string())?;
    let out = hypothesis_check(&counter, &h, &p).map_err(|e| e.to_string())?;
    let weighted = out.weighted.ok_or("weighted condition missing")?;
    ensure(weighted.verdict == pshlab::invariants::Verdict::Divergent, || format!("weighted condition {:?}", weighted.verdict))?;
    let fam = integral_family(&counter, c(0.0), 1.0, &ws, 1e-3, &p).map_err(|e| e.to_string())?;
    let i0 = fam.samples.iter().position(|s| s.w == c(0.0)).unwrap();
    let at_zero = fam.jumps[i0 - 1].max(fam.jumps[i0]);
    ensure(at_zero > 10.0 * bound, || format!("jump at 0 is {at_zero}, smooth bound {bound}"))?;
    Ok(format!("weighted condition fails, jump at 0 = {at_zero} vs smooth {bound:.2e}"))
}

fn siu() -> Outcome {
    let p = QuadParams::default();
    let one = ComplexPoly::one(2);
    let z = ComplexPoly::var(2, 0);
    let eps = [0.1, 0.01, 0.001];
    let inverse = RationalPowerIntegrand::new(vec![one.clone()], vec![z.clone()], q(2, 1), q(1, 1)).unwrap();
    let ball = RationalPowerIntegrand::new(vec![one], vec![z, ComplexPoly::var(2, 1)], q(2, 1), q(1, 1)).unwrap();
    let mut errs = Vec::new();
    for (name, r) in [("1/|z|", inverse), ("1/|(z,w)|", ball)] {
        let s = siu_limit_check(&r, 0.5, 0.9, &eps, 0.02, &p).map_err(|e| e.to_string())?;
        let a = *s.averages.last().unwrap();
        let rel = (a - s.fiber).abs() / s.fiber;
        ensure(rel <= 0.02, || format!("{name}: average {a} vs fiber {}", s.fiber))?;
        errs.push(format!("{name} {rel:.1e}"));
    }
    Ok(format!("relative errors {}", errs.join(", ")))
}

fn containments() -> Outcome {
    let p = ScanParams::default();
    let g3 = |n: usize| GridSpec::Tensor(vec![CoordAxes::real(-0.5, 0.5, 3), CoordAxes::real(-0.5, 0.5, n), CoordAxes::real(-0.5, 0.5, 5)]);
    let cusp = {
        let g1 = ComplexPoly::from_real_terms(3, &[(&[2, 0, 0], 1.0)]).unwrap();
        let g2 = ComplexPoly::from_real_terms(3, &[(&[0, 3, 1], 1.0)]).unwrap();
        PshFamily::new(PshExpr::analytic(1.0, vec![g1, g2]).unwrap(), Polydisc::unit(3), 2).unwrap()
    };
    let curve = {
        let g1 = ComplexPoly::var(3, 0);
        let g2 = ComplexPoly::var(3, 1).sub(&ComplexPoly::var(3, 2));
        PshFamily::new(PshExpr::analytic(1.0, vec![g1, g2]).unwrap(), Polydisc::unit(3), 2).unwrap()
    };
    let cases: Vec<(&str, PshFamily, GridSpec, Vec<f64>)> = vec![
        ("diagonal", diagonal(), diag_grid(), vec![0.5, 1.0, 1.5]),
        ("cusp", cusp, g3(5), vec![0.5, 5.0 / 6.0, 1.0]),
        ("curve", curve, g3(5), vec![1.0, 2.0]),
    ];
    let (mut checked, mut excluded) = (0, 0);
    for (name, fam, grid, levels) in cases {
        for cc in levels {
            for (a, b) in [(Kind::E, Kind::X), (Kind::F, Kind::Y)] {
                let sa = scan_level_set(&fam, a, cc, &grid, &p).map_err(|e| e.to_string())?;
                let sb = scan_level_set(&fam, b, cc, &grid, &p).map_err(|e| e.to_string())?;
                let r = containment_check(&sa, &sb).map_err(|e| e.to_string())?;
                ensure(r.violations.is_empty(), || format!("{name}, c = {cc}, {a:?} in {b:?}: {:?}", r.violations))?;
                checked += r.checked;
                excluded += r.excluded;
            }
        }
    }
    Ok(format!("0 violations over {checked} members ({excluded} borderline excluded)"))
}

fn cantor() -> Outcome {
    let ex = LiExample::polar(20);
    let p = LiParams::default();
    let spec = ex.spec().clone();
    let ends = spec.endpoints(3);
    let gaps = spec.gap_midpoints(4);
    let near = |ws: &[f64], t: f64| -> Result<usize, String> {
        let mut ok = 0;
        for &w in ws {
            let v = li_fiber_lelong(&ex, c(w), &p).map_err(|e| e.to_string())?;
            ok += usize::from((v.value - t).abs() <= 0.05);
        }
        Ok(ok)
    };
    let (on, off) = (near(&ends, 4.0)?, near(&gaps, 2.0)?);
    ensure(on >= 10 && off >= 10, || format!("{on} endpoints at 4, {off} gap midpoints at 2"))?;
    let y = scan_level_set(&diagonal(), Kind::Y, 1.0, &diag_grid(), &ScanParams::default()).map_err(|e| e.to_string())?;
    let diag = analyticity_probe(&y, &Polydisc::unit(2), &ProbeParams::default()).map_err(|e| e.to_string())?;
    ensure(diag.certified && diag.degree.is_some_and(|d| d <= 2), || format!("diagonal probe {diag:?}"))?;
    let mut ws: Vec<f64> = (0..=60).map(|i| i as f64 / 60.0).collect();
    ws.extend(ends.iter().copied());
    let probe = ProbeParams { cap: 10, ..Default::default() };
    let demo = nonanalyticity_demo(&ex, 3.0, &ws, &p, &probe).map_err(|e| e.to_string())?;
    ensure(!demo.probe.certified, || "Cantor X_3 cloud was certified".into())?;
    Ok(format!(
        "{on}/{} endpoints at 4, {off}/{} gaps at 2, diagonal degree {:?}, Cantor cloud not certified",
        ends.len(),
        gaps.len(),
        diag.degree
    ))
}

fn determinism() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/quick.json");
    let s = load_scenario(path).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for n in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| e.to_string())?;
        reports.push(pool.install(|| {
            let r = run(&s);
            (to_json(&r), to_csv(&r))
        }));
    }
    ensure(reports.windows(2).all(|w| w[0] == w[1]), || "reports differ across thread counts".into())?;
    Ok(format!("{} byte-identical JSON reports over 1, 2, 4 threads", reports[0].0.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 12] = [
        ("wang family", wang, Some(10)),
        ("oracle agreement", oracle_agreement, Some(60)),
        ("one-variable reciprocity", reciprocity, Some(10)),
        ("bergman kernels", bergman, Some(30)),
        ("log-psh of the kernel", log_psh_kernel, Some(30)),
        ("approximation sandwich", sandwich, Some(60)),
        ("non-degeneracy", nondegeneracy, None),
        ("stability", stability, None),
        ("siu limit", siu, Some(60)),
        ("containments", containments, None),
        ("cantor counterexample", cantor, Some(120)),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t.elapsed();
        let out = match (out, budget) {
            (Ok(_), Some(b)) if dt > Duration::from_secs(*b) => Err(format!("took {dt:.1?}, budget {b} s")),
            (o, _) => o,
        };
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(out.is_err());
        println!("criterion {:2} {tag} {name} ({dt:.2?}): {detail}", i + 1);
    }
    println!("acceptance: {} of 12 passed in {:.1?}", 12 - failed, total.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
