use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pshlab::bergman::{BasisParams, WeightedBasis};
use pshlab::counterexamples::{cantor_potential, CantorSpec};
use pshlab::invariants::{cse_bisection, lct_monomial, lelong_radial, CseParams, NewtonPolyhedron, RadialParams};
use pshlab::{AnalyticSingularityPsh, Complex64, ComplexPoly, Polydisc, PshExpr};

fn cusp() -> PshExpr {
    let f = ComplexPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 3], -1.0)]).unwrap();
    PshExpr::Analytic(AnalyticSingularityPsh::new(1.0, vec![f]).unwrap())
}

fn kernels(c: &mut Criterion) {
    let phi = cusp();
    let p = [Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.05)];
    c.bench_function("psh_eval", |b| b.iter(|| phi.evaluate(black_box(&p)).unwrap()));

    let origin = [Complex64::new(0.0, 0.0); 2];
    let radial = RadialParams::default();
    c.bench_function("lelong_radial", |b| b.iter(|| lelong_radial(&phi, black_box(&origin), &radial).unwrap()));

    let np = NewtonPolyhedron::new(vec![vec![5, 0, 0], vec![0, 7, 0], vec![0, 0, 11], vec![2, 2, 2]]).unwrap();
    c.bench_function("lct_howald", |b| b.iter(|| lct_monomial(black_box(&np))));

    let one = PshExpr::Analytic(AnalyticSingularityPsh::monomial(1.0, &[vec![2]]).unwrap());
    let cse = CseParams::default();
    c.bench_function("cse_bisection_1d", |b| {
        b.iter(|| cse_bisection(&one, black_box(&[Complex64::new(0.0, 0.0)]), &cse).unwrap())
    });

    let spec = CantorSpec::polar(20);
    c.bench_function("cantor_potential", |b| b.iter(|| cantor_potential(&spec, black_box(Complex64::new(0.3, 0.01)))));

    let weight = PshExpr::Analytic(AnalyticSingularityPsh::monomial(1.0, &[vec![1]]).unwrap());
    let disc = Polydisc::unit(1);
    let params = BasisParams::default();
    c.bench_function("bergman_basis", |b| b.iter(|| WeightedBasis::build(black_box(&weight), 0.5, &disc, &params).unwrap()));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
