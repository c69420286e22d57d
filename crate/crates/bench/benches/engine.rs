use criterion::{black_box, criterion_group, criterion_main, Criterion};

use radsum_core::certs::{run_case, small_sum_certificate, CaseContext, CaseId};
use radsum_core::dp::{build_initial, refine_with, RefinePlan};
use radsum_core::prawitz::PrawitzConfig;
use radsum_core::search::box_lower_bound;
use radsum_core::surd::parse_rational;
use radsum_core::{prawitz_lower_bound, tail_probability, GridSpec, Interval, PrawitzParams, Surd, WeightBox, WeightVector};

fn small_spec() -> GridSpec {
    GridSpec {
        n: 40,
        x_lo: -120,
        x_hi: 120,
        iterations: 4,
        prawitz: PrawitzConfig { panels: 48, ..PrawitzConfig::default() },
        seed_a_stride: 4,
        seed_x_stride: 8,
        ..GridSpec::desk()
    }
}

fn oracle(c: &mut Criterion) {
    let w16 = WeightVector::from_integers(&(1..=16).collect::<Vec<_>>()).unwrap();
    let w22 = WeightVector::from_integers(&(1..=22).collect::<Vec<_>>()).unwrap();
    let x = Surd::parse("3/2*sqrt(7)").unwrap();
    c.bench_function("tail_probability n=16 scan", |b| b.iter(|| tail_probability(black_box(&w16), &x, false, false).unwrap()));
    c.bench_function("tail_probability n=22 split", |b| b.iter(|| tail_probability(black_box(&w22), &x, false, false).unwrap()));
}

fn prawitz(c: &mut Criterion) {
    let params = PrawitzParams::new(8.0, 0.1, 128).unwrap();
    c.bench_function("prawitz_lower_bound 128 panels", |b| b.iter(|| prawitz_lower_bound(black_box(0.2), 0.4, &params).unwrap()));
}

fn table(c: &mut Criterion) {
    let grid = build_initial(&small_spec()).unwrap();
    let plan = RefinePlan::new(&grid);
    c.bench_function("refine beta=1/40", |b| b.iter(|| refine_with(black_box(&grid), &plan)));

    let (refined, _) = refine_with(&grid, &plan);
    let bx = WeightBox::new(vec![Interval::new(0.37, 0.38); 7]);
    let s = Surd::parse("1/sqrt(7)").unwrap();
    c.bench_function("box_lower_bound depth 7", |b| b.iter(|| box_lower_bound(black_box(&bx), &refined, &s)));
}

fn certificates(c: &mut Criterion) {
    let weights = vec![Surd::from_ratio(1, 4); 16];
    let lambda = [(0, 1), (1, 1), (2, 1), (3, 1)];
    let (p, delta) = (parse_rational("7/64").unwrap(), parse_rational("0.03").unwrap());
    c.bench_function("small_sum 16 weights", |b| {
        b.iter(|| small_sum_certificate(black_box(&weights), &lambda, &Surd::one(), &p, &delta).unwrap())
    });
    let ctx = CaseContext { samples: 50, ..CaseContext::default() };
    c.bench_function("run_case G", |b| b.iter(|| run_case(black_box(CaseId::G), &ctx)));
}

criterion_group!(benches, oracle, prawitz, table, certificates);
criterion_main!(benches);
