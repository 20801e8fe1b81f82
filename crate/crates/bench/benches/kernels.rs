use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mp_core::constraints::project_curve_set;
use mp_core::energy::{evaluate, AttractionField, Objective};
use mp_core::experiments::random_blob_target;
use mp_core::measure::{uniform_npoint, DiscreteMeasure};
use mp_core::quantize::cube_quantize;
use mp_core::solver::{init_points, InitStrategy};
use mp_core::transport::w1_exact;
use mp_core::{CurveConstraintSpec, KernelSpec, Metric, NormIndex, Points};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn energy(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let target = random_blob_target(&mut rng, 2, 64).unwrap();
    let kernel = KernelSpec::default();
    let mut g = c.benchmark_group("energy");
    for n in [64, 256, 1024] {
        let p = init_points(&target, n, InitStrategy::RandomRejection, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("direct", n), &p, |b, p| {
            b.iter(|| evaluate(black_box(p), 2, &target, &kernel).unwrap())
        });
        let field = AttractionField::new(&target, &kernel, 2).unwrap();
        let obj = Objective::new(&target, &kernel).with_field(field);
        g.bench_with_input(BenchmarkId::new("field", n), &p, |b, p| {
            b.iter(|| obj.evaluate(black_box(p), 2).unwrap())
        });
    }
    g.finish();
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
    uniform_npoint(Points::new(2, (0..2 * n).map(|_| rng.gen()).collect()).unwrap()).unwrap()
}

fn transport(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut g = c.benchmark_group("w1_exact");
    for n in [32, 128, 512] {
        let (a, b) = (random_measure(&mut rng, n), random_measure(&mut rng, n));
        g.bench_function(BenchmarkId::from_parameter(n), |bench| {
            bench.iter(|| w1_exact(black_box(&a), black_box(&b), Metric::L2).unwrap())
        });
    }
    g.finish();
}

fn projection(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut g = c.benchmark_group("project_curve_set");
    for q in [NormIndex::One, NormIndex::Two, NormIndex::Inf] {
        let n = 500;
        let spec = CurveConstraintSpec::new(1, q, vec![5.0], n, 1.0).unwrap();
        let z: Vec<f64> = (0..2 * n).map(|_| rng.gen()).collect();
        g.bench_function(BenchmarkId::from_parameter(q), |b| {
            b.iter(|| project_curve_set(&spec, black_box(&z), 1e-6).unwrap())
        });
    }
    g.finish();
}

fn quantize(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let target = random_blob_target(&mut rng, 2, 128).unwrap();
    let mut g = c.benchmark_group("cube_quantize");
    for n in [64, 1024, 16384] {
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| cube_quantize(black_box(&target), n).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, energy, transport, projection, quantize);
criterion_main!(benches);
