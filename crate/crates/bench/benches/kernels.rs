use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fibertrace::calculus::sample::{random_operator, SampleShape};
use fibertrace::calculus::WaveMethod;
use fibertrace::spectra::circle_spectrum;
use fibertrace::symbol::{laplace_symbol, parametrix_recursion, rational, LaplaceOperatorSpec, NumericTrig, TrigPoly};
use fibertrace::trace::smoothed_wave_trace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wave_duhamel(c: &mut Criterion) {
    let mut group = c.benchmark_group("wave_duhamel");
    for beta in 1..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(beta as u64);
        let shape = SampleShape { beta, plus: 3, minus: 3, spectrum: (0.5, 4.0), coupling: 0.5 };
        let q = random_operator(shape, &mut || rng.random::<f64>()).unwrap();
        for method in [WaveMethod::ExactDividedDifferences, WaveMethod::SimplexQuadrature] {
            group.bench_with_input(BenchmarkId::new(format!("{method:?}"), beta), &q, |b, q| {
                b.iter(|| q.wave_duhamel(2, black_box(0.7), method).unwrap())
            });
        }
    }
    group.finish();
}

fn parametrix(c: &mut Criterion) {
    let w = TrigPoly::from_real_series(rational(1, 1), &[(1, rational(3, 10))], &[(2, rational(1, 5))]);
    let sym = laplace_symbol(&LaplaceOperatorSpec::new(1, w, 0.0).unwrap());
    let mut group = c.benchmark_group("parametrix");
    group.sample_size(10);
    for order in [2, 4, 6] {
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &order| {
            b.iter(|| parametrix_recursion(&sym, order).unwrap())
        });
    }
    group.finish();
}

fn smoothed_trace(c: &mut Criterion) {
    let spec = circle_spectrum(&NumericTrig::constant(1.0), 4e4).unwrap();
    let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
    c.bench_function("smoothed_wave_trace/flat_circle", |b| {
        b.iter(|| smoothed_wave_trace(&spec, black_box(0.05), &grid).unwrap())
    });
}

criterion_group!(benches, wave_duhamel, parametrix, smoothed_trace);
criterion_main!(benches);
