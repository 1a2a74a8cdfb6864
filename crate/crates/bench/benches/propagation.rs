use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dollard_core::dense::DenseOracle;
use dollard_core::dynamics::{dollard_propagate, SplitStepper};
use dollard_core::special::{exp_integral_e1, switching_integral};
use dollard_core::*;

fn packet(n: usize) -> State {
    let g = make_grid(n, n as f64, 1.0).unwrap();
    gaussian_packet(&g, &PacketSpec::new(0.0, 2.0, 10.0)).unwrap()
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for n in [1024, 4096, 16384] {
        let psi = packet(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| black_box(psi.to_momentum().to_position()))
        });
    }
    group.finish();
}

fn split_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("split_step_100");
    group.sample_size(20);
    let pot = PotentialSpec::coulomb(0.5, 1.0);
    let cfg = StepperConfig::new(0.05).without_monitor();
    for n in [4096, 16384] {
        let psi = packet(n);
        let mut stepper = SplitStepper::new(psi.grid(), &pot, &SwitchingSpec::off(), &cfg).unwrap();
        group.bench_with_input(BenchmarkId::new("constant", n), &psi, |b, psi| {
            b.iter(|| black_box(stepper.run(psi, 0.0, 5.0).unwrap()))
        });
        let sw = SwitchingSpec::new(0.01, 0.0);
        let mut switched = SplitStepper::new(psi.grid(), &pot, &sw, &cfg).unwrap();
        group.bench_with_input(BenchmarkId::new("switched", n), &psi, |b, psi| {
            b.iter(|| black_box(switched.run(psi, 0.0, 5.0).unwrap()))
        });
    }
    group.finish();
}

fn dollard_diagonal(c: &mut Criterion) {
    let psi = packet(16384);
    c.bench_function("dollard_propagate_16384", |b| {
        b.iter(|| black_box(dollard_propagate(&psi, black_box(1024.0), 0.5)))
    });
}

fn special_functions(c: &mut Criterion) {
    c.bench_function("exp_integral_e1", |b| {
        b.iter(|| black_box(exp_integral_e1(black_box(0.37))))
    });
    c.bench_function("switching_integral", |b| {
        b.iter(|| black_box(switching_integral(black_box(0.01), black_box(1500.0))))
    });
}

fn dense_oracle(c: &mut Criterion) {
    let g = make_grid(64, 32.0, 1.0).unwrap();
    let pot = PotentialSpec::coulomb(0.5, 1.0);
    c.bench_function("dense_oracle_build_64", |b| {
        b.iter(|| black_box(DenseOracle::new(&g, &pot).unwrap()))
    });
}

criterion_group!(
    benches,
    transforms,
    split_step,
    dollard_diagonal,
    special_functions,
    dense_oracle
);
criterion_main!(benches);
