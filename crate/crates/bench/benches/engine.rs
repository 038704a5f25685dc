use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use scn_core::equilibrium::profile_network;
use scn_core::{
    enumerate_equilibria, estimate_payoffs, payoff_congestion, sweep, thresholds_2x2, EnumerateOptions, GammaAxis,
    GridSpec, ModelParams, Network,
};

fn payoffs(c: &mut Criterion) {
    let p = ModelParams::new(6, 6, 1.0, 0.8, 0.005, 0.02).unwrap();
    let net = profile_network(6, 6, 0x05a5_aa5a_53c3);
    c.bench_function("payoff_congestion_6x6", |b| {
        b.iter(|| (0..6).map(|i| payoff_congestion(black_box(&net), &p, i)).sum::<f64>())
    });
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    for (n, m) in [(2, 2), (3, 3)] {
        let p = ModelParams::new(n, m, 1.0, 0.8, 0.005, 0.02).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{m}")), &p, |b, p| {
            b.iter(|| enumerate_equilibria(p, EnumerateOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let p = ModelParams::new(2, 2, 1.0, 0.8, 0.0, 0.02).unwrap();
    let net = Network::new(2, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
    c.bench_function("estimate_full_2x2_100k", |b| {
        b.iter(|| estimate_payoffs(&net, &p, 100_000, 7, None).unwrap())
    });
}

fn thresholds(c: &mut Criterion) {
    c.bench_function("thresholds_2x2", |b| {
        b.iter(|| thresholds_2x2(black_box(0.8), 0.002, 1.0).unwrap())
    });
    let spec = GridSpec {
        lambda_lo: 0.63,
        lambda_hi: 0.98,
        lambda_count: 10,
        gamma: GammaAxis::BelowParallelMax,
        gamma_count: 10,
        c_values: vec![0.0],
        demand: 1.0,
        boundary_steps: 2.0,
    };
    c.bench_function("sweep_10x10", |b| b.iter(|| sweep(&spec).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = payoffs, enumeration, monte_carlo, thresholds
}
criterion_main!(benches);
