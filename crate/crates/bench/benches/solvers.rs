use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use giant_atom::driven::{default_dt, lindblad_evolve, map_coherence_purity, steady_state, MasterOptions};
use giant_atom::relaxation::{dde_integrate, mode_oracle, pe_series, ModeOracleConfig};
use giant_atom::units::ghz;
use giant_atom::{DensityMatrix2, RateConvention};
use giant_atom_bench::{driven_case, mhz_grid, relaxation_case};

fn relaxation(c: &mut Criterion) {
    let p = relaxation_case(0.5, 0.164 * std::f64::consts::PI);
    let conv = RateConvention::default();
    let t = p.delay;
    let times: Vec<f64> = (0..=1000).map(|i| 10.0 * t * i as f64 / 1000.0).collect();
    c.bench_function("series_10T_1001pts", |b| b.iter(|| pe_series(black_box(&p), &times, conv).unwrap()));
    c.bench_function("dde_10T_dt_T_over_1000", |b| b.iter(|| dde_integrate(black_box(&p), 10.0 * t, t / 1000.0, conv).unwrap()));
    let mut g = c.benchmark_group("mode_oracle_6T");
    g.sample_size(10);
    for n in [500usize, 1000, 2000] {
        let cfg = ModeOracleConfig::for_horizon(n, 6.0 * t);
        g.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| b.iter(|| mode_oracle(&p, cfg, 6.0 * t, conv).unwrap()));
    }
    g.finish();
}

fn driven(c: &mut Criterion) {
    let (d, r, land) = driven_case(10.0);
    let opts = MasterOptions::default();
    c.bench_function("steady_state_svd", |b| b.iter(|| steady_state(black_box(&d), &r, &opts).unwrap()));
    let (dw, rw, _) = driven_case(2.5);
    let dt = default_dt(&dw, &rw, &opts);
    c.bench_function("lindblad_evolve_3p8us", |b| b.iter(|| lindblad_evolve(&DensityMatrix2::ground(), &dw, &rw, dt, &opts).unwrap()));
    let rabi = mhz_grid(0.0, 40.0, 100);
    let delta = mhz_grid(-20.0, 20.0, 100);
    let mut g = c.benchmark_group("map");
    g.sample_size(10);
    g.bench_function("100x100", |b| b.iter(|| map_coherence_purity(&rabi, &delta, ghz(4.891), &land, &opts)));
    g.finish();
}

criterion_group!(benches, relaxation, driven);
criterion_main!(benches);
