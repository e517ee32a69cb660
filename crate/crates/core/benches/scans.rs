//! Sequential against rayon scheduling for the embarrassingly parallel scans.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use strip_vortex::operators::{discrete_critical_width, soliton_morse_scan, tk_lowest_scan};
use strip_vortex::reduction::{probe_j_derivatives, FixedPointOptions, ProbeSteps};
use strip_vortex::{ExecMode, StripDomain, XGrid};

const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

fn label(mode: ExecMode) -> &'static str {
    match mode {
        ExecMode::Sequential => "sequential",
        ExecMode::Parallel => "parallel",
    }
}

fn tk_scan(c: &mut Criterion) {
    let grid = XGrid::new(20.0, 401).unwrap();
    let widths: Vec<f64> = (0..32).map(|i| 4.2 + 0.015 * i as f64).collect();
    let mut g = c.benchmark_group("tk_lowest_scan");
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(mode)), &mode, |b, &m| {
            b.iter(|| tk_lowest_scan(grid, 1, black_box(&widths), m))
        });
    }
    g.finish();
}

fn morse_scan(c: &mut Criterion) {
    let domain = StripDomain::new(20.0, 1.0, 201, 4).unwrap();
    let widths: Vec<f64> = (0..16).map(|i| 3.0 + 0.5 * i as f64).collect();
    let mut g = c.benchmark_group("soliton_morse_scan");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(mode)), &mode, |b, &m| {
            b.iter(|| soliton_morse_scan(domain, black_box(&widths), m).unwrap())
        });
    }
    g.finish();
}

fn derivative_probe(c: &mut Criterion) {
    let domain = StripDomain::new(20.0, 1.0, 201, 4).unwrap();
    let dk = discrete_critical_width(domain.grid, 1);
    let steps = ProbeSteps { levels: 2, ..ProbeSteps::default() };
    let opts = FixedPointOptions { tol: 1e-9, ..FixedPointOptions::default() };
    let mut g = c.benchmark_group("probe_j_derivatives");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(mode)), &mode, |b, &m| {
            b.iter(|| probe_j_derivatives(&domain, 1, dk, &steps, &opts, m).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, tk_scan, morse_scan, derivative_probe);
criterion_main!(benches);
