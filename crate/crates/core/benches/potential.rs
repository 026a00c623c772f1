// SPDX-License-Identifier: Apache-2.0

//! Riesz operator assembly and an alpha sweep, sequential against rayon.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::sync::Arc;
use tfground::analysis::alpha_sweep;
use tfground::flow::{FlowConfig, Init};
use tfground::radial::{make_grid, Clustering};
use tfground::riesz::{KernelMethod, RieszOperator};
use tfground::{Execution, Params};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("riesz_operator");
    group.sample_size(10);
    for (n, alpha, method) in [(3, 1.0, KernelMethod::Closed3d), (3, 0.5, KernelMethod::Closed3d), (2, 1.5, KernelMethod::HypergeomN)] {
        let grid = Arc::new(make_grid(20.0, 256, Clustering::Uniform).unwrap());
        for (name, exec) in MODES {
            let id = BenchmarkId::new(name, format!("N{n}_a{alpha}"));
            group.bench_with_input(id, &grid, |b, grid| {
                b.iter(|| RieszOperator::with_method(grid.clone(), n, alpha, None, method, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("alpha_sweep");
    group.sample_size(10);
    let base = Params::new(3, 1.0, 4.0, 10.0).unwrap();
    let alphas = [1.0, 2.0, 2.5];
    let cfg = FlowConfig {
        init: Init::Gaussian,
        ..FlowConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| alpha_sweep(&base, &alphas, &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_operator, bench_sweep);
criterion_main!(benches);
