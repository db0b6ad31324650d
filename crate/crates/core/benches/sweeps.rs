//! Scenario sweeps through `par_map` and `seq_map`. Build with
//! `--no-default-features` to see the sequential fallback behind `par_map` too.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lrmech::batch::{par_map, seq_map};
use lrmech::integrators::{integrate, IntegratorConfig, Method};
use lrmech::phase::SystemKind;
use lrmech::scenarios::random_scenario;

fn final_energy(job: &(SystemKind, u64)) -> f64 {
    let sc = random_scenario(job.0, 4, job.1).expect("scenario");
    let traj = integrate(sc.system.as_ref(), &sc.x0, &IntegratorConfig::new(Method::Rk4Projected, 1e-3, 500))
        .expect("integration");
    sc.system.energy(traj.last()).expect("energy")
}

fn sweeps(c: &mut Criterion) {
    let kinds = [SystemKind::Lplusr, SystemKind::RubberSupport, SystemKind::Coupled, SystemKind::RubberChaplygin];
    let jobs: Vec<(SystemKind, u64)> = kinds.iter().flat_map(|k| (0..4).map(move |s| (*k, s))).collect();
    let mut group = c.benchmark_group("scenario-sweep");
    group.sample_size(10);
    group.bench_function("par_map", |b| b.iter(|| black_box(par_map(&jobs, final_energy))));
    group.bench_function("seq_map", |b| b.iter(|| black_box(seq_map(&jobs, final_energy))));
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
