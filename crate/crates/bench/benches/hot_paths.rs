use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use dynwalk_bench::random_steps;
use dynwalk_core::estimators::estimate_return_prob;
use dynwalk_core::events::scan_e_m;
use dynwalk_core::prefix::PrefixState;
use dynwalk_core::rng::SampleDraws;
use dynwalk_core::{sample_realization, Direction, Schedule};

fn bench_prefix_updates(c: &mut Criterion) {
    let mut group = c.benchmark_group("prefix_point_update");
    for exp in [10u32, 14, 18] {
        let n = 1usize << exp;
        group.throughput(Throughput::Elements(1));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut state = PrefixState::build(random_steps(n, 1));
            let draws = SampleDraws::new(2, 0xF00D, 0);
            let mut ctr = 0u64;
            b.iter(|| {
                ctr += 1;
                let i = 1 + (draws.raw(ctr * 2) as usize % n);
                let d = Direction::from_bits(draws.raw(ctr * 2 + 1) as u8);
                state.point_update(i, d).unwrap();
                black_box(state.has_zero_anywhere())
            });
        });
    }
    group.finish();
}

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_good_times");
    for (name, sched) in [
        ("desk_4_4_2", Schedule::desk(4, 4.0, 2.0).unwrap()),
        ("desk_6_4_2", Schedule::desk(6, 4.0, 2.0).unwrap()),
    ] {
        let n = sched.max_stop() as usize;
        group.throughput(Throughput::Elements(n as u64));
        group.bench_function(name, |b| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let r = sample_realization(n, 1.0, seed);
                black_box(scan_e_m(&r, &sched, (0.0, 1.0)).unwrap().measure())
            });
        });
    }
    group.finish();
}

fn bench_window_walks(c: &mut Criterion) {
    let sched = Schedule::desk(6, 4.0, 2.0).unwrap();
    let x = dynwalk_core::LatticePoint::new(16, 0);
    c.bench_function("return_prob_1k_samples_desk_k6", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(estimate_return_prob(&sched, 6, x, 1_000, seed).unwrap())
        });
    });
}

fn bench_dirichlet(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirichlet_solve");
    group.sample_size(10);
    for n in [16i64, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| black_box(dynwalk_core::dirichlet::DirichletField::solve(n).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_prefix_updates,
    bench_scan,
    bench_window_walks,
    bench_dirichlet
);
criterion_main!(benches);
