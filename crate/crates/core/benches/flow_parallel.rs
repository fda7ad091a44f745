use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use khflow::exec::Exec;
use khflow::expr::Expression;
use khflow::flow::{run_steps, FlowState, Problem, ProblemSpec};
use khflow::hessfield::{assemble_hessian_with, build_domain, sample_field_with_ghosts, ChiSpec, DomainSpec};

const POLICIES: [(&str, Exec); 2] = [("Sequential", Exec::Sequential), ("Parallel", Exec::Parallel)];

fn hessian(c: &mut Criterion) {
    let d = build_domain(DomainSpec::disk(256, 256)).unwrap();
    let u = sample_field_with_ghosts(&Expression::parse("exp(x)*cos(y) + r^4").unwrap(), &d).unwrap();
    let chi = ChiSpec::zero().sample(&d).unwrap();
    let mut g = c.benchmark_group("hessian_disk_256x256");
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| assemble_hessian_with(black_box(&u), &chi, exec))
        });
    }
    g.finish();
}

fn steps(c: &mut Criterion) {
    let spec = ProblemSpec::new(
        DomainSpec::disk(128, 128),
        2,
        "r^2",
        "-1",
        "0.5*r^2 + 0.01*x*(1 - r^2)^2",
    )
    .unwrap();
    let mut g = c.benchmark_group("flow_disk_128x128_10_steps");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let p = Problem::with_exec(spec.clone(), exec).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| {
                let mut st = FlowState::new(p).unwrap();
                run_steps(&mut st, p, 10).unwrap();
                black_box(st.t)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, hessian, steps);
criterion_main!(benches);
