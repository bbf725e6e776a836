//! Parallel versus sequential paths of the data-parallel stages: ptype
//! solving in the Kelly driver, per-formula evaluation when computing
//! types, and per-target verdicts when composing types.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mudecomp::decomp::{kelly_from_order, kelly_modelcheck};
use mudecomp::formula::{default_var_sequence, markers, parse_formula};
use mudecomp::gen::{block_chain, random_separation, random_structure, rng};
use mudecomp::par::set_parallel;
use mudecomp::types::{compose_along, compute_types};

const MODES: [(&str, bool); 2] = [("parallel", true), ("sequential", false)];

fn kelly(c: &mut Criterion) {
    let phi = parse_formula("nu Y. (<>Y & mu X. (p | <>X))").unwrap();
    let zs = default_var_sequence(&phi).unwrap();
    let mut group = c.benchmark_group("kelly_block_chain");
    group.sample_size(10);
    for n in [50usize, 200] {
        let g = block_chain(n);
        let d = kelly_from_order(&g, &(0..n).collect::<Vec<_>>()).unwrap();
        for (name, on) in MODES {
            set_parallel(on);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| kelly_modelcheck(black_box(&g), n / 2, &phi, &zs, &d).unwrap())
            });
        }
    }
    group.finish();
    set_parallel(true);
}

fn types(c: &mut Criterion) {
    let m = random_structure(&mut rng(5), 60, 0.08);
    let ls = vec![parse_formula("nu Y. <>(p & Y) | mu X. <>(q | X)").unwrap()];
    let ps = markers("P", 2);
    let mut group = c.benchmark_group("compute_types");
    group.sample_size(10);
    for (name, on) in MODES {
        set_parallel(on);
        group.bench_function(name, |b| b.iter(|| compute_types(black_box(&m), &[0, 1], &ls, &ps).unwrap()));
    }
    group.finish();
    set_parallel(true);
}

fn compose(c: &mut Criterion) {
    let (m, sep) = random_separation(&mut rng(9), 12, 0.25, 2);
    let ls = vec![parse_formula("nu Y. <>Y & <>p").unwrap()];
    let ps = markers("P", sep.interface.len());
    let mut group = c.benchmark_group("compose_types");
    group.sample_size(10);
    for (name, on) in MODES {
        set_parallel(on);
        group.bench_function(name, |b| b.iter(|| compose_along(black_box(&m), &sep, &ls, &ps, &[], &[]).unwrap()));
    }
    group.finish();
    set_parallel(true);
}

criterion_group!(benches, kelly, types, compose);
criterion_main!(benches);
