use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use concsynth::at::{detect_translational, fast_trans};
use concsynth::qe::eliminate;
use concsynth::smt::{resolve_program, SmtConfig, SmtSession};
use concsynth::ssi::{normal_form, ssi_solve, ssi_synthesize};
use concsynth_bench::{corpus, max_formula};

fn qe(c: &mut Criterion) {
    let mut g = c.benchmark_group("qe_max");
    for n in [2, 4, 8, 16] {
        let f = max_formula(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| eliminate(n, black_box(f), false)));
    }
    g.finish();
}

fn ssi_construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("ssi_solve");
    for n in [5, 10, 20] {
        let nf = normal_form(&corpus(&format!("ssi/fg_max{n}.sl"))).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &nf, |b, nf| b.iter(|| ssi_solve(black_box(nf))));
    }
    g.finish();
}

fn ssi_end_to_end(c: &mut Criterion) {
    let mut g = c.benchmark_group("ssi_synthesize");
    g.sample_size(10);
    let config = SmtConfig::for_program(&resolve_program(None));
    for n in [2, 5] {
        let p = corpus(&format!("ssi/fg_max{n}.sl"));
        let mut s = SmtSession::new(config.clone()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| b.iter(|| ssi_synthesize(p, &mut s).unwrap()));
    }
    g.finish();
}

fn acceleration(c: &mut Criterion) {
    let mut g = c.benchmark_group("fast_trans");
    for name in ["counter", "diagonal", "sequential"] {
        let ip = detect_translational(&corpus(&format!("at/{name}.sl"))).unwrap();
        g.bench_function(name, |b| b.iter(|| fast_trans(black_box(&ip.pre), &ip.branches, ip.nvars).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, qe, ssi_construction, ssi_end_to_end, acceleration);
criterion_main!(benches);
