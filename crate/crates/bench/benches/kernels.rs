use criterion::{black_box, criterion_group, criterion_main, Criterion};
use robust_dpg::dpg::{assemble_element, solve, Problem};
use robust_dpg::field::Poly;
use robust_dpg::fortin::{probe_family, FortinOperator};
use robust_dpg::stability::trace_norm_matrix;
use robust_dpg::{criss_cross_mesh, layer_rule, reference_simplex, FortinVariant, Manufactured, TestChoice};

fn quadrature(c: &mut Criterion) {
    c.bench_function("layer_rule n=2 kappa=1e-6", |b| b.iter(|| layer_rule(2, 0, black_box(1e-6), 8).unwrap()));
}

fn fortin(c: &mut Criterion) {
    let t = reference_simplex(2).unwrap();
    let alpha = 1e-3 * t.diameter();
    c.bench_function("construct h1-hp-alpha p=1", |b| {
        b.iter(|| FortinOperator::new(FortinVariant::H1HpAlpha, &t, 1, black_box(alpha)).unwrap())
    });
    for v in [FortinVariant::H1HpAlpha, FortinVariant::DivHp] {
        let op = FortinOperator::new(v, &t, 1, alpha).unwrap();
        let probes = probe_family(&t, v, 1, alpha, 16, 42);
        c.bench_function(&format!("apply {v} p=1"), |b| b.iter(|| op.apply(black_box(&probes[15])).unwrap()));
    }
}

fn dpg(c: &mut Criterion) {
    let t = reference_simplex(2).unwrap();
    let zero = Poly::zero();
    let problem = Problem { eps: 1e-4, f: &zero, layer_width: None };
    c.bench_function("assemble element eps", |b| b.iter(|| assemble_element(&t, &problem, TestChoice::Eps).unwrap()));
    let exact = Manufactured::new(1e-3).unwrap();
    let load = exact.load();
    let mesh = criss_cross_mesh().refine_uniform().unwrap().refine_uniform().unwrap();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("64 elements eps", |b| b.iter(|| solve(&mesh, &exact.problem(&load), TestChoice::Eps).unwrap()));
    g.finish();
}

fn stability(c: &mut Criterion) {
    let t = reference_simplex(2).unwrap();
    let mut g = c.benchmark_group("trace norm");
    g.sample_size(10);
    g.bench_function("eps=1e-2", |b| b.iter(|| trace_norm_matrix(&t, black_box(1e-2)).unwrap()));
    g.finish();
}

criterion_group!(benches, quadrature, fortin, dpg, stability);
criterion_main!(benches);
