use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hfpss::sseq::{Sseq, SseqConfig, Window};
use hfpss::stabilizer::{g24_generators, subgroup_closure};
use hfpss::{Presentation, PresentationConfig};

fn normal_form(c: &mut Criterion) {
    let pres = Presentation::g24(PresentationConfig::default()).unwrap();
    let x = pres.parse("c6^3*c4^2*mu^2*nu^3*eps*kbar*j^2 + D^-1*c4^6*eta^5").unwrap();
    c.bench_function("normal_form", |b| b.iter(|| pres.normal_form(black_box(&x)).unwrap()));
}

fn small_window(c: &mut Criterion) {
    let cfg = SseqConfig { window: Window { stem_min: 40, stem_max: 50, smax: 12 }, ..Default::default() };
    let mut g = c.benchmark_group("pages");
    g.sample_size(10);
    g.bench_function("stems_40_50_s12", |b| b.iter(|| Sseq::g24(black_box(cfg)).unwrap()));
    g.finish();
}

fn closure(c: &mut Criterion) {
    let gens = g24_generators(8).unwrap();
    c.bench_function("g24_closure_n8", |b| b.iter(|| subgroup_closure(black_box(&gens), 100).unwrap()));
}

criterion_group!(benches, normal_form, small_window, closure);
criterion_main!(benches);
