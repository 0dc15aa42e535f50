use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cmzv_bench::workloads;
use cmzv_core::arith::bits_for_digits;
use cmzv_core::oracle::direct_sum;
use cmzv_core::pipeline::{oracle_config, spec_word_sum};
use cmzv_core::{compile_spec, cov, Evaluator};

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for (name, spec) in workloads() {
        group.bench_with_input(BenchmarkId::new("compile", name), &spec, |b, s| {
            b.iter(|| compile_spec(black_box(s)).unwrap())
        });

        let expr = compile_spec(&spec).unwrap().expr;
        group.bench_with_input(BenchmarkId::new("cov", name), &expr, |b, e| b.iter(|| cov(black_box(e)).unwrap()));

        // A fresh evaluator per iteration so no word value is reused.
        let words = spec_word_sum(&spec).unwrap();
        let bits = bits_for_digits(45);
        group.bench_with_input(BenchmarkId::new("evaluate-40", name), &words, |b, ws| {
            b.iter(|| Evaluator::new(bits).eval_wordsum(black_box(ws)).unwrap())
        });

        let cfg = oracle_config(20);
        group.bench_with_input(BenchmarkId::new("oracle-20", name), &spec, |b, s| {
            b.iter(|| direct_sum(black_box(s), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
