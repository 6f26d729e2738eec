use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use agec_bench::Fixture;
use agec_core::align::{align, diff};
use agec_core::corrupt::{corrupt_corpus_par, CorruptionConfig};
use agec_core::m2::{emit_m2, parse_m2};
use agec_core::maxmatch::Scorer;
use agec_core::tags::{encode_tags, oracle_correct, DEFAULT_MAX_ITERS};
use agec_core::text::{normalize, NormalizationMode};

const SIZES: [usize; 2] = [100, 1_000];

fn alignment(c: &mut Criterion) {
    let f = Fixture::new(SIZES[1]);
    let mut g = c.benchmark_group("align");
    g.throughput(Throughput::Elements(f.records.len() as u64));
    g.bench_function("align", |b| {
        b.iter(|| f.records.iter().map(|r| align(&r.noisy, &r.clean).len()).sum::<usize>())
    });
    g.bench_function("diff", |b| {
        b.iter(|| f.records.iter().map(|r| diff(&r.noisy, &r.clean).len()).sum::<usize>())
    });
    g.finish();
}

fn scoring(c: &mut Criterion) {
    let mut g = c.benchmark_group("score_corpus");
    for n in SIZES {
        let f = Fixture::new(n);
        let scorer = Scorer::default();
        g.throughput(Throughput::Elements(n as u64));
        for mode in [NormalizationMode::Exact, NormalizationMode::NoAlifYaNoPunct] {
            g.bench_with_input(BenchmarkId::new(mode.name(), n), &f, |b, f| {
                b.iter(|| scorer.score_corpus(black_box(&f.perfect), &f.gold, mode).unwrap())
            });
        }
    }
    g.finish();
}

fn corruption(c: &mut Criterion) {
    let cfg = CorruptionConfig::default();
    let mut g = c.benchmark_group("corrupt_corpus");
    for n in SIZES {
        let f = Fixture::new(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &f.clean, |b, clean| {
            b.iter(|| corrupt_corpus_par(black_box(clean), &cfg).unwrap())
        });
    }
    g.finish();
}

fn tagging(c: &mut Criterion) {
    let f = Fixture::new(SIZES[1]);
    let mut g = c.benchmark_group("tags");
    g.throughput(Throughput::Elements(f.records.len() as u64));
    g.bench_function("encode", |b| {
        b.iter(|| f.records.iter().map(|r| encode_tags(&r.noisy, &r.clean).tags.len()).sum::<usize>())
    });
    g.bench_function("oracle_correct", |b| {
        b.iter(|| {
            f.records
                .iter()
                .map(|r| oracle_correct(&r.noisy, &r.clean, DEFAULT_MAX_ITERS).iterations)
                .sum::<usize>()
        })
    });
    g.finish();
}

fn text_and_m2(c: &mut Criterion) {
    let f = Fixture::new(SIZES[1]);
    let text = emit_m2(&f.gold);
    let mut g = c.benchmark_group("text");
    g.bench_function("normalize_all_modes", |b| {
        b.iter(|| {
            f.clean
                .iter()
                .map(|s| NormalizationMode::ALL.iter().map(|&m| normalize(s, m).len()).sum::<usize>())
                .sum::<usize>()
        })
    });
    g.throughput(Throughput::Bytes(text.len() as u64));
    g.bench_function("parse_m2", |b| b.iter(|| parse_m2(black_box(&text)).unwrap().len()));
    g.bench_function("emit_m2", |b| b.iter(|| emit_m2(black_box(&f.gold)).len()));
    g.finish();
}

criterion_group!(benches, alignment, scoring, corruption, tagging, text_and_m2);
criterion_main!(benches);
