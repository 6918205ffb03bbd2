use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use npq_bench::{dense_gram, generic_plane, isometry_problem, long_word_map};
use npq_core::forms::congruent_diagonalize;
use npq_core::grassmannian::{plucker, unplucker};
use npq_core::witt::{extend_isometry, WittParams};

fn bench_congruent_diagonalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("congruent_diagonalize");
    for n in [4usize, 6, 8] {
        let g = dense_gram(n);
        group.bench_function(format!("{n}x{n}"), |b| {
            b.iter(|| congruent_diagonalize(black_box(&g)))
        });
    }
    group.finish();
}

fn bench_extend_isometry(c: &mut Criterion) {
    let prob = isometry_problem();
    let params = WittParams::default();
    c.bench_function("extend_isometry/exact_2_2", |b| {
        b.iter(|| extend_isometry(black_box(&prob), &params).expect("extends"))
    });
}

fn bench_decompose(c: &mut Criterion) {
    let map = long_word_map();
    c.bench_function("decompose/word6_2_1", |b| {
        b.iter(|| black_box(&map).decompose())
    });
}

fn bench_plucker_roundtrip(c: &mut Criterion) {
    let plane = generic_plane();
    c.bench_function("plucker_roundtrip", |b| {
        b.iter(|| {
            let w = plucker(black_box(&plane));
            unplucker(&w).expect("decomposable")
        })
    });
}

criterion_group!(
    benches,
    bench_congruent_diagonalize,
    bench_extend_isometry,
    bench_decompose,
    bench_plucker_roundtrip
);
criterion_main!(benches);
