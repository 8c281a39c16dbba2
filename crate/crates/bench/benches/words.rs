use criterion::{criterion_group, criterion_main, Criterion};
use lefschetz_core::{equiv, invariants, Factorization, HomologyClass, TwistLetter};
use std::hint::black_box;

fn elliptic_word(genus: usize, copies: usize) -> Factorization {
    let mut letters = Vec::new();
    for _ in 0..copies {
        letters.push(TwistLetter::new(HomologyClass::basis(genus, 1)));
        letters.push(TwistLetter::new(HomologyClass::basis(genus, genus + 1)));
    }
    Factorization::new(genus, 0, letters).unwrap()
}

fn bench_signature(c: &mut Criterion) {
    let mut group = c.benchmark_group("signature");
    for genus in [1usize, 2, 3] {
        let word = elliptic_word(genus, 6);
        group.bench_function(format!("elliptic g={genus}"), |b| {
            b.iter(|| black_box(invariants::signature(&word, false)))
        });
    }
    group.finish();
}

fn bench_word_product(c: &mut Criterion) {
    let word = elliptic_word(3, 12);
    c.bench_function("word_product g=3 r=24", |b| {
        b.iter(|| black_box(word.word_product()))
    });
}

fn bench_orbit(c: &mut Criterion) {
    let word = elliptic_word(1, 2);
    c.bench_function("hurwitz_orbit depth=3 size=500", |b| {
        b.iter(|| black_box(equiv::hurwitz_orbit(&word, 3, 500, None).unwrap()))
    });
}

criterion_group!(benches, bench_signature, bench_word_product, bench_orbit);
criterion_main!(benches);
