use std::collections::BTreeMap;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use weylwit::block_seq::{derive_iso, derive_twisted};
use weylwit::iso_witness::{build, build_randomized, isotropy, transport};
use weylwit::twisted_witness::{build_twisted, build_twisted_randomized, transport_twisted};
use weylwit::weyl::{build_weyl, enumerate_classes, search_row, SearchOptions, WeylType};

fn iso(c: &mut Criterion) {
    let seq = derive_iso(&[5, 3, 1], &[3, 1]).unwrap();
    c.bench_function("iso build dim 13", |b| b.iter(|| build(black_box(&seq)).unwrap()));
    let w = build_randomized(&seq, 1).unwrap();
    c.bench_function("iso normalize dim 13", |b| b.iter(|| black_box(&w).normalize().unwrap()));
    let (a, z) = (build(&seq).unwrap().normalize().unwrap(), w.normalize().unwrap());
    c.bench_function("iso transport dim 13", |b| b.iter(|| transport(black_box(&a), black_box(&z)).unwrap()));
    c.bench_function("iso isotropy dim 13", |b| b.iter(|| isotropy(black_box(&a)).unwrap()));
}

fn twisted(c: &mut Criterion) {
    let seq = derive_twisted(&[3, 1], &[4, 2]).unwrap();
    c.bench_function("twisted build", |b| b.iter(|| build_twisted(black_box(&seq)).unwrap()));
    let a = build_twisted(&seq).unwrap().normalize().unwrap();
    let z = build_twisted_randomized(&seq, 2).unwrap().normalize().unwrap();
    c.bench_function("twisted transport", |b| b.iter(|| transport_twisted(black_box(&a), black_box(&z)).unwrap()));
}

fn weyl(c: &mut Criterion) {
    let f4 = build_weyl(WeylType::F4).unwrap();
    c.bench_function("F4 classes", |b| b.iter(|| enumerate_classes(black_box(&f4)).unwrap()));
    let e8 = build_weyl(WeylType::E(8)).unwrap();
    let cox = e8.coxeter_element();
    c.bench_function("E8 length", |b| b.iter(|| e8.length(black_box(&cox))));
    let target = BTreeMap::from([(6, 2), (12, 1)]);
    let opts = SearchOptions { target_length: Some(22), ..SearchOptions::new(2_000_000, 0) };
    c.bench_function("E8 search 6^2 12", |b| b.iter(|| search_row(&e8, black_box(&target), &opts).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = iso, twisted, weyl
}
criterion_main!(benches);
