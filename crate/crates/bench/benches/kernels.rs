use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use pstab::cosets::{catalog_presentation, todd_coxeter, GroupId};
use pstab::lab::{make_challenge, repair, torus, RepairStrategy, DEFAULT_BUDGET};
use pstab::metrics::d_gen_exact;
use pstab::{decompose, local_profile, FiniteAction, Rational, Strategy, Word};

fn cycle(n: usize) -> FiniteAction {
    FiniteAction::from_images(vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap()
}

fn cosets(c: &mut Criterion) {
    let bs = catalog_presentation(GroupId::BaumslagSolitar(2)).unwrap();
    let h = vec![bs.parse_word("y").unwrap(), bs.parse_word("xxx").unwrap()];
    c.bench_function("todd_coxeter bs(1,2)/<y,x^3>", |b| {
        b.iter(|| todd_coxeter(black_box(&bs), &h, 10_000).unwrap())
    });
    let d = catalog_presentation(GroupId::Dihedral(12)).unwrap();
    c.bench_function("todd_coxeter d12/1", |b| b.iter(|| todd_coxeter(black_box(&d), &[], 10_000).unwrap()));
}

fn metrics(c: &mut Criterion) {
    let x = FiniteAction::from_images(vec![vec![1, 2, 3, 0, 5, 6, 7, 4], vec![4, 5, 6, 7, 0, 1, 2, 3]]).unwrap();
    let y = FiniteAction::from_images(vec![vec![1, 2, 3, 0, 5, 6, 4, 7], vec![4, 5, 6, 7, 0, 1, 3, 2]]).unwrap();
    c.bench_function("d_gen_exact n=8", |b| b.iter(|| d_gen_exact(black_box(&x), &y, 8).unwrap()));
    let t = torus(&[16, 16]);
    c.bench_function("local_profile 16x16 R=3", |b| b.iter(|| local_profile(black_box(&t), 3).unwrap()));
}

fn tiling(c: &mut Criterion) {
    let x = cycle(1000);
    let eps = Rational::new(1, 20);
    c.bench_function("decompose cycle 1000", |b| {
        b.iter(|| decompose(black_box(&x), eps, Strategy::BfsTiling).unwrap())
    });
}

fn lab(c: &mut Criterion) {
    let rel: Word = "abAB".parse().unwrap();
    let ch = make_challenge(&torus(&[8, 8]), vec![rel], 2, 3).unwrap();
    c.bench_function("repair descent 8x8 k=2", |b| {
        b.iter(|| repair(black_box(&ch), RepairStrategy::Descent, DEFAULT_BUDGET).unwrap())
    });
}

criterion_group!(kernels, cosets, metrics, tiling, lab);
criterion_main!(kernels);
