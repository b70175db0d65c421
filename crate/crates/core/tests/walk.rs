use std::io::BufReader;

use hexwalk_core::coin::{c0, random_unitary};
use hexwalk_core::operators::read_triplets;
use hexwalk_core::{assemble_walk, BoxSpec, CoinField, Direction, DisorderField, DisorderMode};

const GOLDEN: &str = include_str!("data/box11_c0.txt");

fn box11() -> BoxSpec {
    BoxSpec::new(1, 1).unwrap()
}

#[test]
fn golden_export_c0() {
    let w = assemble_walk(&box11(), &CoinField::constant(c0()).unwrap(), None).unwrap();
    let mut buf = Vec::new();
    w.write_triplets(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), GOLDEN);
}

#[test]
fn golden_is_the_permutation_walk() {
    // C0 sends e1 -> e3 -> e2 -> e1; the walk moves (x, i) to (S_σ(i) x, σ(i)).
    let sigma = |d: Direction| match d {
        Direction::D1 => Direction::D3,
        Direction::D2 => Direction::D1,
        Direction::D3 => Direction::D2,
    };
    let file = read_triplets(BufReader::new(GOLDEN.as_bytes())).unwrap();
    let w = assemble_walk(&box11(), &CoinField::constant(c0()).unwrap(), None).unwrap();
    assert_eq!(file.ambient, box11());
    assert_eq!(file.matrix.nnz(), w.dim());
    for col in 0..w.dim() {
        let b = w.basis().element(col);
        let d = sigma(b.coin);
        let row = w.index_of(b.site.shift(d).with_coin(d)).unwrap();
        assert_eq!(file.matrix.get(row, col).re, 1.0);
    }
}

#[test]
fn triplet_round_trip_with_disorder() {
    let amb = BoxSpec::new(3, 2).unwrap().with_origin(1, -1);
    let coins = CoinField::two_sublattice(random_unitary(1), random_unitary(2)).unwrap();
    let dis = DisorderField::sample(&amb, DisorderMode::Correlated, 5);
    let w = assemble_walk(&amb, &coins, Some(&dis)).unwrap();
    let mut buf = Vec::new();
    w.write_triplets(&mut buf).unwrap();
    let back = read_triplets(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back.ambient, amb);
    assert_eq!(back.matrix, *w.matrix());
}

#[test]
fn disorder_reproducible() {
    let amb = BoxSpec::new(4, 4).unwrap();
    let a = DisorderField::sample(&amb, DisorderMode::Decorrelated, 99);
    let b = DisorderField::sample(&amb, DisorderMode::Decorrelated, 99);
    let c = DisorderField::sample(&amb, DisorderMode::Decorrelated, 100);
    assert_eq!(a, b);
    assert_ne!(a, c);
}
