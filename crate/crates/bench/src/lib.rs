//! Fixtures shared by the benchmarks.

use hexwalk_core::coin::near_c0;
use hexwalk_core::{assemble_walk, BoxSpec, CoinField, DisorderField, DisorderMode, WalkMatrix};

/// Disordered walk near `C0` on an `l × l` box.
pub fn disordered_walk(l: u32, seed: u64) -> WalkMatrix {
    let amb = BoxSpec::new(l, l).expect("positive side");
    let coins = CoinField::constant(near_c0(0.05, seed).expect("radius in range")).expect("unitary");
    let dis = DisorderField::sample(&amb, DisorderMode::Decorrelated, seed);
    assemble_walk(&amb, &coins, Some(&dis)).expect("walk assembles")
}
