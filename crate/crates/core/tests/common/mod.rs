#![allow(dead_code)]

use cavity_ent::blocks::BlockCache;
use cavity_ent::negativity::{partial_transpose, Factor};
use cavity_ent::scenarios::{transformation, SweepRequest};
use cavity_ent::states::{build_state, reduce_to_pair, FermionOrdering, InState, Pruning, ReducedDensityMatrix};
use cavity_ent::{Bogoliubov, SeriesMatrix, Species};

pub const N_MAX: usize = 40;

/// In → out transformation of one accelerated segment of duration `u`.
pub fn single_segment(cache: &BlockCache, species: Species, u: f64, n_max: usize) -> Bogoliubov {
    transformation(&SweepRequest::default(), species, u, n_max, cache).unwrap()
}

pub fn reduced(b: &Bogoliubov, state: &InState, modes: (i64, i64), ordering: FermionOrdering) -> ReducedDensityMatrix {
    let s = build_state(b, state, b.n_max(), Pruning::PairReduction).unwrap();
    reduce_to_pair(&s, modes.0, modes.1, ordering).unwrap()
}

pub fn pt(b: &Bogoliubov, state: &InState, modes: (i64, i64)) -> SeriesMatrix {
    partial_transpose(&reduced(b, state, modes, FermionOrdering::Ascending), Factor::Second)
}

/// Distance from `target` to the nearest eigenvalue of `pt` at `h`.
pub fn nearest_eigenvalue_gap(pt: &SeriesMatrix, h: f64, target: f64) -> f64 {
    cavity_ent::negativity::pt_eigenvalues(pt, h)
        .unwrap()
        .iter()
        .map(|e| (e - target).abs())
        .fold(f64::INFINITY, f64::min)
}
