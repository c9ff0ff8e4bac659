//! Out-region expansions of the in-states and their two-mode reductions.

mod common;

use cavity_ent::blocks::BlockCache;
use cavity_ent::states::{build_state, reduce_to_pair, FermionOrdering, InState, Pruning};
use cavity_ent::{H2Series, Species};
use common::single_segment;

const N: usize = 10;

fn cases() -> Vec<(Species, InState, (i64, i64))> {
    vec![
        (Species::Boson, InState::Vacuum, (1, 4)),
        (Species::Boson, InState::OneParticle(1), (1, 3)),
        (Species::Fermion, InState::Vacuum, (2, -1)),
        (Species::Fermion, InState::OneParticle(1), (1, 4)),
        (Species::Fermion, InState::Pair(2, -1), (2, -1)),
    ]
}

fn max_order(s: H2Series) -> f64 {
    s.max_abs()
}

#[test]
fn states_are_normalized_and_reductions_have_unit_trace() {
    let cache = BlockCache::new();
    for (species, state, modes) in cases() {
        let b = single_segment(&cache, species, 0.43, N);
        let s = build_state(&b, &state, N, Pruning::PairReduction).unwrap();
        assert!(max_order(s.norm_sqr() - H2Series::ONE) < 1e-12, "{species:?} {state}");
        let rho = reduce_to_pair(&s, modes.0, modes.1, FermionOrdering::Ascending).unwrap();
        assert!(max_order(rho.trace() - H2Series::ONE) < 1e-12, "{species:?} {state}");
        assert!(rho.hermiticity_defect() < 1e-12, "{species:?} {state}");
    }
}

#[test]
fn pruning_leaves_two_mode_reductions_unchanged() {
    let cache = BlockCache::new();
    let n = 6;
    for (species, state, modes) in cases() {
        let b = single_segment(&cache, species, 0.29, n);
        let full = build_state(&b, &state, n, Pruning::Full).unwrap();
        let pruned = build_state(&b, &state, n, Pruning::PairReduction).unwrap();
        assert!(pruned.len() <= full.len());
        for pair in [modes, (1, 2)] {
            let a = reduce_to_pair(&full, pair.0, pair.1, FermionOrdering::Ascending).unwrap();
            let p = reduce_to_pair(&pruned, pair.0, pair.1, FermionOrdering::Ascending).unwrap();
            let dev = a.rho.sub(&p.rho).max_abs().into_iter().fold(0.0, f64::max);
            assert!(dev < 1e-12, "{species:?} {state} {pair:?}: {dev}");
        }
    }
}

#[test]
fn reductions_converge_as_the_window_grows() {
    let cache = BlockCache::new();
    // doubling from the production window; the fermion tails decay slowly
    for (species, state, modes) in cases() {
        let b = single_segment(&cache, species, 0.61, 8 * N);
        let small = build_state(&b, &state, 4 * N, Pruning::PairReduction).unwrap();
        let large = build_state(&b, &state, 8 * N, Pruning::PairReduction).unwrap();
        let a = reduce_to_pair(&small, modes.0, modes.1, FermionOrdering::Ascending).unwrap();
        let c = reduce_to_pair(&large, modes.0, modes.1, FermionOrdering::Ascending).unwrap();
        let dev = a.rho.sub(&c.rho).max_abs().into_iter().fold(0.0, f64::max);
        assert!(dev < 1e-6, "{species:?} {state}: {dev}");
    }
}

#[test]
fn excited_mode_keeps_its_particle_at_zeroth_order() {
    let cache = BlockCache::new();
    let b = single_segment(&cache, Species::Boson, 0.5, N);
    let s = build_state(&b, &InState::OneParticle(2), N, Pruning::PairReduction).unwrap();
    let rho = reduce_to_pair(&s, 2, 3, FermionOrdering::Ascending).unwrap();
    assert!((rho.entry((1, 0), (1, 0)).c0.re - 1.0).abs() < 1e-12);
    assert!(rho.entry((0, 0), (0, 0)).c0.norm() < 1e-12);

    let f = single_segment(&cache, Species::Fermion, 0.5, N);
    let s = build_state(&f, &InState::Pair(0, -2), N, Pruning::PairReduction).unwrap();
    let rho = reduce_to_pair(&s, 0, -2, FermionOrdering::Ascending).unwrap();
    assert!((rho.entry((1, 1), (1, 1)).c0.re - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_in_states_are_rejected() {
    let cache = BlockCache::new();
    let b = single_segment(&cache, Species::Boson, 0.5, N);
    assert!(build_state(&b, &InState::OneParticle(0), N, Pruning::PairReduction).is_err());
    assert!(build_state(&b, &InState::Pair(1, -1), N, Pruning::PairReduction).is_err());
    let f = single_segment(&cache, Species::Fermion, 0.5, N);
    assert!(build_state(&f, &InState::OneParticle(-1), N, Pruning::PairReduction).is_err());
    assert!(build_state(&f, &InState::Pair(-1, 1), N, Pruning::PairReduction).is_err());
}
