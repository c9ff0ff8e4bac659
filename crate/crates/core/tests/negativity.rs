//! Negativity of two-mode reductions: parity selection, Pauli blocking and
//! the leading-order fit.

mod common;

use cavity_ent::blocks::BlockCache;
use cavity_ent::negativity::{leading_order, leading_order_on, negativity_numeric, LeadingTerm};
use cavity_ent::states::InState;
use cavity_ent::{H2Series, SeriesMatrix, Species};
use common::{pt, single_segment};

const N: usize = 20;

#[test]
fn boson_vacuum_entangles_opposite_parity_pairs_at_first_order() {
    let cache = BlockCache::new();
    let b = single_segment(&cache, Species::Boson, 0.3, N);
    let odd = leading_order(&pt(&b, &InState::Vacuum, (1, 4))).unwrap();
    let even = leading_order(&pt(&b, &InState::Vacuum, (1, 3))).unwrap();
    assert_eq!(odd.power(), Some(1), "{odd:?}");
    assert_eq!(even.power(), Some(2), "{even:?}");
}

#[test]
fn inertial_segment_creates_no_entanglement() {
    let cache = BlockCache::new();
    for (species, state, modes) in [
        (Species::Boson, InState::Vacuum, (1, 4)),
        (Species::Boson, InState::OneParticle(1), (1, 4)),
        (Species::Fermion, InState::Vacuum, (2, -1)),
    ] {
        let b = single_segment(&cache, species, 0.0, N);
        let p = pt(&b, &state, modes);
        assert_eq!(negativity_numeric(&p, 0.01).unwrap(), 0.0, "{species:?} {state}");
    }
}

#[test]
fn occupied_fermion_mode_blocks_entanglement_with_antiparticles() {
    let cache = BlockCache::new();
    for u in [0.2, 0.5, 0.8] {
        let b = single_segment(&cache, Species::Fermion, u, N);
        for modes in [(1, -1), (1, -2)] {
            let p = pt(&b, &InState::OneParticle(1), modes);
            for h in [0.01, 0.005] {
                assert!(negativity_numeric(&p, h).unwrap() < 1e-10, "u = {u}, {modes:?}, h = {h}");
            }
        }
    }
}

#[test]
fn one_particle_state_entangles_more_than_the_vacuum() {
    let cache = BlockCache::new();
    let b = single_segment(&cache, Species::Boson, 0.45, N);
    let vac = leading_order(&pt(&b, &InState::Vacuum, (1, 4))).unwrap().coefficient();
    let one = leading_order(&pt(&b, &InState::OneParticle(1), (1, 4))).unwrap().coefficient();
    assert!(vac > 0.0 && one > vac, "vacuum {vac}, one particle {one}");
}

fn matrix(entries: [[H2Series; 2]; 2]) -> SeriesMatrix {
    SeriesMatrix::from_fn(2, 2, |i, j| entries[i][j])
}

#[test]
fn leading_order_fit_recovers_known_power_laws() {
    let zero = H2Series::real(0.0, 0.0, 0.0);
    // eigenvalues (h² ± √(h⁴ + 36h²))/2: 𝒩 = 3h - h²/2 + O(h³)
    let off = H2Series::real(0.0, 3.0, 0.0);
    let linear = matrix([[zero, off], [off, H2Series::real(0.0, 0.0, 1.0)]]);
    // diagonal with a -5h² entry
    let quadratic = matrix([[H2Series::real(0.0, 0.0, -5.0), zero], [zero, H2Series::real(1.0, 0.0, 0.0)]]);
    for (m, power, coefficient) in [(linear, 1, 3.0), (quadratic, 2, 5.0)] {
        match leading_order(&m).unwrap() {
            LeadingTerm::Term { power: p, coefficient: c, .. } => {
                assert_eq!(p, power);
                assert!((c - coefficient).abs() < 1e-6, "{c} vs {coefficient}");
            }
            t => panic!("{t:?}"),
        }
    }
    let identity = SeriesMatrix::identity(2);
    assert_eq!(leading_order_on(&identity, &[1e-2, 5e-3, 2.5e-3]).unwrap(), LeadingTerm::Zero);
}
