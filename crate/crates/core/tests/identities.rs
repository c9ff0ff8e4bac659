//! Structure of the perturbative transformations: identities, composition
//! and agreement with the directly integrated overlaps.

mod common;

use cavity_ent::blocks::{building_block, BlockCache, CavityGeometry, ModeSpec};
use cavity_ent::oracles::overlap::overlap_bogoliubov;
use cavity_ent::{Bogoliubov, NumericBogoliubov, Species};
use common::single_segment;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const N: usize = 16;

#[test]
fn building_blocks_satisfy_identities_at_zeroth_and_first_order() {
    let geom = CavityGeometry::new(1.0, 0.01).unwrap();
    for spec in [ModeSpec::boson(), ModeSpec::fermion()] {
        let report = building_block(&spec, &geom, N).unwrap().identity_check();
        assert!(report.max_at_order(0) < 1e-10, "{:?}: order 0 {}", spec, report.max_at_order(0));
        assert!(report.max_at_order(1) < 1e-10, "{:?}: order 1 {}", spec, report.max_at_order(1));
        // truncation of the window leaves a small second-order defect
        assert!(report.max_at_order(2) < 1e-3, "{:?}: order 2 {}", spec, report.max_at_order(2));
    }
}

fn interior(b: &Bogoliubov) -> Bogoliubov {
    match b {
        Bogoliubov::Boson(b) => Bogoliubov::Boson(b.restrict(N / 2)),
        Bogoliubov::Fermion(f) => Bogoliubov::Fermion(f.restrict(N / 2)),
    }
}

#[test]
fn composing_with_the_inverse_gives_the_identity() {
    let cache = BlockCache::new();
    for species in [Species::Boson, Species::Fermion] {
        let b = single_segment(&cache, species, 0.37, N);
        let round = b.invert().compose(&b).unwrap();
        let id = Bogoliubov::identity(species, N);
        // the truncated window spoils the products near its edge
        let dev = interior(&round).max_deviation(&interior(&id)).unwrap();
        assert!(dev < 1e-3, "{species:?}: {dev}");
    }
}

#[test]
fn transformation_is_periodic_in_the_segment_duration() {
    let cache = BlockCache::new();
    // fermion frequencies sit at half-integer multiples of π, so the
    // transformation itself only repeats after two periods
    for (species, period) in [(Species::Boson, 1.0), (Species::Fermion, 2.0)] {
        let zero = single_segment(&cache, species, 0.0, N);
        let later = single_segment(&cache, species, period, N);
        let dev = zero.max_deviation(&later).unwrap();
        assert!(dev < 1e-9, "{species:?}: {dev}");
    }
}

fn interior_max(m: &DMatrix<C64>, lo: usize, hi: usize) -> f64 {
    (lo..hi).flat_map(|i| (lo..hi).map(move |j| (i, j))).map(|ij| m[ij].norm()).fold(0.0, f64::max)
}

#[test]
fn series_matches_integrated_overlaps_to_third_order() {
    let geom_for = |h| CavityGeometry::new(1.0, h).unwrap();
    for spec in [ModeSpec::boson(), ModeSpec::fermion()] {
        let series = building_block(&spec, &geom_for(0.01), N).unwrap();
        let mut residuals = vec![];
        for h in [0.02, 0.01] {
            let exact = overlap_bogoliubov(&geom_for(h), spec.species, N).unwrap().numeric;
            let approx = series.evaluate_at(h).unwrap();
            let r = match (exact, approx) {
                (NumericBogoliubov::Boson { alpha: a, beta: b }, NumericBogoliubov::Boson { alpha: sa, beta: sb }) => {
                    interior_max(&(a - sa), 0, N / 2).max(interior_max(&(b - sb), 0, N / 2))
                }
                (NumericBogoliubov::Fermion { a, .. }, NumericBogoliubov::Fermion { a: sa, .. }) => {
                    interior_max(&(a - sa), N / 2, N + N / 2 + 1)
                }
                _ => unreachable!(),
            };
            residuals.push(r);
        }
        // halving h shrinks an O(h³) remainder eightfold
        let ratio = residuals[0] / residuals[1];
        assert!(ratio > 6.0, "{:?}: residuals {residuals:?}", spec.species);
    }
}
