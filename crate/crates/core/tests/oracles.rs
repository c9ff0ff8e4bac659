//! The independent oracles agree with the perturbative pipeline.

mod common;

use cavity_ent::blocks::{building_block, BlockCache, CavityGeometry, ModeSpec};
use cavity_ent::oracles::extract::extract_orders;
use cavity_ent::oracles::fock::{fock_apply_instate, fock_vacuum, LieWindow};
use cavity_ent::oracles::overlap::overlap_bogoliubov;
use cavity_ent::states::{build_state, InState, Pruning};
use cavity_ent::{Bogoliubov, Species};
use common::single_segment;

const N: usize = 12;

#[test]
fn orders_fitted_to_integrated_overlaps_match_the_series() {
    let hs = [0.04, 0.03, 0.02, 0.015, 0.01, 0.005];
    for spec in [ModeSpec::boson(), ModeSpec::fermion()] {
        let samples: Vec<_> = hs
            .iter()
            .map(|&h| (h, overlap_bogoliubov(&CavityGeometry::new(1.0, h).unwrap(), spec.species, N).unwrap().numeric))
            .collect();
        let fitted = extract_orders(&samples, 4, 1e-9).unwrap().matrices;
        let series = building_block(&spec, &CavityGeometry::new(1.0, 0.01).unwrap(), N).unwrap();
        let expected = match &series {
            Bogoliubov::Boson(b) => vec![b.alpha().clone(), b.beta().clone()],
            Bogoliubov::Fermion(f) => vec![f.a().clone()],
        };
        // interior block, away from the truncation edge
        let range = match spec.species {
            Species::Boson => 0..N / 2,
            Species::Fermion => N / 2..N + N / 2 + 1,
        };
        for (fit, exact) in fitted.iter().zip(&expected) {
            // the fitted h² coefficients carry the most fit noise
            for (k, tol) in [1e-6, 1e-6, 1e-5].into_iter().enumerate() {
                let diff = fit.submatrix(range.clone(), range.clone()).sub(&exact.submatrix(range.clone(), range.clone()));
                let dev = diff.max_abs()[k];
                assert!(dev < tol, "{:?} order {k}: {dev}", spec.species);
            }
        }
    }
}

#[test]
fn truncated_fock_space_reproduces_small_windows() {
    let cache = BlockCache::new();
    let h = 0.01;
    for (species, state, size) in [
        (Species::Boson, InState::Vacuum, 6),
        (Species::Fermion, InState::Vacuum, 3),
        (Species::Fermion, InState::OneParticle(0), 3),
    ] {
        let b = single_segment(&cache, species, 0.7, N);
        let window = LieWindow::for_transformation(&b, size).unwrap();
        let expansion = build_state(&window.series().unwrap(), &state, size, Pruning::Full).unwrap();
        let numeric = window.at(h);
        let vacuum = fock_vacuum(&numeric, expansion.labels.clone()).unwrap();
        let oracle =
            if state.modes().is_empty() { vacuum } else { fock_apply_instate(&numeric, &vacuum, &state.modes()).unwrap() };
        assert!((oracle.norm() - 1.0).abs() < 1e-9, "{species:?} {state}: norm {}", oracle.norm());
        let dev = oracle.max_deviation(&expansion, h).unwrap();
        assert!(dev < 10.0 * h * h * h, "{species:?} {state}: {dev}");
    }
}
