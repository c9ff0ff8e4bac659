//! Two-mode reduced density matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Ket, StateExpansion, BOSON_CAP};
use crate::bogoliubov::Species;
use crate::error::{Error, Result};
use crate::series::{H2Series, SeriesMatrix};

/// Global operator ordering used to define fermionic kets when tracing.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FermionOrdering {
    #[default]
    Ascending,
    Descending,
}

/// `ρ = Tr_rest |ψ⟩⟨ψ|` on the product basis `|n_a⟩|n_b⟩`, index
/// `n_a·d + n_b` with `d` levels per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    pub species: Species,
    pub modes: (i64, i64),
    /// Levels per mode (5 for bosons, 2 for fermions).
    pub levels: usize,
    pub rho: SeriesMatrix,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.levels * self.levels
    }

    pub fn index(&self, na: usize, nb: usize) -> usize {
        na * self.levels + nb
    }

    pub fn entry(&self, a: (usize, usize), b: (usize, usize)) -> H2Series {
        self.rho.get(self.index(a.0, a.1), self.index(b.0, b.1))
    }

    pub fn trace(&self) -> H2Series {
        (0..self.dim()).map(|i| self.rho.get(i, i)).sum()
    }

    /// Largest `|ρ_ij - ρ_ji*|` over all orders.
    pub fn hermiticity_defect(&self) -> f64 {
        self.rho.sub(&self.rho.adjoint()).max_abs().into_iter().fold(0.0, f64::max)
    }

    pub fn eval(&self, h: f64) -> DMatrix<C64> {
        self.rho.eval(h)
    }
}

/// Sign that moves the observed slots `a`, then `b`, to the front of the
/// operator string, for a ket written in `ordering`.
fn front_sign(ket: &[u8], a: usize, b: usize, ordering: FermionOrdering) -> f64 {
    let before = |slot: usize, skip: usize| -> usize {
        let range: Box<dyn Iterator<Item = usize>> = match ordering {
            FermionOrdering::Ascending => Box::new(0..slot),
            FermionOrdering::Descending => Box::new(slot + 1..ket.len()),
        };
        range.filter(|&i| i != skip && ket[i] != 0).count()
    };
    let mut swaps = 0;
    if ket[a] != 0 {
        swaps += before(a, usize::MAX);
    }
    if ket[b] != 0 {
        swaps += before(b, a);
    }
    let total = ket.iter().filter(|&&n| n != 0).count();
    if ordering == FermionOrdering::Descending {
        // amplitudes are stored for the ascending product
        swaps += total * total.saturating_sub(1) / 2;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Traces out everything but `mode_a` and `mode_b`.
pub fn reduce_to_pair(
    state: &StateExpansion,
    mode_a: i64,
    mode_b: i64,
    ordering: FermionOrdering,
) -> Result<ReducedDensityMatrix> {
    if mode_a == mode_b {
        return Err(Error::InvalidModes(format!("observed modes must differ, got {mode_a} twice")));
    }
    let (sa, sb) = (state.slot(mode_a)?, state.slot(mode_b)?);
    let levels = match state.species {
        Species::Boson => BOSON_CAP as usize + 1,
        Species::Fermion => 2,
    };
    let mut groups: BTreeMap<Ket, Vec<(usize, H2Series)>> = BTreeMap::new();
    for (ket, amp) in &state.amplitudes {
        let (na, nb) = (ket[sa] as usize, ket[sb] as usize);
        if na >= levels || nb >= levels {
            if amp.max_abs() > 1e-14 {
                return Err(Error::CapExceeded { occupation: na.max(nb), cap: levels - 1 });
            }
            continue;
        }
        let sign = match state.species {
            Species::Boson => 1.0,
            Species::Fermion => front_sign(ket, sa, sb, ordering),
        };
        let mut rest = ket.clone();
        rest[sa] = 0;
        rest[sb] = 0;
        groups.entry(rest).or_default().push((na * levels + nb, *amp * sign));
    }
    let d = levels * levels;
    let mut rho = SeriesMatrix::zeros(d, d);
    for members in groups.values() {
        for &(i, ai) in members {
            for &(j, aj) in members {
                let v = rho.get(i, j) + ai * aj.conj();
                rho.set(i, j, v);
            }
        }
    }
    Ok(ReducedDensityMatrix { species: state.species, modes: (mode_a, mode_b), levels, rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_reduces_to_a_pure_state() {
        let mut s = StateExpansion::empty(Species::Boson, vec![1, 2, 3]);
        s.add(vec![1, 0, 2], H2Series::ONE);
        let r = reduce_to_pair(&s, 1, 2, FermionOrdering::Ascending).unwrap();
        assert_eq!(r.entry((1, 0), (1, 0)), H2Series::ONE);
        assert_eq!(r.trace(), H2Series::ONE);
        assert!(reduce_to_pair(&s, 1, 1, FermionOrdering::Ascending).is_err());
        assert!(reduce_to_pair(&s, 1, 7, FermionOrdering::Ascending).is_err());
    }

    #[test]
    fn fermionic_coherence_sign_tracks_the_ordering() {
        // (|0,0,0⟩ + c₋₁† b₁† |0⟩)/√2 observed on (1, -1): the ascending
        // convention puts b₁† first with one swap.
        let mut s = StateExpansion::empty(Species::Fermion, vec![-1, 0, 1]);
        let r2 = 0.5f64.sqrt();
        s.add(vec![0, 0, 0], H2Series::real(r2, 0.0, 0.0));
        s.add(vec![1, 0, 1], H2Series::real(r2, 0.0, 0.0));
        let asc = reduce_to_pair(&s, 1, -1, FermionOrdering::Ascending).unwrap();
        let desc = reduce_to_pair(&s, 1, -1, FermionOrdering::Descending).unwrap();
        assert!((asc.entry((0, 0), (1, 1)).c0.re + 0.5).abs() < 1e-15);
        assert!((desc.entry((0, 0), (1, 1)).c0.re + 0.5).abs() < 1e-15);
        let flipped = reduce_to_pair(&s, -1, 1, FermionOrdering::Ascending).unwrap();
        assert!((flipped.entry((0, 0), (1, 1)).c0.re - 0.5).abs() < 1e-15);
    }
}
