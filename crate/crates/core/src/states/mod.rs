//! In-region states written in the out-region Fock basis to `O(h²)`.
//!
//! States are sparse maps from occupation vectors over a finite, ordered
//! mode window to [`H2Series`] amplitudes. Fermionic kets use the
//! convention `|n⟩ = Π_{i ascending} (a_i†)^{n_i} |0⟩`, so a creation
//! operator on slot `i` picks up `(-1)^(occupied slots before i)`.

mod build;
mod reduce;
mod vacuum;

use std::collections::BTreeMap;

use serde::Serialize;

pub use build::{
    boson_one_particle_expansion, boson_vacuum_expansion, fermion_state_expansion, FermionInState, Pruning,
    BOSON_CAP,
};
pub use reduce::{reduce_to_pair, FermionOrdering, ReducedDensityMatrix};
pub use vacuum::{boson_vacuum_data, fermion_vacuum_data, BosonVacuumData, FermionVacuumData};

use crate::bogoliubov::{Bogoliubov, Species};
use crate::error::{Error, Result};
use crate::series::H2Series;

/// Which in-region state to prepare.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InState {
    Vacuum,
    /// One particle in mode `k` (boson `k ≥ 1`, fermion `κ ≥ 0`).
    OneParticle(i64),
    /// Fermionic particle in `κ ≥ 0` and antiparticle in `κ' < 0`.
    Pair(i64, i64),
}

impl std::fmt::Display for InState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InState::Vacuum => write!(f, "vacuum"),
            InState::OneParticle(k) => write!(f, "one_particle:{k}"),
            InState::Pair(k, kp) => write!(f, "pair:{k}:{kp}"),
        }
    }
}

impl std::str::FromStr for InState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let int = |t: &str| t.parse::<i64>().map_err(|_| Error::Config(format!("bad mode '{t}' in state '{s}'")));
        match parts.as_slice() {
            ["vacuum"] => Ok(InState::Vacuum),
            ["one_particle", k] => Ok(InState::OneParticle(int(k)?)),
            ["pair", k, kp] => Ok(InState::Pair(int(k)?, int(kp)?)),
            _ => Err(Error::Config(format!("unknown state '{s}' (vacuum | one_particle:k | pair:k:k')"))),
        }
    }
}

impl InState {
    /// Checks the excitation labels against the species' conventions.
    pub fn validate(&self, species: Species) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModes(m));
        match (species, self) {
            (_, InState::Vacuum) => Ok(()),
            (Species::Boson, InState::OneParticle(k)) if *k < 1 => bad(format!("boson mode {k} must be ≥ 1")),
            (Species::Boson, InState::Pair(..)) => bad("pair states are fermionic".into()),
            (Species::Fermion, InState::OneParticle(k)) if *k < 0 => {
                bad(format!("one-particle state needs κ ≥ 0, got {k}"))
            }
            (Species::Fermion, InState::Pair(k, kp)) if *k < 0 || *kp >= 0 => {
                bad(format!("pair state needs κ ≥ 0 > κ', got ({k}, {kp})"))
            }
            _ => Ok(()),
        }
    }

    /// Excited in-modes.
    pub fn modes(&self) -> Vec<i64> {
        match *self {
            InState::Vacuum => vec![],
            InState::OneParticle(k) => vec![k],
            InState::Pair(k, kp) => vec![k, kp],
        }
    }
}

/// Builds `state` from a transformation over the window `1..=window`
/// (bosons) or `-window..=window` (fermions), normalized to `O(h²)`.
///
/// Normalization absorbs the `h²` norm deficit that the finite window
/// leaves in the one-particle and pair constructions.
pub fn build_state(b: &Bogoliubov, state: &InState, window: usize, pruning: Pruning) -> Result<StateExpansion> {
    state.validate(b.species())?;
    let mut s = match b {
        Bogoliubov::Boson(b) => {
            let data = boson_vacuum_data(b)?;
            match *state {
                InState::Vacuum => boson_vacuum_expansion(&data, window, BOSON_CAP, pruning),
                InState::OneParticle(k) => {
                    boson_one_particle_expansion(b, &data, k as usize, window, BOSON_CAP, pruning)
                }
                InState::Pair(..) => unreachable!("rejected by validate"),
            }
        }
        Bogoliubov::Fermion(f) => {
            let data = fermion_vacuum_data(f)?;
            let in_state = FermionInState { modes: state.modes() };
            fermion_state_expansion(f, &data, &in_state, window, pruning)
        }
    }?;
    s.normalize()?;
    Ok(s)
}

/// Occupation numbers, one per window slot.
pub type Ket = Vec<u8>;

/// Which ladder operator a term applies.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// A linear combination `Σ c_i o_i` of single ladder operators on window
/// slots.
#[derive(Clone, Debug, Default)]
pub struct LadderSum {
    pub terms: Vec<(Ladder, usize, H2Series)>,
}

impl LadderSum {
    pub fn push(&mut self, kind: Ladder, slot: usize, coeff: H2Series) {
        if !coeff.is_zero() {
            self.terms.push((kind, slot, coeff));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateExpansion {
    pub species: Species,
    /// Mode label of each slot, in the global (ascending) order.
    pub labels: Vec<i64>,
    pub amplitudes: BTreeMap<Ket, H2Series>,
}

impl StateExpansion {
    pub fn empty(species: Species, labels: Vec<i64>) -> Self {
        Self { species, labels, amplitudes: BTreeMap::new() }
    }

    /// The out-vacuum `|0̃⟩`.
    pub fn out_vacuum(species: Species, labels: Vec<i64>) -> Self {
        let mut s = Self::empty(species, labels);
        let n = s.labels.len();
        s.amplitudes.insert(vec![0; n], H2Series::ONE);
        s
    }

    pub fn slot(&self, label: i64) -> Result<usize> {
        self.labels.iter().position(|&l| l == label).ok_or(Error::ModeOutOfWindow(label))
    }

    pub fn amplitude(&self, ket: &[u8]) -> H2Series {
        self.amplitudes.get(ket).copied().unwrap_or(H2Series::ZERO)
    }

    /// Amplitude of the ket with the given `(label, occupation)` pairs.
    pub fn amplitude_of(&self, occupied: &[(i64, u8)]) -> Result<H2Series> {
        let mut ket = vec![0; self.labels.len()];
        for &(l, n) in occupied {
            ket[self.slot(l)?] = n;
        }
        Ok(self.amplitude(&ket))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn add(&mut self, ket: Ket, amp: H2Series) {
        if amp.is_zero() {
            return;
        }
        let e = self.amplitudes.entry(ket).or_insert(H2Series::ZERO);
        *e += amp;
    }

    /// `⟨ψ|ψ⟩` to `O(h²)`.
    pub fn norm_sqr(&self) -> H2Series {
        self.amplitudes.values().map(|a| a.conj() * *a).sum()
    }

    pub fn scale(&mut self, s: H2Series) {
        for a in self.amplitudes.values_mut() {
            *a = *a * s;
        }
        self.amplitudes.retain(|_, a| !a.is_zero());
    }

    /// Divides by `√⟨ψ|ψ⟩`, expanded to `O(h²)`.
    pub fn normalize(&mut self) -> Result<H2Series> {
        let n = self.norm_sqr();
        let n0 = n.c0.re;
        if n0 <= 0.0 {
            return Err(Error::InvalidModes("cannot normalize a state with vanishing leading norm".into()));
        }
        // (n0 + x)^{-1/2} with x = c1 h + c2 h²
        let (x1, x2) = (n.c1 / n0, n.c2 / n0);
        let inv = H2Series::new(1.0.into(), -0.5 * x1, -0.5 * x2 + 0.375 * x1 * x1) * n0.powf(-0.5);
        self.scale(inv);
        Ok(n)
    }

    /// Largest total particle number with a nonzero amplitude.
    pub fn max_particles(&self) -> usize {
        self.amplitudes.keys().map(|k| k.iter().map(|&n| n as usize).sum()).max().unwrap_or(0)
    }

    /// Net charge `#(κ ≥ 0) - #(κ < 0)` of a fermionic ket.
    pub fn charge(&self, ket: &[u8]) -> i64 {
        ket.iter().zip(&self.labels).map(|(&n, &l)| if l >= 0 { n as i64 } else { -(n as i64) }).sum()
    }

    /// Applies a single ladder operator to a ket, returning the image ket and
    /// its numerical factor, or `None` when the result vanishes.
    pub fn ladder(&self, ket: &[u8], kind: Ladder, slot: usize) -> Option<(Ket, f64)> {
        let n = ket[slot];
        let mut out = ket.to_vec();
        match self.species {
            Species::Boson => match kind {
                Ladder::Create => {
                    out[slot] = n.checked_add(1)?;
                    Some((out, (n as f64 + 1.0).sqrt()))
                }
                Ladder::Annihilate => {
                    if n == 0 {
                        return None;
                    }
                    out[slot] = n - 1;
                    Some((out, (n as f64).sqrt()))
                }
            },
            Species::Fermion => {
                let sign = if ket[..slot].iter().filter(|&&x| x != 0).count() % 2 == 0 { 1.0 } else { -1.0 };
                match (kind, n) {
                    (Ladder::Create, 0) => {
                        out[slot] = 1;
                        Some((out, sign))
                    }
                    (Ladder::Annihilate, 1) => {
                        out[slot] = 0;
                        Some((out, sign))
                    }
                    _ => None,
                }
            }
        }
    }

    /// `O |ψ⟩` for a sum of ladder operators, truncated at `O(h²)`.
    pub fn apply(&self, op: &LadderSum) -> Self {
        let mut out = Self::empty(self.species, self.labels.clone());
        for (ket, amp) in &self.amplitudes {
            for &(kind, slot, coeff) in &op.terms {
                if let Some((k2, f)) = self.ladder(ket, kind, slot) {
                    out.add(k2, (*amp * coeff) * f);
                }
            }
        }
        out.amplitudes.retain(|_, a| !a.is_zero());
        out
    }

    /// Kets carrying an `h⁰` amplitude.
    pub fn leading_support(&self) -> Vec<Ket> {
        self.amplitudes
            .iter()
            .filter(|(_, a)| a.c0.norm() > LEADING_TOL)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Drops kets that cannot affect any two-mode reduced density matrix (or
    /// the norm) at `O(h²)`; see [`Pruning::PairReduction`].
    pub fn prune_for_pairs(&mut self) {
        let support = self.leading_support();
        self.amplitudes.retain(|k, a| {
            a.c0.norm() > LEADING_TOL
                || a.c1.norm() > 0.0
                || support.iter().any(|s| modes_differing(s, k) <= 2)
        });
    }
}

/// Amplitudes below this at order `h⁰` are treated as round-off.
pub(crate) const LEADING_TOL: f64 = 1e-12;

pub(crate) fn modes_differing(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn bosonic_ladder_factors() {
        let s = StateExpansion::out_vacuum(Species::Boson, vec![1, 2]);
        let (k, f) = s.ladder(&[2, 0], Ladder::Create, 0).unwrap();
        assert_eq!(k, vec![3, 0]);
        assert!((f - 3f64.sqrt()).abs() < 1e-15);
        assert!(s.ladder(&[0, 1], Ladder::Annihilate, 0).is_none());
    }

    #[test]
    fn fermionic_signs_follow_the_ordering() {
        let s = StateExpansion::out_vacuum(Species::Fermion, vec![-1, 0, 1]);
        // b₁† on c₋₁†|0⟩ passes one occupied slot
        let (k, f) = s.ladder(&[1, 0, 0], Ladder::Create, 2).unwrap();
        assert_eq!((k, f), (vec![1, 0, 1], -1.0));
        assert!(s.ladder(&[1, 0, 0], Ladder::Create, 0).is_none());
    }

    #[test]
    fn fermionic_operators_anticommute() {
        let s = StateExpansion::out_vacuum(Species::Fermion, vec![-1, 0, 1]);
        let op = |slot| {
            let mut o = LadderSum::default();
            o.push(Ladder::Create, slot, H2Series::ONE);
            o
        };
        let ab = s.apply(&op(0)).apply(&op(2));
        let ba = s.apply(&op(2)).apply(&op(0));
        let k = vec![1, 0, 1];
        assert_eq!(ab.amplitude(&k), -ba.amplitude(&k));
    }

    #[test]
    fn normalization_is_exact_to_second_order() {
        let mut s = StateExpansion::out_vacuum(Species::Boson, vec![1, 2]);
        s.add(vec![1, 1], H2Series::new(0.0.into(), C64::new(0.3, 0.1), C64::new(0.0, 0.2)));
        s.add(vec![0, 0], H2Series::new(0.0.into(), 0.0.into(), 0.7.into()));
        s.normalize().unwrap();
        let n = s.norm_sqr();
        assert!((n.c0 - 1.0).norm() < 1e-15 && n.c1.norm() < 1e-15 && n.c2.norm() < 1e-15);
    }
}
