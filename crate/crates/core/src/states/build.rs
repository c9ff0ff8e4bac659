//! Construction of the in-states from the vacuum data and the in-region
//! ladder operators written in out-region operators.

use std::collections::BTreeSet;

use super::{Ket, Ladder, LadderSum, StateExpansion};
use crate::bogoliubov::{BosonBogoliubov, FermionBogoliubov, Species};
use crate::error::{Error, Result};
use crate::series::H2Series;
use crate::states::vacuum::{BosonVacuumData, FermionVacuumData};

/// Default bosonic per-mode occupation cap.
pub const BOSON_CAP: u8 = 4;

/// Amplitudes above this on kets beyond the occupation cap are an error.
const CAP_TOL: f64 = 1e-14;

/// How much of the `O(h²)` tail to keep.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum Pruning {
    /// Every ket generated by the expansion.
    Full,
    /// Drops pure-`h²` kets that differ from every `h⁰` ket in more than two
    /// modes. Such kets can only meet another amplitude of order `≥ h` in a
    /// two-mode reduced density matrix, so every such matrix and the norm
    /// are unchanged at `O(h²)`.
    #[default]
    PairReduction,
}

/// `½ Σ_{pq} w_pq a_p† a_q† |ψ⟩` restricted to kets accepted by `keep`,
/// with `w` symmetric. Fermionic `w` must vanish on the diagonal.
fn apply_pairs(
    state: &StateExpansion,
    w: &dyn Fn(usize, usize) -> H2Series,
    keep: &dyn Fn(&Ket) -> bool,
    prefilter: &dyn Fn(&Ket) -> bool,
) -> StateExpansion {
    let n = state.labels.len();
    let mut out = StateExpansion::empty(state.species, state.labels.clone());
    for (ket, amp) in &state.amplitudes {
        for p in 0..n {
            let Some((k1, f1)) = state.ladder(ket, Ladder::Create, p) else { continue };
            if !prefilter(&k1) {
                continue;
            }
            for q in p..n {
                let c = w(p, q);
                if c.is_zero() {
                    continue;
                }
                // a_q† a_p† for q ≥ p; the symmetric sum counts p ≠ q twice
                let Some((k2, f2)) = state.ladder(&k1, Ladder::Create, q) else { continue };
                if !keep(&k2) {
                    continue;
                }
                let weight = if p == q { 0.5 } else { 1.0 };
                out.add(k2, (*amp * c) * (f1 * f2 * weight));
            }
        }
    }
    out.amplitudes.retain(|_, a| !a.is_zero());
    out
}

fn distinct_from_vacuum(k: &Ket) -> usize {
    k.iter().filter(|&&n| n != 0).count()
}

fn order_part(state: &StateExpansion, k: usize) -> StateExpansion {
    let mut out = StateExpansion::empty(state.species, state.labels.clone());
    for (ket, a) in &state.amplitudes {
        let mut o = [H2Series::ZERO.c0; 3];
        o[k] = a.order(k);
        out.add(ket.clone(), H2Series::from_orders(o));
    }
    out
}

fn merge(into: &mut StateExpansion, other: StateExpansion) {
    for (k, a) in other.amplitudes {
        into.add(k, a);
    }
}

fn enforce_cap(state: &mut StateExpansion, cap: u8) -> Result<()> {
    for (ket, a) in &state.amplitudes {
        if let Some(&n) = ket.iter().find(|&&n| n > cap) {
            if a.max_abs() > CAP_TOL {
                return Err(Error::CapExceeded { occupation: n as usize, cap: cap as usize });
            }
        }
    }
    state.amplitudes.retain(|k, _| k.iter().all(|&n| n <= cap));
    Ok(())
}

fn check_cap(cap: u8) -> Result<()> {
    if cap < BOSON_CAP {
        return Err(Error::CapExceeded { occupation: BOSON_CAP as usize, cap: cap as usize });
    }
    Ok(())
}

/// `N (1 + W + ½W²)|0̃⟩` over modes `1..=window`, with
/// `W = ½ Σ V_pq ã_p† ã_q†`; the quartic part keeps only `V⁽¹⁾V⁽¹⁾`.
pub fn boson_vacuum_expansion(
    data: &BosonVacuumData,
    window: usize,
    cap: u8,
    pruning: Pruning,
) -> Result<StateExpansion> {
    check_cap(cap)?;
    if window == 0 || window > data.n_max() {
        return Err(Error::InvalidModes(format!("window {window} outside 1..={}", data.n_max())));
    }
    let labels: Vec<i64> = (1..=window as i64).collect();
    let vac = StateExpansion::out_vacuum(Species::Boson, labels);
    let w = |p: usize, q: usize| (data.v.get(p, q) + data.v.get(q, p)) * 0.5;
    let all = |_: &Ket| true;
    let pairs = apply_pairs(&vac, &w, &all, &all);
    let w1 = |p: usize, q: usize| {
        let s = w(p, q);
        H2Series::new(0.0.into(), s.c1, 0.0.into())
    };
    let lin = order_part(&pairs, 1);
    let quartic = match pruning {
        Pruning::Full => apply_pairs(&lin, &w1, &all, &all),
        Pruning::PairReduction => {
            let keep = |k: &Ket| distinct_from_vacuum(k) <= 2;
            apply_pairs(&lin, &w1, &keep, &keep)
        }
    };
    let mut state = StateExpansion::empty(Species::Boson, vac.labels.clone());
    state.add(vac.amplitudes.keys().next().unwrap().clone(), data.norm);
    merge(&mut state, pairs);
    let mut quartic = quartic;
    quartic.scale(H2Series::real(0.5, 0.0, 0.0));
    merge(&mut state, quartic);
    enforce_cap(&mut state, cap)?;
    Ok(state)
}

/// `a_k† = Σ_m (α*_mk ã_m† + β_mk ã_m)` on the out-window.
fn boson_in_creation(b: &BosonBogoliubov, k: usize, window: usize) -> LadderSum {
    let mut op = LadderSum::default();
    for m in 1..=window {
        op.push(Ladder::Create, m - 1, b.alpha_at(m, k).conj());
        op.push(Ladder::Annihilate, m - 1, b.beta_at(m, k));
    }
    op
}

/// `a_k† |0⟩` expanded to `O(h²)`.
pub fn boson_one_particle_expansion(
    b: &BosonBogoliubov,
    data: &BosonVacuumData,
    k: usize,
    window: usize,
    cap: u8,
    pruning: Pruning,
) -> Result<StateExpansion> {
    if k == 0 || k > window {
        return Err(Error::ModeOutOfWindow(k as i64));
    }
    let vac = boson_vacuum_expansion(data, window, cap, pruning)?;
    let mut state = vac.apply(&boson_in_creation(b, k, window));
    if pruning == Pruning::PairReduction {
        state.prune_for_pairs();
    }
    enforce_cap(&mut state, cap)?;
    Ok(state)
}

/// Fermionic in-states: the in-vacuum with the listed in-modes excited,
/// `Π_i (in-creation of modes[i]) |0⟩` (leftmost operator applied last).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FermionInState {
    pub modes: Vec<i64>,
}

impl FermionInState {
    pub fn vacuum() -> Self {
        Self { modes: vec![] }
    }

    /// A particle in `κ ≥ 0`.
    pub fn one_particle(kappa: i64) -> Result<Self> {
        if kappa < 0 {
            return Err(Error::InvalidModes(format!("one-particle state needs κ ≥ 0, got {kappa}")));
        }
        Ok(Self { modes: vec![kappa] })
    }

    /// A particle in `κ ≥ 0` and an antiparticle in `κ' < 0`.
    pub fn pair(kappa: i64, kappa_prime: i64) -> Result<Self> {
        if kappa < 0 || kappa_prime >= 0 {
            return Err(Error::InvalidModes(format!(
                "pair state needs κ ≥ 0 > κ', got ({kappa}, {kappa_prime})"
            )));
        }
        Ok(Self { modes: vec![kappa, kappa_prime] })
    }

    pub fn charge(&self) -> i64 {
        self.modes.iter().map(|&m| if m >= 0 { 1 } else { -1 }).sum()
    }
}

/// In-creation operators in terms of out-operators:
/// `b_κ† = Σ_{m≥0} A*_mκ b̃_m† + Σ_{m<0} A*_mκ c̃_m` and
/// `c_κ† = Σ_{m≥0} A_mκ b̃_m + Σ_{m<0} A_mκ c̃_m†`.
fn fermion_in_creation(a: &FermionBogoliubov, kappa: i64, labels: &[i64]) -> LadderSum {
    let mut op = LadderSum::default();
    for (slot, &m) in labels.iter().enumerate() {
        let c = a.a_at(m, kappa);
        match (kappa >= 0, m >= 0) {
            (true, true) => op.push(Ladder::Create, slot, c.conj()),
            (true, false) => op.push(Ladder::Annihilate, slot, c.conj()),
            (false, true) => op.push(Ladder::Annihilate, slot, c),
            (false, false) => op.push(Ladder::Create, slot, c),
        }
    }
    op
}

/// A fermionic in-state over `κ = -window..=window`.
pub fn fermion_state_expansion(
    a: &FermionBogoliubov,
    data: &FermionVacuumData,
    in_state: &FermionInState,
    window: usize,
    pruning: Pruning,
) -> Result<StateExpansion> {
    if window == 0 || window > a.n_max() {
        return Err(Error::InvalidModes(format!("window {window} outside 1..={}", a.n_max())));
    }
    let mut seen = BTreeSet::new();
    for &m in &in_state.modes {
        if m.unsigned_abs() as usize > window {
            return Err(Error::ModeOutOfWindow(m));
        }
        if !seen.insert(m) {
            return Err(Error::Pauli(m));
        }
    }
    let w = window as i64;
    let labels: Vec<i64> = (-w..=w).collect();
    let vac = StateExpansion::out_vacuum(Species::Fermion, labels.clone());
    let slot = |l: i64| (l + w) as usize;

    // 𝒲|0̃⟩ = Σ 𝒱_pq b̃_p† c̃_q† |0̃⟩, applying c̃_q† first
    let pair_state = |src: &StateExpansion, order1_only: bool, keep: &dyn Fn(&Ket) -> bool| {
        let mut out = StateExpansion::empty(Species::Fermion, labels.clone());
        for (ket, amp) in &src.amplitudes {
            for q in -w..0 {
                let Some((k1, f1)) = src.ladder(ket, Ladder::Create, slot(q)) else { continue };
                for p in 0..=w {
                    let mut c = data.v_at(p, q);
                    if order1_only {
                        c = H2Series::new(0.0.into(), c.c1, 0.0.into());
                    }
                    if c.is_zero() {
                        continue;
                    }
                    let Some((k2, f2)) = src.ladder(&k1, Ladder::Create, slot(p)) else { continue };
                    if keep(&k2) {
                        out.add(k2, (*amp * c) * (f1 * f2));
                    }
                }
            }
        }
        out
    };
    let all = |_: &Ket| true;
    let pairs = pair_state(&vac, false, &all);
    let mut state = StateExpansion::empty(Species::Fermion, labels.clone());
    state.add(vec![0; labels.len()], data.norm);
    if pruning == Pruning::Full {
        let mut quartic = pair_state(&order_part(&pairs, 1), true, &all);
        quartic.scale(H2Series::real(0.5, 0.0, 0.0));
        merge(&mut state, quartic);
    }
    merge(&mut state, pairs);

    for &m in in_state.modes.iter().rev() {
        state = state.apply(&fermion_in_creation(a, m, &labels));
        if pruning == Pruning::PairReduction {
            state.prune_for_pairs();
        }
    }
    if state.leading_support().len() != 1 {
        return Err(Error::InvalidModes("in-state has no unique leading ket".into()));
    }
    Ok(state)
}
