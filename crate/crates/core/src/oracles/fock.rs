//! Truncated Fock-space ground truth for the state expansions.
//!
//! The in-vacuum is found directly as the state annihilated by every
//! in-annihilator written in out-operators, and excited in-states by
//! applying in-creators to it. Nothing here uses `V`, `𝒱` or the series
//! expansions of the states.
//!
//! A Bogoliubov transformation restricted to a finite window violates the
//! exact identities at `O(h²)` (the discarded modes carry part of the sum),
//! and then no exact vacuum exists on the window. [`LieWindow`] repairs the
//! restriction: it writes the windowed transformation as
//! `D·exp(hX₁ + h²X₂)` with `X₁`, `X₂` in the Lie algebra, which is exactly
//! symplectic (bosons) or unitary (fermions) at every `h` and agrees with the
//! restricted series through `O(h)` and with its Lie part at `O(h²)`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::bogoliubov::{Bogoliubov, BosonBogoliubov, FermionBogoliubov, NumericBogoliubov, Species};
use crate::error::{Error, Result};
use crate::series::SeriesMatrix;
use crate::states::{Ket, StateExpansion};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A windowed transformation made exactly canonical.
#[derive(Clone, Debug)]
pub struct LieWindow {
    pub species: Species,
    /// Boson: number of modes. Fermion: half-width `w` of `κ = -w..=w`.
    pub size: usize,
    s0: DMatrix<C64>,
    x1: DMatrix<C64>,
    x2: DMatrix<C64>,
    /// Largest entry of the non-canonical part dropped when projecting the
    /// generator. Small when the window holds every strongly coupled mode,
    /// large when it cuts through them.
    pub defect: f64,
}

/// `K = diag(1, -1)` on the doubled boson space.
fn metric(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| if i != j { ZERO } else if i < n { ONE } else { -ONE })
}

fn doubled(alpha: &DMatrix<C64>, beta: &DMatrix<C64>) -> DMatrix<C64> {
    let n = alpha.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(alpha);
    s.view_mut((0, n), (n, n)).copy_from(beta);
    s.view_mut((n, 0), (n, n)).copy_from(&beta.conjugate());
    s.view_mut((n, n), (n, n)).copy_from(&alpha.conjugate());
    s
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl LieWindow {
    pub fn boson(b: &BosonBogoliubov, window: usize) -> Result<Self> {
        if window == 0 || window > b.n_max() {
            return Err(Error::InvalidModes(format!("window {window} outside 1..={}", b.n_max())));
        }
        let r = b.restrict(window);
        let s: Vec<DMatrix<C64>> = (0..3).map(|k| doubled(r.alpha().order(k), r.beta().order(k))).collect();
        let k = metric(window);
        // the Lie algebra is {X : X K + K X† = 0}
        let project = |y: &DMatrix<C64>| (y - &k * y.adjoint() * &k) * C64::from(0.5);
        let s0_inv = s[0].adjoint(); // S0 = diag(D, D*) is unitary
        let x1 = &s0_inv * &s[1];
        let raw2 = &s0_inv * &s[2] - &x1 * &x1 * C64::from(0.5);
        let x2 = project(&raw2);
        let defect = max_abs(&(&raw2 - &x2)).max(max_abs(&(&x1 - project(&x1))));
        Ok(Self { species: Species::Boson, size: window, s0: s[0].clone(), x1, x2, defect })
    }

    pub fn fermion(f: &FermionBogoliubov, half_width: usize) -> Result<Self> {
        if half_width > f.n_max() {
            return Err(Error::InvalidModes(format!("window {half_width} exceeds {}", f.n_max())));
        }
        let r = f.restrict(half_width);
        let a = r.a();
        let project = |y: &DMatrix<C64>| (y - y.adjoint()) * C64::from(0.5);
        let s0_inv = a.order(0).adjoint();
        let x1 = &s0_inv * a.order(1);
        let raw2 = &s0_inv * a.order(2) - &x1 * &x1 * C64::from(0.5);
        let x2 = project(&raw2);
        let defect = max_abs(&(&raw2 - &x2)).max(max_abs(&(&x1 - project(&x1))));
        Ok(Self { species: Species::Fermion, size: half_width, s0: a.order(0).clone(), x1, x2, defect })
    }

    pub fn for_transformation(b: &Bogoliubov, size: usize) -> Result<Self> {
        match b {
            Bogoliubov::Boson(b) => Self::boson(b, size),
            Bogoliubov::Fermion(f) => Self::fermion(f, size),
        }
    }

    /// The `O(h²)` series of the canonical window transformation.
    pub fn series(&self) -> Result<Bogoliubov> {
        let o1 = &self.s0 * &self.x1;
        let o2 = &self.s0 * (&self.x1 * &self.x1 * C64::from(0.5) + &self.x2);
        let full = SeriesMatrix::from_orders(self.s0.clone(), o1, o2);
        match self.species {
            Species::Boson => {
                let n = self.size;
                let alpha = full.submatrix(0..n, 0..n);
                let beta = full.submatrix(0..n, n..2 * n);
                Ok(Bogoliubov::Boson(BosonBogoliubov::new(alpha, beta)?))
            }
            Species::Fermion => Ok(Bogoliubov::Fermion(FermionBogoliubov::new(self.size, full)?)),
        }
    }

    /// The exact transformation `D·exp(hX₁ + h²X₂)`.
    pub fn at(&self, h: f64) -> NumericBogoliubov {
        let gen = &self.x1 * C64::from(h) + &self.x2 * C64::from(h * h);
        let m = &self.s0 * gen.exp();
        match self.species {
            Species::Boson => {
                let n = self.size;
                NumericBogoliubov::Boson {
                    alpha: m.view((0, 0), (n, n)).into_owned(),
                    beta: m.view((0, n), (n, n)).into_owned(),
                }
            }
            Species::Fermion => NumericBogoliubov::Fermion { n_max: self.size, a: m },
        }
    }
}

/// A truncated Fock basis over an ordered mode window.
#[derive(Clone, Debug)]
pub struct FockSpace {
    pub species: Species,
    pub labels: Vec<i64>,
    /// Per-mode occupation cap (1 for fermions).
    pub cap: u8,
    pub max_total: usize,
    pub basis: Vec<Ket>,
    index: HashMap<Ket, usize>,
}

fn enumerate(n: usize, cap: u8, max_total: usize, keep: &dyn Fn(usize) -> bool) -> Vec<Ket> {
    let mut out = Vec::new();
    let mut ket = vec![0u8; n];
    fn rec(i: usize, left: usize, ket: &mut Ket, cap: u8, out: &mut Vec<Ket>, keep: &dyn Fn(usize) -> bool, max_total: usize) {
        if i == ket.len() {
            if keep(max_total - left) {
                out.push(ket.clone());
            }
            return;
        }
        for occ in 0..=(cap as usize).min(left) {
            ket[i] = occ as u8;
            rec(i + 1, left - occ, ket, cap, out, keep, max_total);
        }
        ket[i] = 0;
    }
    rec(0, max_total, &mut ket, cap, &mut out, keep, max_total);
    out
}

impl FockSpace {
    fn from_basis(species: Species, labels: Vec<i64>, cap: u8, max_total: usize, basis: Vec<Ket>) -> Self {
        let index = basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Self { species, labels, cap, max_total, basis, index }
    }

    /// Bosonic kets with at most `cap` quanta per mode and `max_total` in
    /// all; `even_only` keeps even total particle numbers.
    pub fn boson(labels: Vec<i64>, cap: u8, max_total: usize, even_only: bool) -> Self {
        let keep = |t: usize| !even_only || t.is_multiple_of(2);
        let basis = enumerate(labels.len(), cap, max_total, &keep);
        Self::from_basis(Species::Boson, labels, cap, max_total, basis)
    }

    /// All `2^n` fermionic kets.
    pub fn fermion(labels: Vec<i64>) -> Self {
        let n = labels.len();
        let basis = enumerate(n, 1, n, &|_| true);
        Self::from_basis(Species::Fermion, labels, 1, n, basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, ket: &[u8]) -> Option<usize> {
        self.index.get(ket).copied()
    }

    /// Matrix of `ã_slot` (or `ã_slot†`) on this basis; images outside the
    /// truncation are dropped.
    pub fn ladder_matrix(&self, create: bool, slot: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (j, ket) in self.basis.iter().enumerate() {
            if let Some((img, f)) = ladder(self.species, ket, create, slot) {
                if let Some(i) = self.index_of(&img) {
                    m[(i, j)] = C64::from(f);
                }
            }
        }
        m
    }
}

/// One ladder operator on a ket: `(image, factor)`.
fn ladder(species: Species, ket: &[u8], create: bool, slot: usize) -> Option<(Ket, f64)> {
    let mut img = ket.to_vec();
    let n = ket[slot];
    match species {
        Species::Boson => {
            if create {
                img[slot] += 1;
                Some((img, (n as f64 + 1.0).sqrt()))
            } else if n > 0 {
                img[slot] -= 1;
                Some((img, (n as f64).sqrt()))
            } else {
                None
            }
        }
        Species::Fermion => {
            let parity = ket[..slot].iter().map(|&x| x as usize).sum::<usize>() % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            match (create, n) {
                (true, 0) => {
                    img[slot] = 1;
                    Some((img, sign))
                }
                (false, 1) => {
                    img[slot] = 0;
                    Some((img, sign))
                }
                _ => None,
            }
        }
    }
}

/// `Σ (coeff, create, slot)` applied to a sparse vector, without truncation.
fn apply_terms(species: Species, terms: &[(C64, bool, usize)], v: &HashMap<Ket, C64>) -> HashMap<Ket, C64> {
    let mut out: HashMap<Ket, C64> = HashMap::new();
    for (ket, &amp) in v {
        for &(c, create, slot) in terms {
            if c == ZERO {
                continue;
            }
            if let Some((img, f)) = ladder(species, ket, create, slot) {
                *out.entry(img).or_insert(ZERO) += c * amp * f;
            }
        }
    }
    out
}

/// A normalized oracle state with its annihilation residual.
#[derive(Clone, Debug)]
pub struct OracleState {
    pub species: Species,
    pub labels: Vec<i64>,
    pub amplitudes: HashMap<Ket, C64>,
    /// `(Σ_n ‖o_n ψ‖²)^{1/2}` over the in-annihilators, for the vacuum.
    pub residual: f64,
}

impl OracleState {
    pub fn amplitude(&self, ket: &[u8]) -> C64 {
        self.amplitudes.get(ket).copied().unwrap_or(ZERO)
    }

    /// Largest amplitude difference against a series expansion evaluated
    /// at `h`, over the union of both supports.
    pub fn max_deviation(&self, exp: &StateExpansion, h: f64) -> Result<f64> {
        if exp.labels != self.labels {
            return Err(Error::InvalidModes("expansion and oracle use different mode windows".into()));
        }
        let mut worst: f64 = 0.0;
        for (k, a) in &exp.amplitudes {
            worst = worst.max((a.eval(h) - self.amplitude(k)).norm());
        }
        for (k, a) in &self.amplitudes {
            if !exp.amplitudes.contains_key(k) {
                worst = worst.max(a.norm());
            }
        }
        Ok(worst)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalized(mut self) -> Self {
        let n = self.norm();
        for a in self.amplitudes.values_mut() {
            *a /= n;
        }
        self
    }
}

/// Annihilators of the in-vacuum as `(coeff, create, slot)` lists:
/// bosons `a_n = Σ_m (α_mn ã_m + β*_mn ã_m†)`; fermions `o_n = Σ_m A_mn õ_m`
/// with `õ_m = b̃_m` (`m ≥ 0`) or `c̃_m†` (`m < 0`), and the annihilator is
/// `b_n = o_n` or `c_n = o_n†`.
fn in_annihilators(numeric: &NumericBogoliubov, labels: &[i64]) -> Vec<Vec<(C64, bool, usize)>> {
    match numeric {
        NumericBogoliubov::Boson { alpha, beta } => (0..labels.len())
            .map(|n| {
                (0..labels.len())
                    .flat_map(|m| [(alpha[(m, n)], false, m), (beta[(m, n)].conj(), true, m)])
                    .collect()
            })
            .collect(),
        NumericBogoliubov::Fermion { a, .. } => (0..labels.len())
            .map(|n| {
                let o: Vec<(C64, bool, usize)> =
                    (0..labels.len()).map(|m| (a[(m, n)], labels[m] < 0, m)).collect();
                if labels[n] >= 0 {
                    o
                } else {
                    o.into_iter().map(|(c, create, m)| (c.conj(), !create, m)).collect()
                }
            })
            .collect(),
    }
}

/// In-creators: adjoints of [`in_annihilators`].
fn in_creator(numeric: &NumericBogoliubov, labels: &[i64], n: usize) -> Vec<(C64, bool, usize)> {
    in_annihilators(numeric, labels)[n].iter().map(|&(c, create, m)| (c.conj(), !create, m)).collect()
}

fn residual(species: Species, ops: &[Vec<(C64, bool, usize)>], v: &HashMap<Ket, C64>) -> f64 {
    ops.iter()
        .map(|op| apply_terms(species, op, v).values().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Default oracle truncation.
pub const ORACLE_WINDOW: usize = 8;
pub const ORACLE_CAP: u8 = 4;
pub const ORACLE_MAX_TOTAL: usize = 8;

/// The bosonic in-vacuum on `labels` minimizing `Σ_n ‖a_n ψ‖²` over kets
/// with even particle number, per-mode cap and total cap.
///
/// The `|0̃⟩` amplitude is pinned to 1, the remaining normal equations are
/// solved by conjugate gradients, and the result is normalized.
pub fn fock_vacuum_boson(
    numeric: &NumericBogoliubov,
    labels: Vec<i64>,
    cap: u8,
    max_total: usize,
) -> Result<OracleState> {
    let NumericBogoliubov::Boson { alpha, .. } = numeric else {
        return Err(Error::SpeciesMismatch("boson", "fermion"));
    };
    if alpha.nrows() != labels.len() {
        return Err(Error::SizeMismatch(alpha.nrows(), labels.len()));
    }
    let space = FockSpace::boson(labels.clone(), cap, max_total, true);
    let ops = in_annihilators(numeric, &labels);
    // sparse stacked operator: column j → (row, value), rows are (n, image ket)
    let mut rows: HashMap<(usize, Ket), usize> = HashMap::new();
    let mut cols: Vec<Vec<(usize, C64)>> = Vec::with_capacity(space.dim());
    for ket in &space.basis {
        let mut col: HashMap<usize, C64> = HashMap::new();
        for (n, op) in ops.iter().enumerate() {
            for &(c, create, slot) in op {
                if c == ZERO {
                    continue;
                }
                if let Some((img, f)) = ladder(Species::Boson, ket, create, slot) {
                    let next = rows.len();
                    let r = *rows.entry((n, img)).or_insert(next);
                    *col.entry(r).or_insert(ZERO) += c * f;
                }
            }
        }
        let mut col: Vec<_> = col.into_iter().collect();
        col.sort_by_key(|e| e.0);
        cols.push(col);
    }
    let nrows = rows.len();
    let apply = |x: &DVector<C64>| -> DVector<C64> {
        let mut y = DVector::zeros(nrows);
        for (j, col) in cols.iter().enumerate() {
            if x[j] != ZERO {
                for &(r, v) in col {
                    y[r] += v * x[j];
                }
            }
        }
        y
    };
    let apply_adj = |y: &DVector<C64>| -> DVector<C64> {
        DVector::from_iterator(cols.len(), cols.iter().map(|col| col.iter().map(|&(r, v)| v.conj() * y[r]).sum()))
    };
    let vac = space.index_of(&vec![0; labels.len()]).unwrap();
    let pin = |mut x: DVector<C64>| {
        x[vac] = ZERO;
        x
    };
    // normal equations on the free amplitudes: (A_r† A_r) x = -A_r† a_0
    let mut e0 = DVector::zeros(space.dim());
    e0[vac] = ONE;
    let b = pin(-apply_adj(&apply(&e0)));
    let mut x = DVector::<C64>::zeros(space.dim());
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dotc(&r).re;
    let b_norm = rr.sqrt().max(1e-300);
    for _ in 0..2000 {
        if rr.sqrt() <= 1e-15 * b_norm {
            break;
        }
        let ap = pin(apply_adj(&apply(&p)));
        let alpha = rr / p.dotc(&ap).re;
        x += &p * C64::from(alpha);
        r -= &ap * C64::from(alpha);
        let rr_new = r.dotc(&r).re;
        p = &r + &p * C64::from(rr_new / rr);
        rr = rr_new;
    }
    x[vac] = ONE;
    let amplitudes: HashMap<Ket, C64> =
        space.basis.iter().cloned().zip(x.iter().copied()).filter(|(_, a)| *a != ZERO).collect();
    let mut state = OracleState { species: Species::Boson, labels, amplitudes, residual: 0.0 }.normalized();
    state.residual = residual(Species::Boson, &ops, &state.amplitudes);
    Ok(state)
}

/// The fermionic in-vacuum: the lowest eigenvector of `Σ_n o_n† o_n` on
/// the full `2^n`-dimensional window space, phase-fixed so that the `|0̃⟩`
/// amplitude is real and positive.
pub fn fock_vacuum_fermion(numeric: &NumericBogoliubov, labels: Vec<i64>) -> Result<OracleState> {
    let NumericBogoliubov::Fermion { a, .. } = numeric else {
        return Err(Error::SpeciesMismatch("fermion", "boson"));
    };
    if a.nrows() != labels.len() {
        return Err(Error::SizeMismatch(a.nrows(), labels.len()));
    }
    let space = FockSpace::fermion(labels.clone());
    let ops = in_annihilators(numeric, &labels);
    let d = space.dim();
    let mut k = DMatrix::<C64>::zeros(d, d);
    for op in &ops {
        // rows of o_n: image ket → [(column, value)]
        let mut by_row: HashMap<Ket, Vec<(usize, C64)>> = HashMap::new();
        for (j, ket) in space.basis.iter().enumerate() {
            for &(c, create, slot) in op {
                if let Some((img, f)) = ladder(Species::Fermion, ket, create, slot) {
                    by_row.entry(img).or_default().push((j, c * f));
                }
            }
        }
        for entries in by_row.values() {
            for &(i, vi) in entries {
                for &(j, vj) in entries {
                    k[(i, j)] += vi.conj() * vj;
                }
            }
        }
    }
    let eig = k.symmetric_eigen();
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .ok_or(Error::Singular)?;
    let v = eig.eigenvectors.column(imin);
    let vac = space.index_of(&vec![0; labels.len()]).unwrap();
    let phase = if v[vac].norm() > 0.0 { v[vac].conj() / v[vac].norm() } else { ONE };
    let amplitudes: HashMap<Ket, C64> = space
        .basis
        .iter()
        .cloned()
        .zip(v.iter().map(|z| z * phase))
        .filter(|(_, a)| a.norm() > 1e-300)
        .collect();
    let mut state = OracleState { species: Species::Fermion, labels, amplitudes, residual: 0.0 }.normalized();
    state.residual = residual(Species::Fermion, &ops, &state.amplitudes);
    Ok(state)
}

/// The in-vacuum for either species with the default truncation.
pub fn fock_vacuum(numeric: &NumericBogoliubov, labels: Vec<i64>) -> Result<OracleState> {
    match numeric {
        NumericBogoliubov::Boson { .. } => fock_vacuum_boson(numeric, labels, ORACLE_CAP, ORACLE_MAX_TOTAL),
        NumericBogoliubov::Fermion { .. } => fock_vacuum_fermion(numeric, labels),
    }
}

/// Applies in-creators for the listed mode labels to the oracle vacuum,
/// rightmost first, and normalizes.
pub fn fock_apply_instate(numeric: &NumericBogoliubov, vacuum: &OracleState, modes: &[i64]) -> Result<OracleState> {
    let mut v = vacuum.amplitudes.clone();
    for &m in modes.iter().rev() {
        let n = vacuum.labels.iter().position(|&l| l == m).ok_or(Error::ModeOutOfWindow(m))?;
        v = apply_terms(vacuum.species, &in_creator(numeric, &vacuum.labels, n), &v);
    }
    if v.values().all(|a| *a == ZERO) {
        return Err(Error::Pauli(modes[0]));
    }
    Ok(OracleState { species: vacuum.species, labels: vacuum.labels.clone(), amplitudes: v, residual: 0.0 }.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_relations_hold_away_from_the_cap() {
        let space = FockSpace::boson(vec![1, 2], 3, 6, false);
        let a = space.ladder_matrix(false, 0);
        let ad = space.ladder_matrix(true, 0);
        let comm = &a * &ad - &ad * &a;
        for (j, ket) in space.basis.iter().enumerate() {
            if ket[0] < 3 && ket.iter().map(|&n| n as usize).sum::<usize>() < 6 {
                assert!((comm[(j, j)] - ONE).norm() < 1e-12);
            }
        }
        let f = FockSpace::fermion(vec![-1, 0, 1]);
        for i in 0..3 {
            for j in 0..3 {
                let (bi, bj) = (f.ladder_matrix(false, i), f.ladder_matrix(true, j));
                let anti = &bi * &bj + &bj * &bi;
                let expect = if i == j { DMatrix::identity(8, 8) } else { DMatrix::zeros(8, 8) };
                assert!(max_abs(&(anti - expect)) < 1e-14);
            }
        }
    }

    #[test]
    fn identity_transformation_gives_the_out_vacuum() {
        let labels: Vec<i64> = (1..=3).collect();
        let id = NumericBogoliubov::Boson { alpha: DMatrix::identity(3, 3), beta: DMatrix::zeros(3, 3) };
        let v = fock_vacuum_boson(&id, labels, 4, 6).unwrap();
        assert!((v.amplitude(&[0, 0, 0]) - ONE).norm() < 1e-14);
        assert!(v.residual < 1e-14);
        let one = fock_apply_instate(&id, &v, &[2]).unwrap();
        assert!((one.amplitude(&[0, 1, 0]) - ONE).norm() < 1e-14);

        let fid = NumericBogoliubov::Fermion { n_max: 1, a: DMatrix::identity(3, 3) };
        let fv = fock_vacuum_fermion(&fid, vec![-1, 0, 1]).unwrap();
        assert!((fv.amplitude(&[0, 0, 0]) - ONE).norm() < 1e-12);
    }
}
