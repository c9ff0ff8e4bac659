//! Perturbative Bogoliubov transformations between cavity mode bases.
//!
//! A bosonic transformation relates out-modes to in-modes through
//! `φ̃_m = Σ_n (α_mn φ_n + β_mn φ_n*)`; a fermionic one through the unitary
//! `ψ̃_m = Σ_n A_mn ψ_n`. Each coefficient matrix is a [`SeriesMatrix`] in the
//! acceleration parameter `h`, and everything in this module keeps the
//! `O(h²)` truncation consistent.
//!
//! Boson matrices are indexed `0..n_max` for modes `1..=n_max`. Fermion
//! matrices are indexed `0..=2 n_max` for `κ = -n_max..=n_max`; `κ ≥ 0`
//! labels particles (positive charge) and `κ < 0` antiparticles.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{H2Series, SeriesMatrix};

/// Order-zero entries must be this close to the required structure.
const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Boson,
    Fermion,
}

impl Species {
    pub fn name(&self) -> &'static str {
        match self {
            Species::Boson => "boson",
            Species::Fermion => "fermion",
        }
    }
}

impl std::str::FromStr for Species {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "scalar" => Ok(Species::Boson),
            "fermion" | "dirac" => Ok(Species::Fermion),
            other => Err(Error::Config(format!("unknown species '{other}'"))),
        }
    }
}

/// Maximum violation of one identity at orders `h⁰`, `h¹`, `h²`.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub orders: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    /// Inclusive mode-label window the residuals were taken over.
    pub window: (i64, i64),
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn max_at_order(&self, k: usize) -> f64 {
        self.residuals.iter().map(|r| r.orders[k]).fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        (0..3).map(|k| self.max_at_order(k)).fold(0.0, f64::max)
    }

    /// Residual each order contributes at a concrete `h`.
    pub fn weighted_max(&self, h: f64) -> f64 {
        (0..3).map(|k| self.max_at_order(k) * h.powi(k as i32)).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() < tol
    }
}

fn window_max(m: &DMatrix<C64>, lo: usize, hi: usize) -> f64 {
    let mut out: f64 = 0.0;
    for i in lo..hi {
        for j in lo..hi {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

fn series_window_max(m: &SeriesMatrix, lo: usize, hi: usize) -> [f64; 3] {
    [0, 1, 2].map(|k| window_max(m.order(k), lo, hi))
}

fn check_order_zero_diagonal(m: &DMatrix<C64>, what: &str) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let bad = if i == j { (z.norm() - 1.0).abs() > STRUCTURE_TOL } else { z.norm() > STRUCTURE_TOL };
            if bad {
                return Err(Error::Geometry(format!(
                    "{what} order h⁰ must be diagonal with unit-modulus entries (entry ({i},{j}) = {z})"
                )));
            }
        }
    }
    Ok(())
}

/// Bosonic `(α, β)` pair truncated to `n_max` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct BosonBogoliubov {
    alpha: SeriesMatrix,
    beta: SeriesMatrix,
}

impl BosonBogoliubov {
    pub fn new(alpha: SeriesMatrix, beta: SeriesMatrix) -> Result<Self> {
        let (r, c) = alpha.shape();
        if r != c {
            return Err(Error::SizeMismatch(r, c));
        }
        if beta.shape() != alpha.shape() {
            return Err(Error::SizeMismatch(r, beta.nrows()));
        }
        check_order_zero_diagonal(alpha.order(0), "alpha")?;
        if beta.max_abs()[0] > STRUCTURE_TOL {
            return Err(Error::Geometry("beta must vanish at order h⁰".into()));
        }
        Ok(Self { alpha, beta })
    }

    pub fn identity(n_max: usize) -> Self {
        Self { alpha: SeriesMatrix::identity(n_max), beta: SeriesMatrix::zeros(n_max, n_max) }
    }

    /// Diagonal transformation `α = diag(phases)`, `β = 0`.
    pub fn diagonal(phases: &[C64]) -> Self {
        let n = phases.len();
        Self {
            alpha: SeriesMatrix::constant(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(phases))),
            beta: SeriesMatrix::zeros(n, n),
        }
    }

    pub fn n_max(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn alpha(&self) -> &SeriesMatrix {
        &self.alpha
    }

    pub fn beta(&self) -> &SeriesMatrix {
        &self.beta
    }

    /// `α_mn` for mode labels `m, n ≥ 1`.
    pub fn alpha_at(&self, m: usize, n: usize) -> H2Series {
        self.alpha.get(m - 1, n - 1)
    }

    pub fn beta_at(&self, m: usize, n: usize) -> H2Series {
        self.beta.get(m - 1, n - 1)
    }

    /// The unit-modulus phases `G_j` on the diagonal of `α⁽⁰⁾`.
    pub fn phases(&self) -> Vec<C64> {
        (0..self.n_max()).map(|i| self.alpha.order(0)[(i, i)]).collect()
    }

    /// `second ∘ first`: `(α₂α₁ + β₂β₁*, α₂β₁ + β₂α₁*)`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.n_max() != first.n_max() {
            return Err(Error::SizeMismatch(self.n_max(), first.n_max()));
        }
        let alpha = self.alpha.mul(&first.alpha).add(&self.beta.mul(&first.beta.conj()));
        let beta = self.alpha.mul(&first.beta).add(&self.beta.mul(&first.alpha.conj()));
        Ok(Self { alpha, beta })
    }

    /// `(α†, -βᵀ)`.
    pub fn invert(&self) -> Self {
        Self { alpha: self.alpha.adjoint(), beta: self.beta.transpose().scale(C64::new(-1.0, 0.0)) }
    }

    /// Substitutes `h → -h` in every coefficient.
    pub fn reflect(&self) -> Self {
        Self { alpha: self.alpha.reflect(), beta: self.beta.reflect() }
    }

    /// Redefines mode phases: out-modes `φ̃_m → e^{iθ_m} φ̃_m` and in-modes
    /// `φ_n → e^{iχ_n} φ_n`.
    pub fn rephase(&self, out_phases: &[C64], in_phases: &[C64]) -> Self {
        let n = self.n_max();
        let alpha = SeriesMatrix::from_fn(n, n, |i, j| self.alpha.get(i, j) * (out_phases[i] * in_phases[j].conj()));
        let beta = SeriesMatrix::from_fn(n, n, |i, j| self.beta.get(i, j) * (out_phases[i] * in_phases[j]));
        Self { alpha, beta }
    }

    /// Truncates to the first `n` modes.
    pub fn restrict(&self, n: usize) -> Self {
        Self { alpha: self.alpha.submatrix(0..n, 0..n), beta: self.beta.submatrix(0..n, 0..n) }
    }

    /// Order-by-order residuals of `αα† - ββ† = I` and `αβᵀ - βαᵀ = 0` over
    /// modes `1..=n_max/2`.
    pub fn identity_check(&self) -> IdentityReport {
        let hi = (self.n_max() / 2).max(1);
        let n = self.n_max();
        let first = self
            .alpha
            .mul(&self.alpha.adjoint())
            .sub(&self.beta.mul(&self.beta.adjoint()))
            .sub(&SeriesMatrix::identity(n));
        let second = self.alpha.mul(&self.beta.transpose()).sub(&self.beta.mul(&self.alpha.transpose()));
        IdentityReport {
            window: (1, hi as i64),
            residuals: vec![
                IdentityResidual { name: "alpha alpha^dag - beta beta^dag - 1", orders: series_window_max(&first, 0, hi) },
                IdentityResidual { name: "alpha beta^T - beta alpha^T", orders: series_window_max(&second, 0, hi) },
            ],
        }
    }

    pub fn evaluate_at(&self, h: f64) -> Result<NumericBogoliubov> {
        check_h(h)?;
        Ok(self.evaluate_unchecked(h))
    }

    pub fn evaluate_unchecked(&self, h: f64) -> NumericBogoliubov {
        NumericBogoliubov::Boson { alpha: self.alpha.eval(h), beta: self.beta.eval(h) }
    }
}

/// Fermionic `A` over `κ = -n_max..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionBogoliubov {
    n_max: usize,
    a: SeriesMatrix,
}

impl FermionBogoliubov {
    pub fn new(n_max: usize, a: SeriesMatrix) -> Result<Self> {
        let dim = 2 * n_max + 1;
        if a.shape() != (dim, dim) {
            return Err(Error::SizeMismatch(dim, a.nrows()));
        }
        check_order_zero_diagonal(a.order(0), "A")?;
        Ok(Self { n_max, a })
    }

    pub fn identity(n_max: usize) -> Self {
        Self { n_max, a: SeriesMatrix::identity(2 * n_max + 1) }
    }

    /// Diagonal transformation with `phases[i]` on mode `κ = i - n_max`.
    pub fn diagonal(n_max: usize, phases: &[C64]) -> Self {
        assert_eq!(phases.len(), 2 * n_max + 1);
        Self {
            n_max,
            a: SeriesMatrix::constant(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(phases))),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn a(&self) -> &SeriesMatrix {
        &self.a
    }

    pub fn index(&self, kappa: i64) -> Option<usize> {
        let i = kappa + self.n_max as i64;
        (0..self.dim() as i64).contains(&i).then_some(i as usize)
    }

    pub fn label(&self, index: usize) -> i64 {
        index as i64 - self.n_max as i64
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> {
        let n = self.n_max as i64;
        -n..=n
    }

    /// `A_{κκ'}` by mode label.
    pub fn a_at(&self, m: i64, n: i64) -> H2Series {
        self.a.get(self.index(m).expect("mode in range"), self.index(n).expect("mode in range"))
    }

    pub fn phases(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.a.order(0)[(i, i)]).collect()
    }

    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.n_max != first.n_max {
            return Err(Error::SizeMismatch(self.n_max, first.n_max));
        }
        Ok(Self { n_max: self.n_max, a: self.a.mul(&first.a) })
    }

    pub fn invert(&self) -> Self {
        Self { n_max: self.n_max, a: self.a.adjoint() }
    }

    pub fn reflect(&self) -> Self {
        Self { n_max: self.n_max, a: self.a.reflect() }
    }

    /// Out-modes `ψ̃_m → e^{iθ_m} ψ̃_m`, in-modes `ψ_n → e^{iχ_n} ψ_n`.
    pub fn rephase(&self, out_phases: &[C64], in_phases: &[C64]) -> Self {
        let d = self.dim();
        let a = SeriesMatrix::from_fn(d, d, |i, j| self.a.get(i, j) * (out_phases[i] * in_phases[j].conj()));
        Self { n_max: self.n_max, a }
    }

    /// Truncates to `κ = -n..=n`.
    pub fn restrict(&self, n: usize) -> Self {
        let lo = self.n_max - n;
        let r = lo..lo + 2 * n + 1;
        Self { n_max: n, a: self.a.submatrix(r.clone(), r) }
    }

    /// Order-by-order residuals of `A†A = I` and `AA† = I` over
    /// `κ = -n_max/2..=n_max/2`.
    pub fn identity_check(&self) -> IdentityReport {
        let half = self.n_max / 2;
        let (lo, hi) = (self.n_max - half, self.n_max + half + 1);
        let id = SeriesMatrix::identity(self.dim());
        let ada = self.a.adjoint().mul(&self.a).sub(&id);
        let aad = self.a.mul(&self.a.adjoint()).sub(&id);
        IdentityReport {
            window: (-(half as i64), half as i64),
            residuals: vec![
                IdentityResidual { name: "A^dag A - 1", orders: series_window_max(&ada, lo, hi) },
                IdentityResidual { name: "A A^dag - 1", orders: series_window_max(&aad, lo, hi) },
            ],
        }
    }

    pub fn evaluate_at(&self, h: f64) -> Result<NumericBogoliubov> {
        check_h(h)?;
        Ok(self.evaluate_unchecked(h))
    }

    pub fn evaluate_unchecked(&self, h: f64) -> NumericBogoliubov {
        NumericBogoliubov::Fermion { n_max: self.n_max, a: self.a.eval(h) }
    }
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h < 0.5 {
        Ok(())
    } else {
        Err(Error::PerturbativeRange(h))
    }
}

/// Either species of perturbative transformation.
#[derive(Clone, Debug, PartialEq)]
pub enum Bogoliubov {
    Boson(BosonBogoliubov),
    Fermion(FermionBogoliubov),
}

impl Bogoliubov {
    pub fn identity(species: Species, n_max: usize) -> Self {
        match species {
            Species::Boson => Bogoliubov::Boson(BosonBogoliubov::identity(n_max)),
            Species::Fermion => Bogoliubov::Fermion(FermionBogoliubov::identity(n_max)),
        }
    }

    pub fn species(&self) -> Species {
        match self {
            Bogoliubov::Boson(_) => Species::Boson,
            Bogoliubov::Fermion(_) => Species::Fermion,
        }
    }

    pub fn n_max(&self) -> usize {
        match self {
            Bogoliubov::Boson(b) => b.n_max(),
            Bogoliubov::Fermion(f) => f.n_max(),
        }
    }

    /// Largest entry difference from `other` over all matrices and orders.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        let diff = |x: &SeriesMatrix, y: &SeriesMatrix| -> Result<f64> {
            if x.nrows() != y.nrows() {
                return Err(Error::SizeMismatch(x.nrows(), y.nrows()));
            }
            Ok((0..3)
                .flat_map(|k| x.order(k).iter().zip(y.order(k).iter()).map(|(a, b)| (a - b).norm()))
                .fold(0.0, f64::max))
        };
        match (self, other) {
            (Bogoliubov::Boson(a), Bogoliubov::Boson(b)) => Ok(diff(a.alpha(), b.alpha())?.max(diff(a.beta(), b.beta())?)),
            (Bogoliubov::Fermion(a), Bogoliubov::Fermion(b)) => diff(a.a(), b.a()),
            _ => Err(Error::SpeciesMismatch(self.species().name(), other.species().name())),
        }
    }

    /// `second ∘ first`, with `self` applied second.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        match (self, first) {
            (Bogoliubov::Boson(a), Bogoliubov::Boson(b)) => Ok(Bogoliubov::Boson(a.compose(b)?)),
            (Bogoliubov::Fermion(a), Bogoliubov::Fermion(b)) => Ok(Bogoliubov::Fermion(a.compose(b)?)),
            _ => Err(Error::SpeciesMismatch(self.species().name(), first.species().name())),
        }
    }

    pub fn invert(&self) -> Self {
        match self {
            Bogoliubov::Boson(b) => Bogoliubov::Boson(b.invert()),
            Bogoliubov::Fermion(f) => Bogoliubov::Fermion(f.invert()),
        }
    }

    pub fn reflect(&self) -> Self {
        match self {
            Bogoliubov::Boson(b) => Bogoliubov::Boson(b.reflect()),
            Bogoliubov::Fermion(f) => Bogoliubov::Fermion(f.reflect()),
        }
    }

    pub fn identity_check(&self) -> IdentityReport {
        match self {
            Bogoliubov::Boson(b) => b.identity_check(),
            Bogoliubov::Fermion(f) => f.identity_check(),
        }
    }

    pub fn evaluate_at(&self, h: f64) -> Result<NumericBogoliubov> {
        match self {
            Bogoliubov::Boson(b) => b.evaluate_at(h),
            Bogoliubov::Fermion(f) => f.evaluate_at(h),
        }
    }

    pub fn as_boson(&self) -> Option<&BosonBogoliubov> {
        match self {
            Bogoliubov::Boson(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_fermion(&self) -> Option<&FermionBogoliubov> {
        match self {
            Bogoliubov::Fermion(f) => Some(f),
            _ => None,
        }
    }
}

/// Coefficient matrices at a concrete value of `h`.
#[derive(Clone, Debug, PartialEq)]
pub enum NumericBogoliubov {
    Boson { alpha: DMatrix<C64>, beta: DMatrix<C64> },
    Fermion { n_max: usize, a: DMatrix<C64> },
}

impl NumericBogoliubov {
    /// `‖·‖_∞` violations of the exact identities over the interior window.
    pub fn identity_residuals(&self) -> Vec<(&'static str, f64)> {
        match self {
            NumericBogoliubov::Boson { alpha, beta } => {
                let n = alpha.nrows();
                let hi = (n / 2).max(1);
                let first = alpha * alpha.adjoint() - beta * beta.adjoint() - DMatrix::<C64>::identity(n, n);
                let second = alpha * beta.transpose() - beta * alpha.transpose();
                vec![
                    ("alpha alpha^dag - beta beta^dag - 1", window_max(&first, 0, hi)),
                    ("alpha beta^T - beta alpha^T", window_max(&second, 0, hi)),
                ]
            }
            NumericBogoliubov::Fermion { n_max, a } => {
                let d = a.nrows();
                let half = n_max / 2;
                let (lo, hi) = (n_max - half, n_max + half + 1);
                let id = DMatrix::<C64>::identity(d, d);
                vec![
                    ("A^dag A - 1", window_max(&(a.adjoint() * a - &id), lo, hi)),
                    ("A A^dag - 1", window_max(&(a * a.adjoint() - &id), lo, hi)),
                ]
            }
        }
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residuals().iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// A random transformation satisfying the identities to second order:
    /// `M = D (1 + X h + (X²/2 + Y) h²)` with `X`, `Y` in the Lie algebra.
    fn random_boson(n: usize, seed: &[f64]) -> BosonBogoliubov {
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * ((k as f64) * 0.37).sin()
        };
        let mut gen = |herm: bool| {
            let mut a = DMatrix::<C64>::zeros(n, n);
            let mut b = DMatrix::<C64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let z = c(next(), next());
                    if herm {
                        // anti-Hermitian alpha block
                        a[(i, j)] = z;
                        a[(j, i)] = -z.conj();
                        if i == j {
                            a[(i, i)] = c(0.0, z.im);
                        }
                    }
                    let w = c(next(), next());
                    b[(i, j)] = w;
                    b[(j, i)] = w;
                }
            }
            (a, b)
        };
        let (a1, b1) = gen(true);
        let (ya, yb) = gen(true);
        // second order of exp: ½X² plus a fresh algebra element
        let a2 = (&a1 * &a1 + &b1 * b1.conjugate()) * c(0.5, 0.0) + ya;
        let b2 = (&a1 * &b1 + &b1 * a1.conjugate()) * c(0.5, 0.0) + yb;
        let phases: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, 0.3 + i as f64)).collect();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases));
        let alpha = SeriesMatrix::from_orders(d.clone(), &d * a1, &d * a2);
        let beta = SeriesMatrix::from_orders(DMatrix::zeros(n, n), &d * b1, &d * b2);
        BosonBogoliubov::new(alpha, beta).unwrap()
    }

    fn assert_close(a: &BosonBogoliubov, b: &BosonBogoliubov, tol: f64) {
        for k in 0..3 {
            assert!((a.alpha().order(k) - b.alpha().order(k)).norm() <= tol, "alpha order {k}");
            assert!((a.beta().order(k) - b.beta().order(k)).norm() <= tol, "beta order {k}");
        }
    }

    #[test]
    fn identity_is_neutral_for_composition() {
        let b = random_boson(5, &[0.3, -0.7, 0.2, 0.9]);
        let id = BosonBogoliubov::identity(5);
        assert_close(&id.compose(&b).unwrap(), &b, 1e-14);
        assert_close(&b.compose(&id).unwrap(), &b, 1e-14);
        assert!(id.identity_check().max() == 0.0);
    }

    #[test]
    fn inverse_is_two_sided() {
        let b = random_boson(6, &[0.1, 0.5, -0.4]);
        assert!(b.identity_check().max() < 1e-12);
        let id = BosonBogoliubov::identity(6);
        assert_close(&b.invert().compose(&b).unwrap(), &id, 1e-12);
        assert_close(&b.compose(&b.invert()).unwrap(), &id, 1e-12);
        assert_close(&b.invert().invert(), &b, 0.0);
    }

    #[test]
    fn inverse_first_order_is_conjugate_transpose() {
        let b = random_boson(4, &[0.2, 0.6]);
        let inv = b.invert();
        for m in 0..4 {
            for n in 0..4 {
                assert_eq!(inv.alpha().order(1)[(m, n)], b.alpha().order(1)[(n, m)].conj());
            }
        }
    }

    #[test]
    fn diagonal_phases_add_under_composition() {
        let ph = |u: f64| (1..=6).map(|n| C64::from_polar(1.0, -2.0 * PI * n as f64 * u)).collect::<Vec<_>>();
        let a = BosonBogoliubov::diagonal(&ph(0.3));
        let b = BosonBogoliubov::diagonal(&ph(0.2));
        assert_close(&a.compose(&b).unwrap(), &BosonBogoliubov::diagonal(&ph(0.5)), 1e-14);
    }

    #[test]
    fn sign_flipped_beta_is_flagged_at_first_order() {
        let b = random_boson(6, &[0.4, -0.3, 0.8]);
        // flip β⁽¹⁾ only in the first row/column: breaks symmetry of β⁽¹⁾ G
        let mut beta = b.beta().clone();
        for j in 0..6 {
            let v = beta.get(0, j);
            beta.set(0, j, H2Series::new(v.c0, -v.c1, v.c2));
        }
        let bad = BosonBogoliubov::new(b.alpha().clone(), beta).unwrap();
        let report = bad.identity_check();
        // window is modes 1..=3; the flipped entries (0, j) now violate the
        // antisymmetric identity by exactly 2|β⁽¹⁾_0j|
        let max_b1 = (1..3).map(|j| b.beta().order(1)[(0, j)].norm()).fold(0.0, f64::max);
        assert!((report.max_at_order(1) - 2.0 * max_b1).abs() < 1e-12);
        assert!(report.max_at_order(0) < 1e-14);
    }

    #[test]
    fn species_mismatch_is_rejected() {
        let b = Bogoliubov::identity(Species::Boson, 3);
        let f = Bogoliubov::identity(Species::Fermion, 3);
        assert!(matches!(b.compose(&f), Err(Error::SpeciesMismatch(..))));
        let b4 = Bogoliubov::identity(Species::Boson, 4);
        assert!(matches!(b.compose(&b4), Err(Error::SizeMismatch(3, 4))));
    }

    #[test]
    fn evaluate_identity_gives_unit_alpha_and_zero_beta() {
        let id = BosonBogoliubov::identity(3);
        match id.evaluate_at(0.05).unwrap() {
            NumericBogoliubov::Boson { alpha, beta } => {
                assert_eq!(alpha, DMatrix::identity(3, 3));
                assert_eq!(beta, DMatrix::zeros(3, 3));
            }
            _ => unreachable!(),
        }
        assert!(matches!(id.evaluate_at(0.7), Err(Error::PerturbativeRange(_))));
        assert!(matches!(id.evaluate_at(0.0), Err(Error::PerturbativeRange(_))));
    }

    #[test]
    fn fermion_inverse_is_adjoint() {
        let n = 2;
        let d = 2 * n + 1;
        let x = DMatrix::from_fn(d, d, |i, j| {
            
            c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.2)
        });
        let x1 = (&x - x.adjoint()) * c(0.5, 0.0);
        let a = SeriesMatrix::from_orders(DMatrix::identity(d, d), x1.clone(), &x1 * &x1 * c(0.5, 0.0));
        let f = FermionBogoliubov::new(n, a).unwrap();
        assert!(f.identity_check().max() < 1e-14);
        let back = f.invert().compose(&f).unwrap();
        for k in 0..3 {
            assert!((back.a().order(k) - SeriesMatrix::identity(d).order(k)).norm() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn composition_is_associative(s1 in proptest::collection::vec(-1.0f64..1.0, 4),
                                      s2 in proptest::collection::vec(-1.0f64..1.0, 4),
                                      s3 in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let (a, b, d) = (random_boson(4, &s1), random_boson(4, &s2), random_boson(4, &s3));
            let left = a.compose(&b).unwrap().compose(&d).unwrap();
            let right = a.compose(&b.compose(&d).unwrap()).unwrap();
            for k in 0..3 {
                prop_assert!((left.alpha().order(k) - right.alpha().order(k)).norm() < 1e-12);
                prop_assert!((left.beta().order(k) - right.beta().order(k)).norm() < 1e-12);
            }
        }

        #[test]
        fn composition_preserves_identities(s1 in proptest::collection::vec(-1.0f64..1.0, 5),
                                            s2 in proptest::collection::vec(-1.0f64..1.0, 5)) {
            let ab = random_boson(5, &s1).compose(&random_boson(5, &s2)).unwrap();
            let r = ab.identity_check();
            prop_assert!(r.max() < 1e-11, "{:?}", r);
        }
    }
}
