//! Truncated power series in the acceleration parameter `h`.
//!
//! Every perturbative quantity in the crate is known to second order only.
//! [`H2Series`] carries a scalar `c0 + c1 h + c2 h²` and [`SeriesMatrix`]
//! carries a matrix-valued series as three coefficient matrices. Products
//! discard every term of degree three or higher.
//!
//! Coefficients are stored with the power of `h` stripped off, so the
//! first-order coefficient of a negativity that grows linearly in `h` is
//! read directly from `c1`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `c0 + c1 h + c2 h²`, truncated at `O(h³)`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct H2Series {
    pub c0: C64,
    pub c1: C64,
    pub c2: C64,
}

impl H2Series {
    pub const ZERO: Self = Self { c0: ZERO, c1: ZERO, c2: ZERO };
    pub const ONE: Self = Self { c0: ONE, c1: ZERO, c2: ZERO };

    pub fn new(c0: C64, c1: C64, c2: C64) -> Self {
        Self { c0, c1, c2 }
    }

    pub fn constant(c0: C64) -> Self {
        Self { c0, ..Self::ZERO }
    }

    pub fn real(c0: f64, c1: f64, c2: f64) -> Self {
        Self::new(c0.into(), c1.into(), c2.into())
    }

    pub fn from_orders(orders: [C64; 3]) -> Self {
        Self::new(orders[0], orders[1], orders[2])
    }

    pub fn orders(&self) -> [C64; 3] {
        [self.c0, self.c1, self.c2]
    }

    pub fn order(&self, k: usize) -> C64 {
        self.orders()[k]
    }

    pub fn conj(&self) -> Self {
        Self::new(self.c0.conj(), self.c1.conj(), self.c2.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.c0 * s, self.c1 * s, self.c2 * s)
    }

    pub fn eval(&self, h: f64) -> C64 {
        self.c0 + h * (self.c1 + h * self.c2)
    }

    /// Substitutes `h → -h`.
    pub fn reflect(&self) -> Self {
        Self::new(self.c0, -self.c1, self.c2)
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == ZERO && self.c1 == ZERO && self.c2 == ZERO
    }

    pub fn is_finite(&self) -> bool {
        self.orders().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `|self|²` truncated at second order.
    pub fn norm_sqr(&self) -> Self {
        *self * self.conj()
    }

    pub fn max_abs(&self) -> f64 {
        self.orders().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Lowest order with a coefficient above `tol`, if any.
    pub fn leading_order(&self, tol: f64) -> Option<usize> {
        self.orders().iter().position(|c| c.norm() > tol)
    }
}

impl fmt::Display for H2Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})h + ({})h²", self.c0, self.c1, self.c2)
    }
}

impl Add for H2Series {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.c0 + rhs.c0, self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

impl AddAssign for H2Series {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for H2Series {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.c0 - rhs.c0, self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl Neg for H2Series {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.c0, -self.c1, -self.c2)
    }
}

impl Mul for H2Series {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.c0 * rhs.c0,
            self.c0 * rhs.c1 + self.c1 * rhs.c0,
            self.c0 * rhs.c2 + self.c1 * rhs.c1 + self.c2 * rhs.c0,
        )
    }
}

impl Mul<C64> for H2Series {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for H2Series {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl std::iter::Sum for H2Series {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

/// Matrix-valued second-order series, stored as one complex matrix per order.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    orders: [DMatrix<C64>; 3],
}

impl SeriesMatrix {
    pub fn from_orders(c0: DMatrix<C64>, c1: DMatrix<C64>, c2: DMatrix<C64>) -> Self {
        assert_eq!(c0.shape(), c1.shape(), "order shapes differ");
        assert_eq!(c0.shape(), c2.shape(), "order shapes differ");
        Self { orders: [c0, c1, c2] }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        let z = DMatrix::zeros(rows, cols);
        Self::from_orders(z.clone(), z.clone(), z)
    }

    pub fn identity(n: usize) -> Self {
        let z = DMatrix::zeros(n, n);
        Self::from_orders(DMatrix::identity(n, n), z.clone(), z)
    }

    /// A matrix exact at order `h⁰`.
    pub fn constant(c0: DMatrix<C64>) -> Self {
        let z = DMatrix::zeros(c0.nrows(), c0.ncols());
        Self::from_orders(c0, z.clone(), z)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> H2Series) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.set(i, j, f(i, j));
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.orders[0].nrows()
    }

    pub fn ncols(&self) -> usize {
        self.orders[0].ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.orders[0].shape()
    }

    pub fn order(&self, k: usize) -> &DMatrix<C64> {
        &self.orders[k]
    }

    pub fn order_mut(&mut self, k: usize) -> &mut DMatrix<C64> {
        &mut self.orders[k]
    }

    pub fn get(&self, i: usize, j: usize) -> H2Series {
        H2Series::new(self.orders[0][(i, j)], self.orders[1][(i, j)], self.orders[2][(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, v: H2Series) {
        self.orders[0][(i, j)] = v.c0;
        self.orders[1][(i, j)] = v.c1;
        self.orders[2][(i, j)] = v.c2;
    }

    pub fn map_orders(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        Self::from_orders(f(&self.orders[0]), f(&self.orders[1]), f(&self.orders[2]))
    }

    pub fn conj(&self) -> Self {
        self.map_orders(|m| m.conjugate())
    }

    pub fn transpose(&self) -> Self {
        self.map_orders(|m| m.transpose())
    }

    pub fn adjoint(&self) -> Self {
        self.map_orders(|m| m.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_orders(|m| m * s)
    }

    /// Substitutes `h → -h`.
    pub fn reflect(&self) -> Self {
        Self::from_orders(self.orders[0].clone(), -&self.orders[1], self.orders[2].clone())
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        self.map_orders(|m| m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned())
    }

    pub fn eval(&self, h: f64) -> DMatrix<C64> {
        &self.orders[0] + (&self.orders[1] + &self.orders[2] * C64::from(h)) * C64::from(h)
    }

    /// Truncated product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols(), rhs.nrows(), "inner dimensions differ");
        let [a0, a1, a2] = &self.orders;
        let [b0, b1, b2] = &rhs.orders;
        Self::from_orders(a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a1 * b1 + a2 * b0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::from_orders(
            &self.orders[0] + &rhs.orders[0],
            &self.orders[1] + &rhs.orders[1],
            &self.orders[2] + &rhs.orders[2],
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::from_orders(
            &self.orders[0] - &rhs.orders[0],
            &self.orders[1] - &rhs.orders[1],
            &self.orders[2] - &rhs.orders[2],
        )
    }

    /// Perturbative inverse about an invertible zeroth order.
    ///
    /// With `M = M0 + M1 h + M2 h²` and `R = M0⁻¹`:
    /// `M⁻¹ = R - R M1 R h + (R M1 R M1 R - R M2 R) h²`.
    pub fn try_inverse(&self) -> Option<Self> {
        let r = self.orders[0].clone().try_inverse()?;
        let rm1r = &r * &self.orders[1] * &r;
        let i1 = -&rm1r;
        let i2 = &rm1r * &self.orders[1] * &r - &r * &self.orders[2] * &r;
        Some(Self::from_orders(r, i1, i2))
    }

    /// Largest entry modulus per order.
    pub fn max_abs(&self) -> [f64; 3] {
        let m = |x: &DMatrix<C64>| x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        [m(&self.orders[0]), m(&self.orders[1]), m(&self.orders[2])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn series() -> impl Strategy<Value = H2Series> {
        proptest::array::uniform6(-2.0f64..2.0).prop_map(|v| {
            H2Series::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]))
        })
    }

    fn close(a: H2Series, b: H2Series, tol: f64) -> bool {
        (a - b).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
    }

    proptest! {
        #[test]
        fn product_is_associative(a in series(), b in series(), d in series()) {
            prop_assert!(close((a * b) * d, a * (b * d), 1e-14));
        }

        #[test]
        fn conjugation_distributes(a in series(), b in series()) {
            prop_assert!(close((a * b).conj(), a.conj() * b.conj(), 1e-14));
        }

        #[test]
        fn eval_matches_truncated_product(a in series(), b in series(), h in 0.0f64..0.1) {
            // the product agrees with the pointwise product up to the dropped O(h³) terms
            let exact = a.eval(h) * b.eval(h);
            let trunc = (a * b).eval(h);
            let bound = 2.0 * 16.0 * h.powi(3);
            prop_assert!((exact - trunc).norm() <= bound + 1e-14);
        }
    }

    #[test]
    fn truncation_discards_cubic_terms() {
        let h = H2Series::real(0.0, 1.0, 0.0);
        assert_eq!(h * h * h, H2Series::ZERO);
        assert_eq!((h * h).c2, c(1.0, 0.0));
    }

    #[test]
    fn series_inverse_round_trips() {
        let m0 = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), ZERO, ZERO, c(-1.0, 0.0)]);
        let m1 = DMatrix::from_row_slice(2, 2, &[c(0.1, 0.2), c(0.3, 0.0), c(-0.5, 0.1), c(0.0, 0.7)]);
        let m2 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, -0.4), c(0.0, 0.3), c(0.9, 0.0)]);
        let m = SeriesMatrix::from_orders(m0, m1, m2);
        let inv = m.try_inverse().unwrap();
        let prod = m.mul(&inv);
        let id = SeriesMatrix::identity(2);
        for k in 0..3 {
            assert!((prod.order(k) - id.order(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn matrix_eval_matches_entrywise_eval() {
        let m = SeriesMatrix::from_fn(3, 3, |i, j| H2Series::real(i as f64, j as f64, (i * j) as f64));
        let e = m.eval(0.1);
        assert!((e[(2, 1)] - m.get(2, 1).eval(0.1)).norm() < 1e-15);
    }
}
