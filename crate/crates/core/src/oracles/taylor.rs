//! Truncated Taylor polynomials ("jets") in a single real variable.
//!
//! Used to push the overlap integrands through their `h` dependence and read
//! off the Maclaurin coefficients at each quadrature node, without fitting.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Jet<const N: usize>(pub [f64; N]);

impl<const N: usize> Jet<N> {
    pub fn constant(c: f64) -> Self {
        let mut v = [0.0; N];
        v[0] = c;
        Self(v)
    }

    /// The independent variable itself.
    pub fn var() -> Self {
        let mut v = [0.0; N];
        if N > 1 {
            v[1] = 1.0;
        }
        Self(v)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|c| c * s))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Evaluates the power series `Σ a_k z^k` at `self`, which must have a
    /// vanishing constant term.
    pub fn compose(&self, coeffs: &[f64]) -> Self {
        debug_assert!(self.0[0] == 0.0, "compose needs a zero constant term");
        let mut acc = Self::constant(0.0);
        for &a in coeffs.iter().take(N).rev() {
            acc = acc * *self + Self::constant(a);
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let a0 = self.0[0];
        assert!(a0 != 0.0, "reciprocal of a jet with zero constant term");
        let mut r = [0.0; N];
        r[0] = 1.0 / a0;
        for k in 1..N {
            let s: f64 = (1..=k).map(|j| self.0[j] * r[k - j]).sum();
            r[k] = -s / a0;
        }
        Self(r)
    }

    fn split(&self) -> (f64, Self) {
        let mut d = *self;
        d.0[0] = 0.0;
        (self.0[0], d)
    }

    pub fn sin(&self) -> Self {
        let (x0, d) = self.split();
        let (s, c) = x0.sin_cos();
        d.compose(&cos_coeffs::<N>()).scale(s) + d.compose(&sin_coeffs::<N>()).scale(c)
    }

    pub fn cos(&self) -> Self {
        let (x0, d) = self.split();
        let (s, c) = x0.sin_cos();
        d.compose(&cos_coeffs::<N>()).scale(c) - d.compose(&sin_coeffs::<N>()).scale(s)
    }

    /// `self^p` for a positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        let (x0, d) = self.split();
        assert!(x0 > 0.0, "powf needs a positive constant term");
        let z = d.scale(1.0 / x0);
        let mut binom = [0.0; N];
        let mut b = 1.0;
        for (k, slot) in binom.iter_mut().enumerate() {
            *slot = b;
            b *= (p - k as f64) / (k as f64 + 1.0);
        }
        z.compose(&binom).scale(x0.powf(p))
    }

    /// `ln(1 + z) / z` for a jet `z` with zero constant term.
    pub fn log1p_over(&self) -> Self {
        let coeffs: [f64; N] = std::array::from_fn(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s / (k as f64 + 1.0)
        });
        self.compose(&coeffs)
    }
}

fn sin_coeffs<const N: usize>() -> [f64; N] {
    let mut out = [0.0; N];
    let mut fact = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        if k % 2 == 1 {
            *slot = (if (k / 2) % 2 == 0 { 1.0 } else { -1.0 }) / fact;
        }
    }
    out
}

fn cos_coeffs<const N: usize>() -> [f64; N] {
    let mut out = [0.0; N];
    let mut fact = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        if k % 2 == 0 {
            *slot = (if (k / 2) % 2 == 0 { 1.0 } else { -1.0 }) / fact;
        }
    }
    out
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - rhs.0[k]))
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [0.0; N];
        for i in 0..N {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                out[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Self(out)
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type J = Jet<5>;

    // central finite differences of order k at 0 against the jet coefficients
    fn check(f: impl Fn(f64) -> f64, jet: J, tol: f64) {
        let e = 1e-3;
        let d1 = (f(e) - f(-e)) / (2.0 * e);
        let d2 = (f(e) - 2.0 * f(0.0) + f(-e)) / (e * e);
        assert!((jet.coeff(0) - f(0.0)).abs() < 1e-14);
        assert!((jet.coeff(1) - d1).abs() < tol, "{} vs {}", jet.coeff(1), d1);
        assert!((jet.coeff(2) - d2 / 2.0).abs() < tol, "{} vs {}", jet.coeff(2), d2 / 2.0);
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x = J::var();
        check(|t| (0.7 + 3.0 * t).sin(), (J::constant(0.7) + x * 3.0).sin(), 1e-5);
        check(|t| (0.7 + 3.0 * t).cos(), (J::constant(0.7) + x * 3.0).cos(), 1e-5);
        check(|t| (2.0 + t).powf(-0.5), (J::constant(2.0) + x).powf(-0.5), 1e-6);
        check(|t| 1.0 / (1.5 - t), (J::constant(1.5) - x).recip(), 1e-6);
        check(|t| if t == 0.0 { 1.0 } else { (0.5 * t).ln_1p() / (0.5 * t) }, x.scale(0.5).log1p_over(), 1e-6);
    }

    #[test]
    fn sin_series_is_exact_for_a_polynomial_argument() {
        // sin(t) = t - t³/6 + ...
        let s = J::var().sin();
        assert_eq!(s.0, [0.0, 1.0, 0.0, -1.0 / 6.0, 0.0]);
    }
}
