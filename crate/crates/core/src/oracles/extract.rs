//! Least-squares order extraction from finite-`h` samples.
//!
//! Production coefficients come from the Taylor-jet route in
//! [`super::overlap`]; this fit is the independent cross-check.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bogoliubov::{Bogoliubov, BosonBogoliubov, FermionBogoliubov, NumericBogoliubov, Species};
use crate::error::{Error, Result};
use crate::series::SeriesMatrix;

#[derive(Clone, Debug)]
pub struct Extraction {
    pub species: Species,
    /// `[α, β]` for bosons, `[A]` for fermions.
    pub matrices: Vec<SeriesMatrix>,
    pub fermion_n_max: usize,
    /// Largest absolute fit residual over all entries and samples.
    pub residual: f64,
    /// Entries with the largest residuals: (matrix, row, col, residual).
    pub worst: Vec<(usize, usize, usize, f64)>,
}

impl Extraction {
    pub fn into_bogoliubov(self) -> Result<Bogoliubov> {
        let mut it = self.matrices.into_iter();
        match self.species {
            Species::Boson => {
                let (a, b) = (it.next().unwrap(), it.next().unwrap());
                Ok(Bogoliubov::Boson(BosonBogoliubov::new(a, b)?))
            }
            Species::Fermion => Ok(Bogoliubov::Fermion(FermionBogoliubov::new(self.fermion_n_max, it.next().unwrap())?)),
        }
    }
}

fn split(n: &NumericBogoliubov) -> (Species, Vec<&DMatrix<C64>>, usize) {
    match n {
        NumericBogoliubov::Boson { alpha, beta } => (Species::Boson, vec![alpha, beta], 0),
        NumericBogoliubov::Fermion { n_max, a } => (Species::Fermion, vec![a], *n_max),
    }
}

/// Fits every entry to a polynomial of the given `degree` (≥ 2) in `h` and
/// keeps the `h⁰, h¹, h²` coefficients.
///
/// Higher `degree` absorbs the `O(h³)` tail, which otherwise biases `c₁`
/// by roughly `c₃·h_max²`.
pub fn extract_orders(samples: &[(f64, NumericBogoliubov)], degree: usize, residual_tol: f64) -> Result<Extraction> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 samples, got {}", samples.len())));
    }
    if degree < 2 || degree + 1 > samples.len() {
        return Err(Error::Fit(format!("degree {degree} needs 2 ≤ degree < {}", samples.len())));
    }
    if let Some(&(h, _)) = samples.iter().find(|(h, _)| !(*h > 0.0 && *h <= 0.1)) {
        return Err(Error::PerturbativeRange(h));
    }
    let (species, first, n_max) = split(&samples[0].1);
    let shapes: Vec<_> = first.iter().map(|m| m.shape()).collect();
    let mut stacks = Vec::with_capacity(samples.len());
    for (_, s) in samples {
        let (sp, mats, _) = split(s);
        if sp != species {
            return Err(Error::SpeciesMismatch(species.name(), sp.name()));
        }
        for (m, shape) in mats.iter().zip(&shapes) {
            if m.shape() != *shape {
                return Err(Error::SizeMismatch(m.nrows(), shape.0));
            }
        }
        stacks.push(mats);
    }

    let vander = DMatrix::from_fn(samples.len(), degree + 1, |i, k| samples[i].0.powi(k as i32));
    let pinv = vander
        .clone()
        .pseudo_inverse(1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let pinv = pinv.map(C64::from);
    let vander = vander.map(C64::from);

    let mut matrices = Vec::new();
    let mut worst = Vec::new();
    let mut residual: f64 = 0.0;
    for (idx, &(rows, cols)) in shapes.iter().enumerate() {
        let mut orders = [(); 3].map(|_| DMatrix::<C64>::zeros(rows, cols));
        for r in 0..rows {
            for c in 0..cols {
                let y = DMatrix::from_fn(samples.len(), 1, |i, _| stacks[i][idx][(r, c)]);
                let coeffs = &pinv * &y;
                let res = (&vander * &coeffs - &y).iter().map(|z| z.norm()).fold(0.0, f64::max);
                residual = residual.max(res);
                worst.push((idx, r, c, res));
                for (k, o) in orders.iter_mut().enumerate() {
                    o[(r, c)] = coeffs[k];
                }
            }
        }
        let [c0, c1, c2] = orders;
        matrices.push(SeriesMatrix::from_orders(c0, c1, c2));
    }
    worst.sort_by(|a, b| b.3.total_cmp(&a.3));
    worst.truncate(8);
    if residual > residual_tol {
        let list: Vec<String> = worst.iter().map(|(m, r, c, v)| format!("[{m}]({r},{c}): {v:e}")).collect();
        return Err(Error::Fit(format!("residual {residual:e} above {residual_tol:e}; worst {}", list.join(", "))));
    }
    Ok(Extraction { species, matrices, fermion_n_max: n_max, residual, worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratics_are_recovered() {
        let c = [C64::new(1.0, 0.5), C64::new(-0.3, 2.0), C64::new(0.7, -1.1)];
        let samples: Vec<_> = [0.08, 0.04, 0.02, 0.01]
            .iter()
            .map(|&h| {
                let v = c[0] + c[1] * h + c[2] * h * h;
                (h, NumericBogoliubov::Fermion { n_max: 0, a: DMatrix::from_element(1, 1, v) })
            })
            .collect();
        let ex = extract_orders(&samples, 2, 1e-12).unwrap();
        for (k, ck) in c.iter().enumerate() {
            assert!((ex.matrices[0].order(k)[(0, 0)] - ck).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_ladders_and_large_h() {
        let s = |h| (h, NumericBogoliubov::Fermion { n_max: 0, a: DMatrix::identity(1, 1) });
        assert!(extract_orders(&[s(0.08), s(0.04), s(0.02)], 2, 1.0).is_err());
        assert!(extract_orders(&[s(0.3), s(0.04), s(0.02), s(0.01)], 2, 1.0).is_err());
        assert!(extract_orders(&[s(0.08), s(0.04), s(0.02), s(0.01)], 4, 1.0).is_err());
    }
}
