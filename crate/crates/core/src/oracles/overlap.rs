//! Bogoliubov coefficients of the inertial → uniformly accelerated junction
//! from slice inner products of the two mode sets.
//!
//! At the junction the cavity is momentarily at rest, so both mode sets live
//! on the same `t = 0` slice `a ≤ x ≤ b`. Inertial modes are
//! `sin(nπ(x-a)/δ)/√(nπ)` (scalar, frequency `nπ/δ`) and bag spinors with
//! frequencies `(κ+½)π/δ`. Accelerated modes are the conformally mapped
//! versions in `ln(x/a)/L`, with Rindler frequencies `nπ/L` and `(κ+½)π/L`
//! conjugate to the boost time `η`; on the slice `∂_t = x⁻¹ ∂_η`.
//!
//! Two independent evaluation routes are provided:
//! * [`boson_overlap`] / [`fermion_overlap`] integrate the physical mode
//!   functions at a finite `h`;
//! * [`boson_series`] / [`fermion_series`] push Taylor jets in `h` through
//!   the same integrals written on the unit interval and return the
//!   `h⁰`, `h¹`, `h²` coefficients directly.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::quadrature::CompositeRule;
use super::taylor::Jet;
use crate::blocks::CavityGeometry;
use crate::bogoliubov::NumericBogoliubov;
use crate::error::{Error, Result};
use crate::series::SeriesMatrix;

/// Quadrature is refined by panel doubling until matrices change by less
/// than this.
pub const QUADRATURE_TOL: f64 = 1e-12;

fn default_panels(n_max: usize) -> usize {
    n_max + 8
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Scalar `(α, β)` at finite `h` for modes `1..=n_max`.
pub fn boson_overlap(geom: &CavityGeometry, n_max: usize, panels: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let rule = CompositeRule::unit_interval(panels);
    let (a, delta, l) = (geom.inner_wall(), geom.delta, geom.log_length());
    let nodes = rule.len();
    // rows: modes; columns: nodes
    let mut accel = DMatrix::<f64>::zeros(n_max, nodes);
    let mut accel_over_x = DMatrix::<f64>::zeros(n_max, nodes);
    let mut inertial = DMatrix::<f64>::zeros(nodes, n_max);
    for (i, (&s, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let x = a + delta * s;
        let xi = (x / a).ln() / l;
        let dx = w * delta;
        for m in 1..=n_max {
            let mf = m as f64;
            let prof = (mf * PI * xi).sin() / (mf * PI).sqrt();
            accel[(m - 1, i)] = dx * prof;
            accel_over_x[(m - 1, i)] = dx * prof / x;
            inertial[(i, m - 1)] = (mf * PI * (x - a) / delta).sin() / (mf * PI).sqrt();
        }
    }
    let plain = &accel * &inertial;
    let weighted = &accel_over_x * &inertial;
    let omega = |n: usize| n as f64 * PI / delta;
    let rindler = |m: usize| m as f64 * PI / l;
    let alpha = DMatrix::from_fn(n_max, n_max, |i, j| omega(j + 1) * plain[(i, j)] + rindler(i + 1) * weighted[(i, j)]);
    let beta = DMatrix::from_fn(n_max, n_max, |i, j| omega(j + 1) * plain[(i, j)] - rindler(i + 1) * weighted[(i, j)]);
    (alpha, beta)
}

/// Dirac `A` at finite `h` for `κ = -n_max..=n_max` (bag condition, `s = 0`).
pub fn fermion_overlap(geom: &CavityGeometry, n_max: usize, panels: usize) -> DMatrix<C64> {
    let rule = CompositeRule::unit_interval(panels);
    let (a, delta, l) = (geom.inner_wall(), geom.delta, geom.log_length());
    let dim = 2 * n_max + 1;
    let nodes = rule.len();
    let mut accel = DMatrix::<C64>::zeros(dim, nodes);
    let mut inertial = DMatrix::<C64>::zeros(dim, nodes);
    for (i, (&s, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let x = a + delta * s;
        let log = (x / a).ln();
        let dx = w * delta;
        for k in 0..dim {
            let kappa = k as f64 - n_max as f64 + 0.5;
            let big = kappa * PI / l;
            let small = kappa * PI / delta;
            accel[(k, i)] = C64::from_polar(dx / x.abs().sqrt(), big * log);
            inertial[(k, i)] = C64::from_polar(1.0, small * (x - a));
        }
    }
    // A_mn = ∫ ψ_n† ψ̃_m dx; both spinor components contribute
    let upper = &accel * inertial.adjoint();
    let lower = accel.conjugate() * inertial.transpose();
    (upper + lower) * C64::from(1.0 / (4.0 * delta * l.abs()).sqrt())
}

/// Result of a finite-`h` overlap evaluation with its quadrature check.
#[derive(Clone, Debug)]
pub struct OverlapResult {
    pub numeric: NumericBogoliubov,
    pub panels: usize,
    /// Largest entry change between the last two panel counts.
    pub quadrature_delta: f64,
}

/// Finite-`h` coefficients, refining the quadrature until converged.
pub fn overlap_bogoliubov(
    geom: &CavityGeometry,
    species: crate::bogoliubov::Species,
    n_max: usize,
) -> Result<OverlapResult> {
    use crate::bogoliubov::Species;
    if geom.h.abs() > 0.2 {
        return Err(Error::PerturbativeRange(geom.h));
    }
    let eval = |panels: usize| -> NumericBogoliubov {
        match species {
            Species::Boson => {
                let (al, be) = boson_overlap(geom, n_max, panels);
                NumericBogoliubov::Boson { alpha: al.map(C64::from), beta: be.map(C64::from) }
            }
            Species::Fermion => NumericBogoliubov::Fermion { n_max, a: fermion_overlap(geom, n_max, panels) },
        }
    };
    let diff = |x: &NumericBogoliubov, y: &NumericBogoliubov| match (x, y) {
        (NumericBogoliubov::Boson { alpha: a1, beta: b1 }, NumericBogoliubov::Boson { alpha: a2, beta: b2 }) => {
            max_diff(a1, a2).max(max_diff(b1, b2))
        }
        (NumericBogoliubov::Fermion { a: a1, .. }, NumericBogoliubov::Fermion { a: a2, .. }) => max_diff(a1, a2),
        _ => unreachable!(),
    };
    let mut panels = default_panels(n_max);
    let mut prev = eval(panels);
    for _ in 0..4 {
        let next = eval(2 * panels);
        let delta = diff(&prev, &next);
        panels *= 2;
        if delta < QUADRATURE_TOL {
            return Ok(OverlapResult { numeric: next, panels, quadrature_delta: delta });
        }
        prev = next;
    }
    Err(Error::Quadrature { delta: f64::NAN, panels })
}

type J = Jet<3>;

/// `g = h / (1 - h/2) = δ/a` as a jet in `h`.
fn g_jet() -> J {
    Jet([0.0, 1.0, 0.5])
}

/// Per-node jets shared by both species: `F(s) = ln(1+sg)/ln(1+g)` and
/// `1/lnc(g)` where `lnc(z) = ln(1+z)/z`.
fn log_coordinate(s: f64) -> (J, J) {
    let g = g_jet();
    let inv_lnc = g.log1p_over().recip();
    let f = (g.scale(s).log1p_over() * inv_lnc).scale(s);
    (f, inv_lnc)
}

fn assemble_orders(parts: [DMatrix<f64>; 3]) -> SeriesMatrix {
    let [c0, c1, c2] = parts.map(|m| m.map(C64::from));
    SeriesMatrix::from_orders(c0, c1, c2)
}

/// Scalar `(α, β)` Maclaurin coefficients on modes `1..=n_max`.
///
/// With `s = (x-a)/δ`, `F` as above and `q = 1/(lnc(g)(1+sg))`:
/// `α_mn = (mn)^{-1/2} ∫₀¹ sin(mπF) sin(nπs) (n + m q) ds` and the same
/// with `n - m q` for `β_mn`.
pub fn boson_series(n_max: usize, panels: usize) -> (SeriesMatrix, SeriesMatrix) {
    let rule = CompositeRule::unit_interval(panels);
    let nodes = rule.len();
    let g = g_jet();
    let mut p = [(); 3].map(|_| DMatrix::<f64>::zeros(n_max, nodes));
    let mut q = [(); 3].map(|_| DMatrix::<f64>::zeros(n_max, nodes));
    let mut inertial = DMatrix::<f64>::zeros(nodes, n_max);
    for (i, (&s, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let (f, inv_lnc) = log_coordinate(s);
        let weight = inv_lnc * (J::constant(1.0) + g.scale(s)).recip();
        for m in 1..=n_max {
            let mf = m as f64;
            let prof = (f * (mf * PI)).sin().scale(w / mf.sqrt());
            let qprof = (prof * weight).scale(mf);
            for k in 0..3 {
                p[k][(m - 1, i)] = prof.coeff(k);
                q[k][(m - 1, i)] = qprof.coeff(k);
            }
            inertial[(i, m - 1)] = (mf * PI * s).sin() / mf.sqrt();
        }
    }
    let mut alpha = [(); 3].map(|_| DMatrix::<f64>::zeros(n_max, n_max));
    let mut beta = alpha.clone();
    for k in 0..3 {
        let mut pn = &p[k] * &inertial;
        for j in 0..n_max {
            pn.column_mut(j).scale_mut((j + 1) as f64);
        }
        let qn = &q[k] * &inertial;
        alpha[k] = &pn + &qn;
        beta[k] = &pn - &qn;
    }
    (assemble_orders(alpha), assemble_orders(beta))
}

/// Dirac `A` Maclaurin coefficients on `κ = -n_max..=n_max`:
/// `A_mn = lnc(g)^{-1/2} ∫₀¹ (1+sg)^{-1/2} cos((m+½)πF - (n+½)πs) ds`.
pub fn fermion_series(n_max: usize, panels: usize) -> SeriesMatrix {
    let rule = CompositeRule::unit_interval(panels);
    let nodes = rule.len();
    let dim = 2 * n_max + 1;
    let g = g_jet();
    let mut c = [(); 3].map(|_| DMatrix::<f64>::zeros(dim, nodes));
    let mut sn = [(); 3].map(|_| DMatrix::<f64>::zeros(dim, nodes));
    let mut cos_in = DMatrix::<f64>::zeros(nodes, dim);
    let mut sin_in = DMatrix::<f64>::zeros(nodes, dim);
    let mut prefactor = J::constant(1.0);
    for (i, (&s, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let (f, inv_lnc) = log_coordinate(s);
        prefactor = inv_lnc.powf(0.5);
        let density = (J::constant(1.0) + g.scale(s)).powf(-0.5).scale(w);
        for k in 0..dim {
            let kf = k as f64 - n_max as f64 + 0.5;
            let phase = f * (kf * PI);
            let (cj, sj) = (phase.cos() * density, phase.sin() * density);
            for o in 0..3 {
                c[o][(k, i)] = cj.coeff(o);
                sn[o][(k, i)] = sj.coeff(o);
            }
            let (si, ci) = (kf * PI * s).sin_cos();
            cos_in[(i, k)] = ci;
            sin_in[(i, k)] = si;
        }
    }
    let raw: [DMatrix<f64>; 3] = std::array::from_fn(|o| &c[o] * &cos_in + &sn[o] * &sin_in);
    let orders: [DMatrix<f64>; 3] = std::array::from_fn(|o| {
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..=o {
            acc += &raw[o - j] * prefactor.coeff(j);
        }
        acc
    });
    assemble_orders(orders)
}

/// Coefficient series with panel doubling until all orders settle.
pub fn converged_series(
    species: crate::bogoliubov::Species,
    n_max: usize,
) -> Result<(Vec<SeriesMatrix>, usize, f64)> {
    use crate::bogoliubov::Species;
    let eval = |panels: usize| -> Vec<SeriesMatrix> {
        match species {
            Species::Boson => {
                let (a, b) = boson_series(n_max, panels);
                vec![a, b]
            }
            Species::Fermion => vec![fermion_series(n_max, panels)],
        }
    };
    let diff = |x: &[SeriesMatrix], y: &[SeriesMatrix]| {
        x.iter()
            .zip(y)
            .flat_map(|(a, b)| (0..3).map(move |k| max_diff(a.order(k), b.order(k))))
            .fold(0.0, f64::max)
    };
    let mut panels = default_panels(n_max);
    let mut prev = eval(panels);
    let mut delta = f64::NAN;
    for _ in 0..4 {
        let next = eval(2 * panels);
        delta = diff(&prev, &next);
        panels *= 2;
        if delta < QUADRATURE_TOL {
            return Ok((next, panels, delta));
        }
        prev = next;
    }
    Err(Error::Quadrature { delta, panels })
}
