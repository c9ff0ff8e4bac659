//! The in-vacuum as a squeezed out-vacuum: `|0⟩ = N e^W |0̃⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bogoliubov::{BosonBogoliubov, FermionBogoliubov};
use crate::error::{Error, Result};
use crate::series::{H2Series, SeriesMatrix};

/// `V = -β* α⁻¹` and `N = 1 - ¼ Σ|V⁽¹⁾_pq|²`.
#[derive(Clone, Debug)]
pub struct BosonVacuumData {
    pub v: SeriesMatrix,
    pub norm: H2Series,
    /// `max |V_pq - V_qp|` over all orders.
    pub asymmetry: f64,
}

impl BosonVacuumData {
    /// `V_{pq}` for mode labels `p, q ≥ 1`.
    pub fn v_at(&self, p: usize, q: usize) -> H2Series {
        self.v.get(p - 1, q - 1)
    }

    pub fn n_max(&self) -> usize {
        self.v.nrows()
    }
}

pub fn boson_vacuum_data(b: &BosonBogoliubov) -> Result<BosonVacuumData> {
    let inv = b.alpha().try_inverse().ok_or(Error::Singular)?;
    let v = b.beta().conj().mul(&inv).scale(C64::new(-1.0, 0.0));
    let asymmetry = v.sub(&v.transpose()).max_abs().into_iter().fold(0.0, f64::max);
    let s: f64 = v.order(1).iter().map(|z| z.norm_sqr()).sum();
    Ok(BosonVacuumData { v, norm: H2Series::real(1.0, 0.0, -0.25 * s), asymmetry })
}

/// `𝒱_pq` over particle modes `p ≥ 0` (rows) and antiparticle modes
/// `q < 0` (columns), with `M = 1 - ½ Σ|𝒱⁽¹⁾_pq|²`.
#[derive(Clone, Debug)]
pub struct FermionVacuumData {
    pub n_max: usize,
    /// `(n_max + 1) × n_max`; row `p` is `κ = p`, column `j` is `κ = j - n_max`.
    pub v: SeriesMatrix,
    pub norm: H2Series,
    /// Disagreement between the `b`- and `c`-annihilation routes on the
    /// interior window, per order.
    pub consistency: [f64; 3],
}

impl FermionVacuumData {
    /// `𝒱_{pq}` by mode label (`p ≥ 0 > q`).
    pub fn v_at(&self, p: i64, q: i64) -> H2Series {
        assert!(p >= 0 && q < 0, "𝒱 couples a particle mode to an antiparticle mode");
        self.v.get(p as usize, (q + self.n_max as i64) as usize)
    }
}

/// Annihilation conditions beyond this on the interior window are reported
/// as inconsistent. Truncation alone leaves differences of order `1e-5` at
/// `n_max = 10` and below `1e-6` at `n_max = 40`; a convention error shows
/// up at order one.
pub const VACUUM_CONSISTENCY_TOL: f64 = 1e-3;

/// Requiring `b_n |0⟩ = 0` for every particle mode gives
/// `𝒱ᵀ = -A₋₊ A₊₊⁻¹`; requiring `c_n |0⟩ = 0` independently gives
/// `𝒱 = A*₊₋ (A*₋₋)⁻¹`. The first is returned; their difference on the
/// interior window is the consistency diagnostic.
pub fn fermion_vacuum_data(f: &FermionBogoliubov) -> Result<FermionVacuumData> {
    let n = f.n_max();
    let a = f.a();
    let plus = n..2 * n + 1;
    let minus = 0..n;
    let app = a.submatrix(plus.clone(), plus.clone());
    let amp = a.submatrix(minus.clone(), plus.clone());
    let apm = a.submatrix(plus.clone(), minus.clone());
    let amm = a.submatrix(minus.clone(), minus.clone());
    let from_b = amp
        .mul(&app.try_inverse().ok_or(Error::Singular)?)
        .scale(C64::new(-1.0, 0.0))
        .transpose();
    let from_c = apm.conj().mul(&amm.conj().try_inverse().ok_or(Error::Singular)?);

    let half = n / 2;
    let diff = from_b.sub(&from_c);
    let mut consistency = [0.0; 3];
    for (k, c) in consistency.iter_mut().enumerate() {
        let d: &DMatrix<C64> = diff.order(k);
        for p in 0..=half {
            for q in n - half..n {
                *c = f64::max(*c, d[(p, q)].norm());
            }
        }
    }
    if consistency.iter().any(|&c| c > VACUUM_CONSISTENCY_TOL) {
        return Err(Error::InconsistentVacuum(consistency.iter().copied().fold(0.0, f64::max)));
    }
    let s: f64 = from_b.order(1).iter().map(|z| z.norm_sqr()).sum();
    Ok(FermionVacuumData { n_max: n, v: from_b, norm: H2Series::real(1.0, 0.0, -0.5 * s), consistency })
}
