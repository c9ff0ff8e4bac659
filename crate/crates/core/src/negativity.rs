//! Partial transpose, negativity and the closed-form leading eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{Bogoliubov, BosonBogoliubov, FermionBogoliubov, Species};
use crate::error::{Error, Result};
use crate::series::{H2Series, SeriesMatrix};
use crate::states::{boson_vacuum_data, fermion_vacuum_data, InState, ReducedDensityMatrix};

/// Which tensor factor the partial transpose acts on.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    First,
    #[default]
    Second,
}

/// `ρ^{T_a}` or `ρ^{T_b}` on the product basis of `rho`.
pub fn partial_transpose(rho: &ReducedDensityMatrix, on: Factor) -> SeriesMatrix {
    let d = rho.levels;
    SeriesMatrix::from_fn(rho.dim(), rho.dim(), |i, j| {
        let (na, nb, ma, mb) = (i / d, i % d, j / d, j % d);
        let (r, c) = match on {
            Factor::First => (ma * d + nb, na * d + mb),
            Factor::Second => (na * d + mb, ma * d + nb),
        };
        rho.rho.get(r, c)
    })
}

/// Hermiticity defects above this are a contract violation.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVE_REL · ‖M‖₁` count as negative.
pub const NEGATIVE_REL: f64 = 1e-12;

/// Eigenvalues of a Hermitian series matrix at `h`, ascending.
pub fn pt_eigenvalues(pt: &SeriesMatrix, h: f64) -> Result<Vec<f64>> {
    let m = pt.eval(h);
    let defect = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (&m + m.adjoint()) * C64::from(0.5);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Minus the sum of the negative eigenvalues of `pt` evaluated at `h`.
pub fn negativity_numeric(pt: &SeriesMatrix, h: f64) -> Result<f64> {
    Ok(negative_part(pt, h)?.0)
}

/// The negativity and the number of eigenvalues contributing to it.
fn negative_part(pt: &SeriesMatrix, h: f64) -> Result<(f64, usize)> {
    let threshold = -NEGATIVE_REL * one_norm(&pt.eval(h));
    let negative: Vec<f64> = pt_eigenvalues(pt, h)?.into_iter().filter(|&e| e < threshold).collect();
    Ok((negative.iter().fold(0.0, |acc, e| acc - e), negative.len()))
}

/// Default probe ladder for the leading-order fit.
pub const PROBE_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Starting probes of the successively finer ladders tried by
/// [`leading_order`].
pub const LADDER_STARTS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// The fitted slope must lie this close to an integer power.
pub const SLOPE_TOL: f64 = 0.05;
/// Negativity decaying faster than this power lies beyond the working order.
pub const ZERO_SLOPE: f64 = 2.5;
/// Relative agreement at which two ladders are taken as converged.
pub const LADDER_AGREEMENT: f64 = 1e-8;

/// Leading behaviour `𝒩 ≈ coefficient · h^power`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LeadingTerm {
    /// No negativity through order `h²`.
    Zero,
    Term { power: u32, coefficient: f64, slope: f64 },
}

impl LeadingTerm {
    pub fn power(&self) -> Option<u32> {
        match self {
            LeadingTerm::Zero => None,
            LeadingTerm::Term { power, .. } => Some(*power),
        }
    }

    pub fn coefficient(&self) -> f64 {
        match self {
            LeadingTerm::Zero => 0.0,
            LeadingTerm::Term { coefficient, .. } => *coefficient,
        }
    }
}

fn fit_slope(ladder: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = ladder.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits the log–log slope of the negativity over a ladder of probes and
/// extrapolates `𝒩/h^power` to `h → 0`.
///
/// The ladder must be geometric with ratio 2. With three probes the two
/// Richardson steps remove the `O(h)` and `O(h²)` corrections to the
/// normalized negativity. Negativity that decays faster than
/// `h^ZERO_SLOPE`, or vanishes towards the small end of the ladder, is
/// reported as [`LeadingTerm::Zero`]. A ladder across which the number of
/// negative eigenvalues changes is rejected as ambiguous.
pub fn leading_order_on(pt: &SeriesMatrix, ladder: &[f64]) -> Result<LeadingTerm> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| (w[0] / w[1] - 2.0).abs() > 1e-12) {
        return Err(Error::Config("probe ladder must halve at each step".into()));
    }
    let parts: Vec<(f64, usize)> = ladder.iter().map(|&h| negative_part(pt, h)).collect::<Result<_>>()?;
    let values: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let nonzero = values.iter().take_while(|&&v| v != 0.0).count();
    if values[nonzero..].iter().any(|&v| v != 0.0) {
        return Err(Error::AmbiguousSlope(f64::NAN));
    }
    if nonzero < values.len() {
        if nonzero < 2 || fit_slope(&ladder[..nonzero], &values[..nonzero]) > ZERO_SLOPE {
            return Ok(LeadingTerm::Zero);
        }
        return Err(Error::AmbiguousSlope(f64::NAN));
    }
    // an eigenvalue crossing the round-off threshold inside the ladder
    // makes 𝒩(h) jump, which the extrapolation cannot absorb
    if parts.iter().any(|p| p.1 != parts[0].1) {
        return Err(Error::AmbiguousSlope(f64::NAN));
    }
    let slope = fit_slope(ladder, &values);
    if slope > ZERO_SLOPE {
        return Ok(LeadingTerm::Zero);
    }
    let power = slope.round();
    if (slope - power).abs() > SLOPE_TOL || !(1.0..=2.0).contains(&power) {
        return Err(Error::AmbiguousSlope(slope));
    }
    let mut g: Vec<f64> = ladder.iter().zip(&values).map(|(h, v)| v / h.powf(power)).collect();
    // g(h) = c + d h + e h² + ...; each pass cancels the next power
    let mut factor = 2.0;
    while g.len() > 1 {
        g = g.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 2.0;
    }
    Ok(LeadingTerm::Term { power: power as u32, coefficient: g[0], slope })
}

/// Leading order from successively finer three-probe ladders.
///
/// Large `h²` corrections can keep the coarsest ladder out of the
/// asymptotic regime, while round-off limits the finest; the result is the
/// finer member of the best-agreeing pair of consecutive ladders.
pub fn leading_order(pt: &SeriesMatrix) -> Result<LeadingTerm> {
    let fits: Vec<Result<LeadingTerm>> = LADDER_STARTS
        .iter()
        .map(|&h0| leading_order_on(pt, &[h0, h0 / 2.0, h0 / 4.0]))
        .collect();
    let mismatch = |a: &LeadingTerm, b: &LeadingTerm| match (a, b) {
        (LeadingTerm::Zero, LeadingTerm::Zero) => Some(0.0),
        (LeadingTerm::Term { power: p, coefficient: x, .. }, LeadingTerm::Term { power: q, coefficient: y, .. })
            if p == q =>
        {
            Some((x - y).abs() / x.abs().max(y.abs()))
        }
        _ => None,
    };
    let mut best: Option<(f64, LeadingTerm)> = None;
    for w in fits.windows(2) {
        if let (Ok(a), Ok(b)) = (&w[0], &w[1]) {
            if let Some(d) = mismatch(a, b) {
                if d <= LADDER_AGREEMENT {
                    return Ok(*b);
                }
                if best.is_none_or(|(e, _)| d < e) {
                    best = Some((d, *b));
                }
            }
        }
    }
    if let Some((_, t)) = best {
        return Ok(t);
    }
    let mut last_err = None;
    for f in fits.into_iter().rev() {
        match f {
            Ok(t) => return Ok(t),
            Err(e) => last_err = last_err.or(Some(e)),
        }
    }
    Err(last_err.expect("at least one ladder"))
}

/// The `h`-stripped sums `½ Σ |c⁽¹⁾_{qm}|²` entering the closed forms.
#[derive(Clone, Debug)]
pub struct LeadingOrderSums {
    pub species: Species,
    /// Label of each row/column.
    pub labels: Vec<i64>,
    /// `|β⁽¹⁾_{qm}|²` (bosons) or `|A⁽¹⁾_{qm}|²` (fermions), indexed `[q, m]`.
    weights: DMatrix<f64>,
}

impl LeadingOrderSums {
    pub fn boson(b: &BosonBogoliubov) -> Self {
        Self {
            species: Species::Boson,
            labels: (1..=b.n_max() as i64).collect(),
            weights: b.beta().order(1).map(|z| z.norm_sqr()),
        }
    }

    pub fn fermion(f: &FermionBogoliubov) -> Self {
        Self { species: Species::Fermion, labels: f.labels().collect(), weights: f.a().order(1).map(|z| z.norm_sqr()) }
    }

    fn column(&self, m: i64) -> Result<usize> {
        self.labels.iter().position(|&l| l == m).ok_or(Error::ModeOutOfWindow(m))
    }

    fn sum(&self, m: i64, excluded: Option<i64>, keep: impl Fn(i64) -> bool) -> Result<f64> {
        let c = self.column(m)?;
        Ok(0.5
            * self
                .labels
                .iter()
                .enumerate()
                .filter(|(_, &q)| keep(q) && Some(q) != excluded)
                .map(|(r, _)| self.weights[(r, c)])
                .sum::<f64>())
    }

    /// `f^β_{m¬n} = ½ Σ_{q≠n} |β⁽¹⁾_{qm}|²`.
    pub fn f_beta(&self, m: i64, excluded: Option<i64>) -> Result<f64> {
        self.expect(Species::Boson)?;
        self.sum(m, excluded, |_| true)
    }

    /// `f^A_{m¬n} = ½ Σ_{q≥0, q≠n} |A⁽¹⁾_{qm}|²`.
    pub fn f_a(&self, m: i64, excluded: Option<i64>) -> Result<f64> {
        self.expect(Species::Fermion)?;
        self.sum(m, excluded, |q| q >= 0)
    }

    /// `f̄^A_{m¬n} = ½ Σ_{q<0, q≠n} |A⁽¹⁾_{qm}|²`.
    pub fn f_bar_a(&self, m: i64, excluded: Option<i64>) -> Result<f64> {
        self.expect(Species::Fermion)?;
        self.sum(m, excluded, |q| q < 0)
    }

    fn expect(&self, species: Species) -> Result<()> {
        if self.species != species {
            return Err(Error::SpeciesMismatch(species.name(), self.species.name()));
        }
        Ok(())
    }
}

/// The shape of a closed-form eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ClosedShape {
    /// `-coefficient · h^power`.
    Monomial { power: u32, coefficient: f64 },
    /// `h²(f₁ + f₂) - ((h²(f₁ - f₂))² + |c(h)|²)^{1/2}`.
    Root { f1: f64, f2: f64, coupling: H2Series },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub name: &'static str,
    pub shape: ClosedShape,
}

impl ClosedForm {
    pub fn eval(&self, h: f64) -> f64 {
        match &self.shape {
            ClosedShape::Monomial { power, coefficient } => -coefficient * h.powi(*power as i32),
            ClosedShape::Root { f1, f2, coupling } => {
                let h2 = h * h;
                h2 * (f1 + f2) - ((h2 * (f1 - f2)).powi(2) + coupling.eval(h).norm_sqr()).sqrt()
            }
        }
    }

    /// The leading negativity this eigenvalue implies, if it is negative.
    pub fn leading(&self) -> LeadingTerm {
        match &self.shape {
            ClosedShape::Monomial { power, coefficient } if *coefficient > 0.0 => {
                LeadingTerm::Term { power: *power, coefficient: *coefficient, slope: *power as f64 }
            }
            ClosedShape::Monomial { .. } => LeadingTerm::Zero,
            ClosedShape::Root { f1, f2, coupling } => {
                if coupling.c1.norm() > 0.0 {
                    LeadingTerm::Term { power: 1, coefficient: coupling.c1.norm(), slope: 1.0 }
                } else {
                    let v = ((f1 - f2).powi(2) + coupling.c2.norm_sqr()).sqrt() - f1 - f2;
                    if v > 0.0 {
                        LeadingTerm::Term { power: 2, coefficient: v, slope: 2.0 }
                    } else {
                        LeadingTerm::Zero
                    }
                }
            }
        }
    }
}

/// Coefficients below this are treated as parity-forbidden zeros.
const PARITY_TOL: f64 = 1e-10;

/// The closed-form candidates for negative partial-transpose eigenvalues
/// of `state` observed on `modes`.
///
/// Covered cases: boson vacuum (`λ₄`, `λ₆`); boson one-particle `|1_k⟩`
/// observed on `(k, k')` (`μ₃`, and `μ₈` for opposite parity); fermion
/// vacuum on `(κ ≥ 0, κ' < 0)`; fermion `|1_κ⟩` on `(κ, κ̂ ≥ 0)`; fermion
/// pair `(κ, κ')` observed on the same modes (`ν₃` variants).
pub fn closed_form_eigenvalues(b: &Bogoliubov, state: &InState, modes: (i64, i64)) -> Result<Vec<ClosedForm>> {
    let none = || Err(Error::NoClosedForm(format!("{} {state} on {modes:?}", b.species().name())));
    let (k, kp) = modes;
    match b {
        Bogoliubov::Boson(b) => {
            if k < 1 || kp < 1 || k == kp || k.max(kp) as usize > b.n_max() {
                return none();
            }
            let beta1 = |m: i64, n: i64| b.beta().order(1)[(m as usize - 1, n as usize - 1)];
            let alpha1 = |m: i64, n: i64| b.alpha().order(1)[(m as usize - 1, n as usize - 1)];
            let bsq = beta1(k, kp).norm_sqr();
            match *state {
                InState::Vacuum => {
                    let sums = LeadingOrderSums::boson(b);
                    // V is symmetric up to truncation; the state uses the symmetric part
                    let data = boson_vacuum_data(b)?;
                    let v = (data.v_at(k as usize, kp as usize) + data.v_at(kp as usize, k as usize)) * 0.5;
                    Ok(vec![
                        ClosedForm { name: "lambda4", shape: ClosedShape::Monomial { power: 2, coefficient: bsq } },
                        ClosedForm {
                            name: "lambda6",
                            shape: ClosedShape::Root {
                                f1: sums.f_beta(k, Some(kp))?,
                                f2: sums.f_beta(kp, Some(k))?,
                                coupling: H2Series::new(0.0.into(), v.c1, v.c2),
                            },
                        },
                    ])
                }
                InState::OneParticle(e) if e == k => {
                    let mu3 = 3f64.sqrt() * bsq;
                    let mut out = vec![ClosedForm { name: "mu3", shape: ClosedShape::Monomial { power: 2, coefficient: mu3 } }];
                    if (k + kp) % 2 != 0 {
                        let c = (alpha1(k, kp).norm_sqr() + 2.0 * bsq).sqrt();
                        out.push(ClosedForm { name: "mu8", shape: ClosedShape::Monomial { power: 1, coefficient: c } });
                    }
                    Ok(out)
                }
                _ => none(),
            }
        }
        Bogoliubov::Fermion(f) => {
            let n = f.n_max() as i64;
            if k == kp || k.abs() > n || kp.abs() > n {
                return none();
            }
            let sums = LeadingOrderSums::fermion(f);
            let nu3 = |f1: f64, f2: f64, coupling: H2Series| {
                Ok(vec![ClosedForm { name: "nu3", shape: ClosedShape::Root { f1, f2, coupling } }])
            };
            let data = fermion_vacuum_data(f)?;
            match *state {
                InState::Vacuum if k >= 0 && kp < 0 => {
                    nu3(sums.f_bar_a(k, Some(kp))?, sums.f_a(kp, Some(k))?, data.v_at(k, kp))
                }
                InState::OneParticle(e) if e == k && kp >= 0 => {
                    // amplitude of |1̃_κ̂⟩: A*_κ̂κ - Σ_{q<0} A*_qκ 𝒱_κ̂q
                    let shift: H2Series = (-n..0).map(|q| f.a_at(q, k).conj() * data.v_at(kp, q)).sum();
                    let amp = f.a_at(kp, k).conj() - shift;
                    nu3(sums.f_a(k, Some(kp))?, sums.f_bar_a(kp, None)?, H2Series::new(0.0.into(), amp.c1, amp.c2))
                }
                InState::Pair(e, ep) if (e, ep) == (k, kp) => {
                    nu3(sums.f_a(k, None)?, sums.f_bar_a(kp, None)?, data.v_at(k, kp))
                }
                _ => none(),
            }
        }
    }
    .map(|forms: Vec<ClosedForm>| {
        forms
            .into_iter()
            .map(|mut c| {
                if let ClosedShape::Monomial { coefficient, .. } = &mut c.shape {
                    if *coefficient < PARITY_TOL {
                        *coefficient = 0.0;
                    }
                }
                c
            })
            .collect()
    })
}

/// Everything computed for one reduced density matrix.
#[derive(Clone, Debug, Serialize)]
pub struct NegativityReport {
    pub species: Species,
    pub state: InState,
    pub modes: (i64, i64),
    /// The `h` at which the eigenvalues and negativity were evaluated.
    pub h: f64,
    pub pt_eigenvalues: Vec<f64>,
    pub negativity: f64,
    pub leading: LeadingTerm,
    /// Closed-form eigenvalues evaluated at `h`, where covered.
    pub closed_forms: Vec<(String, f64)>,
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
}

/// Partial transpose, spectrum, negativity and leading order of `rho`.
pub fn analyze(rho: &ReducedDensityMatrix, state: &InState, b: Option<&Bogoliubov>, h: f64) -> Result<NegativityReport> {
    let pt = partial_transpose(rho, Factor::Second);
    let trace = rho.trace() - H2Series::ONE;
    let closed_forms = match b.map(|b| closed_form_eigenvalues(b, state, rho.modes)) {
        Some(Ok(forms)) => forms.iter().map(|c| (c.name.to_string(), c.eval(h))).collect(),
        Some(Err(Error::NoClosedForm(_))) | None => vec![],
        Some(Err(e)) => return Err(e),
    };
    Ok(NegativityReport {
        species: rho.species,
        state: state.clone(),
        modes: rho.modes,
        h,
        pt_eigenvalues: pt_eigenvalues(&pt, h)?,
        negativity: negativity_numeric(&pt, h)?,
        leading: leading_order(&pt)?,
        closed_forms,
        trace_defect: trace.max_abs(),
        hermiticity_defect: rho.hermiticity_defect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{reduce_to_pair, FermionOrdering, StateExpansion};

    fn bell_like(eps: f64) -> ReducedDensityMatrix {
        let mut s = StateExpansion::empty(Species::Boson, vec![1, 2]);
        s.add(vec![0, 0], H2Series::ONE);
        s.add(vec![1, 1], H2Series::real(0.0, eps, 0.0));
        reduce_to_pair(&s, 1, 2, FermionOrdering::Ascending).unwrap()
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let rho = bell_like(0.3);
        for on in [Factor::First, Factor::Second] {
            let pt = partial_transpose(&rho, on);
            let back = partial_transpose(&ReducedDensityMatrix { rho: pt, ..rho.clone() }, on);
            assert_eq!(back, rho.rho);
        }
    }

    #[test]
    fn product_state_has_no_negativity() {
        let mut s = StateExpansion::empty(Species::Boson, vec![1, 2]);
        s.add(vec![1, 0], H2Series::ONE);
        let rho = reduce_to_pair(&s, 1, 2, FermionOrdering::Ascending).unwrap();
        assert_eq!(negativity_numeric(&partial_transpose(&rho, Factor::Second), 0.01).unwrap(), 0.0);
        assert_eq!(leading_order(&partial_transpose(&rho, Factor::Second)).unwrap(), LeadingTerm::Zero);
    }

    #[test]
    fn linear_coherence_gives_a_linear_leading_term() {
        // |0,0⟩ + ε h |1,1⟩: 𝒩 = ε h / (1 + ε² h²)
        let pt = partial_transpose(&bell_like(0.3), Factor::Second);
        let h = 0.01;
        assert!((negativity_numeric(&pt, h).unwrap() - 0.3 * h).abs() < 1e-15);
        match leading_order(&pt).unwrap() {
            LeadingTerm::Term { power, coefficient, .. } => {
                assert_eq!(power, 1);
                assert!((coefficient - 0.3).abs() < 1e-12);
            }
            LeadingTerm::Zero => panic!("expected a term"),
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = SeriesMatrix::identity(2);
        m.set(0, 1, H2Series::real(0.1, 0.0, 0.0));
        assert!(matches!(pt_eigenvalues(&m, 0.01), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn root_shape_matches_its_formula() {
        let c = ClosedForm {
            name: "t",
            shape: ClosedShape::Root { f1: 0.2, f2: 0.1, coupling: H2Series::real(0.0, 0.0, 0.5) },
        };
        let h: f64 = 0.01;
        let expect = h * h * (0.3 - (0.01f64 + 0.25).sqrt());
        assert!((c.eval(h) - expect).abs() < 1e-18);
        assert_eq!(c.leading().power(), Some(2));
    }
}
