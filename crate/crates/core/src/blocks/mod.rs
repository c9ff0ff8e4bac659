//! Concrete transformations for the cavity's trajectory segments.
//!
//! The junction between an inertial and a uniformly accelerated segment
//! ("building block") is computed once per species and truncation; free
//! evolution in either frame is a diagonal phase; a travel scenario is the
//! ordered product of these.

mod cache;
mod geometry;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use cache::{read_block, write_block, BlockCache, CACHE_DIR_ENV};
pub use geometry::CavityGeometry;

use crate::bogoliubov::{Bogoliubov, BosonBogoliubov, FermionBogoliubov, Species};
use crate::error::{Error, Result};
use crate::oracles::overlap::converged_series;
use crate::series::SeriesMatrix;

/// Field content and boundary data of the cavity modes.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub species: Species,
    /// Fermionic boundary parameter; only the bag condition `s = 0` is
    /// supported.
    pub s: f64,
}

impl ModeSpec {
    pub fn boson() -> Self {
        Self { species: Species::Boson, s: 0.0 }
    }

    pub fn fermion() -> Self {
        Self { species: Species::Fermion, s: 0.0 }
    }

    pub fn new(species: Species, s: f64) -> Result<Self> {
        if species == Species::Fermion && s != 0.0 {
            return Err(Error::BoundaryParameter(s));
        }
        Ok(Self { species, s })
    }

    /// Inertial frequency in units of `1/δ`: `nπ` or `(κ+½)π`.
    pub fn inertial_frequency(&self, label: i64) -> f64 {
        PI * self.winding(label)
    }

    /// Number of `2π` windings per unit `u`: `n` or `κ + ½`.
    pub fn winding(&self, label: i64) -> f64 {
        match self.species {
            Species::Boson => label as f64,
            Species::Fermion => label as f64 + 0.5,
        }
    }

    pub fn labels(&self, n_max: usize) -> Vec<i64> {
        let n = n_max as i64;
        match self.species {
            Species::Boson => (1..=n).collect(),
            Species::Fermion => (-n..=n).collect(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Segment {
    /// Free inertial evolution for `θ = πτ/δ`.
    Inertial { theta: f64 },
    /// Uniform acceleration with centre acceleration `sign·h/δ` for the
    /// dimensionless duration `u`.
    Accelerated { u: f64, sign: i8 },
}

impl Segment {
    pub fn accel(u: f64) -> Self {
        Segment::Accelerated { u, sign: 1 }
    }

    pub fn decel(u: f64) -> Self {
        Segment::Accelerated { u, sign: -1 }
    }

    fn validate(&self) -> Result<()> {
        let d = match *self {
            Segment::Inertial { theta } => theta,
            Segment::Accelerated { u, sign } => {
                if sign != 1 && sign != -1 {
                    return Err(Error::Config(format!("acceleration sign must be ±1, got {sign}")));
                }
                u
            }
        };
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::Config(format!("segment duration must be finite and ≥ 0, got {d}")));
        }
        Ok(())
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Segment::Inertial { theta } => write!(f, "inertial:{theta}"),
            Segment::Accelerated { u, sign: 1 } => write!(f, "accel:{u}"),
            Segment::Accelerated { u, .. } => write!(f, "decel:{u}"),
        }
    }
}

/// Parses `accel:0.25`, `decel:0.5` or `inertial:1.3`.
impl FromStr for Segment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("segment '{s}' must look like kind:duration")))?;
        let d: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad duration in segment '{s}'")))?;
        let seg = match kind.trim() {
            "accel" => Segment::accel(d),
            "decel" => Segment::decel(d),
            "inertial" => Segment::Inertial { theta: d },
            other => return Err(Error::Config(format!("unknown segment kind '{other}'"))),
        };
        seg.validate()?;
        Ok(seg)
    }
}

/// A cavity trajectory: inertial in- and out-regions with the listed
/// segments in between, the whole list repeated `repetitions` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravelScenario {
    pub geometry: CavityGeometry,
    pub segments: Vec<Segment>,
    pub repetitions: usize,
}

impl TravelScenario {
    pub fn new(geometry: CavityGeometry, segments: Vec<Segment>, repetitions: usize) -> Result<Self> {
        if repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        for s in &segments {
            s.validate()?;
        }
        Ok(Self { geometry, segments, repetitions })
    }

    /// One accelerated segment of duration `u` between inertial regions.
    pub fn single_segment(geometry: CavityGeometry, u: f64) -> Result<Self> {
        Self::new(geometry, vec![Segment::accel(u)], 1)
    }
}

/// Inertial → uniformly accelerated junction for the massless scalar.
///
/// The cavity length drops out of the coefficients, so only `n_max`
/// matters; `geom` is validated for the record.
pub fn boson_building_block(geom: &CavityGeometry, n_max: usize) -> Result<BosonBogoliubov> {
    let _ = geom;
    let (mut mats, _, _) = converged_series(Species::Boson, n_max)?;
    let mut beta = mats.pop().unwrap();
    let mut alpha = mats.pop().unwrap();
    snap_order_zero(&mut alpha, true)?;
    snap_order_zero(&mut beta, false)?;
    BosonBogoliubov::new(alpha, beta)
}

/// Inertial → uniformly accelerated junction for the massless Dirac field
/// with bag boundary conditions.
pub fn fermion_building_block(geom: &CavityGeometry, n_max: usize, s: f64) -> Result<FermionBogoliubov> {
    let _ = geom;
    if s != 0.0 {
        return Err(Error::BoundaryParameter(s));
    }
    let (mut mats, _, _) = converged_series(Species::Fermion, n_max)?;
    let mut a = mats.pop().unwrap();
    snap_order_zero(&mut a, true)?;
    FermionBogoliubov::new(n_max, a)
}

/// Order `h⁰` of a junction is the identity (or zero) analytically; the
/// quadrature leaves round-off there, which would otherwise leak into the
/// leading support of the states.
fn snap_order_zero(m: &mut SeriesMatrix, identity: bool) -> Result<()> {
    let n = m.nrows();
    let exact = if identity { DMatrix::identity(n, n) } else { DMatrix::zeros(n, n) };
    let dev = (m.order(0) - &exact).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > SNAP_TOL {
        return Err(Error::Quadrature { delta: dev, panels: 0 });
    }
    *m.order_mut(0) = exact;
    Ok(())
}

const SNAP_TOL: f64 = 1e-10;

/// The junction for either species.
pub fn building_block(spec: &ModeSpec, geom: &CavityGeometry, n_max: usize) -> Result<Bogoliubov> {
    Ok(match spec.species {
        Species::Boson => Bogoliubov::Boson(boson_building_block(geom, n_max)?),
        Species::Fermion => Bogoliubov::Fermion(fermion_building_block(geom, n_max, spec.s)?),
    })
}

/// Free evolution: mode `n` picks up `exp(-2πi n u)` in the accelerated
/// frame or `exp(-i n θ)` inertially (`n → κ + ½` for fermions).
pub fn phase_segment(spec: &ModeSpec, segment: &Segment, n_max: usize) -> Result<Bogoliubov> {
    segment.validate()?;
    let phase = |label: i64| -> C64 {
        let w = spec.winding(label);
        let angle = match *segment {
            Segment::Accelerated { u, .. } => 2.0 * PI * w * u,
            Segment::Inertial { theta } => w * theta,
        };
        C64::from_polar(1.0, -angle)
    };
    let phases: Vec<C64> = spec.labels(n_max).into_iter().map(phase).collect();
    Ok(match spec.species {
        Species::Boson => Bogoliubov::Boson(BosonBogoliubov::diagonal(&phases)),
        Species::Fermion => Bogoliubov::Fermion(FermionBogoliubov::diagonal(n_max, &phases)),
    })
}

/// Folds a scenario into its in → out transformation.
///
/// Each accelerated segment contributes `J⁻¹ · P(u) · J`, with `J` the
/// junction (mirrored for deceleration); inertial segments contribute their
/// phase directly.
pub fn assemble(spec: &ModeSpec, scenario: &TravelScenario, n_max: usize, cache: &BlockCache) -> Result<Bogoliubov> {
    let mut total = Bogoliubov::identity(spec.species, n_max);
    if scenario.segments.is_empty() {
        return Ok(total);
    }
    let mut step = Bogoliubov::identity(spec.species, n_max);
    for seg in &scenario.segments {
        let phase = phase_segment(spec, seg, n_max)?;
        let piece = match *seg {
            Segment::Inertial { .. } => phase,
            Segment::Accelerated { sign, .. } => {
                let block = cache.get(spec, &scenario.geometry, n_max)?;
                let junction = if sign < 0 { block.reflect() } else { (*block).clone() };
                junction.invert().compose(&phase.compose(&junction)?)?
            }
        };
        step = piece.compose(&step)?;
    }
    for _ in 0..scenario.repetitions {
        total = step.compose(&total)?;
    }
    Ok(total)
}
