//! Sweep configuration, the figure presets, convergence gating and
//! tabular output.
//!
//! A config is flat `key = value` text. Global keys come first; each
//! `[curve]` section then describes one curve:
//!
//! ```text
//! preset = fig1a          # optional: start from a shipped preset
//! scenario = accel:u      # segments; the duration `u` is the swept value
//! repetitions = 1
//! u_start = 0
//! u_stop = 1
//! steps = 101
//! h = 0.01
//! n_max = 40
//! format = csv            # csv | json
//! out = curves.csv
//!
//! [curve]
//! species = boson         # boson | fermion
//! state = vacuum          # vacuum | one_particle:k | pair:k:k'
//! modes = 1, 4
//! power = 1               # the reported value is 𝒩/h^power
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blocks::{assemble, BlockCache, CavityGeometry, ModeSpec, Segment, TravelScenario};
use crate::bogoliubov::{Bogoliubov, Species};
use crate::error::{Error, Result};
use crate::negativity::{
    leading_order, negativity_numeric, partial_transpose, Factor, LeadingTerm, LADDER_STARTS, NEGATIVE_REL,
    SLOPE_TOL,
};
use crate::states::{build_state, reduce_to_pair, FermionOrdering, InState, Pruning};

pub const DEFAULT_N_MAX: usize = 40;
pub const DEFAULT_STEPS: usize = 101;
pub const DEFAULT_H: f64 = 0.01;
/// Relative change under `n_max → 2·n_max` above which a curve is flagged.
pub const CONVERGENCE_GATE: f64 = 1e-4;
/// Normalized values below this are treated as zero by the gate.
pub const CONVERGENCE_FLOOR: f64 = 1e-10;
/// Grid points (as fractions of the grid) spot-checked by the gate.
pub const SPOT_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

const FIG1A: &str = include_str!("../presets/fig1a.conf");
const FIG1B: &str = include_str!("../presets/fig1b.conf");

/// Text of a shipped preset.
pub fn preset(name: &str) -> Result<&'static str> {
    match name {
        "fig1a" => Ok(FIG1A),
        "fig1b" => Ok(FIG1B),
        other => Err(Error::Config(format!("unknown preset '{other}' (fig1a | fig1b)"))),
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (csv | json)"))),
        }
    }
}

/// Duration of a templated segment: fixed, or the swept `u`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duration {
    Swept,
    Fixed(f64),
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentTemplate {
    pub kind: SegmentKind,
    pub duration: Duration,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Accel,
    Decel,
    Inertial,
}

impl SegmentTemplate {
    fn instantiate(&self, u: f64) -> Segment {
        let d = match self.duration {
            Duration::Swept => u,
            Duration::Fixed(d) => d,
        };
        match self.kind {
            SegmentKind::Accel => Segment::accel(d),
            SegmentKind::Decel => Segment::decel(d),
            SegmentKind::Inertial => Segment::Inertial { theta: d },
        }
    }
}

impl fmt::Display for SegmentTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SegmentKind::Accel => "accel",
            SegmentKind::Decel => "decel",
            SegmentKind::Inertial => "inertial",
        };
        match self.duration {
            Duration::Swept => write!(f, "{kind}:u"),
            Duration::Fixed(d) => write!(f, "{kind}:{d}"),
        }
    }
}

/// Parses a comma-separated list like `accel:u, inertial:0.5, decel:u`.
pub fn parse_scenario(text: &str) -> Result<Vec<SegmentTemplate>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (kind, value) = item
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("segment '{item}' must look like kind:duration")))?;
        let kind = match kind.trim() {
            "accel" => SegmentKind::Accel,
            "decel" => SegmentKind::Decel,
            "inertial" => SegmentKind::Inertial,
            other => return Err(Error::Config(format!("unknown segment kind '{other}'"))),
        };
        let duration = match value.trim() {
            "u" => Duration::Swept,
            v => {
                // validates sign and finiteness
                let seg: Segment = format!("accel:{v}").parse()?;
                match seg {
                    Segment::Accelerated { u, .. } => Duration::Fixed(u),
                    Segment::Inertial { .. } => unreachable!(),
                }
            }
        };
        out.push(SegmentTemplate { kind, duration });
    }
    if out.is_empty() {
        return Err(Error::Config("scenario has no segments".into()));
    }
    Ok(out)
}

/// One curve of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub species: Species,
    pub state: InState,
    pub modes: (i64, i64),
    /// Normalization power of the reported negativity.
    pub power: u32,
}

impl CurveSpec {
    /// Cross-checks species, state and observed modes. Returns a warning for
    /// combinations that are valid but trivially unentangled.
    pub fn validate(&self, n_max: usize) -> Result<Option<String>> {
        self.state.validate(self.species)?;
        let (a, b) = self.modes;
        let bad = |m: String| Err(Error::Config(m));
        if a == b {
            return bad(format!("observed modes must differ, got ({a}, {b})"));
        }
        let n = n_max as i64;
        for m in [a, b].into_iter().chain(self.state.modes()) {
            let ok = match self.species {
                Species::Boson => (1..=n).contains(&m),
                Species::Fermion => (-n..=n).contains(&m),
            };
            if !ok {
                return bad(format!("mode {m} is outside the {} window for n_max = {n_max}", self.species.name()));
            }
        }
        if !(1..=2).contains(&self.power) {
            return bad(format!("power must be 1 or 2, got {}", self.power));
        }
        if let (Species::Fermion, InState::OneParticle(k)) = (self.species, &self.state) {
            if (a == *k && b < 0) || (b == *k && a < 0) {
                return Ok(Some(format!(
                    "curve {self}: pairs with the occupied mode {k} are Pauli blocked; the negativity will vanish"
                )));
            }
        }
        Ok(None)
    }

    fn spec(&self) -> ModeSpec {
        match self.species {
            Species::Boson => ModeSpec::boson(),
            Species::Fermion => ModeSpec::fermion(),
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({}, {})", self.species.name(), self.state, self.modes.0, self.modes.1)
    }
}

/// A validated sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub scenario: Vec<SegmentTemplate>,
    pub repetitions: usize,
    pub u_start: f64,
    pub u_stop: f64,
    pub steps: usize,
    pub h: f64,
    pub n_max: usize,
    pub curves: Vec<CurveSpec>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Non-fatal remarks collected during validation.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl Default for SweepRequest {
    fn default() -> Self {
        Self {
            scenario: vec![SegmentTemplate { kind: SegmentKind::Accel, duration: Duration::Swept }],
            repetitions: 1,
            u_start: 0.0,
            u_stop: 1.0,
            steps: DEFAULT_STEPS,
            h: DEFAULT_H,
            n_max: DEFAULT_N_MAX,
            curves: vec![],
            format: OutputFormat::Csv,
            out: None,
            warnings: vec![],
        }
    }
}

impl SweepRequest {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n).map(|i| self.u_start + (self.u_stop - self.u_start) * i as f64 / (n - 1) as f64).collect()
    }

    /// Re-runs the cross-checks, e.g. after command-line overrides.
    pub fn validate(&mut self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!("steps must be ≥ 2, got {}", self.steps)));
        }
        if !(self.u_start.is_finite() && self.u_stop.is_finite() && self.u_start >= 0.0 && self.u_stop >= self.u_start)
        {
            return Err(Error::Config(format!("need 0 ≤ u_start ≤ u_stop, got ({}, {})", self.u_start, self.u_stop)));
        }
        if !(self.h > 0.0 && self.h < 0.5) {
            return Err(Error::Config(format!("probe h must lie in (0, 0.5), got {}", self.h)));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        if self.curves.is_empty() {
            return Err(Error::Config("no [curve] sections".into()));
        }
        self.warnings.clear();
        for c in &self.curves {
            if let Some(w) = c.validate(self.n_max)? {
                self.warnings.push(w);
            }
        }
        Ok(())
    }

    /// Canonical text of the request, hashed into the output metadata.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let scenario: Vec<String> = self.scenario.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(s, "scenario = {}", scenario.join(", "));
        let _ = writeln!(s, "repetitions = {}", self.repetitions);
        let _ = writeln!(s, "u_start = {}", self.u_start);
        let _ = writeln!(s, "u_stop = {}", self.u_stop);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        for c in &self.curves {
            let _ = writeln!(s, "\n[curve]");
            let _ = writeln!(s, "species = {}", c.species.name());
            let _ = writeln!(s, "state = {}", c.state);
            let _ = writeln!(s, "modes = {}, {}", c.modes.0, c.modes.1);
            let _ = writeln!(s, "power = {}", c.power);
        }
        s
    }

    pub fn config_hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

const GLOBAL_KEYS: [&str; 10] =
    ["preset", "scenario", "repetitions", "u_start", "u_stop", "steps", "h", "n_max", "format", "out"];
const CURVE_KEYS: [&str; 4] = ["species", "state", "modes", "power"];

type Section = BTreeMap<String, (usize, String)>;

fn parse_sections(text: &str) -> Result<(Section, Vec<Section>)> {
    let mut global = Section::new();
    let mut curves: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[curve]" {
                return Err(Error::Config(format!("line {line_no}: unknown section {line}")));
            }
            curves.push(Section::new());
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line_no}: expected key = value")))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        let (section, allowed): (&mut Section, &[&str]) = match curves.last_mut() {
            Some(c) => (c, &CURVE_KEYS),
            None => (&mut global, &GLOBAL_KEYS),
        };
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("line {line_no}: unknown key '{k}'")));
        }
        if section.insert(k.clone(), (line_no, v)).is_some() {
            return Err(Error::Config(format!("line {line_no}: duplicate key '{k}'")));
        }
    }
    Ok((global, curves))
}

fn value<T: FromStr>(section: &Section, key: &str) -> Result<Option<T>> {
    section
        .get(key)
        .map(|(line, v)| v.parse().map_err(|_| Error::Config(format!("line {line}: bad value '{v}' for {key}"))))
        .transpose()
}

fn parse_curve(section: &Section) -> Result<CurveSpec> {
    let need = |k: &str| {
        section.get(k).map(|(_, v)| v.as_str()).ok_or_else(|| Error::Config(format!("[curve] is missing '{k}'")))
    };
    let species: Species = need("species")?.parse()?;
    let state: InState = need("state")?.parse()?;
    let modes: Vec<i64> = need("modes")?
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("bad mode '{}'", t.trim()))))
        .collect::<Result<_>>()?;
    let [a, b] = modes[..] else {
        return Err(Error::Config(format!("modes must name two modes, got {}", modes.len())));
    };
    let power = value(section, "power")?.unwrap_or(1);
    Ok(CurveSpec { species, state, modes: (a, b), power })
}

fn apply_globals(req: &mut SweepRequest, g: &Section) -> Result<()> {
    if let Some((_, s)) = g.get("scenario") {
        req.scenario = parse_scenario(s)?;
    }
    if let Some(v) = value(g, "repetitions")? {
        req.repetitions = v;
    }
    if let Some(v) = value(g, "u_start")? {
        req.u_start = v;
    }
    if let Some(v) = value(g, "u_stop")? {
        req.u_stop = v;
    }
    if let Some(v) = value(g, "steps")? {
        req.steps = v;
    }
    if let Some(v) = value(g, "h")? {
        req.h = v;
    }
    if let Some(v) = value(g, "n_max")? {
        req.n_max = v;
    }
    if let Some((_, v)) = g.get("format") {
        req.format = v.parse()?;
    }
    if let Some((_, v)) = g.get("out") {
        req.out = Some(PathBuf::from(v));
    }
    Ok(())
}

/// Parses and validates a config. With `preset = name` the preset is read
/// first; the remaining global keys override it, and any `[curve]`
/// sections replace its curves.
pub fn parse_config(text: &str) -> Result<SweepRequest> {
    let (global, curves) = parse_sections(text)?;
    let mut req = SweepRequest::default();
    if let Some((_, name)) = global.get("preset") {
        let (pg, pc) = parse_sections(preset(name)?)?;
        apply_globals(&mut req, &pg)?;
        req.curves = pc.iter().map(parse_curve).collect::<Result<_>>()?;
    }
    apply_globals(&mut req, &global)?;
    if !curves.is_empty() {
        req.curves = curves.iter().map(parse_curve).collect::<Result<_>>()?;
    }
    req.validate()?;
    Ok(req)
}

/// One `(u, curve)` point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub u: f64,
    /// `𝒩(h)/h^power` at the probe `h`.
    pub negativity_normalized: f64,
    pub power: u32,
    pub state: InState,
    pub species: Species,
    pub mode_a: i64,
    pub mode_b: i64,
    pub converged: bool,
    /// Index of the curve in the request.
    #[serde(default)]
    pub curve: usize,
    /// Leading order from the probe ladders, when it could be determined.
    #[serde(default)]
    pub leading: Option<LeadingTerm>,
    /// Relative change under `n_max → 2·n_max` (spot-checked rows only).
    #[serde(default)]
    pub convergence_delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub convergence_gate: f64,
    pub convergence_floor: f64,
    pub slope: f64,
    pub negative_eigenvalue_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub version: String,
    pub n_max: usize,
    pub h: f64,
    /// Starting probes of the leading-order ladders (each halves twice).
    pub h_ladders: Vec<f64>,
    pub tolerances: Tolerances,
    pub config_hash: String,
    pub curves: Vec<CurveSpec>,
    /// Seconds since the Unix epoch; only set on request, since it breaks
    /// bit-identical output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn curve(&self, index: usize) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.curve == index)
    }
}

/// The in → out transformation of the templated scenario at `u`.
pub fn transformation(
    req: &SweepRequest,
    species: Species,
    u: f64,
    n_max: usize,
    cache: &BlockCache,
) -> Result<Bogoliubov> {
    let spec = match species {
        Species::Boson => ModeSpec::boson(),
        Species::Fermion => ModeSpec::fermion(),
    };
    let geom = CavityGeometry::new(1.0, req.h)?;
    let segments = req.scenario.iter().map(|t| t.instantiate(u)).collect();
    assemble(&spec, &TravelScenario::new(geom, segments, req.repetitions)?, n_max, cache)
}

/// Negativity of one curve for a given transformation.
pub fn curve_point(b: &Bogoliubov, curve: &CurveSpec, h: f64, n_max: usize) -> Result<(f64, Option<LeadingTerm>)> {
    let state = build_state(b, &curve.state, n_max, Pruning::PairReduction)?;
    let rho = reduce_to_pair(&state, curve.modes.0, curve.modes.1, FermionOrdering::Ascending)?;
    let pt = partial_transpose(&rho, Factor::Second);
    let value = negativity_numeric(&pt, h)? / h.powi(curve.power as i32);
    let leading = match leading_order(&pt) {
        Ok(t) => Some(t),
        Err(Error::AmbiguousSlope(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((value, leading))
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < CONVERGENCE_FLOOR {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Grid indices spot-checked by the convergence gate.
pub fn spot_indices(steps: usize) -> Vec<usize> {
    let mut idx: Vec<usize> =
        SPOT_FRACTIONS.iter().map(|f| ((steps - 1) as f64 * f).round() as usize).collect();
    idx.dedup();
    idx
}

/// Evaluates every curve on the grid, gating each curve on an
/// `n_max → 2·n_max` spot check.
pub fn run_sweep(req: &SweepRequest, cache: &BlockCache) -> Result<SweepResult> {
    let grid = req.grid();
    let species: Vec<Species> = [Species::Boson, Species::Fermion]
        .into_iter()
        .filter(|s| req.curves.iter().any(|c| c.species == *s))
        .collect();
    for s in &species {
        // fill the cache before fanning out
        let spec = req.curves.iter().find(|c| c.species == *s).unwrap().spec();
        cache.get(&spec, &CavityGeometry::new(1.0, req.h)?, req.n_max)?;
    }
    let per_u: Vec<Vec<(f64, Option<LeadingTerm>)>> = grid
        .par_iter()
        .map(|&u| {
            let mut by_species = BTreeMap::new();
            for &s in &species {
                by_species.insert(s.name(), transformation(req, s, u, req.n_max, cache)?);
            }
            req.curves
                .iter()
                .map(|c| curve_point(&by_species[c.species.name()], c, req.h, req.n_max))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let spots = spot_indices(req.steps);
    let mut deltas: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &i in &spots {
        for &s in &species {
            let b = transformation(req, s, grid[i], 2 * req.n_max, cache)?;
            for (ci, c) in req.curves.iter().enumerate().filter(|(_, c)| c.species == s) {
                let (fine, _) = curve_point(&b, c, req.h, 2 * req.n_max)?;
                deltas.insert((i, ci), relative_change(per_u[i][ci].0, fine));
            }
        }
    }
    let curve_ok: Vec<bool> = (0..req.curves.len())
        .map(|ci| spots.iter().all(|&i| deltas[&(i, ci)] < CONVERGENCE_GATE))
        .collect();

    let mut rows = Vec::with_capacity(grid.len() * req.curves.len());
    let mut warnings = req.warnings.clone();
    for (i, &u) in grid.iter().enumerate() {
        for (ci, c) in req.curves.iter().enumerate() {
            let (value, leading) = per_u[i][ci];
            if leading.is_none() {
                warnings.push(format!("curve {c} at u = {u}: leading order is ambiguous"));
            }
            rows.push(SweepRow {
                u,
                negativity_normalized: value,
                power: c.power,
                state: c.state.clone(),
                species: c.species,
                mode_a: c.modes.0,
                mode_b: c.modes.1,
                converged: curve_ok[ci],
                curve: ci,
                leading,
                convergence_delta: deltas.get(&(i, ci)).copied(),
            });
        }
    }
    for (ci, ok) in curve_ok.iter().enumerate() {
        if !ok {
            warnings.push(format!("curve {} failed the convergence gate", req.curves[ci]));
        }
    }
    Ok(SweepResult {
        metadata: SweepMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            n_max: req.n_max,
            h: req.h,
            h_ladders: LADDER_STARTS.to_vec(),
            tolerances: Tolerances {
                convergence_gate: CONVERGENCE_GATE,
                convergence_floor: CONVERGENCE_FLOOR,
                slope: SLOPE_TOL,
                negative_eigenvalue_rel: NEGATIVE_REL,
            },
            config_hash: req.config_hash(),
            curves: req.curves.clone(),
            timestamp: None,
        },
        rows,
        warnings,
    })
}

pub const CSV_COLUMNS: [&str; 8] =
    ["u", "negativity_normalized", "power", "state", "species", "mode_a", "mode_b", "converged"];

/// CSV with exactly [`CSV_COLUMNS`]; floats use the shortest round-trip
/// representation.
pub fn to_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.u.to_string(),
            r.negativity_normalized.to_string(),
            r.power.to_string(),
            r.state.to_string(),
            r.species.name().to_string(),
            r.mode_a.to_string(),
            r.mode_b.to_string(),
            r.converged.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads back the rows written by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    if r.headers()?.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| Error::Config(format!("bad number '{}'", field(i))))
        };
        let int = |i: usize| -> Result<i64> {
            field(i).parse().map_err(|_| Error::Config(format!("bad integer '{}'", field(i))))
        };
        rows.push(SweepRow {
            u: num(0)?,
            negativity_normalized: num(1)?,
            power: int(2)? as u32,
            state: field(3).parse()?,
            species: field(4).parse()?,
            mode_a: int(5)?,
            mode_b: int(6)?,
            converged: field(7).parse().map_err(|_| Error::Config(format!("bad flag '{}'", field(7))))?,
            curve: 0,
            leading: None,
            convergence_delta: None,
        });
    }
    Ok(rows)
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)? + "\n")
}

/// Writes the result in `format`; I/O errors are passed through.
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(result)?,
        OutputFormat::Json => to_json(result)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Largest `|𝒩(u) − 𝒩(u+1)|` (normalized) over the grid points of `req`,
/// per curve.
pub fn period_defects(req: &SweepRequest, cache: &BlockCache, grid: &[f64]) -> Result<Vec<f64>> {
    let mut worst = vec![0.0f64; req.curves.len()];
    for &u in grid {
        for (ci, c) in req.curves.iter().enumerate() {
            let b0 = transformation(req, c.species, u, req.n_max, cache)?;
            let b1 = transformation(req, c.species, u + 1.0, req.n_max, cache)?;
            let (v0, _) = curve_point(&b0, c, req.h, req.n_max)?;
            let (v1, _) = curve_point(&b1, c, req.h, req.n_max)?;
            worst[ci] = worst[ci].max((v0 - v1).abs());
        }
    }
    Ok(worst)
}

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: String, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, passed: value < tolerance }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {:.3e} (< {:.0e})", self.name, self.value, self.tolerance)
    }
}

/// Probes at which the finite-`h` junction must satisfy the identities.
pub const IDENTITY_PROBES: [f64; 4] = [0.08, 0.04, 0.02, 0.01];
pub const IDENTITY_TOL: f64 = 1e-8;
pub const PERIOD_TOL: f64 = 1e-8;
pub const PAULI_TOL: f64 = 1e-10;
/// Grid points at which the periodicity check compares `u` and `u + 1`.
pub const PERIOD_PROBES: [f64; 3] = [0.1, 0.35, 0.7];

/// The built-in invariant suite: junction identities at finite `h`,
/// periodicity and boson endpoints of the figure presets, and Pauli
/// blocking of the fermionic one-particle state.
pub fn invariant_checks(n_max: usize, h: f64, cache: &BlockCache) -> Result<Vec<CheckOutcome>> {
    use crate::oracles::overlap::overlap_bogoliubov;
    let mut out = Vec::new();
    for species in [Species::Boson, Species::Fermion] {
        for hp in IDENTITY_PROBES {
            let res = overlap_bogoliubov(&CavityGeometry::new(1.0, hp)?, species, n_max)?;
            out.push(CheckOutcome::new(
                format!("{} junction identities at h = {hp}", species.name()),
                res.numeric.max_identity_residual(),
                IDENTITY_TOL,
            ));
        }
    }
    for name in ["fig1a", "fig1b"] {
        let mut req = parse_config(preset(name)?)?;
        req.n_max = n_max;
        req.h = h;
        req.validate()?;
        let defects = period_defects(&req, cache, &PERIOD_PROBES)?;
        for (c, d) in req.curves.iter().zip(defects) {
            out.push(CheckOutcome::new(format!("{name} {c} period 1"), d, PERIOD_TOL));
        }
        for c in req.curves.iter().filter(|c| c.species == Species::Boson) {
            let mut worst: f64 = 0.0;
            for u in [0.0, 1.0] {
                let b = transformation(&req, c.species, u, n_max, cache)?;
                worst = worst.max(curve_point(&b, c, h, n_max)?.0);
            }
            out.push(CheckOutcome::new(format!("{name} {c} vanishes at u = 0, 1"), worst, PERIOD_TOL));
        }
    }
    let blocked = CurveSpec { species: Species::Fermion, state: InState::OneParticle(1), modes: (1, -1), power: 1 };
    let req = SweepRequest { curves: vec![blocked.clone()], n_max, h, ..SweepRequest::default() };
    let b = transformation(&req, Species::Fermion, 0.3, n_max, cache)?;
    let state = build_state(&b, &blocked.state, n_max, Pruning::PairReduction)?;
    let rho = reduce_to_pair(&state, 1, -1, FermionOrdering::Ascending)?;
    let pt = partial_transpose(&rho, Factor::Second);
    let worst = LADDER_STARTS
        .iter()
        .map(|&hp| negativity_numeric(&pt, hp))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(CheckOutcome::new(format!("Pauli blocking of {blocked}"), worst, PAULI_TOL));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let req = parse_config("[curve]\nspecies = boson\nstate = vacuum\nmodes = 1, 4\n").unwrap();
        assert_eq!(req.n_max, 40);
        assert_eq!(req.steps, 101);
        assert_eq!(req.h, 0.01);
        assert_eq!(req.curves[0].power, 1);
    }

    #[test]
    fn presets_enumerate_the_figure_curves() {
        let a = parse_config("preset = fig1a").unwrap();
        assert_eq!(a.curves.len(), 4);
        assert!(a.curves.iter().all(|c| c.power == 1));
        let b = parse_config("preset = fig1b\nsteps = 5").unwrap();
        assert_eq!(b.curves.len(), 3);
        assert_eq!(b.steps, 5);
        assert!(b.curves.iter().all(|c| c.power == 2));
    }

    #[test]
    fn rejections() {
        for bad in [
            "colour = red",
            "[curve]\nspecies = boson\nstate = vacuum\nmodes = 1, 4\nflavour = up",
            "[curve]\nspecies = fermion\nstate = pair:1:2\nmodes = 1, 2",
            "[curve]\nspecies = boson\nstate = vacuum\nmodes = 0, 4",
            "[curve]\nspecies = boson\nstate = vacuum\nmodes = 3, 3",
            "[curve]\nspecies = boson\nstate = pair:1:-1\nmodes = 1, 4",
            "steps = 1\n[curve]\nspecies = boson\nstate = vacuum\nmodes = 1, 4",
            "[section]",
            "h = 0.01\nh = 0.02",
        ] {
            assert!(matches!(parse_config(bad), Err(Error::Config(_)) | Err(Error::InvalidModes(_))), "{bad}");
        }
    }

    #[test]
    fn pauli_blocked_curve_is_a_warning() {
        let req = parse_config("[curve]\nspecies = fermion\nstate = one_particle:1\nmodes = 1, -2").unwrap();
        assert_eq!(req.warnings.len(), 1);
    }

    #[test]
    fn scenario_templates() {
        let t = parse_scenario("accel:u, inertial:0.5, decel:u").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[1].instantiate(0.3), Segment::Inertial { theta: 0.5 });
        assert_eq!(t[2].instantiate(0.3), Segment::decel(0.3));
        assert!(parse_scenario("accel:-1").is_err());
        assert!(parse_scenario("").is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = parse_config("preset = fig1a").unwrap();
        let b = parse_config("preset   =   fig1a   # same\n\n").unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        let c = parse_config("preset = fig1a\nh = 0.02").unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn empty_result_is_header_only() {
        let result = SweepResult {
            metadata: SweepMetadata {
                version: "0".into(),
                n_max: 1,
                h: 0.01,
                h_ladders: vec![],
                tolerances: Tolerances { convergence_gate: 0.0, convergence_floor: 0.0, slope: 0.0, negative_eigenvalue_rel: 0.0 },
                config_hash: String::new(),
                curves: vec![],
                timestamp: None,
            },
            rows: vec![],
            warnings: vec![],
        };
        assert_eq!(to_csv(&result).unwrap(), CSV_COLUMNS.join(",") + "\n");
    }
}
