//! `cavity-ent`: sweeps, invariant checks and coefficient-cache upkeep.
//!
//! Exit codes: 0 success, 2 config error, 3 convergence gate failure,
//! 4 internal invariant violation, 1 anything else (I/O).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use cavity_ent::blocks::{BlockCache, CavityGeometry, ModeSpec};
use cavity_ent::scenarios::{self, OutputFormat};
use cavity_ent::{Error, Species};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cavity-ent", version, about = "Mode entanglement generated by a nonuniformly moving cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Mode truncation.
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    /// Probe value of h.
    #[arg(long)]
    h: Option<f64>,
    /// Number of u grid points.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum SpeciesArg {
    Boson,
    Fermion,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a sweep from a config file or a preset name (fig1a, fig1b).
    Sweep {
        config: String,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        overrides: Overrides,
        /// Record the wall-clock time in JSON metadata (breaks bit-identical output).
        #[arg(long)]
        timestamp: bool,
    },
    /// Runs the built-in invariant suite.
    Check {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Regenerates or validates the on-disk coefficient cache.
    Oracle {
        /// Cache directory; defaults to $CAVITY_ENT_CACHE_DIR.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        species: SpeciesArg,
        #[arg(long = "nmax", default_value_t = scenarios::DEFAULT_N_MAX)]
        n_max: usize,
        /// Overwrite cached blocks instead of validating them.
        #[arg(long)]
        regenerate: bool,
    },
}

/// Cached blocks must agree with a fresh computation to this.
const CACHE_TOL: f64 = 1e-12;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidModes(_) | Error::ModeOutOfWindow(_) | Error::BoundaryParameter(_) => 2,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 4,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn read_config(config: &str) -> Result<String, Error> {
    match std::fs::read_to_string(config) {
        Ok(text) => Ok(text),
        Err(_) if scenarios::preset(config).is_ok() => Ok(format!("preset = {config}\n")),
        Err(e) => Err(Error::Config(format!("cannot read config '{config}': {e}"))),
    }
}

fn sweep(
    config: &str,
    out: Option<PathBuf>,
    format: Option<Format>,
    ov: &Overrides,
    timestamp: bool,
) -> Result<ExitCode, Error> {
    let mut req = scenarios::parse_config(&read_config(config)?)?;
    if let Some(n) = ov.n_max {
        req.n_max = n;
    }
    if let Some(h) = ov.h {
        req.h = h;
    }
    if let Some(s) = ov.steps {
        req.steps = s;
    }
    if let Some(f) = format {
        req.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if out.is_some() {
        req.out = out;
    }
    req.validate()?;
    for w in &req.warnings {
        eprintln!("warning: {w}");
    }
    let cache = BlockCache::from_env();
    let mut result = scenarios::run_sweep(&req, &cache)?;
    if timestamp {
        result.metadata.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    for w in result.warnings.iter().skip(req.warnings.len()) {
        eprintln!("warning: {w}");
    }
    match &req.out {
        Some(path) => scenarios::emit(&result, req.format, path)?,
        None => {
            let text = match req.format {
                OutputFormat::Csv => scenarios::to_csv(&result)?,
                OutputFormat::Json => scenarios::to_json(&result)?,
            };
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(if result.all_converged() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn check(ov: &Overrides) -> Result<ExitCode, Error> {
    let n_max = ov.n_max.unwrap_or(scenarios::DEFAULT_N_MAX);
    let h = ov.h.unwrap_or(scenarios::DEFAULT_H);
    let outcomes = scenarios::invariant_checks(n_max, h, &BlockCache::from_env())?;
    for o in &outcomes {
        println!("{o}");
    }
    Ok(if outcomes.iter().all(|o| o.passed) { ExitCode::SUCCESS } else { ExitCode::from(4) })
}

fn oracle(cache_dir: Option<PathBuf>, species: SpeciesArg, n_max: usize, regenerate: bool) -> Result<ExitCode, Error> {
    let cache = match cache_dir {
        Some(d) => BlockCache::with_dir(d),
        None => BlockCache::from_env(),
    };
    let Some(dir) = cache.dir() else {
        return Err(Error::Config(format!("no cache directory: pass --cache-dir or set {}", cavity_ent::blocks::CACHE_DIR_ENV)));
    };
    println!("cache directory {}", dir.display());
    let list = match species {
        SpeciesArg::Boson => vec![Species::Boson],
        SpeciesArg::Fermion => vec![Species::Fermion],
        SpeciesArg::Both => vec![Species::Boson, Species::Fermion],
    };
    let geom = CavityGeometry::new(1.0, scenarios::DEFAULT_H)?;
    let mut ok = true;
    for s in list {
        let spec = match s {
            Species::Boson => ModeSpec::boson(),
            Species::Fermion => ModeSpec::fermion(),
        };
        let path = cache.file_for(s, n_max).expect("directory is set");
        if regenerate || !path.exists() {
            let b = cache.regenerate(&spec, &geom, n_max)?;
            let id = b.identity_check();
            println!("wrote {} (identity residual by order {:.2e} {:.2e} {:.2e})", path.display(), id.max_at_order(0), id.max_at_order(1), id.max_at_order(2));
            continue;
        }
        let stored = cavity_ent::blocks::read_block(&path)?;
        let fresh = cavity_ent::blocks::building_block(&spec, &geom, n_max)?;
        let dev = stored.max_deviation(&fresh)?;
        let pass = dev < CACHE_TOL;
        ok &= pass;
        println!("{} {}: max deviation from a fresh computation {dev:.3e}", if pass { "PASS" } else { "FAIL" }, path.display());
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(4) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { config, out, format, overrides, timestamp } => sweep(&config, out, format, &overrides, timestamp),
        Command::Check { overrides } => check(&overrides),
        Command::Oracle { cache_dir, species, n_max, regenerate } => oracle(cache_dir, species, n_max, regenerate),
    };
    result.unwrap_or_else(fail)
}
