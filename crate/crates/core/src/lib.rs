//! Perturbative entanglement between modes of a rigid cavity in
//! nonuniform motion, for a massless scalar and a massless Dirac field.
//!
//! Everything is expanded to second order in the dimensionless
//! acceleration `h = δ·A`, where `A` is the proper acceleration at the
//! centre of a cavity of proper length `δ`.

pub mod blocks;
pub mod bogoliubov;
pub mod error;
pub mod negativity;
pub mod oracles;
pub mod scenarios;
pub mod series;
pub mod states;

pub use bogoliubov::{Bogoliubov, BosonBogoliubov, FermionBogoliubov, NumericBogoliubov, Species};
pub use error::{Error, Result};
pub use series::{H2Series, SeriesMatrix};
