//! Independent numerical routes used to validate the perturbative machinery.

pub mod extract;
pub mod fock;
pub mod overlap;
pub mod quadrature;
pub mod taylor;
