//! Independent reference implementations used by the acceptance checks.

pub mod barrier;
pub mod chi2;
pub mod structure;
