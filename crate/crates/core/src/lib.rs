//! Super-resolution harmonic retrieval for strictly non-circular signals.
//!
//! The covariance of uncorrelated strictly non-circular sources is Hermitian
//! Toeplitz and their pseudo-covariance is symmetric Hankel, so the augmented
//! covariance of `[x; conj(x)]` is low rank and jointly Toeplitz-Hankel
//! structured. This crate reconstructs that matrix from compressed
//! multi-snapshot measurements with a trace-minimizing semidefinite program
//! (solved by ADMM) and extracts frequencies with NC-MUSIC.
//!
//! Module map:
//!
//! - [`signal`]: scenes, measurement designs, snapshot synthesis, moments.
//! - [`structure`]: Toeplitz/Hankel parameterization, projections, vectorization.
//! - [`solver`]: the reconstruction programs, chi-squared threshold, residual model.
//! - [`retrieval`]: NC-MUSIC / MUSIC pseudo-spectra, peak picking, RMSE.
//! - [`baseline`]: covariance-only reconstruction and direct NC-MUSIC.

pub mod baseline;
pub mod error;
pub mod linalg;
pub mod retrieval;
pub mod signal;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use retrieval::{match_to_truth, music_spectrum, nc_music_spectrum, rmse, RmseSummary, SpectrumEstimate};
pub use signal::{
    population_moments, sample_moments, steering_vector, synthesize_snapshots, HarmonicScene, MeasurementDesign,
    SampleMoments, SnapshotBatch,
};
pub use solver::{
    automatic_tau, chi2_quantile, estimate_rq, lrthcr_constrained, lrthcr_noise_plugged, lrthcr_regularized,
    smallest_eig, ResidualModel, SolveReport, SolverConfig, SolverMode,
};
pub use structure::{
    assemble_augmented, build_qy, build_rz, compress, hankel_from, project_structure, subvec, toeplitz_from,
    AugmentedCovariance, MomentVector, THParams,
};
