//! Comparison methods: covariance-only Toeplitz reconstruction followed by
//! MUSIC, and NC-MUSIC on the raw compressed sample moments.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::retrieval::{music_spectrum, nc_music_with_manifold, SpectrumEstimate};
use crate::signal::{sample_moments, MeasurementDesign, SampleMoments, SnapshotBatch};
use crate::solver::{automatic_tau, smallest_eig, SolverConfig};
use crate::structure::{build_rz, StructureKind};

/// Reconstructed `M × M` Hermitian Toeplitz covariance.
#[derive(Debug, Clone)]
pub struct CmraEstimate {
    pub toeplitz: CMat,
    /// Smallest eigenvalue of `R̂_y`, subtracted before the fit.
    pub noise: f64,
    pub tau_used: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl CmraEstimate {
    pub fn frequencies(&self, k: usize, step: f64) -> Result<SpectrumEstimate> {
        music_spectrum(&self.toeplitz, k, step)
    }
}

/// `min τ Tr(T) + ½‖(R̂_y − σ̂² I) − J T J^H‖_F²` over Hermitian Toeplitz PSD `T`,
/// ignoring the pseudo-covariance. `cfg.tau = None` uses [`automatic_tau`] on `R̂_y`.
pub fn baseline_cmra(m: &SampleMoments, design: &MeasurementDesign, cfg: &SolverConfig) -> Result<CmraEstimate> {
    cfg.validate()?;
    let n = design.compressed_dim();
    if m.cov.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("R̂_y is {:?}, design expects {n} × {n}", m.cov.shape())));
    }
    let tau = match cfg.tau {
        Some(t) => t,
        None => automatic_tau(&m.cov, m.snapshot_count, cfg.tau_c1, cfg.tau_c2),
    };
    let sigma2 = smallest_eig(&m.cov);
    let mut data = m.cov.clone();
    for i in 0..n {
        data[(i, i)].re -= sigma2;
    }
    if tau <= 0.0 {
        // Nothing to fit beyond noise.
        if data.norm() == 0.0 {
            let md = design.full_dim();
            return Ok(CmraEstimate {
                toeplitz: CMat::zeros(md, md),
                noise: sigma2,
                tau_used: tau,
                iterations: 0,
                converged: true,
            });
        }
        return Err(Error::InvalidConfig(format!("automatic tau is {tau:e}; set tau explicitly")));
    }
    let scale = crate::solver::data_scale(&m.cov);
    let fit = crate::solver::fit_structured_matrix(&data, scale, design, StructureKind::Toeplitz, tau, cfg);
    Ok(CmraEstimate {
        toeplitz: fit.estimate,
        noise: sigma2,
        tau_used: tau,
        iterations: fit.stats.iterations,
        converged: fit.stats.converged,
    })
}

/// NC-MUSIC on the `2N × 2N` sample `R̂_z` with the compressed manifold `J a(f)`.
pub fn baseline_nc_music_direct(
    batch: &SnapshotBatch,
    design: &MeasurementDesign,
    k: usize,
    step: f64,
) -> Result<SpectrumEstimate> {
    let l = batch.snapshot_count();
    if l < 2 {
        return Err(Error::InsufficientSnapshots { got: l, need: 2 });
    }
    if batch.data.nrows() != design.compressed_dim() {
        return Err(Error::DimensionMismatch(format!(
            "snapshots have {} rows, design expects {}",
            batch.data.nrows(),
            design.compressed_dim()
        )));
    }
    nc_music_direct_from_moments(&sample_moments(batch), design, k, step)
}

/// As [`baseline_nc_music_direct`] from precomputed moments.
pub fn nc_music_direct_from_moments(
    m: &SampleMoments,
    design: &MeasurementDesign,
    k: usize,
    step: f64,
) -> Result<SpectrumEstimate> {
    let rz = build_rz(m);
    let md = design.full_dim();
    nc_music_with_manifold(&rz, k, step, |f| {
        let a = CVec::from_iterator(md, (0..md).map(|i| C64::from_polar(1.0, 2.0 * PI * i as f64 * f)));
        design.apply(&a)
    })
}
