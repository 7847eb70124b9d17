//! Reconstruction of the augmented covariance.
//!
//! Three formulations share one ADMM kernel:
//!
//! - [`lrthcr_regularized`]: `min τ Tr(R_a) + ½‖R̂_z − J'R_aJ'^H‖_F²`
//!   over structured PSD `R_a`;
//! - [`lrthcr_noise_plugged`]: the same with `R̂_z − σ̂² I`, where `σ̂²` is the
//!   smallest eigenvalue of `R̂_z`;
//! - [`lrthcr_constrained`]: `min Tr(R_a)` subject to a chi-squared bound on
//!   the whitened moment residual, with the per-sensor noise as a free
//!   nonnegative variable.

mod admm;
mod chi2;
mod lrthcr;
mod residual;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::AugmentedCovariance;

pub(crate) use admm::AdmmSettings;
pub use chi2::chi2_quantile;
pub use lrthcr::{
    automatic_tau, lrthcr_constrained, lrthcr_noise_plugged, lrthcr_regularized, solve, weighted_fit_path,
};
pub(crate) use lrthcr::{data_scale, fit_structured_matrix};
pub use residual::{estimate_rq, smallest_eig, ResidualModel, DEFAULT_DEVIATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    Regularized,
    NoisePlugged,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Regularization weight; `None` selects the snapshot-count rule of
    /// [`automatic_tau`] in the regularized modes.
    pub tau: Option<f64>,
    /// Deviation probability `p` of the fitting-error threshold.
    pub p_deviation: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub bisect_iters: usize,
    /// Constants of the automatic `τ` rule.
    pub tau_c1: f64,
    pub tau_c2: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Constrained,
            tau: None,
            p_deviation: DEFAULT_DEVIATION,
            rho: 1.0,
            max_iter: 2000,
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            bisect_iters: 40,
            tau_c1: 1.0,
            tau_c2: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolverMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("rho", self.rho)?;
        positive("tol_primal", self.tol_primal)?;
        positive("tol_dual", self.tol_dual)?;
        if let Some(tau) = self.tau {
            positive("tau", tau)?;
        }
        if !(self.p_deviation > 0.0 && self.p_deviation < 1.0) {
            return Err(Error::InvalidProbability(self.p_deviation));
        }
        if self.max_iter == 0 || self.bisect_iters == 0 {
            return Err(Error::InvalidConfig("iteration limits must be at least 1".into()));
        }
        if !(self.tau_c1 >= 0.0 && self.tau_c2 >= 0.0) {
            return Err(Error::InvalidConfig("tau constants must be nonnegative".into()));
        }
        Ok(())
    }

    pub(crate) fn admm(&self) -> AdmmSettings {
        AdmmSettings { max_iter: self.max_iter, tol_primal: self.tol_primal, tol_dual: self.tol_dual }
    }
}

/// Outcome of one reconstruction.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub estimate: AugmentedCovariance,
    /// ADMM iterations, summed over all inner solves.
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `τ Tr + ½‖·‖_F²` in the regularized modes, `Tr(R_a)` in the constrained mode.
    pub objective: f64,
    /// Squared Frobenius misfit in the regularized modes, whitened squared
    /// moment residual in the constrained mode.
    pub fit_residual: f64,
    pub tau_used: f64,
    /// `σ̂²` (noise-plugged) or the per-sensor noise variables (constrained).
    pub noise: Vec<f64>,
    pub converged: bool,
}
