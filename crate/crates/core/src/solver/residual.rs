//! Covariance of the sample moment vector `q̂_y` and its whitener.

use crate::error::{Error, Result};
use crate::linalg::{symmetrize_hermitian, CMat, HermitianEigen};
use crate::signal::SampleMoments;
use crate::structure::{build_rz, MomentVector};

use super::chi2::chi2_quantile;

/// Default deviation probability for the fitting-error threshold.
pub const DEFAULT_DEVIATION: f64 = 0.01;

/// Eigenvalues below this fraction of the largest are treated as zero when
/// forming the whitener.
const PINV_CUTOFF: f64 = 1e-12;

/// Gaussian model of `q̂_y − q_y` with its inverse square root and the
/// chi-squared threshold `η` on the whitened squared residual.
#[derive(Debug, Clone)]
pub struct ResidualModel {
    pub r_q: CMat,
    pub whitener: CMat,
    pub eta: f64,
    pub deviation: f64,
}

impl ResidualModel {
    /// `N` such that `r_q` is `(2N² + N)`-square.
    pub fn moment_dim(&self) -> usize {
        let len = self.r_q.nrows();
        // 2N² + N = len
        ((((8 * len + 1) as f64).sqrt() - 1.0) / 4.0).round() as usize
    }

    pub fn dof(&self) -> usize {
        self.r_q.nrows()
    }

    /// Recompute `η` for another deviation probability.
    pub fn with_deviation(mut self, p: f64) -> Result<Self> {
        self.eta = chi2_quantile(self.dof(), p)?;
        self.deviation = p;
        Ok(self)
    }
}

/// Plug-in estimate of `R_q = Cov(q̂_y)` from the Gaussian fourth-moment
/// (Isserlis) identity on `z = [y; conj(y)]`:
///
/// `Cov(R̂_z(i,j), R̂_z(k,l)) = [R_z(i,k) conj(R_z(j,l)) + C_z(i,l) conj(C_z(j,k))] / L`
///
/// with `C_z = R_z P`, `P` the block swap, evaluated at the sample moments.
/// The threshold uses `p = 0.01`; see [`ResidualModel::with_deviation`].
pub fn estimate_rq(m: &SampleMoments) -> Result<ResidualModel> {
    let l = m.snapshot_count;
    if l < 2 {
        return Err(Error::InsufficientSnapshots { got: l, need: 2 });
    }
    let n = m.dim();
    let rz = build_rz(m);
    // C_z = R_z P swaps the column blocks.
    let cz = CMat::from_fn(2 * n, 2 * n, |i, j| rz[(i, (j + n) % (2 * n))]);
    let pos = MomentVector::rz_positions(n);
    let len = pos.len();
    let inv_l = 1.0 / l as f64;
    let mut r_q = CMat::from_fn(len, len, |a, b| {
        let (i, j) = pos[a];
        let (k, l) = pos[b];
        (rz[(i, k)] * rz[(j, l)].conj() + cz[(i, l)] * cz[(j, k)].conj()) * inv_l
    });
    symmetrize_hermitian(&mut r_q);

    let eig = HermitianEigen::new(&r_q);
    let top = eig.max().max(0.0);
    let cutoff = PINV_CUTOFF * top;
    let whitener = eig.reconstruct_with(|lam| if lam > cutoff && lam > 0.0 { lam.sqrt().recip() } else { 0.0 });
    let eta = chi2_quantile(len, DEFAULT_DEVIATION)?;
    Ok(ResidualModel { r_q, whitener, eta, deviation: DEFAULT_DEVIATION })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn smallest_eig(h: &CMat) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    HermitianEigen::new(h).min()
}
