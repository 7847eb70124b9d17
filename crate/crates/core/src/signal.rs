//! Signal model: strictly non-circular sources observed through a linear
//! compression with additive circular Gaussian noise.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetrize, symmetrize_hermitian, CMat, CVec, C64};

/// Frequencies, non-circular phases and powers of `K` uncorrelated sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicScene {
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    powers: Vec<f64>,
}

impl HarmonicScene {
    /// Frequencies in cycles/sample on `(-1/2, 1/2]`, phases in radians, powers `> 0`.
    pub fn new(frequencies: Vec<f64>, phases: Vec<f64>, powers: Vec<f64>) -> Result<Self> {
        let k = frequencies.len();
        if k == 0 {
            return Err(Error::InvalidScene("a scene needs at least one source".into()));
        }
        if phases.len() != k || powers.len() != k {
            return Err(Error::InvalidScene(format!(
                "{} frequencies, {} phases, {} powers",
                k,
                phases.len(),
                powers.len()
            )));
        }
        for &f in &frequencies {
            if !(f > -0.5 && f <= 0.5) {
                return Err(Error::InvalidScene(format!("frequency {f} outside (-1/2, 1/2]")));
            }
        }
        for (i, &a) in frequencies.iter().enumerate() {
            if frequencies[..i].contains(&a) {
                return Err(Error::InvalidScene(format!("duplicate frequency {a}")));
            }
        }
        if let Some(&bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidScene(format!("phase {bad} is not finite")));
        }
        if let Some(&bad) = powers.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidScene(format!("power {bad} must be positive")));
        }
        Ok(Self { frequencies, phases, powers })
    }

    pub fn equal_power(frequencies: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        let k = frequencies.len();
        Self::new(frequencies, phases, vec![1.0; k])
    }

    /// The noise-only scene (`K = 0`).
    pub fn empty() -> Self {
        Self { frequencies: vec![], phases: vec![], powers: vec![] }
    }

    pub fn num_sources(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// Per-sensor noise variance giving the requested SNR, where
    /// `SNR_dB = 10 log10(Σ r_i / (K σ²))`.
    pub fn noise_var_for_snr(&self, snr_db: f64) -> f64 {
        let k = self.num_sources().max(1) as f64;
        self.total_power() / (k * 10f64.powf(snr_db / 10.0))
    }

    /// `M × K` Vandermonde manifold `[a(f_1), ..., a(f_K)]`.
    pub fn manifold(&self, m: usize) -> CMat {
        let mut a = CMat::zeros(m, self.num_sources());
        for (j, &f) in self.frequencies.iter().enumerate() {
            for k in 0..m {
                a[(k, j)] = C64::from_polar(1.0, 2.0 * PI * k as f64 * f);
            }
        }
        a
    }
}

/// `a(f) = [1, e^{j2πf}, ..., e^{j2π(m-1)f}]^T`.
pub fn steering_vector(f: f64, m: usize) -> Result<CVec> {
    if m < 1 {
        return Err(Error::InvalidDimension("steering vector length must be at least 1".into()));
    }
    Ok(CVec::from_iterator(m, (0..m).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 * f))))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Compression {
    /// Row selection `J = I_Ω`, 0-based strictly increasing indices.
    Selection(Vec<usize>),
    /// Arbitrary `N × M` matrix.
    Dense(CMat),
}

/// How the `M`-dimensional signal is observed in `N ≤ M` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDesign {
    full_dim: usize,
    compression: Compression,
}

impl MeasurementDesign {
    /// Full observation, `J = I_M`.
    pub fn identity(m: usize) -> Result<Self> {
        Self::selection_zero_based(m, (0..m).collect())
    }

    /// Selection from 1-based indices, as they appear in configuration files.
    pub fn selection(m: usize, omega: &[usize]) -> Result<Self> {
        if omega.contains(&0) {
            return Err(Error::InvalidDesign("selection indices are 1-based".into()));
        }
        Self::selection_zero_based(m, omega.iter().map(|&i| i - 1).collect())
    }

    pub fn selection_zero_based(m: usize, omega: Vec<usize>) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidDimension("M must be at least 1".into()));
        }
        if omega.is_empty() || omega.len() > m {
            return Err(Error::InvalidDesign(format!("need 1 ≤ N ≤ M = {m}, got N = {}", omega.len())));
        }
        if omega.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDesign("selection indices must be strictly increasing".into()));
        }
        if let Some(&last) = omega.last() {
            if last >= m {
                return Err(Error::InvalidDesign(format!("index {} exceeds M = {m}", last + 1)));
            }
        }
        Ok(Self { full_dim: m, compression: Compression::Selection(omega) })
    }

    pub fn dense(j: CMat) -> Result<Self> {
        let (n, m) = j.shape();
        if n == 0 || m == 0 || n > m {
            return Err(Error::InvalidDesign(format!("J must be N × M with 1 ≤ N ≤ M, got {n} × {m}")));
        }
        Ok(Self { full_dim: m, compression: Compression::Dense(j) })
    }

    /// `M`.
    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    /// `N`.
    pub fn compressed_dim(&self) -> usize {
        match &self.compression {
            Compression::Selection(omega) => omega.len(),
            Compression::Dense(j) => j.nrows(),
        }
    }

    pub fn compression(&self) -> &Compression {
        &self.compression
    }

    /// 0-based `Ω` in selection mode.
    pub fn selection_indices(&self) -> Option<&[usize]> {
        match &self.compression {
            Compression::Selection(omega) => Some(omega),
            Compression::Dense(_) => None,
        }
    }

    /// 0-based `Ω' = Ω ∪ (Ω + M)` in selection mode.
    pub fn augmented_indices(&self) -> Option<Vec<usize>> {
        self.selection_indices()
            .map(|omega| omega.iter().copied().chain(omega.iter().map(|&i| i + self.full_dim)).collect())
    }

    /// The `N × M` matrix `J`.
    pub fn matrix(&self) -> CMat {
        match &self.compression {
            Compression::Selection(omega) => {
                let mut j = CMat::zeros(omega.len(), self.full_dim);
                for (r, &c) in omega.iter().enumerate() {
                    j[(r, c)] = C64::new(1.0, 0.0);
                }
                j
            }
            Compression::Dense(j) => j.clone(),
        }
    }

    /// `J' = blkdiag(J, conj(J))`, `2N × 2M`.
    pub fn augmented_matrix(&self) -> CMat {
        let j = self.matrix();
        crate::linalg::block_diag(&j, &j.map(|z| z.conj()))
    }

    /// Every lag `0..M-1` is a difference of two selected indices.
    /// Dense designs are reported as not being rulers.
    pub fn is_complete_sparse_ruler(&self) -> bool {
        let Some(omega) = self.selection_indices() else {
            return false;
        };
        let mut covered = vec![false; self.full_dim];
        for &a in omega {
            for &b in omega {
                if a >= b {
                    covered[a - b] = true;
                }
            }
        }
        covered.into_iter().all(|c| c)
    }

    /// `J v` for an `M`-vector.
    pub fn apply(&self, v: &CVec) -> CVec {
        match &self.compression {
            Compression::Selection(omega) => CVec::from_iterator(omega.len(), omega.iter().map(|&i| v[i])),
            Compression::Dense(j) => j * v,
        }
    }

    /// `J X` for an `M × L` matrix.
    pub fn apply_mat(&self, x: &CMat) -> CMat {
        match &self.compression {
            Compression::Selection(omega) => x.select_rows(omega.iter()),
            Compression::Dense(j) => j * x,
        }
    }
}

/// `N × L` measurements; column `t` is `y(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBatch {
    pub data: CMat,
    pub seed: u64,
}

impl SnapshotBatch {
    pub fn snapshot_count(&self) -> usize {
        self.data.ncols()
    }
}

/// Draw `L` snapshots `y(t) = J Σ_i s_i'(t) e^{jφ_i} a(f_i) + n(t)` from a
/// ChaCha8 stream seeded with `seed`.
pub fn synthesize_snapshots(
    scene: &HarmonicScene,
    design: &MeasurementDesign,
    l: usize,
    noise_var: f64,
    seed: u64,
) -> Result<SnapshotBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = synthesize_with_rng(scene, design, l, noise_var, &mut rng)?;
    Ok(SnapshotBatch { data, seed })
}

/// As [`synthesize_snapshots`] but drawing from a caller-owned generator.
pub fn synthesize_with_rng<R: Rng + ?Sized>(
    scene: &HarmonicScene,
    design: &MeasurementDesign,
    l: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<CMat> {
    if l < 1 {
        return Err(Error::InsufficientSnapshots { got: l, need: 1 });
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::InvalidInput(format!("noise variance {noise_var} must be nonnegative")));
    }
    let k = scene.num_sources();
    let m = design.full_dim();
    let n = design.compressed_dim();

    // A Φ, with the real amplitudes applied per snapshot below.
    let mut steer = scene.manifold(m);
    for (j, &phi) in scene.phases().iter().enumerate() {
        let rot = C64::from_polar(1.0, phi);
        for v in steer.column_mut(j).iter_mut() {
            *v *= rot;
        }
    }
    let mut amplitudes = CMat::zeros(k, l);
    for t in 0..l {
        for (i, &r) in scene.powers().iter().enumerate() {
            let g: f64 = rng.sample(StandardNormal);
            amplitudes[(i, t)] = C64::new(g * r.sqrt(), 0.0);
        }
    }
    let x = &steer * amplitudes;
    let mut y = design.apply_mat(&x);
    if noise_var > 0.0 {
        let sigma = noise_var.sqrt() * FRAC_1_SQRT_2;
        for t in 0..l {
            for r in 0..n {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                y[(r, t)] += C64::new(g1 * sigma, g2 * sigma);
            }
        }
    }
    Ok(y)
}

/// Sample covariance `R̂_y` and pseudo-covariance `Ĉ_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub cov: CMat,
    pub pcov: CMat,
    pub snapshot_count: usize,
}

impl SampleMoments {
    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    /// Population moments dressed as sample moments of nominal size `l`.
    pub fn population(scene: &HarmonicScene, design: &MeasurementDesign, noise_var: f64, l: usize) -> Self {
        let (cov, pcov) = population_moments(scene, design, noise_var);
        Self { cov, pcov, snapshot_count: l }
    }
}

pub fn sample_moments(batch: &SnapshotBatch) -> SampleMoments {
    let y = &batch.data;
    let l = y.ncols();
    let scale = 1.0 / l.max(1) as f64;
    let mut cov = (y * y.adjoint()) * C64::new(scale, 0.0);
    let mut pcov = (y * y.transpose()) * C64::new(scale, 0.0);
    symmetrize_hermitian(&mut cov);
    symmetrize(&mut pcov);
    SampleMoments { cov, pcov, snapshot_count: l }
}

/// Exact `R_y = J A diag(r) A^H J^H + σ² I` and `C_y = J A diag(r e^{j2φ}) A^T J^T`.
pub fn population_moments(scene: &HarmonicScene, design: &MeasurementDesign, noise_var: f64) -> (CMat, CMat) {
    let m = design.full_dim();
    let n = design.compressed_dim();
    let ja = design.apply_mat(&scene.manifold(m));
    let mut scaled_r = ja.clone();
    let mut scaled_c = ja.clone();
    for (j, (&r, &phi)) in scene.powers().iter().zip(scene.phases()).enumerate() {
        scaled_r.column_mut(j).scale_mut(r);
        let w = C64::from_polar(r, 2.0 * phi);
        for v in scaled_c.column_mut(j).iter_mut() {
            *v *= w;
        }
    }
    let mut cov = &scaled_r * ja.adjoint();
    for i in 0..n {
        cov[(i, i)] += C64::new(noise_var, 0.0);
    }
    let mut pcov = &scaled_c * ja.transpose();
    symmetrize_hermitian(&mut cov);
    symmetrize(&mut pcov);
    (cov, pcov)
}
