//! Subspace frequency retrieval: NC-MUSIC on augmented covariances, MUSIC
//! on Toeplitz covariances, grid peak search and RMSE.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, HermitianEigen, C64};

/// Default grid step of the peak search.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Relative eigen-gap below which the signal subspace is considered unidentifiable.
const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Estimated frequencies, ascending.
    pub peaks: Vec<f64>,
}

impl SpectrumEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f,value\n");
        for (f, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{f},{v:e}\n"));
        }
        out
    }
}

/// `[-1/2 + step, 1/2]` at uniform spacing; `1/step` must be an integer.
pub fn frequency_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidInput(format!("grid step {step} must be in (0, 1/2]")));
    }
    let n = (1.0 / step).round() as usize;
    if ((n as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("grid step {step} does not divide the unit interval")));
    }
    Ok((1..=n).map(|i| -0.5 + i as f64 / n as f64).collect())
}

/// Noise-subspace projector `E_n E_n^H` of a Hermitian matrix for model order `k`.
fn noise_projector(r: &CMat, k: usize) -> Result<CMat> {
    let d = r.nrows();
    if k < 1 || k >= d {
        return Err(Error::InvalidRank { k, dim: d });
    }
    let eig = HermitianEigen::new(r);
    let top = eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let gap = eig.values[d - k] - eig.values[d - k - 1];
    if top == 0.0 || gap <= GAP_TOL * top {
        return Err(Error::RetrievalFailure(format!(
            "signal subspace of order {k} is not identifiable (eigen-gap {gap:e})"
        )));
    }
    let en = eig.vectors.columns(0, d - k);
    Ok(en * en.adjoint())
}

/// Strict local maxima on the circular grid; the `k` largest, ascending in frequency.
fn pick_peaks(grid: &[f64], values: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = values.len();
    let mut maxima: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] > prev && values[i] > next
        })
        .collect();
    if maxima.len() < k {
        return Err(Error::RetrievalFailure(format!("found {} peaks, need {k}", maxima.len())));
    }
    // Stable sort keeps the lower frequency first on ties.
    maxima.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut peaks: Vec<f64> = maxima[..k].iter().map(|&i| grid[i]).collect();
    peaks.sort_by(f64::total_cmp);
    Ok(peaks)
}

fn steering(f: f64, positions: &[f64]) -> CVec {
    CVec::from_iterator(positions.len(), positions.iter().map(|&p| C64::from_polar(1.0, 2.0 * PI * p * f)))
}

/// NC-MUSIC with the manifold `b(f)` supplied by the caller: the pseudo-spectrum is
/// `1 / λ_min(B^H P_n B)` with `B(f) = blkdiag(b(f), conj(b(f)))`.
pub fn nc_music_with_manifold(
    r: &CMat,
    k: usize,
    step: f64,
    manifold: impl Fn(f64) -> CVec,
) -> Result<SpectrumEstimate> {
    if !r.is_square() || r.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!("NC-MUSIC needs a 2n × 2n matrix, got {:?}", r.shape())));
    }
    let grid = frequency_grid(step)?;
    let pn = noise_projector(r, k)?;
    let n = r.nrows() / 2;
    let p11 = pn.view((0, 0), (n, n)).into_owned();
    let p12 = pn.view((0, n), (n, n)).into_owned();
    let p22 = pn.view((n, n), (n, n)).into_owned();
    let values = grid
        .iter()
        .map(|&f| {
            let a = manifold(f);
            let ac = a.map(|z| z.conj());
            let g11 = a.dotc(&(&p11 * &a)).re;
            let g22 = ac.dotc(&(&p22 * &ac)).re;
            let g12 = a.dotc(&(&p12 * &ac));
            let half_sum = 0.5 * (g11 + g22);
            let half_diff = 0.5 * (g11 - g22);
            let lmin = half_sum - (half_diff * half_diff + g12.norm_sqr()).sqrt();
            1.0 / lmin.max(f64::MIN_POSITIVE)
        })
        .collect::<Vec<_>>();
    let peaks = pick_peaks(&grid, &values, k)?;
    Ok(SpectrumEstimate { grid, values, peaks })
}

/// NC-MUSIC on a `2M × 2M` augmented covariance with ULA manifold `a(f)`.
pub fn nc_music_spectrum(r_a: &CMat, k: usize, step: f64) -> Result<SpectrumEstimate> {
    let m = r_a.nrows() / 2;
    let positions: Vec<f64> = (0..m).map(|i| i as f64).collect();
    nc_music_with_manifold(r_a, k, step, |f| steering(f, &positions))
}

/// Standard MUSIC `1 / (a^H P_n a)` on an `M × M` covariance.
pub fn music_spectrum(t: &CMat, k: usize, step: f64) -> Result<SpectrumEstimate> {
    if !t.is_square() {
        return Err(Error::InvalidDimension(format!("MUSIC needs a square matrix, got {:?}", t.shape())));
    }
    let grid = frequency_grid(step)?;
    let pn = noise_projector(t, k)?;
    let positions: Vec<f64> = (0..t.nrows()).map(|i| i as f64).collect();
    let values = grid
        .iter()
        .map(|&f| {
            let a = steering(f, &positions);
            1.0 / a.dotc(&(&pn * &a)).re.max(f64::MIN_POSITIVE)
        })
        .collect::<Vec<_>>();
    let peaks = pick_peaks(&grid, &values, k)?;
    Ok(SpectrumEstimate { grid, values, peaks })
}

/// Distance on the unit circle of digital frequencies.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed wrapped error `est − truth` in `(-1/2, 1/2]`.
fn wrapped_error(est: f64, truth: f64) -> f64 {
    let d = (est - truth).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Reorder `estimates` to align with `truth` by minimum total squared circular
/// distance, returning the signed wrapped error for each true frequency.
pub fn match_to_truth(estimates: &[f64], truth: &[f64]) -> Result<Vec<f64>> {
    let k = truth.len();
    if estimates.len() != k {
        return Err(Error::DimensionMismatch(format!("{} estimates for {k} frequencies", estimates.len())));
    }
    let cost = |perm: &[usize]| -> f64 {
        perm.iter().enumerate().map(|(t, &e)| circular_distance(estimates[e], truth[t]).powi(2)).sum()
    };
    let mut best: Vec<usize> = (0..k).collect();
    if k <= 8 {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best_cost = cost(&perm);
        // Heap's algorithm.
        let mut c = vec![0usize; k];
        let mut i = 0;
        while i < k {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                let pc = cost(&perm);
                if pc < best_cost {
                    best_cost = pc;
                    best.copy_from_slice(&perm);
                }
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
    } else {
        let mut used = vec![false; k];
        for (t, &f) in truth.iter().enumerate() {
            let e = (0..k)
                .filter(|&e| !used[e])
                .min_by(|&a, &b| circular_distance(estimates[a], f).total_cmp(&circular_distance(estimates[b], f)))
                .unwrap();
            used[e] = true;
            best[t] = e;
        }
    }
    Ok(best.iter().enumerate().map(|(t, &e)| wrapped_error(estimates[e], truth[t])).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseSummary {
    /// `(1/K) Σ_k sqrt((1/M_t) Σ_n (f̃_k^n − f_k)²)` over successful trials;
    /// NaN when no trial succeeded.
    pub rmse: f64,
    pub used: usize,
    pub failures: usize,
}

impl RmseSummary {
    pub fn failure_rate(&self) -> f64 {
        let total = self.used + self.failures;
        if total == 0 {
            0.0
        } else {
            self.failures as f64 / total as f64
        }
    }
}

/// RMSE over trials; `None` marks a retrieval failure, which is excluded and counted.
pub fn rmse(estimates: &[Option<Vec<f64>>], truth: &[f64]) -> Result<RmseSummary> {
    let k = truth.len();
    let mut sq = vec![0.0; k];
    let mut used = 0;
    let mut failures = 0;
    for est in estimates {
        match est {
            Some(e) => {
                for (acc, err) in sq.iter_mut().zip(match_to_truth(e, truth)?) {
                    *acc += err * err;
                }
                used += 1;
            }
            None => failures += 1,
        }
    }
    let rmse = if used == 0 || k == 0 {
        f64::NAN
    } else {
        sq.iter().map(|s| (s / used as f64).sqrt()).sum::<f64>() / k as f64
    };
    Ok(RmseSummary { rmse, used, failures })
}
