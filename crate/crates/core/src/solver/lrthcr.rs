use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, trace_re, vec_col_major, CMat, CVec, C64};
use crate::signal::{MeasurementDesign, SampleMoments};
use crate::structure::{
    build_qy, build_rz, compress, project_structure, AugmentedCovariance, StructureBasis, StructureKind,
};

use super::admm::{AdmmSettings, AdmmState, AdmmStats, FitData, Kernel};
use super::residual::{estimate_rq, smallest_eig, ResidualModel};
use super::{SolveReport, SolverConfig, SolverMode};

/// Width of the acceptance window below `η` for the constrained mode.
const ETA_WINDOW: f64 = 1e-3;

/// Normalized-unit range searched for the constrained-mode `τ`.
const TAU_MIN: f64 = 1e-12;
const TAU_MAX: f64 = 1e12;

/// `tr(R̂) / dim`, or 1 when that is not a usable positive scale.
pub(crate) fn data_scale(rz: &CMat) -> f64 {
    let s = trace_re(rz) / rz.nrows().max(1) as f64;
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

fn warn_if_not_ruler(design: &MeasurementDesign) {
    if design.selection_indices().is_some() && !design.is_complete_sparse_ruler() {
        warn!("selection {:?} is not a complete sparse ruler; recovery is not guaranteed", design.selection_indices());
    }
}

/// `J B J^H` for Toeplitz-only bases, `J' B J'^H` for augmented ones.
pub(crate) fn compress_basis_element(b: &CMat, kind: StructureKind, design: &MeasurementDesign) -> CMat {
    match kind {
        StructureKind::Augmented => compress(b, design).expect("basis matches design"),
        StructureKind::Toeplitz => {
            let jb = design.apply_mat(b);
            design.apply_mat(&jb.adjoint()).adjoint()
        }
    }
}

/// Fit operator `x ↦ vec(compress(S(x)))`, one column per basis element.
pub(crate) fn matrix_fit_operator(basis: &StructureBasis, design: &MeasurementDesign) -> CMat {
    let cols: Vec<CVec> = (0..basis.len())
        .map(|i| vec_col_major(&compress_basis_element(&basis.element(i), basis.kind(), design)))
        .collect();
    CMat::from_columns(&cols)
}

/// Result of a structured matrix fit in original units.
pub(crate) struct MatrixFit {
    pub estimate: CMat,
    pub stats: AdmmStats,
    pub objective: f64,
    pub fit: f64,
}

/// `min τ Tr(S) + ½‖data − compress(S)‖_F²` over structured PSD `S`, with
/// data and `τ` normalized by `scale` inside the solve.
pub(crate) fn fit_structured_matrix(
    data: &CMat,
    scale: f64,
    design: &MeasurementDesign,
    kind: StructureKind,
    tau: f64,
    cfg: &SolverConfig,
) -> MatrixFit {
    let basis = StructureBasis::new(kind, design.full_dim());
    let fit_op = matrix_fit_operator(&basis, design);
    let kernel = Kernel::new(basis, 0, fit_op, cfg.rho);
    let d = vec_col_major(data).map(|z| z / scale);
    let prepared = kernel.prepare(d);
    let mut state = kernel.cold_state();
    let tau_n = tau / scale;
    let stats = kernel.run(&prepared, tau_n, &cfg.admm(), &mut state);
    let estimate = kernel.estimate(&state) * C64::new(scale, 0.0);
    let objective = scale * scale * kernel.objective(&prepared, &state.x, tau_n);
    let fit = scale * scale * kernel.fit_residual(&prepared, &state.x);
    MatrixFit { estimate, stats, objective, fit }
}

fn check_rz(rz_hat: &CMat, design: &MeasurementDesign) -> Result<()> {
    let n = design.compressed_dim();
    if rz_hat.shape() != (2 * n, 2 * n) {
        return Err(Error::DimensionMismatch(format!(
            "R̂_z is {:?}, design expects {} × {}",
            rz_hat.shape(),
            2 * n,
            2 * n
        )));
    }
    let defect = hermitian_defect(rz_hat);
    if defect > 1e-8 * rz_hat.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidInput(format!("R̂_z is not Hermitian (‖R − R^H‖ = {defect:e})")));
    }
    Ok(())
}

fn report_from_fit(fit: MatrixFit, tau: f64, noise: Vec<f64>) -> SolveReport {
    let params = project_structure(&fit.estimate).ok();
    SolveReport {
        estimate: AugmentedCovariance { matrix: fit.estimate, params },
        iterations: fit.stats.iterations,
        primal_residual: fit.stats.primal,
        dual_residual: fit.stats.dual,
        objective: fit.objective,
        fit_residual: fit.fit,
        tau_used: tau,
        noise,
        converged: fit.stats.converged,
    }
}

/// Trace-regularized structured least squares on `R̂_z`.
pub fn lrthcr_regularized(
    rz_hat: &CMat,
    design: &MeasurementDesign,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidConfig(format!("tau must be positive, got {tau}")));
    }
    check_rz(rz_hat, design)?;
    warn_if_not_ruler(design);
    let fit = fit_structured_matrix(rz_hat, data_scale(rz_hat), design, StructureKind::Augmented, tau, cfg);
    Ok(report_from_fit(fit, tau, Vec::new()))
}

/// As [`lrthcr_regularized`] on `R̂_z − σ̂² I`, `σ̂²` the smallest eigenvalue
/// of `R̂_z`. The noise estimate is reported in `noise[0]`.
pub fn lrthcr_noise_plugged(
    rz_hat: &CMat,
    design: &MeasurementDesign,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidConfig(format!("tau must be positive, got {tau}")));
    }
    check_rz(rz_hat, design)?;
    let sigma2 = smallest_eig(rz_hat);
    let mut data = rz_hat.clone();
    for i in 0..data.nrows() {
        data[(i, i)].re -= sigma2;
    }
    let fit = fit_structured_matrix(&data, data_scale(rz_hat), design, StructureKind::Augmented, tau, cfg);
    Ok(report_from_fit(fit, tau, vec![sigma2]))
}

/// `τ = (c₁ Tr(R̂_z − σ̂² I) + c₂ σ̂²) √(ln L / L)` with `σ̂²` the smallest
/// eigenvalue of `R̂_z`. Zero for `L = 1`.
pub fn automatic_tau(rz_hat: &CMat, snapshots: usize, c1: f64, c2: f64) -> f64 {
    let l = snapshots.max(1) as f64;
    let sigma2 = smallest_eig(rz_hat);
    let signal_trace = trace_re(rz_hat) - rz_hat.nrows() as f64 * sigma2;
    (c1 * signal_trace + c2 * sigma2) * (l.ln() / l).sqrt()
}

/// The whitened moment-fitting problem: parameters are the structure of
/// `R_a` plus a nonnegative per-sensor noise variance.
struct ConstrainedProblem {
    kernel: Kernel,
    data: FitData,
    scale: f64,
}

impl ConstrainedProblem {
    fn new(m: &SampleMoments, design: &MeasurementDesign, rm: &ResidualModel, cfg: &SolverConfig) -> Result<Self> {
        let n = design.compressed_dim();
        let mdim = design.full_dim();
        if m.dim() != n {
            return Err(Error::DimensionMismatch(format!("moments are {}-dimensional, design has N = {n}", m.dim())));
        }
        let qlen = 2 * n * n + n;
        if rm.r_q.shape() != (qlen, qlen) {
            return Err(Error::DimensionMismatch(format!(
                "residual model is {:?}, expected {qlen} × {qlen}",
                rm.r_q.shape()
            )));
        }
        let scale = data_scale(&m.cov);
        let basis = StructureBasis::new(StructureKind::Augmented, mdim);
        let mut cols: Vec<CVec> = Vec::with_capacity(basis.len() + n);
        for i in 0..basis.len() {
            let b = basis.element(i);
            let t = b.view((0, 0), (mdim, mdim)).into_owned();
            let h = b.view((0, mdim), (mdim, mdim)).into_owned();
            let jt = design.apply_mat(&design.apply_mat(&t).adjoint()).adjoint();
            let jh = design.apply_mat(&design.apply_mat(&h).transpose()).transpose();
            cols.push(build_qy(&jt, &jh)?.q);
        }
        for k in 0..n {
            let mut e = CMat::zeros(n, n);
            e[(k, k)] = C64::new(1.0, 0.0);
            cols.push(build_qy(&e, &CMat::zeros(n, n))?.q);
        }
        let whitener = &rm.whitener * C64::new(scale, 0.0);
        let fit_op = &whitener * CMat::from_columns(&cols);
        let q_hat = build_qy(&m.cov, &m.pcov)?.q.map(|z| z / scale);
        let d = &whitener * q_hat;

        // The whitened quadratic is ~L times stiffer than the structure
        // penalty; express rho relative to its mean curvature.
        let ns = basis.len();
        let curvature: f64 =
            (0..ns).map(|i| fit_op.column(i).norm_squared()).sum::<f64>() / basis.norms_sq().iter().sum::<f64>();
        let rho = cfg.rho * curvature.max(f64::MIN_POSITIVE);
        let kernel = Kernel::new(basis, n, fit_op, rho);
        let data = kernel.prepare(d);
        Ok(Self { kernel, data, scale })
    }

    fn solve_at(&self, tau_n: f64, settings: &AdmmSettings, state: &mut AdmmState) -> (f64, AdmmStats) {
        let stats = self.kernel.run(&self.data, tau_n, settings, state);
        (self.kernel.fit_residual(&self.data, &state.x), stats)
    }

    fn trace_n(&self, state: &AdmmState) -> f64 {
        self.kernel.traces_dot(&state.x)
    }

    fn report(&self, state: &AdmmState, fit: f64, tau_n: f64, iterations: usize, last: AdmmStats) -> SolveReport {
        let scale = self.scale;
        let matrix = self.kernel.estimate(state) * C64::new(scale, 0.0);
        let params = project_structure(&matrix).ok();
        let noise = self.kernel.nuisance_params(&state.x).iter().map(|s| s.max(0.0) * scale).collect();
        let estimate = AugmentedCovariance { matrix, params };
        SolveReport {
            objective: estimate.trace(),
            estimate,
            iterations,
            primal_residual: last.primal,
            dual_residual: last.dual,
            fit_residual: fit,
            tau_used: tau_n / scale,
            noise,
            converged: last.converged,
        }
    }
}

/// Minimum-trace structured PSD `R_a` whose whitened moment residual
/// `‖W(q̂_y − q_y(R_a, σ²))‖²` stays below `η`.
///
/// Solved on the regularization path: the optimal residual of
/// `min τ Tr(R_a) + ½‖W(q̂_y − q_y)‖²` is nondecreasing in `τ`, so a
/// bracketing search in `log τ` finds the point where it meets `η`.
pub fn lrthcr_constrained(
    m: &SampleMoments,
    design: &MeasurementDesign,
    rm: &ResidualModel,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    warn_if_not_ruler(design);
    let problem = ConstrainedProblem::new(m, design, rm, cfg)?;
    let settings = cfg.admm();
    let eta = rm.eta;
    let eta_low = eta * (1.0 - ETA_WINDOW);
    let target = eta * (1.0 - 0.5 * ETA_WINDOW);
    let mut state = problem.kernel.cold_state();
    let mut total_iters = 0;
    let mut eval = |tau: f64, state: &mut AdmmState| {
        let (fit, stats) = problem.solve_at(tau, &settings, state);
        total_iters += stats.iterations;
        (fit, stats)
    };

    // Upper end of the bracket: grow τ until the residual reaches the window.
    let mut hi = 1.0;
    let (mut f_hi, mut s_hi) = eval(hi, &mut state);
    let mut st_hi = state.clone();
    while f_hi < eta_low {
        if problem.trace_n(&st_hi) <= 1e-9 * problem.kernel.basis().dim() as f64 || hi >= TAU_MAX {
            // Even the zero matrix fits: the constraint does not bind.
            return Ok(problem.report(&st_hi, f_hi, hi, total_iters, s_hi));
        }
        hi *= 10.0;
        (f_hi, s_hi) = eval(hi, &mut state);
        st_hi = state.clone();
    }
    if f_hi <= eta {
        return Ok(problem.report(&st_hi, f_hi, hi, total_iters, s_hi));
    }

    // Lower end: shrink τ until the residual is under η.
    let mut lo = hi / 10.0;
    let (mut f_lo, mut s_lo) = eval(lo, &mut state);
    let mut st_lo = state.clone();
    while f_lo > eta {
        if lo <= TAU_MIN {
            return Err(Error::InfeasibleConstraint { min_fit: f_lo, eta });
        }
        hi = lo;
        f_hi = f_lo;
        lo /= 10.0;
        (f_lo, s_lo) = eval(lo, &mut state);
        st_lo = state.clone();
    }
    if f_lo >= eta_low {
        return Ok(problem.report(&st_lo, f_lo, lo, total_iters, s_lo));
    }

    // Illinois regula falsi on log τ, residual minus the window centre.
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (mut ga, mut gb) = (f_lo - target, f_hi - target);
    let mut side = 0i8;
    state = st_lo;
    for _ in 0..cfg.bisect_iters {
        let width = b - a;
        let mut c = b - gb * width / (gb - ga);
        if !(c > a + 0.01 * width && c < b - 0.01 * width) {
            c = 0.5 * (a + b);
        }
        let tau = c.exp();
        let (fit, stats) = eval(tau, &mut state);
        if (eta_low..=eta).contains(&fit) {
            return Ok(problem.report(&state, fit, tau, total_iters, stats));
        }
        let g = fit - target;
        if g > 0.0 {
            b = c;
            gb = g;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = g;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::NonConvergence(format!(
        "residual did not enter [{eta_low:.6e}, {eta:.6e}] within {} bracketing steps",
        cfg.bisect_iters
    )))
}

/// Optimal whitened residual of the inner weighted problem at each `τ`
/// (original units), warm-starting along the grid.
pub fn weighted_fit_path(
    m: &SampleMoments,
    design: &MeasurementDesign,
    rm: &ResidualModel,
    cfg: &SolverConfig,
    taus: &[f64],
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let problem = ConstrainedProblem::new(m, design, rm, cfg)?;
    let settings = cfg.admm();
    let mut state = problem.kernel.cold_state();
    Ok(taus.iter().map(|&t| problem.solve_at(t * problem.scale, &settings, &mut state).0).collect())
}

/// Solve according to `cfg.mode`, choosing `τ` by [`automatic_tau`] when unset.
pub fn solve(m: &SampleMoments, design: &MeasurementDesign, cfg: &SolverConfig) -> Result<SolveReport> {
    match cfg.mode {
        SolverMode::Regularized | SolverMode::NoisePlugged => {
            let rz = build_rz(m);
            let tau = match cfg.tau {
                Some(t) => t,
                None => {
                    let t = automatic_tau(&rz, m.snapshot_count, cfg.tau_c1, cfg.tau_c2);
                    if t.is_nan() || t <= 0.0 {
                        return Err(Error::InvalidConfig(format!(
                            "automatic tau is {t} for L = {}; set tau explicitly",
                            m.snapshot_count
                        )));
                    }
                    t
                }
            };
            if cfg.mode == SolverMode::Regularized {
                lrthcr_regularized(&rz, design, tau, cfg)
            } else {
                lrthcr_noise_plugged(&rz, design, tau, cfg)
            }
        }
        SolverMode::Constrained => {
            let rm = estimate_rq(m)?.with_deviation(cfg.p_deviation)?;
            lrthcr_constrained(m, design, &rm, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::nc_music_spectrum;
    use crate::signal::HarmonicScene;

    fn fig2_scene() -> HarmonicScene {
        HarmonicScene::equal_power(vec![-0.3, 0.0, 0.2, 0.4], vec![0.4, 1.1, 2.0, 2.7]).unwrap()
    }

    fn ruler() -> MeasurementDesign {
        MeasurementDesign::selection(7, &[1, 2, 5, 7]).unwrap()
    }

    fn tight() -> SolverConfig {
        SolverConfig { max_iter: 50_000, tol_primal: 1e-11, tol_dual: 1e-11, ..Default::default() }
    }

    fn rel_err(a: &CMat, b: &CMat) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_input_gives_zero() {
        let rz = CMat::zeros(8, 8);
        let r = lrthcr_regularized(&rz, &ruler(), 1.0, &SolverConfig::default()).unwrap();
        assert!(r.estimate.matrix.norm() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn noiseless_regularized_recovery() {
        let scene = fig2_scene();
        let design = ruler();
        let truth = AugmentedCovariance::from_scene(&scene, 7);
        let rz = build_rz(&SampleMoments::population(&scene, &design, 0.0, 100));
        let r = lrthcr_regularized(&rz, &design, 1e-7, &tight()).unwrap();
        let e = rel_err(&r.estimate.matrix, &truth.matrix);
        assert!(e < 1e-4, "relative error {e:e} after {} iterations", r.iterations);
        let s = nc_music_spectrum(&r.estimate.matrix, 4, 1e-4).unwrap();
        for (p, t) in s.peaks.iter().zip(scene.frequencies()) {
            assert!((p - t).abs() <= 2e-4);
        }
    }

    #[test]
    fn noise_plugged_matches_regularized_on_shifted_data() {
        let scene = fig2_scene();
        let design = ruler();
        let rz = build_rz(&SampleMoments::population(&scene, &design, 0.3, 100));
        let sigma2 = smallest_eig(&rz);
        let mut shifted = rz.clone();
        for i in 0..8 {
            shifted[(i, i)].re -= sigma2;
        }
        let cfg = SolverConfig::default();
        let a = lrthcr_noise_plugged(&rz, &design, 0.05, &cfg).unwrap();
        let b = fit_structured_matrix(&shifted, data_scale(&rz), &design, StructureKind::Augmented, 0.05, &cfg);
        assert!((&a.estimate.matrix - &b.estimate).norm() < 1e-12);
        assert_eq!(a.noise, vec![sigma2]);
    }

    #[test]
    fn trace_nonincreasing_in_tau() {
        let scene = fig2_scene();
        let design = ruler();
        let rz = build_rz(&SampleMoments::population(&scene, &design, 0.5, 100));
        let cfg = tight();
        let traces: Vec<f64> = [0.01, 0.1, 0.5, 2.0]
            .iter()
            .map(|&t| lrthcr_regularized(&rz, &design, t, &cfg).unwrap().estimate.trace())
            .collect();
        for w in traces.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-6), "{traces:?}");
        }
    }

    #[test]
    fn estimate_is_structured_and_psd() {
        let scene = fig2_scene();
        let design = ruler();
        let batch = crate::signal::synthesize_snapshots(&scene, &design, 200, 0.3, 11).unwrap();
        let m = crate::signal::sample_moments(&batch);
        for mode in [SolverMode::Regularized, SolverMode::NoisePlugged, SolverMode::Constrained] {
            let r = solve(&m, &design, &SolverConfig::with_mode(mode)).unwrap();
            assert!(r.estimate.structure_defect() < 1e-9 * r.estimate.matrix.norm().max(1.0), "{mode:?}");
            assert!(smallest_eig(&r.estimate.matrix) >= -1e-9 * r.estimate.matrix.norm(), "{mode:?}");
        }
    }

    #[test]
    fn constrained_fit_meets_threshold() {
        let scene = fig2_scene();
        let design = ruler();
        let batch = crate::signal::synthesize_snapshots(&scene, &design, 300, 0.1, 5).unwrap();
        let m = crate::signal::sample_moments(&batch);
        let rm = estimate_rq(&m).unwrap();
        let r = lrthcr_constrained(&m, &design, &rm, &SolverConfig::default()).unwrap();
        assert!(
            r.fit_residual <= rm.eta && r.fit_residual >= rm.eta * (1.0 - ETA_WINDOW),
            "{} vs {}",
            r.fit_residual,
            rm.eta
        );
        let s = nc_music_spectrum(&r.estimate.matrix, 4, 1e-4).unwrap();
        for (p, t) in s.peaks.iter().zip(scene.frequencies()) {
            assert!((p - t).abs() < 1e-2, "{:?}", s.peaks);
        }
    }

    #[test]
    fn constrained_near_noiseless_recovers_frequencies() {
        let scene = fig2_scene();
        let design = ruler();
        let m = SampleMoments::population(&scene, &design, 1e-3, 10_000);
        let r = solve(&m, &design, &SolverConfig::default()).unwrap();
        let s = nc_music_spectrum(&r.estimate.matrix, 4, 1e-4).unwrap();
        for (p, t) in s.peaks.iter().zip(scene.frequencies()) {
            assert!((p - t).abs() <= 1e-3, "{:?}", s.peaks);
        }
    }

    #[test]
    fn constrained_noise_only_returns_zero() {
        let design = ruler();
        let m = SampleMoments { cov: CMat::identity(4, 4), pcov: CMat::zeros(4, 4), snapshot_count: 100 };
        let r = solve(&m, &design, &SolverConfig::default()).unwrap();
        assert!(r.estimate.trace() < 1e-6, "trace {}", r.estimate.trace());
        assert!(r.noise.iter().all(|s| (s - 1.0).abs() < 0.1), "{:?}", r.noise);
    }

    #[test]
    fn auto_tau_decreases_with_snapshots() {
        let rz = build_rz(&SampleMoments::population(&fig2_scene(), &ruler(), 0.2, 1));
        let taus: Vec<f64> = [3, 10, 100, 1000, 10_000].iter().map(|&l| automatic_tau(&rz, l, 1.0, 1.0)).collect();
        for w in taus.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_eq!(automatic_tau(&rz, 1, 1.0, 1.0), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let design = ruler();
        assert!(matches!(
            lrthcr_regularized(&CMat::zeros(6, 6), &design, 1.0, &SolverConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let mut rz = CMat::zeros(8, 8);
        rz[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(lrthcr_regularized(&rz, &design, 1.0, &SolverConfig::default()), Err(Error::InvalidInput(_))));
        assert!(matches!(
            lrthcr_regularized(&CMat::zeros(8, 8), &design, -1.0, &SolverConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
        let m = SampleMoments { cov: CMat::identity(4, 4), pcov: CMat::zeros(4, 4), snapshot_count: 1 };
        let cfg = SolverConfig::with_mode(SolverMode::Regularized);
        assert!(matches!(solve(&m, &design, &cfg), Err(Error::InvalidConfig(_))));
    }
}
