//! Monte-Carlo driver: sweep points × trials × methods on common random data.

use std::f64::consts::PI;
use std::time::Instant;

use log::debug;
use lrthcr::baseline::{baseline_cmra, nc_music_direct_from_moments};
use lrthcr::solver::solve;
use lrthcr::{
    nc_music_spectrum, sample_moments, AugmentedCovariance, HarmonicScene, MeasurementDesign, SampleMoments,
    SolverConfig, SolverMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, Method, Metric};
use crate::error::ConfigError;

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub snr_db: f64,
    pub snapshots: usize,
}

/// One aggregated metric for one method at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub method: Method,
    pub sweep_variable: &'static str,
    pub point: SweepPoint,
    pub metric: Metric,
    pub value: f64,
    pub trials_used: usize,
    pub failures: usize,
    /// Summed per-trial compute time of the method at this point.
    pub wall_time_s: f64,
}

/// Per-trial result of one method.
#[derive(Debug, Clone, Default)]
struct Outcome {
    frequencies: Option<Vec<f64>>,
    /// `(‖R̃_a − R_a*‖_F, ‖R_a*‖_F)`.
    nee: Option<(f64, f64)>,
    seconds: f64,
}

struct Trial {
    truth: Vec<f64>,
    outcomes: Vec<Outcome>,
}

pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let s = &cfg.sweep;
    let mut points = Vec::new();
    for &k in &s.k {
        for &snr_db in &s.snr_db {
            for &snapshots in &s.snapshots {
                points.push(SweepPoint { k, snr_db, snapshots });
            }
        }
    }
    points
}

fn sweep_variable(cfg: &ExperimentConfig) -> &'static str {
    match cfg.experiment {
        Experiment::Fig1 | Experiment::Fig3 => "L",
        Experiment::Fig2 => "snr_db",
        Experiment::Custom => {
            let s = &cfg.sweep;
            if s.snapshots.len() > 1 {
                "L"
            } else if s.snr_db.len() > 1 {
                "snr_db"
            } else {
                "K"
            }
        }
    }
}

/// Generator for one trial: the base seed with a stream per (point, trial).
pub fn trial_rng(seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

fn draw_scene(cfg: &ExperimentConfig, k: usize, rng: &mut ChaCha8Rng) -> HarmonicScene {
    let sc = &cfg.scene;
    loop {
        let f = match &sc.frequencies {
            Some(f) => f.clone(),
            None => (0..k).map(|_| 0.5 - rng.random::<f64>()).collect(),
        };
        let phi = match &sc.phases {
            Some(p) => p.clone(),
            None => (0..k).map(|_| PI * (1.0 - rng.random::<f64>())).collect(),
        };
        let r = sc.powers.clone().unwrap_or_else(|| vec![1.0; k]);
        // Coinciding random frequencies have probability zero; redraw if it happens.
        if let Ok(scene) = HarmonicScene::new(f, phi, r) {
            return scene;
        }
    }
}

fn lrthcr_mode(method: Method) -> Option<SolverMode> {
    match method {
        Method::LrthcrConstrained => Some(SolverMode::Constrained),
        Method::LrthcrRegularized => Some(SolverMode::Regularized),
        Method::LrthcrNoisePlugged => Some(SolverMode::NoisePlugged),
        _ => None,
    }
}

fn run_method(
    cfg: &ExperimentConfig,
    method: Method,
    design: &MeasurementDesign,
    m: &SampleMoments,
    scene: &HarmonicScene,
) -> Outcome {
    let want_freqs = cfg.metrics.iter().any(|&x| x != Metric::Nee);
    let want_nee = cfg.metrics.contains(&Metric::Nee);
    let k = scene.num_sources();
    let start = Instant::now();
    let mut out = Outcome::default();
    match lrthcr_mode(method) {
        Some(mode) => {
            let solver = SolverConfig { mode, ..cfg.solver.clone() };
            match solve(m, design, &solver) {
                Ok(report) => {
                    if want_nee {
                        let truth = AugmentedCovariance::from_scene(scene, design.full_dim());
                        let err = (&report.estimate.matrix - &truth.matrix).norm();
                        out.nee = Some((err, truth.matrix.norm()));
                    }
                    if want_freqs {
                        out.frequencies = nc_music_spectrum(&report.estimate.matrix, k, cfg.grid_step)
                            .map(|s| s.peaks)
                            .map_err(|e| debug!("{}: {e}", method.name()))
                            .ok();
                    }
                }
                Err(e) => debug!("{}: {e}", method.name()),
            }
        }
        None if want_freqs => {
            out.frequencies = match method {
                Method::Cmra => baseline_cmra(m, design, &cfg.solver).and_then(|c| c.frequencies(k, cfg.grid_step)),
                _ => nc_music_direct_from_moments(m, design, k, cfg.grid_step),
            }
            .map(|s| s.peaks)
            .map_err(|e| debug!("{}: {e}", method.name()))
            .ok();
        }
        None => {}
    }
    out.seconds = start.elapsed().as_secs_f64();
    out
}

fn run_trial(cfg: &ExperimentConfig, design: &MeasurementDesign, p_idx: usize, p: SweepPoint, t: usize) -> Trial {
    let mut rng = trial_rng(cfg.seed, p_idx, t);
    let scene = draw_scene(cfg, p.k, &mut rng);
    let noise_var = scene.noise_var_for_snr(p.snr_db);
    let data = lrthcr::signal::synthesize_with_rng(&scene, design, p.snapshots, noise_var, &mut rng)
        .expect("validated configuration");
    let m = sample_moments(&lrthcr::SnapshotBatch { data, seed: cfg.seed });
    let outcomes = cfg.methods.iter().map(|&method| run_method(cfg, method, design, &m, &scene)).collect();
    Trial { truth: scene.frequencies().to_vec(), outcomes }
}

fn aggregate(
    cfg: &ExperimentConfig,
    point: SweepPoint,
    variable: &'static str,
    trials: &[Trial],
    out: &mut Vec<ResultRecord>,
) {
    for (mi, &method) in cfg.methods.iter().enumerate() {
        let wall_time_s = trials.iter().map(|t| t.outcomes[mi].seconds).sum();
        let record = |metric, value, trials_used, failures| ResultRecord {
            method,
            sweep_variable: variable,
            point,
            metric,
            value,
            trials_used,
            failures,
            wall_time_s,
        };
        let (mut sq, mut used, mut failures) = (vec![0.0; point.k], 0, 0);
        for t in trials {
            match &t.outcomes[mi].frequencies {
                Some(est) => {
                    let errs = lrthcr::match_to_truth(est, &t.truth).expect("K estimates per trial");
                    for (acc, e) in sq.iter_mut().zip(errs) {
                        *acc += e * e;
                    }
                    used += 1;
                }
                None => failures += 1,
            }
        }
        for &metric in &cfg.metrics {
            match metric {
                Metric::Rmse => {
                    let value = if used == 0 {
                        f64::NAN
                    } else {
                        sq.iter().map(|s| (s / used as f64).sqrt()).sum::<f64>() / point.k as f64
                    };
                    out.push(record(metric, value, used, failures));
                }
                Metric::FailureRate => {
                    out.push(record(metric, failures as f64 / trials.len() as f64, used, failures));
                }
                Metric::Nee if method.reconstructs_augmented() => {
                    let ok: Vec<(f64, f64)> = trials.iter().filter_map(|t| t.outcomes[mi].nee).collect();
                    let value = if ok.is_empty() {
                        f64::NAN
                    } else {
                        ok.iter().map(|x| x.0).sum::<f64>() / ok.iter().map(|x| x.1).sum::<f64>()
                    };
                    out.push(record(metric, value, ok.len(), trials.len() - ok.len()));
                }
                Metric::Nee => {}
            }
        }
    }
}

/// Run every sweep point of `cfg`; trials run in parallel on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, ConfigError> {
    cfg.validate()?;
    let design = cfg.design.build()?;
    let variable = sweep_variable(cfg);
    let mut records = Vec::new();
    for (p_idx, point) in sweep_points(cfg).into_iter().enumerate() {
        let trials: Vec<Trial> =
            (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, &design, p_idx, point, t)).collect();
        aggregate(cfg, point, variable, &trials, &mut records);
    }
    Ok(records)
}

fn run_as(cfg: &ExperimentConfig, experiment: Experiment) -> Result<Vec<ResultRecord>, ConfigError> {
    if cfg.experiment != experiment {
        return Err(ConfigError::Invalid(format!(
            "configuration is for {}, not {}",
            cfg.experiment.name(),
            experiment.name()
        )));
    }
    run_experiment(cfg)
}

/// Normalized estimation error of `R_a` over `(K, L)`.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, ConfigError> {
    run_as(cfg, Experiment::Fig1)
}

/// RMSE versus SNR.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, ConfigError> {
    run_as(cfg, Experiment::Fig2)
}

/// RMSE versus snapshot count.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, ConfigError> {
    run_as(cfg, Experiment::Fig3)
}
