//! Snapshots to frequencies through each reconstruction mode and the baselines.

use lrthcr::baseline::{baseline_cmra, baseline_nc_music_direct};
use lrthcr::linalg::HermitianEigen;
use lrthcr::solver::solve;
use lrthcr::{
    match_to_truth, nc_music_spectrum, sample_moments, synthesize_snapshots, HarmonicScene, MeasurementDesign,
    SolverConfig, SolverMode,
};

fn fig2_scene() -> (HarmonicScene, MeasurementDesign) {
    let scene = HarmonicScene::equal_power(vec![-0.3, 0.0, 0.2, 0.4], vec![0.3, 1.1, 2.0, 2.8]).unwrap();
    (scene, MeasurementDesign::selection(7, &[1, 2, 5, 7]).unwrap())
}

fn worst_error(est: &[f64], truth: &[f64]) -> f64 {
    match_to_truth(est, truth).unwrap().iter().fold(0.0, |m, e| m.max(e.abs()))
}

#[test]
fn every_mode_resolves_more_sources_than_sensors() {
    let (scene, design) = fig2_scene();
    let batch = synthesize_snapshots(&scene, &design, 2000, scene.noise_var_for_snr(20.0), 11).unwrap();
    let m = sample_moments(&batch);
    for mode in [SolverMode::Constrained, SolverMode::Regularized, SolverMode::NoisePlugged] {
        let report = solve(&m, &design, &SolverConfig { mode, ..Default::default() }).unwrap();
        let r = &report.estimate.matrix;
        assert!(report.estimate.structure_defect() <= 1e-10 * r.norm(), "{mode:?}");
        assert!(HermitianEigen::new(r).min() >= -1e-10 * r.norm(), "{mode:?}");
        let spectrum = nc_music_spectrum(r, 4, 1e-4).unwrap();
        let err = worst_error(&spectrum.peaks, scene.frequencies());
        assert!(err < 5e-3, "{mode:?}: worst error {err:e}, peaks {:?}", spectrum.peaks);
    }
}

#[test]
fn direct_nc_music_resolves_the_same_scene() {
    let (scene, design) = fig2_scene();
    let batch = synthesize_snapshots(&scene, &design, 2000, scene.noise_var_for_snr(20.0), 11).unwrap();
    let spectrum = baseline_nc_music_direct(&batch, &design, 4, 1e-4).unwrap();
    assert!(worst_error(&spectrum.peaks, scene.frequencies()) < 5e-3, "{:?}", spectrum.peaks);
}

#[test]
fn covariance_only_baseline_with_fewer_sources() {
    let scene = HarmonicScene::equal_power(vec![-0.25, 0.15], vec![0.5, 1.5]).unwrap();
    let design = MeasurementDesign::selection(7, &[1, 2, 5, 7]).unwrap();
    let batch = synthesize_snapshots(&scene, &design, 2000, scene.noise_var_for_snr(20.0), 5).unwrap();
    let est = baseline_cmra(&sample_moments(&batch), &design, &SolverConfig::default()).unwrap();
    let spectrum = est.frequencies(2, 1e-4).unwrap();
    assert!(worst_error(&spectrum.peaks, scene.frequencies()) < 5e-3, "{:?}", spectrum.peaks);
}

#[test]
fn identical_seeds_give_identical_estimates() {
    let (scene, design) = fig2_scene();
    let run = || {
        let batch = synthesize_snapshots(&scene, &design, 300, scene.noise_var_for_snr(5.0), 42).unwrap();
        solve(&sample_moments(&batch), &design, &SolverConfig::default()).unwrap().estimate.matrix
    };
    assert_eq!(run(), run());
}
