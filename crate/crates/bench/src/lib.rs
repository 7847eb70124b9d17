//! Criterion benchmarks for the reconstruction pipeline, with the shared
//! fixtures they run on.

use lrthcr::{sample_moments, synthesize_snapshots, HarmonicScene, MeasurementDesign, SampleMoments};

/// Four sources observed through four of seven sensors.
pub fn ruler_scene() -> (HarmonicScene, MeasurementDesign) {
    let scene = HarmonicScene::equal_power(vec![-0.3, 0.0, 0.2, 0.4], vec![0.3, 1.1, 2.0, 2.8]).expect("valid scene");
    let design = MeasurementDesign::selection(7, &[1, 2, 5, 7]).expect("valid design");
    (scene, design)
}

/// Sample moments of `l` snapshots at `snr_db`, from a fixed seed.
pub fn ruler_moments(l: usize, snr_db: f64) -> (HarmonicScene, MeasurementDesign, SampleMoments) {
    let (scene, design) = ruler_scene();
    let batch = synthesize_snapshots(&scene, &design, l, scene.noise_var_for_snr(snr_db), 1).expect("valid batch");
    (scene, design, sample_moments(&batch))
}
