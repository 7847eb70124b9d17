//! Monte-Carlo experiments comparing LRTHCR with covariance-only
//! reconstruction and direct NC-MUSIC.
//!
//! An [`ExperimentConfig`] names a design, a scene, a sweep over source
//! count, SNR and snapshot count, the methods and the metrics. Trials draw
//! their data from per-trial ChaCha8 streams, so results do not depend on
//! the number of worker threads.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{DesignConfig, Experiment, ExperimentConfig, Method, Metric, SceneConfig, SweepConfig};
pub use error::ConfigError;
pub use experiment::{run_experiment, run_fig1, run_fig2, run_fig3, sweep_points, ResultRecord, SweepPoint};
pub use output::{write_csv, write_outputs};

/// Default configurations for the fig1, fig2, fig3 and custom experiments.
pub fn preset(experiment: Experiment) -> ExperimentConfig {
    let text = match experiment {
        Experiment::Fig1 => include_str!("../configs/fig1.toml"),
        Experiment::Fig2 => include_str!("../configs/fig2.toml"),
        Experiment::Fig3 => include_str!("../configs/fig3.toml"),
        Experiment::Custom => include_str!("../configs/custom.toml"),
    };
    ExperimentConfig::from_toml(text).expect("bundled configuration is valid")
}
