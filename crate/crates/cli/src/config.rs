//! Experiment configuration, read from TOML.

use std::path::Path;

use lrthcr::{HarmonicScene, MeasurementDesign, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LrthcrConstrained,
    LrthcrRegularized,
    LrthcrNoisePlugged,
    Cmra,
    NcMusicDirect,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LrthcrConstrained => "lrthcr-constrained",
            Method::LrthcrRegularized => "lrthcr-regularized",
            Method::LrthcrNoisePlugged => "lrthcr-noise-plugged",
            Method::Cmra => "cmra",
            Method::NcMusicDirect => "nc-music-direct",
        }
    }

    /// Whether the method reconstructs the augmented covariance.
    pub fn reconstructs_augmented(self) -> bool {
        matches!(self, Method::LrthcrConstrained | Method::LrthcrRegularized | Method::LrthcrNoisePlugged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Rmse,
    Nee,
    FailureRate,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::Nee => "nee",
            Metric::FailureRate => "failure-rate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// Full array size `M`.
    pub m: usize,
    /// 1-based selected sensors; omitted means full observation.
    #[serde(default)]
    pub omega: Option<Vec<usize>>,
}

impl DesignConfig {
    pub fn build(&self) -> Result<MeasurementDesign, ConfigError> {
        let d = match &self.omega {
            Some(o) => MeasurementDesign::selection(self.m, o),
            None => MeasurementDesign::identity(self.m),
        };
        d.map_err(|e| ConfigError::Invalid(format!("design: {e}")))
    }
}

/// Source parameters. Frequencies and phases left unset are drawn per trial,
/// frequencies uniformly on `(-1/2, 1/2]` and phases uniformly on `(0, π]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub frequencies: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
    /// Per-source powers; equal unit powers when unset.
    pub powers: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Source counts; defaults to the number of fixed frequencies.
    #[serde(default)]
    pub k: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub snapshots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub design: DesignConfig,
    #[serde(default)]
    pub scene: SceneConfig,
    pub sweep: SweepConfig,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub methods: Vec<Method>,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_step")]
    pub grid_step: f64,
}

fn default_step() -> f64 {
    lrthcr::retrieval::DEFAULT_STEP
}

fn ascending<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if cfg.sweep.k.is_empty() {
            if let Some(f) = &cfg.scene.frequencies {
                cfg.sweep.k = vec![f.len()];
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        let s = &self.sweep;
        if s.k.is_empty() || s.snr_db.is_empty() || s.snapshots.is_empty() {
            return bad("sweeps must be nonempty".into());
        }
        if !ascending(&s.k) || !ascending(&s.snr_db) || !ascending(&s.snapshots) {
            return bad("sweeps must be strictly ascending".into());
        }
        if s.k[0] < 1 || s.snapshots[0] < 1 || s.snr_db.iter().any(|v| !v.is_finite()) {
            return bad("sweep values out of range".into());
        }
        if self.methods.is_empty() || self.metrics.is_empty() {
            return bad("methods and metrics must be nonempty".into());
        }
        let design = self.design.build()?;
        if s.k.iter().any(|&k| 2 * k >= 2 * design.full_dim()) {
            return bad(format!("source count must be below M = {}", design.full_dim()));
        }
        let sc = &self.scene;
        if let Some(f) = &sc.frequencies {
            if s.k != [f.len()] {
                return bad("fixed frequencies require a single matching K".into());
            }
        }
        for (name, v) in [("phases", &sc.phases), ("powers", &sc.powers)] {
            if let Some(v) = v {
                if s.k != [v.len()] {
                    return bad(format!("fixed {name} require a single matching K"));
                }
            }
        }
        if let (Some(f), Some(p)) = (&sc.frequencies, &sc.phases) {
            let r = sc.powers.clone().unwrap_or_else(|| vec![1.0; f.len()]);
            HarmonicScene::new(f.clone(), p.clone(), r).map_err(|e| ConfigError::Invalid(format!("scene: {e}")))?;
        }
        if let Some(r) = &sc.powers {
            if r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return bad("powers must be positive".into());
            }
        }
        self.solver.validate().map_err(|e| ConfigError::Invalid(format!("solver: {e}")))?;
        lrthcr::retrieval::frequency_grid(self.grid_step)
            .map_err(|e| ConfigError::Invalid(format!("grid_step: {e}")))?;
        match self.experiment {
            Experiment::Fig1 if !self.metrics.contains(&Metric::Nee) => bad("fig1 reports NEE".into()),
            Experiment::Fig1 if !self.methods.iter().any(|m| m.reconstructs_augmented()) => {
                bad("fig1 needs an LRTHCR method".into())
            }
            Experiment::Fig2 | Experiment::Fig3 if !self.metrics.contains(&Metric::Rmse) => {
                bad(format!("{} reports RMSE", self.experiment.name()))
            }
            _ => Ok(()),
        }
    }
}
