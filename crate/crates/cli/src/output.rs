//! CSV tables and the JSON metadata sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, Metric};
use crate::experiment::ResultRecord;

/// Header and rows of the figure table for `cfg.experiment`.
pub fn table(cfg: &ExperimentConfig, records: &[ResultRecord]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let fmt = |v: f64| format!("{v}");
    match cfg.experiment {
        Experiment::Fig1 => {
            let method = cfg.methods.iter().copied().find(|m| m.reconstructs_augmented());
            let rows = records
                .iter()
                .filter(|r| Some(r.method) == method && r.metric == Metric::Nee)
                .map(|r| vec![r.point.k.to_string(), r.point.snapshots.to_string(), fmt(r.value)])
                .collect();
            (vec!["K", "L", "NEE"], rows)
        }
        Experiment::Fig2 | Experiment::Fig3 => {
            let rows = records
                .iter()
                .filter(|r| r.metric == Metric::Rmse)
                .map(|r| {
                    let x = if cfg.experiment == Experiment::Fig2 {
                        fmt(r.point.snr_db)
                    } else {
                        r.point.snapshots.to_string()
                    };
                    vec![r.method.name().to_string(), x, fmt(r.value), r.failures.to_string()]
                })
                .collect();
            let header = if cfg.experiment == Experiment::Fig2 {
                vec!["method", "snr_db", "rmse", "failures"]
            } else {
                vec!["method", "L", "rmse", "failures"]
            };
            (header, rows)
        }
        Experiment::Custom => {
            let rows = records
                .iter()
                .map(|r| {
                    vec![
                        r.method.name().to_string(),
                        r.point.k.to_string(),
                        fmt(r.point.snr_db),
                        r.point.snapshots.to_string(),
                        r.metric.name().to_string(),
                        fmt(r.value),
                        r.trials_used.to_string(),
                        r.failures.to_string(),
                    ]
                })
                .collect();
            (vec!["method", "K", "snr_db", "L", "metric", "value", "trials_used", "failures"], rows)
        }
    }
}

pub fn write_csv<W: Write>(cfg: &ExperimentConfig, records: &[ResultRecord], out: W) -> csv::Result<()> {
    let (header, rows) = table(cfg, records);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn metadata(cfg: &ExperimentConfig, records: &[ResultRecord], wall_time_s: f64) -> serde_json::Value {
    json!({
        "experiment": cfg.experiment.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg,
        "conventions": {
            "snr_db": "10 log10(sum_i r_i / (K sigma^2)), per-source average power against per-sensor noise power",
            "rmse": "(1/K) sum_k sqrt(mean over successful trials of (f_est_k - f_k)^2), circular errors after optimal matching",
            "nee": "mean ||R_est - R_true||_F / mean ||R_true||_F over successful trials",
            "failures": "trials whose reconstruction or peak search failed; excluded from the metric",
            "frequency_grid": format!("(-1/2, 1/2] with step {}", cfg.grid_step),
            "lrthcr_mode": cfg.solver.mode,
            "p_deviation": cfg.solver.p_deviation,
        },
        "wall_time_s": wall_time_s,
        "records": records,
    })
}

/// Write `<name>.csv` and `<name>.meta.json` into `dir`, returning the CSV path.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    records: &[ResultRecord],
    wall_time_s: f64,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let name = cfg.experiment.name();
    let csv_path = dir.join(format!("{name}.csv"));
    let file = std::fs::File::create(&csv_path)?;
    write_csv(cfg, records, std::io::BufWriter::new(file)).map_err(std::io::Error::other)?;
    let meta = serde_json::to_string_pretty(&metadata(cfg, records, wall_time_s)).map_err(std::io::Error::other)?;
    std::fs::write(dir.join(format!("{name}.meta.json")), meta)?;
    Ok(csv_path)
}
