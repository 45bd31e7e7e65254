//! Command-line front end for the feedback simulator: experiment files,
//! named presets, CSV results and SVG charts.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod svg;

use std::path::Path;

use fbsim_core::analytic::{phi, subf_rate_approx, zf_rate_approx, AnalyticParams, SubfForm};
use fbsim_core::channel::ReceiverCsi;
use fbsim_core::montecarlo::{sweep_b, Scheme};

pub use config::{load_run_config, RunConfig};
pub use error::{CliError, CliResult};
pub use output::{read_csv, write_csv, write_outputs, ResultRow, Written};
pub use presets::{PresetOptions, PRESETS};
pub use svg::{Chart, Series};

/// Analytic overlay for a swept point, where one exists.
fn overlay(cfg: &RunConfig, b: u32) -> Option<f64> {
    let e = &cfg.experiment;
    let (tfb, bf) = (e.tfb as f64, b as f64);
    match e.scheme {
        Scheme::ZfGreedy | Scheme::ZfSimplified => {
            let beta = match e.csi {
                ReceiverCsi::Perfect => f64::INFINITY,
                ReceiverCsi::Trained { beta } => beta,
            };
            let p = AnalyticParams::new(e.snr, e.nt, tfb, bf).with_phi(phi(e.snr, e.r, beta));
            zf_rate_approx(&p).ok()
        }
        Scheme::Subf => subf_rate_approx(e.snr, e.nt, tfb, bf, SubfForm::Simplified).ok(),
        Scheme::Rbf | Scheme::Pu2rc => None,
    }
}

/// Runs the sweep an experiment file describes.
pub fn run_config(cfg: &RunConfig) -> CliResult<(Vec<ResultRow>, Chart)> {
    let e = &cfg.experiment;
    let sweep = sweep_b(e)?;
    let label = e.scheme.name();
    let rows: Vec<ResultRow> = sweep
        .iter()
        .map(|est| ResultRow {
            scheme: label.to_string(),
            nt: e.nt,
            snr_db: cfg.snr_db,
            tfb: e.tfb,
            b: est.b,
            users: est.users,
            mean_rate: est.mean,
            std_error: est.std_error,
            trials: est.trials,
            extra: overlay(cfg, est.b),
        })
        .collect();
    let mut chart = Chart::new(
        format!("{label}: nt = {}, {} dB, tfb = {}", e.nt, cfg.snr_db, e.tfb),
        "B (bits/user)",
        "sum rate (bps/Hz)",
    );
    let mut pts: Vec<_> = rows.iter().map(|r| (r.b as f64, r.mean_rate)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    chart.push(Series::new(label, pts));
    let mut approx: Vec<_> = rows
        .iter()
        .filter_map(|r| r.extra.map(|y| (r.b as f64, y)))
        .collect();
    approx.sort_by(|a, b| a.0.total_cmp(&b.0));
    chart.push(Series::dashed("analytic", approx));
    Ok((rows, chart))
}

/// Loads, runs and writes an experiment file.
pub fn run_file(
    path: &Path,
    overrides: &[String],
) -> CliResult<(RunConfig, Vec<ResultRow>, Written)> {
    let cfg = load_run_config(path, overrides)?;
    let (rows, chart) = run_config(&cfg)?;
    let written = write_outputs(&cfg.out_dir, &cfg.name, &rows, &chart)?;
    Ok((cfg, rows, written))
}

/// Runs a named preset and writes `<dir>/<name>.csv` and `.svg`.
pub fn run_preset(
    name: &str,
    opts: &PresetOptions,
    dir: &Path,
) -> CliResult<(Vec<ResultRow>, Written)> {
    let preset = presets::find(name)?;
    let out = preset.run(opts)?;
    let written = write_outputs(dir, preset.name, &out.rows, &out.chart)?;
    Ok((out.rows, written))
}
