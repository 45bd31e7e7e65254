//! Named experiment bundles. Each preset writes one CSV and one SVG.

use fbsim_core::analytic::{
    subf_bopt, subf_rate_approx, zf_bopt_fixed_point, zf_bopt_lambert, zf_penalty_approx,
    zf_rate_approx, AnalyticParams, SubfForm,
};
use fbsim_core::montecarlo::{
    find_bopt_empirical, sweep_b, ExperimentConfig, RateEstimate, Scheme,
};
use fbsim_core::quantization::QuantizerKind;
use fbsim_core::schemes::CqiKind;
use fbsim_core::{db_to_linear, linear_to_db};

use crate::error::{CliError, CliResult};
use crate::output::ResultRow;
use crate::svg::{Chart, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PresetOptions {
    pub seed: u64,
    pub trials: u64,
}

pub struct PresetOutput {
    pub rows: Vec<ResultRow>,
    pub chart: Chart,
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    run: fn(&PresetOptions) -> CliResult<PresetOutput>,
}

impl Preset {
    pub fn run(&self, opts: &PresetOptions) -> CliResult<PresetOutput> {
        (self.run)(opts)
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2_zf_sweep",
        description: "zero-forcing sum rate vs B with the analytic rate overlay",
        run: fig2_zf_sweep,
    },
    Preset {
        name: "fig3_penalty",
        description: "quantized vs perfect-CSI zero-forcing and the interference penalty",
        run: fig3_penalty,
    },
    Preset {
        name: "fig4_bopt_vs_tfb",
        description: "empirical and analytic optimal B vs feedback budget",
        run: fig4_bopt_vs_tfb,
    },
    Preset {
        name: "fig5_bopt_vs_snr",
        description: "empirical and analytic optimal B vs SNR",
        run: fig5_bopt_vs_snr,
    },
    Preset {
        name: "fig6_pu2rc_sweep",
        description: "PU2RC sum rate vs B, nt = 4",
        run: fig6_pu2rc_sweep,
    },
    Preset {
        name: "fig7_zf_vs_pu2rc",
        description: "zero-forcing vs PU2RC with optimized B across budgets",
        run: fig7_zf_vs_pu2rc,
    },
    Preset {
        name: "fig8_vs_nt",
        description: "sum rate vs nt with optimized B, tfb = 500",
        run: fig8_vs_nt,
    },
    Preset {
        name: "fig9_selection_cqi",
        description: "greedy / simplified selection with norm and SINR CQI",
        run: fig9_selection_cqi,
    },
    Preset {
        name: "fig10_quantizers",
        description: "zero-forcing with optimized B for RVQ, scalar and idealized quantizers",
        run: fig10_quantizers,
    },
    Preset {
        name: "fig11_subf",
        description: "single-user beamforming sum rate vs B with the analytic overlay",
        run: fig11_subf,
    },
    Preset {
        name: "tab_intro_example",
        description: "zero-forcing at B = 20, 10, 4 with tfb = 100",
        run: tab_intro_example,
    },
];

pub fn find(name: &str) -> CliResult<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Config(format!(
            "unknown preset '{name}'; available: {}",
            names.join(", ")
        ))
    })
}

fn config(
    opts: &PresetOptions,
    scheme: Scheme,
    nt: usize,
    snr_db: f64,
    tfb: u32,
) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(scheme, nt, db_to_linear(snr_db), tfb);
    cfg.trials = opts.trials;
    cfg.seed = opts.seed;
    cfg.relaxed = true;
    cfg
}

/// `lo..=hi` stepped by `step`, clipped to the budget's feasible range.
fn grid(cfg: &ExperimentConfig, lo: u32, hi: u32, step: usize) -> Vec<u32> {
    let feasible = cfg.feasible_b_values();
    (lo..=hi)
        .step_by(step)
        .filter(|b| feasible.contains(b))
        .collect()
}

fn row(label: &str, cfg: &ExperimentConfig, est: &RateEstimate, extra: Option<f64>) -> ResultRow {
    ResultRow {
        scheme: label.to_string(),
        nt: cfg.nt,
        snr_db: round_db(linear_to_db(cfg.snr)),
        tfb: cfg.tfb,
        b: est.b,
        users: est.users,
        mean_rate: est.mean,
        std_error: est.std_error,
        trials: est.trials,
        extra,
    }
}

/// Keeps dB labels such as `10` from printing as `10.000000000000002`.
fn round_db(db: f64) -> f64 {
    (db * 1e9).round() / 1e9
}

/// Analytic zero-forcing optimum, preferring the LambertW form.
fn analytic_bopt(snr: f64, nt: usize, tfb: u32) -> Option<f64> {
    zf_bopt_lambert(snr, nt, tfb as f64)
        .ok()
        .or_else(|| zf_bopt_fixed_point(snr, nt, tfb as f64).ok().map(|s| s.b))
}

/// Searches integer `b` around the analytic optimum (or over `fallback`).
fn optimize(cfg: &mut ExperimentConfig, below: u32, above: u32) -> CliResult<RateEstimate> {
    let hi_cap = cfg.tfb / cfg.nt as u32;
    let centre = match cfg.scheme {
        Scheme::Pu2rc | Scheme::Rbf => None,
        _ => analytic_bopt(cfg.snr, cfg.nt, cfg.tfb),
    };
    cfg.b_values = match centre {
        Some(c) => {
            let c = c.round().max(1.0) as u32;
            grid(cfg, c.saturating_sub(below), (c + above).min(hi_cap), 1)
        }
        None => grid(cfg, 1, (below + above).min(hi_cap), 1),
    };
    if cfg.b_values.is_empty() {
        cfg.b_values = cfg.feasible_b_values();
    }
    Ok(find_bopt_empirical(cfg)?.best)
}

fn sweep_series(chart: &mut Chart, label: &str, sweep: &[RateEstimate]) {
    chart.push(Series::new(
        label,
        sweep.iter().map(|e| (e.b as f64, e.mean)).collect(),
    ));
}

fn overlay_series(chart: &mut Chart, label: &str, rows: &[ResultRow]) {
    let pts = rows
        .iter()
        .filter_map(|r| r.extra.map(|y| (r.b as f64, y)))
        .collect();
    chart.push(Series::dashed(label, pts));
}

fn fig2_zf_sweep(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    let mut chart = Chart::new(
        "Zero-forcing sum rate vs feedback per user",
        "B (bits/user)",
        "sum rate (bps/Hz)",
    );
    for (nt, snr_db, tfb, lo, hi, step) in [
        (4, 10.0, 300, 4, 40, 2),
        (4, 5.0, 300, 4, 40, 2),
        (2, 10.0, 100, 1, 30, 1),
    ] {
        let mut cfg = config(opts, Scheme::ZfGreedy, nt, snr_db, tfb);
        cfg.b_values = grid(&cfg, lo, hi, step);
        let sweep = sweep_b(&cfg)?;
        let label = format!("zf nt={nt} {snr_db}dB tfb={tfb}");
        let series_rows: Vec<_> = sweep
            .iter()
            .map(|e| {
                let approx =
                    zf_rate_approx(&AnalyticParams::new(cfg.snr, nt, tfb as f64, e.b as f64)).ok();
                row(&label, &cfg, e, approx)
            })
            .collect();
        sweep_series(&mut chart, &label, &sweep);
        overlay_series(&mut chart, &format!("{label} approx"), &series_rows);
        rows.extend(series_rows);
    }
    Ok(PresetOutput { rows, chart })
}

fn fig3_penalty(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let (nt, snr_db, tfb) = (4, 10.0, 300);
    let mut chart = Chart::new(
        "Zero-forcing: quantized vs perfect CSI (nt = 4, tfb = 300, 10 dB)",
        "B (bits/user)",
        "sum rate (bps/Hz)",
    );
    let mut quantized = config(opts, Scheme::ZfGreedy, nt, snr_db, tfb);
    quantized.b_values = grid(&quantized, 4, 40, 2);
    let mut perfect = quantized.clone();
    perfect.quantizer = QuantizerKind::Perfect;
    let q = sweep_b(&quantized)?;
    let p = sweep_b(&perfect)?;

    // The quantized row's extra is the perfect-CSI rate minus the analytic
    // penalty; the perfect row's extra is the penalty itself.
    let mut rows = Vec::new();
    let mut approx_rows = Vec::new();
    for (eq, ep) in q.iter().zip(&p) {
        let penalty = zf_penalty_approx(&AnalyticParams::new(
            quantized.snr,
            nt,
            tfb as f64,
            eq.b as f64,
        ))
        .ok();
        let approx = penalty.map(|pen| ep.mean - pen);
        let r = row("zf_rvq", &quantized, eq, approx);
        approx_rows.push(r.clone());
        rows.push(r);
        rows.push(row("zf_perfect", &perfect, ep, penalty));
    }
    sweep_series(&mut chart, "RVQ", &q);
    sweep_series(&mut chart, "perfect CSI", &p);
    overlay_series(&mut chart, "perfect - penalty", &approx_rows);
    Ok(PresetOutput { rows, chart })
}

/// Rows hold the empirical optimum in `b` and the analytic optimum in
/// `extra`.
fn bopt_rows(
    opts: &PresetOptions,
    label: &str,
    points: impl IntoIterator<Item = (usize, f64, u32)>,
) -> CliResult<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (nt, snr_db, tfb) in points {
        let mut cfg = config(opts, Scheme::ZfGreedy, nt, snr_db, tfb);
        let best = optimize(&mut cfg, 8, 8)?;
        rows.push(row(label, &cfg, &best, analytic_bopt(cfg.snr, nt, tfb)));
    }
    Ok(rows)
}

fn fig4_bopt_vs_tfb(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let budgets = [50, 100, 200, 300, 500, 1000];
    let mut rows = Vec::new();
    let mut chart = Chart::new(
        "Optimal B vs feedback budget (10 dB)",
        "tfb (bits)",
        "B (bits/user)",
    );
    for nt in [2, 4] {
        let label = format!("zf_bopt nt={nt}");
        let r = bopt_rows(opts, &label, budgets.iter().map(|&t| (nt, 10.0, t)))?;
        chart.push(Series::new(
            format!("{label} simulated"),
            r.iter().map(|r| (r.tfb as f64, r.b as f64)).collect(),
        ));
        chart.push(Series::dashed(
            format!("{label} analytic"),
            r.iter()
                .filter_map(|r| r.extra.map(|b| (r.tfb as f64, b)))
                .collect(),
        ));
        rows.extend(r);
    }
    Ok(PresetOutput { rows, chart })
}

fn fig5_bopt_vs_snr(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let snrs = [0.0, 5.0, 10.0, 15.0, 20.0];
    let label = "zf_bopt nt=4";
    let rows = bopt_rows(opts, label, snrs.iter().map(|&s| (4, s, 300)))?;
    let mut chart = Chart::new(
        "Optimal B vs SNR (nt = 4, tfb = 300)",
        "SNR (dB)",
        "B (bits/user)",
    );
    chart.push(Series::new(
        "simulated",
        rows.iter().map(|r| (r.snr_db, r.b as f64)).collect(),
    ));
    chart.push(Series::dashed(
        "analytic",
        rows.iter()
            .filter_map(|r| r.extra.map(|b| (r.snr_db, b)))
            .collect(),
    ));
    Ok(PresetOutput { rows, chart })
}

fn fig6_pu2rc_sweep(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    let mut chart = Chart::new(
        "PU2RC sum rate vs B (nt = 4, 10 dB)",
        "B (bits/user)",
        "sum rate (bps/Hz)",
    );
    for tfb in [100, 300, 500] {
        let mut cfg = config(opts, Scheme::Pu2rc, 4, 10.0, tfb);
        cfg.b_values = grid(&cfg, 2, 8, 1);
        let sweep = sweep_b(&cfg)?;
        let label = format!("pu2rc tfb={tfb}");
        sweep_series(&mut chart, &label, &sweep);
        rows.extend(
            sweep
                .iter()
                .map(|e| row(&label, &cfg, e, Some(e.mean_scheduled))),
        );
    }
    Ok(PresetOutput { rows, chart })
}

fn optimized_pair(
    opts: &PresetOptions,
    nt: usize,
    snr_db: f64,
    tfb: u32,
    rows: &mut Vec<ResultRow>,
) -> CliResult<()> {
    let mut zf = config(opts, Scheme::ZfGreedy, nt, snr_db, tfb);
    let best = optimize(&mut zf, 8, 8)?;
    rows.push(row("zf_opt", &zf, &best, None));
    if nt.is_power_of_two() {
        let mut pu = config(opts, Scheme::Pu2rc, nt, snr_db, tfb);
        let lo = (nt as f64).log2() as u32;
        pu.b_values = grid(&pu, lo.max(1), lo + 6, 1);
        let best = find_bopt_empirical(&pu)?.best;
        rows.push(row("pu2rc_opt", &pu, &best, None));
    }
    Ok(())
}

fn split_series(chart: &mut Chart, rows: &[ResultRow], x: fn(&ResultRow) -> f64) {
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.scheme.as_str()) {
            labels.push(&r.scheme);
        }
    }
    for label in labels {
        let pts = rows
            .iter()
            .filter(|r| r.scheme == label)
            .map(|r| (x(r), r.mean_rate))
            .collect();
        chart.push(Series::new(label, pts));
    }
}

fn fig7_zf_vs_pu2rc(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    for tfb in [50, 100, 200, 300, 500, 1000] {
        optimized_pair(opts, 4, 10.0, tfb, &mut rows)?;
    }
    let mut chart = Chart::new(
        "Optimized-B sum rate: ZF vs PU2RC (nt = 4, 10 dB)",
        "tfb (bits)",
        "sum rate (bps/Hz)",
    );
    split_series(&mut chart, &rows, |r| r.tfb as f64);
    Ok(PresetOutput { rows, chart })
}

fn fig8_vs_nt(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    for nt in [2, 3, 4, 5, 6, 8] {
        optimized_pair(opts, nt, 10.0, 500, &mut rows)?;
    }
    let mut chart = Chart::new(
        "Optimized-B sum rate vs nt (tfb = 500, 10 dB)",
        "nt",
        "sum rate (bps/Hz)",
    );
    split_series(&mut chart, &rows, |r| r.nt as f64);
    Ok(PresetOutput { rows, chart })
}

fn fig9_selection_cqi(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    let mut chart = Chart::new(
        "Selection and CQI (nt = 4, tfb = 300, 10 dB)",
        "B (bits/user)",
        "sum rate (bps/Hz)",
    );
    for scheme in [Scheme::ZfGreedy, Scheme::ZfSimplified] {
        for cqi in [CqiKind::Norm2, CqiKind::ExpectedSinr] {
            let mut cfg = config(opts, scheme, 4, 10.0, 300);
            cfg.cqi_kind = cqi;
            cfg.b_values = grid(&cfg, 10, 34, 2);
            let sweep = sweep_b(&cfg)?;
            let label = format!("{scheme}/{cqi}");
            sweep_series(&mut chart, &label, &sweep);
            rows.extend(sweep.iter().map(|e| row(&label, &cfg, e, None)));
        }
    }
    Ok(PresetOutput { rows, chart })
}

fn fig10_quantizers(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    for tfb in [100, 200, 300, 500] {
        for (kind, below, above) in [
            (QuantizerKind::RvqStatistical, 8, 8),
            (QuantizerKind::Scalar, 4, 14),
            (QuantizerKind::Idealized, 8, 8),
        ] {
            let mut cfg = config(opts, Scheme::ZfGreedy, 4, 10.0, tfb);
            cfg.quantizer = kind;
            let best = optimize(&mut cfg, below, above)?;
            rows.push(row(kind.name(), &cfg, &best, None));
        }
    }
    let mut chart = Chart::new(
        "Optimized-B zero-forcing by quantizer (nt = 4, 10 dB)",
        "tfb (bits)",
        "sum rate (bps/Hz)",
    );
    split_series(&mut chart, &rows, |r| r.tfb as f64);
    Ok(PresetOutput { rows, chart })
}

fn fig11_subf(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut rows = Vec::new();
    let mut chart = Chart::new(
        "Single-user beamforming vs B (nt = 4, 5 dB)",
        "B (bits/user)",
        "rate (bps/Hz)",
    );
    for tfb in [100, 300] {
        let mut cfg = config(opts, Scheme::Subf, 4, 5.0, tfb);
        cfg.b_values = grid(&cfg, 2, 30, 2);
        let sweep = sweep_b(&cfg)?;
        let label = format!("subf tfb={tfb}");
        let approx =
            |b: f64| subf_rate_approx(cfg.snr, 4, tfb as f64, b, SubfForm::Simplified).ok();
        let series_rows: Vec<_> = sweep
            .iter()
            .map(|e| row(&label, &cfg, e, approx(e.b as f64)))
            .collect();
        sweep_series(&mut chart, &label, &sweep);
        overlay_series(&mut chart, &format!("{label} approx"), &series_rows);
        rows.extend(series_rows);
        // Analytic optimum as a row of its own: b rounded, extra exact.
        if let Ok(b) = subf_bopt(4, tfb as f64) {
            let bi = b.round() as u32;
            rows.push(ResultRow {
                scheme: format!("subf_bopt_analytic tfb={tfb}"),
                nt: 4,
                snr_db: 5.0,
                tfb,
                b: bi,
                users: cfg.users(bi),
                mean_rate: approx(b).unwrap_or(f64::NAN),
                std_error: 0.0,
                trials: 0,
                extra: Some(b),
            });
        }
    }
    Ok(PresetOutput { rows, chart })
}

fn tab_intro_example(opts: &PresetOptions) -> CliResult<PresetOutput> {
    let mut cfg = config(opts, Scheme::ZfGreedy, 4, 10.0, 100);
    cfg.relaxed = false;
    cfg.b_values = vec![20, 10, 4];
    let sweep = sweep_b(&cfg)?;
    let rows: Vec<_> = sweep.iter().map(|e| row("zf", &cfg, e, None)).collect();
    let mut chart = Chart::new(
        "Zero-forcing, tfb = 100, nt = 4, 10 dB",
        "B (bits/user)",
        "sum rate (bps/Hz)",
    );
    let mut pts: Vec<_> = sweep.iter().map(|e| (e.b as f64, e.mean)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    chart.push(Series::new("zf", pts));
    Ok(PresetOutput { rows, chart })
}
