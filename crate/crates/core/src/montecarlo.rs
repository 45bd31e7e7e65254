//! Seeded Monte Carlo engine.
//!
//! Every trial owns an [`RngStream`] keyed by `(seed, (b << 32) | trial)`, so
//! a trial's draws depend only on the seed, the bit count and its index.
//! Trials run on the rayon pool into per-trial slots and are summed in trial
//! order afterwards, which makes aggregates bit-identical for any number of
//! worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{draw_block, ChannelModelConfig, ReceiverCsi};
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::quantization::{CqiQuantizerSpec, QuantizerKind, QuantizerSpec};
use crate::schemes::{
    pu2rc_block, rbf_block, subf_block, zf_block, BlockOutcome, CqiKind, Selection, ZfConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    ZfGreedy,
    ZfSimplified,
    Rbf,
    Pu2rc,
    Subf,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ZfGreedy => "zf",
            Scheme::ZfSimplified => "zf_simplified",
            Scheme::Rbf => "rbf",
            Scheme::Pu2rc => "pu2rc",
            Scheme::Subf => "subf",
        }
    }

    /// CQI kind the scheme reports when not zero-forcing.
    fn fixed_cqi_kind(self) -> Option<CqiKind> {
        match self {
            Scheme::Rbf | Scheme::Pu2rc => Some(CqiKind::RbfSinr),
            Scheme::Subf => Some(CqiKind::SubfSnr),
            Scheme::ZfGreedy | Scheme::ZfSimplified => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zf" | "zf_greedy" => Scheme::ZfGreedy,
            "zf_simplified" => Scheme::ZfSimplified,
            "rbf" => Scheme::Rbf,
            "pu2rc" => Scheme::Pu2rc,
            "subf" => Scheme::Subf,
            other => return Err(Error::Config(format!("unknown scheme '{other}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub nt: usize,
    /// Linear SNR.
    pub snr: f64,
    /// Aggregate feedback bits per block.
    pub tfb: u32,
    pub b_values: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    /// Direction quantizer for zero-forcing and single-user beamforming.
    pub quantizer: QuantizerKind,
    /// CQI reported under zero-forcing.
    pub cqi_kind: CqiKind,
    /// Charge and quantize CQI with this many bits per user.
    pub cqi_bits: Option<u32>,
    pub csi: ReceiverCsi,
    pub r: f64,
    pub mmse_exact: bool,
    /// Allow `b` that does not divide the budget; users = `floor(tfb / b)`.
    pub relaxed: bool,
}

impl ExperimentConfig {
    /// Zero-forcing with greedy selection, statistical RVQ and ideal CSI.
    pub fn new(scheme: Scheme, nt: usize, snr: f64, tfb: u32) -> Self {
        Self {
            scheme,
            nt,
            snr,
            tfb,
            b_values: Vec::new(),
            trials: 10_000,
            seed: 1,
            quantizer: QuantizerKind::RvqStatistical,
            cqi_kind: CqiKind::Norm2,
            cqi_bits: None,
            csi: ReceiverCsi::Perfect,
            r: 1.0,
            mmse_exact: true,
            relaxed: false,
        }
    }

    fn bits_per_user(&self, b: u32) -> u32 {
        b + self.cqi_bits.unwrap_or(0)
    }

    /// Users that fit in the budget at `b` direction bits each.
    pub fn users(&self, b: u32) -> usize {
        match self.bits_per_user(b) {
            0 => 0,
            per_user => (self.tfb / per_user) as usize,
        }
    }

    pub fn feasible_b_values(&self) -> Vec<u32> {
        feasible_b_values(self.nt, self.tfb, self.cqi_bits.unwrap_or(0), self.relaxed)
    }

    /// Checks the scheme parameters and every `b` in `b_values`.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.nt == 0 {
            return Err(Error::Config("nt must be >= 1".into()));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::Config(format!(
                "snr must be positive, got {}",
                self.snr
            )));
        }
        if self.b_values.is_empty() {
            return Err(Error::Config("b_values is empty".into()));
        }
        let feasible = self.feasible_b_values();
        for &b in &self.b_values {
            self.validate_b(b)?;
            if !feasible.contains(&b) {
                return Err(Error::Config(format!(
                    "b = {b} is not feasible for tfb = {}{}; feasible values: {}",
                    self.tfb,
                    if self.relaxed {
                        ""
                    } else {
                        " (b must divide the budget)"
                    },
                    join(&feasible)
                )));
            }
        }
        Ok(())
    }

    fn validate_b(&self, b: u32) -> Result<()> {
        if self.users(b) == 0 {
            return Err(Error::Config(format!(
                "b = {b} leaves no users in a budget of {} bits",
                self.tfb
            )));
        }
        match self.scheme {
            Scheme::Pu2rc => QuantizerSpec::new(QuantizerKind::Orthosets, b, self.nt).map(|_| ()),
            Scheme::Rbf => Ok(()),
            _ => QuantizerSpec::new(self.quantizer, b, self.nt).map(|_| ()),
        }
    }

    fn cqi_quantizer(&self) -> Result<Option<CqiQuantizerSpec>> {
        let kind = self.scheme.fixed_cqi_kind().unwrap_or(self.cqi_kind);
        self.cqi_bits
            .map(|bits| CqiQuantizerSpec::around(bits, kind.reference_db(self.nt, self.snr)))
            .transpose()
    }

    fn channel(&self, b: u32) -> ChannelModelConfig {
        ChannelModelConfig {
            nt: self.nt,
            num_users: self.users(b),
            csi: self.csi,
            r: self.r,
            snr: self.snr,
            mmse_exact: self.mmse_exact,
        }
    }
}

fn join(values: &[u32]) -> String {
    if values.is_empty() {
        return "none".into();
    }
    values
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Integers `b` with `log2 nt <= b <= tfb / nt` whose per-user charge
/// `b + cqi_bits` divides `tfb` (any charge when `relaxed`).
pub fn feasible_b_values(nt: usize, tfb: u32, cqi_bits: u32, relaxed: bool) -> Vec<u32> {
    if nt == 0 {
        return Vec::new();
    }
    let lo = (nt as f64).log2().ceil().max(1.0) as u32;
    let hi = tfb / nt as u32;
    (lo..=hi)
        .filter(|b| {
            let per_user = b + cqi_bits;
            tfb / per_user >= 1 && (relaxed || tfb.is_multiple_of(per_user))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateEstimate {
    pub b: u32,
    pub users: usize,
    pub trials: u64,
    /// Mean sum rate, bps/Hz.
    pub mean: f64,
    /// `sample_std / sqrt(trials)`; zero for a single trial.
    pub std_error: f64,
    /// Mean number of scheduled users.
    pub mean_scheduled: f64,
}

/// Stream id of trial `trial` at `b` bits.
pub fn stream_id(b: u32, trial: u64) -> u64 {
    ((b as u64) << 32) | (trial & 0xffff_ffff)
}

/// Runs one block of `cfg.scheme` at `b` bits on its own stream.
pub fn run_trial(cfg: &ExperimentConfig, b: u32, trial: u64) -> Result<BlockOutcome> {
    let mut rng = RngStream::new(cfg.seed, stream_id(b, trial));
    let realization = draw_block(&cfg.channel(b), &mut rng)?;
    let cqi_quantizer = cfg.cqi_quantizer()?;
    match cfg.scheme {
        Scheme::ZfGreedy | Scheme::ZfSimplified => {
            let zf = ZfConfig {
                quantizer: QuantizerSpec::new(cfg.quantizer, b, cfg.nt)?,
                cqi_kind: cfg.cqi_kind,
                cqi_quantizer,
                selection: if cfg.scheme == Scheme::ZfGreedy {
                    Selection::Greedy
                } else {
                    Selection::Simplified
                },
                snr: cfg.snr,
            };
            zf_block(&realization, &zf, &mut rng)
        }
        Scheme::Rbf => rbf_block(
            &realization,
            cfg.snr,
            cfg.nt,
            &mut rng,
            cqi_quantizer.as_ref(),
        ),
        Scheme::Pu2rc => pu2rc_block(
            &realization,
            b,
            cfg.snr,
            cfg.nt,
            &mut rng,
            cqi_quantizer.as_ref(),
        ),
        Scheme::Subf => {
            let q = QuantizerSpec::new(cfg.quantizer, b, cfg.nt)?;
            subf_block(&realization, &q, cfg.snr, &mut rng, cqi_quantizer.as_ref())
        }
    }
}

/// Mean sum rate over `cfg.trials` independent blocks at `b` bits per user.
pub fn run_point(cfg: &ExperimentConfig, b: u32) -> Result<RateEstimate> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if cfg.trials > u32::MAX as u64 {
        return Err(Error::Config(format!(
            "at most {} trials per point",
            u32::MAX
        )));
    }
    cfg.validate_b(b)?;

    let slots: Vec<(f64, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, b, t).map(|o| (o.sum_rate, o.plan.num_scheduled())))
        .collect::<Result<_>>()?;

    let n = slots.len() as f64;
    let mean = slots.iter().map(|s| s.0).sum::<f64>() / n;
    let std_error = if slots.len() > 1 {
        let var = slots.iter().map(|s| (s.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let mean_scheduled = slots.iter().map(|s| s.1 as f64).sum::<f64>() / n;
    Ok(RateEstimate {
        b,
        users: cfg.users(b),
        trials: cfg.trials,
        mean,
        std_error,
        mean_scheduled,
    })
}

/// [`run_point`] for every `b` in `cfg.b_values`, in order.
pub fn sweep_b(cfg: &ExperimentConfig) -> Result<Vec<RateEstimate>> {
    cfg.validate()?;
    cfg.b_values.iter().map(|&b| run_point(cfg, b)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalOptimum {
    pub best: RateEstimate,
    /// Gap to the second-best point in pooled standard errors.
    pub runner_up_gap_se: Option<f64>,
    pub sweep: Vec<RateEstimate>,
}

/// Argmax of a sweep; the smaller `b` wins ties.
pub fn find_bopt_empirical(cfg: &ExperimentConfig) -> Result<EmpiricalOptimum> {
    let sweep = sweep_b(cfg)?;
    optimum_of(sweep)
}

/// Picks the best point of an existing sweep.
pub fn optimum_of(mut sweep: Vec<RateEstimate>) -> Result<EmpiricalOptimum> {
    sweep.sort_by_key(|e| e.b);
    let mut order: Vec<usize> = (0..sweep.len()).collect();
    // stable: equal means keep the smaller b first
    order.sort_by(|&i, &j| sweep[j].mean.total_cmp(&sweep[i].mean));
    let best = sweep
        .get(
            *order
                .first()
                .ok_or_else(|| Error::Config("empty sweep".into()))?,
        )
        .cloned()
        .expect("index from order");
    let runner_up_gap_se = order.get(1).map(|&i| {
        let other = &sweep[i];
        let pooled = (best.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        (best.mean - other.mean) / pooled
    });
    Ok(EmpiricalOptimum {
        best,
        runner_up_gap_se,
        sweep,
    })
}

/// `(a.mean - b.mean)` in pooled standard errors.
pub fn gap_in_pooled_se(a: &RateEstimate, b: &RateEstimate) -> f64 {
    (a.mean - b.mean) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}
