//! Beamforming and user-selection schemes.
//!
//! All schemes follow the same pattern per coherence block: users quantize
//! their channel estimate and report a CQI, the base station picks users and
//! beamformers from the reports alone, and the realized rate is measured on
//! the transmission-time channel.

mod orthoset;
mod subf;
mod zf;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::ComplexVector;
use crate::quantization::{quantize_cqi, CqiQuantizerSpec, DirectionQuantization};

pub use orthoset::{orthoset_block, pu2rc_block, rbf_block, rbf_sinr};
pub use subf::subf_block;
pub use zf::{
    estimated_zf_rate, expected_sinr, zf_block, zf_greedy_select, zf_greedy_select_traced,
    zf_realized_sinr, zf_simplified_select, ZfConfig,
};

/// What the scalar channel-quality report means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CqiKind {
    /// `||h||^2`.
    Norm2,
    /// SINR the user expects under zero-forcing with `nt` users.
    ExpectedSinr,
    /// RBF / PU2RC beam SINR.
    RbfSinr,
    /// Post-beamforming SNR for single-user beamforming.
    SubfSnr,
}

impl CqiKind {
    pub fn name(self) -> &'static str {
        match self {
            CqiKind::Norm2 => "norm2",
            CqiKind::ExpectedSinr => "expected_sinr",
            CqiKind::RbfSinr => "rbf_sinr",
            CqiKind::SubfSnr => "subf_snr",
        }
    }

    /// Typical CQI level in dB; the CQI quantizer range is centered here.
    pub fn reference_db(self, nt: usize, snr: f64) -> f64 {
        let nt = nt as f64;
        let linear = match self {
            CqiKind::Norm2 => nt,
            CqiKind::ExpectedSinr => snr,
            CqiKind::RbfSinr => snr / nt,
            CqiKind::SubfSnr => snr * nt,
        };
        10.0 * linear.log10()
    }
}

impl fmt::Display for CqiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CqiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "norm2" | "norm" => CqiKind::Norm2,
            "expected_sinr" | "sinr" => CqiKind::ExpectedSinr,
            "rbf_sinr" => CqiKind::RbfSinr,
            "subf_snr" => CqiKind::SubfSnr,
            other => return Err(Error::Config(format!("unknown CQI kind '{other}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackReport {
    pub user_id: usize,
    pub quant: DirectionQuantization,
    pub cqi: f64,
    pub cqi_kind: CqiKind,
}

/// Replaces each report's CQI by its quantized value.
pub fn quantize_report_cqi(reports: &mut [FeedbackReport], spec: &CqiQuantizerSpec) {
    for r in reports {
        r.cqi = quantize_cqi(r.cqi, spec);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionPlan {
    pub selected: Vec<usize>,
    pub beamformers: Vec<ComplexVector>,
    /// `snr / n` for zero-forcing, `snr / nt` per beam for orthoset schemes.
    pub power_per_user: f64,
    /// Sum rate the base station predicts from the reports.
    pub estimated_rate: f64,
}

impl TransmissionPlan {
    pub fn num_scheduled(&self) -> usize {
        self.selected.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockOutcome {
    pub plan: TransmissionPlan,
    pub realized_rates: Vec<f64>,
    pub sum_rate: f64,
}

impl BlockOutcome {
    fn new(plan: TransmissionPlan, realized_rates: Vec<f64>) -> Self {
        let sum_rate = realized_rates.iter().sum();
        Self {
            plan,
            realized_rates,
            sum_rate,
        }
    }
}

/// User selection rule for zero-forcing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Selection {
    Greedy,
    Simplified,
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::Greedy => "greedy",
            Selection::Simplified => "simplified",
        }
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Selection::Greedy),
            "simplified" => Ok(Selection::Simplified),
            other => Err(Error::Config(format!("unknown selection '{other}'"))),
        }
    }
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax_first<I: IntoIterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
