use super::{
    argmax_first, quantize_report_cqi, BlockOutcome, CqiKind, FeedbackReport, Selection,
    TransmissionPlan,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::numerics::{ComplexVector, ZfSolver};
use crate::quantization::{quantize_direction, CqiQuantizerSpec, QuantizerSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct ZfConfig {
    pub quantizer: QuantizerSpec,
    pub cqi_kind: CqiKind,
    pub cqi_quantizer: Option<CqiQuantizerSpec>,
    pub selection: Selection,
    pub snr: f64,
}

/// SINR of a zero-forced user with equal power `snr / n` per stream.
///
/// `other_bfs` are the beamformers of the co-scheduled users; with imperfect
/// CSI they leak interference into `h_true`.
pub fn zf_realized_sinr<'a, I>(
    h_true: &ComplexVector,
    own_bf: &ComplexVector,
    other_bfs: I,
    snr: f64,
    n: usize,
) -> f64
where
    I: IntoIterator<Item = &'a ComplexVector>,
{
    let p = snr / n as f64;
    let signal = p * h_true.inner(own_bf).norm_sqr();
    let interference: f64 = other_bfs
        .into_iter()
        .map(|v| p * h_true.inner(v).norm_sqr())
        .sum();
    signal / (1.0 + interference)
}

/// SINR a user expects when `nt` users share power and its own quantization
/// error leaks interference: `||h||^2 cos^2 / (nt/snr + ||h||^2 sin^2)`.
pub fn expected_sinr(norm2: f64, sin2: f64, snr: f64, nt: usize) -> f64 {
    norm2 * (1.0 - sin2) / (nt as f64 / snr + norm2 * sin2)
}

/// Channel gain `g` the base station attributes to a report, so that the
/// single-user estimate at power `p` is `p g`.
fn effective_gain(report: &FeedbackReport, snr: f64, nt: usize) -> f64 {
    match report.cqi_kind {
        CqiKind::Norm2 => report.cqi,
        // the expected SINR already assumes power snr / nt
        CqiKind::ExpectedSinr | CqiKind::RbfSinr => report.cqi * nt as f64 / snr,
        CqiKind::SubfSnr => report.cqi / snr,
    }
}

struct Selector<'a> {
    reports: &'a [FeedbackReport],
    gains: Vec<f64>,
    snr: f64,
    solver: ZfSolver,
}

impl<'a> Selector<'a> {
    fn new(reports: &'a [FeedbackReport], snr: f64, nt: usize) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::Config(
                "user selection needs at least one report".into(),
            ));
        }
        if let Some(r) = reports.iter().find(|r| r.quant.direction.len() != nt) {
            return Err(Error::InvalidDimension(format!(
                "report for user {} has dimension {}, expected {nt}",
                r.user_id,
                r.quant.direction.len()
            )));
        }
        Ok(Self {
            gains: reports.iter().map(|r| effective_gain(r, snr, nt)).collect(),
            reports,
            snr,
            solver: ZfSolver::new(nt),
        })
    }

    /// Estimated sum rate of `set` (indices into `reports`); `None` if singular.
    fn rate(&mut self, set: &[usize]) -> Option<f64> {
        let reports = self.reports;
        match self
            .solver
            .solve(set.iter().map(|&i| reports[i].quant.direction.entries()))
        {
            Ok(()) => {}
            Err(_) => return None,
        }
        let p = self.snr / set.len() as f64;
        Some(
            set.iter()
                .enumerate()
                .map(|(k, &i)| (1.0 + p * self.gains[i] * self.solver.alignment(k)).log2())
                .sum(),
        )
    }

    fn plan(&mut self, set: Vec<usize>, estimated_rate: f64) -> TransmissionPlan {
        let reports = self.reports;
        self.solver
            .solve(set.iter().map(|&i| reports[i].quant.direction.entries()))
            .expect("selected set was solvable during selection");
        let beamformers = (0..set.len())
            .map(|k| ComplexVector::new(self.solver.direction(k).to_vec()))
            .collect();
        TransmissionPlan {
            power_per_user: self.snr / set.len() as f64,
            selected: set.iter().map(|&i| reports[i].user_id).collect(),
            beamformers,
            estimated_rate,
        }
    }

    fn best_single(&mut self) -> Result<(usize, f64)> {
        let seed = argmax_first(self.reports.iter().map(|r| r.cqi)).expect("non-empty");
        match self.rate(&[seed]) {
            Some(rate) => Ok((seed, rate)),
            None => Err(Error::SingularSet),
        }
    }
}

/// Estimated zero-forcing sum rate the base station computes for a set of
/// report indices, treating `sqrt(g_k) h^_k` as user `k`'s channel.
pub fn estimated_zf_rate(
    reports: &[FeedbackReport],
    set: &[usize],
    snr: f64,
    nt: usize,
) -> Result<f64> {
    let mut sel = Selector::new(reports, snr, nt)?;
    sel.rate(set).ok_or(Error::SingularSet)
}

/// Greedy selection: start from the largest CQI and add, one at a time, the
/// user that maximizes the estimated sum rate, while it strictly increases
/// and fewer than `nt` users are selected. Also returns the estimated rate
/// after each accepted step.
pub fn zf_greedy_select_traced(
    reports: &[FeedbackReport],
    snr: f64,
    nt: usize,
) -> Result<(TransmissionPlan, Vec<f64>)> {
    let mut sel = Selector::new(reports, snr, nt)?;
    let (seed, mut current) = sel.best_single()?;
    let mut set = vec![seed];
    let mut trace = vec![current];
    let mut candidate = Vec::with_capacity(nt);

    while set.len() < nt {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..reports.len() {
            if set.contains(&c) {
                continue;
            }
            candidate.clear();
            candidate.extend_from_slice(&set);
            candidate.push(c);
            if let Some(rate) = sel.rate(&candidate) {
                if best.is_none_or(|(_, b)| rate > b) {
                    best = Some((c, rate));
                }
            }
        }
        match best {
            Some((c, rate)) if rate > current => {
                set.push(c);
                current = rate;
                trace.push(rate);
            }
            _ => break,
        }
    }
    Ok((sel.plan(set, current), trace))
}

pub fn zf_greedy_select(
    reports: &[FeedbackReport],
    snr: f64,
    nt: usize,
) -> Result<TransmissionPlan> {
    zf_greedy_select_traced(reports, snr, nt).map(|(plan, _)| plan)
}

/// Low-complexity selection: rank users by CQI and keep the best of the
/// top-`j` sets, `j = 1..=nt`.
pub fn zf_simplified_select(
    reports: &[FeedbackReport],
    snr: f64,
    nt: usize,
) -> Result<TransmissionPlan> {
    let mut sel = Selector::new(reports, snr, nt)?;
    let mut order: Vec<usize> = (0..reports.len()).collect();
    // stable sort keeps the lower index first on ties
    order.sort_by(|&a, &b| reports[b].cqi.total_cmp(&reports[a].cqi));

    let mut best: Option<(usize, f64)> = None;
    for j in 1..=nt.min(order.len()) {
        if let Some(rate) = sel.rate(&order[..j]) {
            if best.is_none_or(|(_, b)| rate > b) {
                best = Some((j, rate));
            }
        }
    }
    match best {
        Some((j, rate)) => Ok(sel.plan(order[..j].to_vec(), rate)),
        None => {
            let (seed, rate) = sel.best_single()?;
            Ok(sel.plan(vec![seed], rate))
        }
    }
}

/// One zero-forcing block: quantize, report, select, transmit.
pub fn zf_block(
    realization: &ChannelRealization,
    cfg: &ZfConfig,
    rng: &mut crate::numerics::RngStream,
) -> Result<BlockOutcome> {
    let nt = cfg.quantizer.nt;
    let mut reports = Vec::with_capacity(realization.num_users());
    for (user_id, h_est) in realization.estimates.iter().enumerate() {
        if h_est.len() != nt {
            return Err(Error::InvalidDimension(format!(
                "channel dimension {} does not match quantizer nt = {nt}",
                h_est.len()
            )));
        }
        let quant = quantize_direction(h_est, &cfg.quantizer, rng)?;
        let norm2 = h_est.norm_sqr();
        let cqi = match cfg.cqi_kind {
            CqiKind::Norm2 => norm2,
            CqiKind::ExpectedSinr => expected_sinr(norm2, quant.sin2_error, cfg.snr, nt),
            other => {
                return Err(Error::Config(format!(
                    "CQI '{other}' is not used with zero-forcing"
                )));
            }
        };
        reports.push(FeedbackReport {
            user_id,
            quant,
            cqi,
            cqi_kind: cfg.cqi_kind,
        });
    }
    if let Some(spec) = &cfg.cqi_quantizer {
        quantize_report_cqi(&mut reports, spec);
    }

    let plan = match cfg.selection {
        Selection::Greedy => zf_greedy_select(&reports, cfg.snr, nt)?,
        Selection::Simplified => zf_simplified_select(&reports, cfg.snr, nt)?,
    };

    let n = plan.num_scheduled();
    let rates = plan
        .selected
        .iter()
        .enumerate()
        .map(|(k, &user)| {
            let others = plan
                .beamformers
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, v)| v);
            let sinr = zf_realized_sinr(
                &realization.delayed[user],
                &plan.beamformers[k],
                others,
                cfg.snr,
                n,
            );
            (1.0 + sinr).log2()
        })
        .collect();
    Ok(BlockOutcome::new(plan, rates))
}
