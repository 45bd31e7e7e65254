//! Single-user beamforming: serve only the user with the best reported
//! post-beamforming SNR `snr ||h||^2 cos^2(angle(h, h^))`.

use super::{
    argmax_first, quantize_report_cqi, BlockOutcome, CqiKind, FeedbackReport, TransmissionPlan,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::quantization::{quantize_direction, CqiQuantizerSpec, QuantizerSpec};

pub fn subf_block(
    realization: &ChannelRealization,
    quantizer: &QuantizerSpec,
    snr: f64,
    rng: &mut RngStream,
    cqi_quantizer: Option<&CqiQuantizerSpec>,
) -> Result<BlockOutcome> {
    if realization.num_users() == 0 {
        return Err(Error::Config(
            "single-user beamforming needs at least one user".into(),
        ));
    }
    let mut reports = Vec::with_capacity(realization.num_users());
    for (user_id, h_est) in realization.estimates.iter().enumerate() {
        let quant = quantize_direction(h_est, quantizer, rng)?;
        let cqi = snr * h_est.norm_sqr() * quant.cos2();
        reports.push(FeedbackReport {
            user_id,
            quant,
            cqi,
            cqi_kind: CqiKind::SubfSnr,
        });
    }
    if let Some(spec) = cqi_quantizer {
        quantize_report_cqi(&mut reports, spec);
    }
    let best = argmax_first(reports.iter().map(|r| r.cqi)).expect("non-empty");
    let report = &reports[best];
    let beam = report.quant.direction.clone();
    let rate = (1.0 + snr * realization.delayed[report.user_id].inner(&beam).norm_sqr()).log2();
    let plan = TransmissionPlan {
        selected: vec![report.user_id],
        estimated_rate: (1.0 + report.cqi).log2(),
        beamformers: vec![beam],
        power_per_user: snr,
    };
    Ok(BlockOutcome::new(plan, vec![rate]))
}
