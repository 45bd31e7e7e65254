//! Random beamforming and its multi-set generalization, PU2RC.
//!
//! Every beam of the chosen orthonormal set carries power `snr / nt`, whether
//! or not a user was scheduled on it, so the SINR a user reports is the SINR
//! it gets.

use super::{
    argmax_first, quantize_report_cqi, BlockOutcome, CqiKind, FeedbackReport, TransmissionPlan,
};
use crate::channel::ChannelRealization;
use crate::error::Result;
use crate::numerics::{haar_orthonormal_set, ComplexVector, OrthonormalSet, RngStream};
use crate::quantization::{
    build_orthosets_codebook, quantize_to_orthosets, CqiQuantizerSpec, OrthosetCodebook,
};

/// SINR of `h` on beam `beam` of `set` when all `nt` beams are active with
/// power `snr / nt` each.
pub fn rbf_sinr(h: &ComplexVector, set: &OrthonormalSet, beam: usize, snr: f64) -> f64 {
    let p = snr / set.len() as f64;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (m, w) in set.vectors().iter().enumerate() {
        let g = h.inner(w).norm_sqr();
        if m == beam {
            signal = g;
        } else {
            interference += g;
        }
    }
    p * signal / (1.0 + p * interference)
}

/// Schedules one user per beam on the best-scoring set of `codebook`.
///
/// Each user quantizes to its globally closest codeword and reports that
/// codeword's SINR within its own set. For every set the base station keeps
/// the largest reported SINR per beam and scores the set by
/// `sum log2(1 + SINR)`; the best set is used.
pub fn orthoset_block(
    realization: &ChannelRealization,
    codebook: &OrthosetCodebook,
    snr: f64,
    cqi_quantizer: Option<&CqiQuantizerSpec>,
) -> Result<BlockOutcome> {
    let sets = codebook.sets();
    let mut reports = Vec::with_capacity(realization.num_users());
    for (user_id, h_est) in realization.estimates.iter().enumerate() {
        let quant = quantize_to_orthosets(h_est, codebook)?;
        let (s, b) = (quant.set_index.unwrap_or(0), quant.beam_index.unwrap_or(0));
        let cqi = rbf_sinr(h_est, &sets[s], b, snr);
        reports.push(FeedbackReport {
            user_id,
            quant,
            cqi,
            cqi_kind: CqiKind::RbfSinr,
        });
    }
    if let Some(spec) = cqi_quantizer {
        quantize_report_cqi(&mut reports, spec);
    }

    // best (report index) per (set, beam); first report wins ties
    let mut best: Vec<Vec<Option<usize>>> = sets.iter().map(|s| vec![None; s.len()]).collect();
    for (i, r) in reports.iter().enumerate() {
        let slot = &mut best[r.quant.set_index.unwrap_or(0)][r.quant.beam_index.unwrap_or(0)];
        if slot.is_none_or(|j| r.cqi > reports[j].cqi) {
            *slot = Some(i);
        }
    }
    let scores = best.iter().map(|beams| {
        beams
            .iter()
            .flatten()
            .map(|&i| (1.0 + reports[i].cqi).log2())
            .sum::<f64>()
    });
    let chosen = argmax_first(scores).unwrap_or(0);
    let set = &sets[chosen];

    let mut selected = Vec::new();
    let mut beamformers = Vec::new();
    let mut rates = Vec::new();
    let mut estimated_rate = 0.0;
    for (beam, slot) in best[chosen].iter().enumerate() {
        if let Some(i) = *slot {
            let user = reports[i].user_id;
            selected.push(user);
            beamformers.push(set.vectors()[beam].clone());
            estimated_rate += (1.0 + reports[i].cqi).log2();
            rates.push((1.0 + rbf_sinr(&realization.delayed[user], set, beam, snr)).log2());
        }
    }
    let plan = TransmissionPlan {
        selected,
        beamformers,
        power_per_user: snr / set.len() as f64,
        estimated_rate,
    };
    Ok(BlockOutcome::new(plan, rates))
}

/// Random beamforming: one Haar set per block, shared by all users.
pub fn rbf_block(
    realization: &ChannelRealization,
    snr: f64,
    nt: usize,
    rng: &mut RngStream,
    cqi_quantizer: Option<&CqiQuantizerSpec>,
) -> Result<BlockOutcome> {
    let codebook = OrthosetCodebook::from_sets(vec![haar_orthonormal_set(rng, nt)?]);
    orthoset_block(realization, &codebook, snr, cqi_quantizer)
}

/// PU2RC with a fresh common codebook of `2^bits / nt` sets per block.
pub fn pu2rc_block(
    realization: &ChannelRealization,
    bits: u32,
    snr: f64,
    nt: usize,
    rng: &mut RngStream,
    cqi_quantizer: Option<&CqiQuantizerSpec>,
) -> Result<BlockOutcome> {
    let codebook = build_orthosets_codebook(bits, nt, rng)?;
    orthoset_block(realization, &codebook, snr, cqi_quantizer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_block, ChannelModelConfig};

    #[test]
    fn single_user_gets_its_best_beam() {
        let mut rng = RngStream::new(20, 0);
        let block = draw_block(&ChannelModelConfig::ideal(2, 1, 10.0), &mut rng).unwrap();
        let mut rng_a = RngStream::new(20, 1);
        let out = rbf_block(&block, 10.0, 2, &mut rng_a, None).unwrap();

        let mut rng_b = RngStream::new(20, 1);
        let set = haar_orthonormal_set(&mut rng_b, 2).unwrap();
        let h = &block.true_channels[0];
        let best = (0..2)
            .map(|b| rbf_sinr(h, &set, b, 10.0))
            .fold(0.0, f64::max);
        assert_eq!(out.plan.selected, vec![0]);
        assert!((out.sum_rate - (1.0 + best).log2()).abs() < 1e-12);
    }

    #[test]
    fn user_on_a_beam_has_no_interference() {
        let set = OrthonormalSet::standard(4);
        let g: f64 = 2.5;
        let h = ComplexVector::basis(4, 2).scaled(g.sqrt());
        assert!((rbf_sinr(&h, &set, 2, 10.0) - g * 10.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn rbf_sinr_matches_angle_form() {
        let mut rng = RngStream::new(21, 0);
        let set = haar_orthonormal_set(&mut rng, 4).unwrap();
        let h = ComplexVector::standard_normal(4, &mut rng);
        let snr = 7.0;
        for b in 0..4 {
            let cos2 = h.cos2(&set.vectors()[b]);
            let n2 = h.norm_sqr();
            let alt = n2 * cos2 / (4.0 / snr + n2 * (1.0 - cos2));
            assert!((rbf_sinr(&h, &set, b, snr) - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn pu2rc_with_one_set_is_rbf() {
        for stream in 0..50 {
            let mut rng = RngStream::new(22, stream);
            let block = draw_block(&ChannelModelConfig::ideal(4, 30, 10.0), &mut rng).unwrap();
            let a = rbf_block(&block, 10.0, 4, &mut rng.clone(), None).unwrap();
            let b = pu2rc_block(&block, 2, 10.0, 4, &mut rng.clone(), None).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fed_back_sinr_is_realized_with_ideal_channels() {
        let mut rng = RngStream::new(23, 0);
        let block = draw_block(&ChannelModelConfig::ideal(4, 40, 10.0), &mut rng).unwrap();
        let out = pu2rc_block(&block, 4, 10.0, 4, &mut rng, None).unwrap();
        assert!((out.plan.estimated_rate - out.sum_rate).abs() < 1e-12);
        assert!(out.plan.num_scheduled() <= 4);
        assert!((out.plan.power_per_user - 2.5).abs() < 1e-15);
    }

    #[test]
    fn chosen_set_maximizes_score() {
        // brute-force rescoring of every set
        for stream in 0..30 {
            let mut rng = RngStream::new(24, stream);
            let block = draw_block(&ChannelModelConfig::ideal(4, 25, 10.0), &mut rng).unwrap();
            let codebook = build_orthosets_codebook(4, 4, &mut rng).unwrap();
            let out = orthoset_block(&block, &codebook, 10.0, None).unwrap();
            for set in codebook.sets() {
                let mut per_beam = [0.0f64; 4];
                for h in &block.true_channels {
                    let all: Vec<_> = codebook
                        .sets()
                        .iter()
                        .flat_map(|s| s.vectors().iter())
                        .collect();
                    let (gi, _) = all
                        .iter()
                        .enumerate()
                        .map(|(i, w)| (i, h.cos2(w)))
                        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                    let owner = &codebook.sets()[gi / 4];
                    if std::ptr::eq(owner, set) {
                        per_beam[gi % 4] = per_beam[gi % 4].max(rbf_sinr(h, set, gi % 4, 10.0));
                    }
                }
                let score: f64 = per_beam
                    .iter()
                    .filter(|&&s| s > 0.0)
                    .map(|s| (1.0 + s).log2())
                    .sum();
                assert!(score <= out.sum_rate + 1e-12);
            }
        }
    }
}
