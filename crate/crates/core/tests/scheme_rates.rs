//! Monte Carlo sum-rate checks of the schemes through the trial engine.

use fbsim_core::channel::ReceiverCsi;
use fbsim_core::db_to_linear;
use fbsim_core::montecarlo::{gap_in_pooled_se, run_point, ExperimentConfig, RateEstimate, Scheme};
use fbsim_core::quantization::QuantizerKind;

fn cfg(scheme: Scheme, snr_db: f64, tfb: u32, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        trials,
        seed: 2024,
        relaxed: true,
        ..ExperimentConfig::new(scheme, 4, db_to_linear(snr_db), tfb)
    }
}

fn point(c: &ExperimentConfig, b: u32) -> RateEstimate {
    run_point(c, b).unwrap()
}

#[test]
fn zero_forcing_worked_example() {
    let c = cfg(Scheme::ZfGreedy, 10.0, 100, 2000);
    for (b, users, expected) in [(20, 5, 9.9), (10, 10, 8.5), (4, 25, 4.6)] {
        let e = point(&c, b);
        assert_eq!(e.users, users);
        assert!((e.mean - expected).abs() <= 0.4, "b={b}: {}", e.mean);
    }
}

#[test]
fn zero_forcing_beats_random_beamforming() {
    let zf = point(&cfg(Scheme::ZfGreedy, 10.0, 100, 2000), 20);
    let rbf = point(&cfg(Scheme::Rbf, 10.0, 100, 2000), 4);
    assert_eq!(rbf.users, 25);
    assert!(zf.mean - rbf.mean >= 2.0, "{} vs {}", zf.mean, rbf.mean);
}

#[test]
fn pu2rc_thins_users_per_set() {
    let e = point(&cfg(Scheme::Pu2rc, 10.0, 500, 1000), 8);
    assert_eq!(e.users, 62);
    assert!(e.mean_scheduled < 4.0);
}

#[test]
fn pu2rc_is_best_near_rbf() {
    let c = cfg(Scheme::Pu2rc, 10.0, 300, 2000);
    let rates: Vec<f64> = (2..=8).map(|b| point(&c, b).mean).collect();
    let max = rates.iter().cloned().fold(f64::MIN, f64::max);
    assert!(rates[0] >= 0.95 * max, "{rates:?}");
}

#[test]
fn simplified_selection_sits_between_pu2rc_and_greedy() {
    let greedy = point(&cfg(Scheme::ZfGreedy, 10.0, 300, 2000), 20);
    let simple = point(&cfg(Scheme::ZfSimplified, 10.0, 300, 2000), 20);
    let pu2rc = point(&cfg(Scheme::Pu2rc, 10.0, 300, 2000), 2);
    assert!(gap_in_pooled_se(&greedy, &simple) > 3.0);
    assert!(gap_in_pooled_se(&simple, &pu2rc) > 3.0);
}

#[test]
fn perfect_csi_dominates_finite_feedback() {
    let perfect = ExperimentConfig {
        quantizer: QuantizerKind::Perfect,
        ..cfg(Scheme::ZfGreedy, 10.0, 300, 2000)
    };
    let rvq = cfg(Scheme::ZfGreedy, 10.0, 300, 2000);
    for b in [8, 15, 20] {
        let p = point(&perfect, b);
        let q = point(&rvq, b);
        assert_eq!(p.users, q.users);
        assert!(p.mean > q.mean, "b={b}");
    }
    // with 40 bits the residual interference is negligible
    let p = point(&perfect, 40);
    let q = point(&rvq, 40);
    assert!(gap_in_pooled_se(&p, &q).abs() <= 2.0);
}

#[test]
fn expected_sinr_cqi_behaves_like_norm_cqi_at_the_optimum() {
    let norm = point(&cfg(Scheme::ZfGreedy, 10.0, 300, 2000), 20);
    let sinr = point(
        &ExperimentConfig {
            cqi_kind: fbsim_core::schemes::CqiKind::ExpectedSinr,
            ..cfg(Scheme::ZfGreedy, 10.0, 300, 2000)
        },
        20,
    );
    assert!((sinr.mean - norm.mean).abs() / norm.mean < 0.05);
}

#[test]
fn training_and_delay_cost_rate() {
    let ideal = point(&cfg(Scheme::ZfGreedy, 10.0, 300, 2000), 20);
    let impaired = point(
        &ExperimentConfig {
            csi: ReceiverCsi::Trained { beta: 1.0 },
            r: 0.95,
            ..cfg(Scheme::ZfGreedy, 10.0, 300, 2000)
        },
        20,
    );
    assert!(gap_in_pooled_se(&ideal, &impaired) >= 3.0);
}

#[test]
fn single_user_beamforming_is_insensitive_to_bits() {
    let c = cfg(Scheme::Subf, 5.0, 200, 2000);
    let rates: Vec<f64> = [8, 10, 12, 14, 16, 18, 20, 22, 25]
        .iter()
        .map(|&b| point(&c, b).mean)
        .collect();
    let (lo, hi) = rates
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &r| (l.min(r), h.max(r)));
    assert!((hi - lo) / hi < 0.10, "{rates:?}");
}

#[test]
fn cqi_accounting_shrinks_the_user_pool() {
    let free = cfg(Scheme::ZfGreedy, 10.0, 300, 200);
    let charged = ExperimentConfig {
        cqi_bits: Some(4),
        ..free.clone()
    };
    for b in [10, 20, 26] {
        assert!(charged.users(b) < free.users(b));
        let e = point(&charged, b);
        assert!(e.mean.is_finite() && e.mean > 0.0);
    }
}
