//! Block-fading Rayleigh channels with receiver training and feedback delay.
//!
//! Per user and block we produce three vectors:
//!
//! - `h`: the channel during training/feedback, i.i.d. CN(0, 1) entries;
//! - `h~`: the user's own estimate, with `h = h~ + n` and per-entry error
//!   variance `(1 + beta * snr)^{-1}`;
//! - `h+`: the channel during data transmission, `r h + sqrt(1 - r^2) d`.
//!
//! Users quantize and report `h~`; realized rates are computed on `h+`.

use crate::error::{Error, Result};
use crate::numerics::{ComplexVector, RngStream};

/// How well each user knows its own channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReceiverCsi {
    Perfect,
    /// MMSE training with `beta` pilots per antenna.
    Trained {
        beta: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModelConfig {
    pub nt: usize,
    pub num_users: usize,
    pub csi: ReceiverCsi,
    /// Temporal correlation between feedback and transmission, `1` = no delay.
    pub r: f64,
    /// Linear SNR.
    pub snr: f64,
    /// Draw `h~` and `n` independently (`h~` variance `1 - sigma^2`), the
    /// orthogonality an MMSE estimator gives. When off, `h` is drawn first
    /// and the error is subtracted from it.
    pub mmse_exact: bool,
}

impl ChannelModelConfig {
    /// Perfect receiver CSI, no feedback delay.
    pub fn ideal(nt: usize, num_users: usize, snr: f64) -> Self {
        Self {
            nt,
            num_users,
            csi: ReceiverCsi::Perfect,
            r: 1.0,
            snr,
            mmse_exact: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt == 0 || self.num_users == 0 {
            return Err(Error::Config(format!(
                "need nt >= 1 and at least one user (nt = {}, users = {})",
                self.nt, self.num_users
            )));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::Config(format!(
                "correlation r = {} outside [0, 1]",
                self.r
            )));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::Config(format!(
                "snr must be positive, got {}",
                self.snr
            )));
        }
        if let ReceiverCsi::Trained { beta } = self.csi {
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(Error::Config(format!("beta must be >= 0, got {beta}")));
            }
        }
        Ok(())
    }

    /// Per-entry variance of `h - h~`.
    pub fn estimation_error_variance(&self) -> f64 {
        match self.csi {
            ReceiverCsi::Perfect => 0.0,
            ReceiverCsi::Trained { beta } => 1.0 / (1.0 + beta * self.snr),
        }
    }

    /// Extra interference coefficient `1 - r^2 + (1 + beta snr)^{-1}` used by
    /// the training/delay rate approximation.
    pub fn phi(&self) -> f64 {
        1.0 - self.r * self.r + self.estimation_error_variance()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub true_channels: Vec<ComplexVector>,
    pub estimates: Vec<ComplexVector>,
    pub delayed: Vec<ComplexVector>,
}

impl ChannelRealization {
    pub fn num_users(&self) -> usize {
        self.true_channels.len()
    }

    /// A realization where estimate and transmission channel equal `h`.
    pub fn from_channels(channels: Vec<ComplexVector>) -> Self {
        Self {
            estimates: channels.clone(),
            delayed: channels.clone(),
            true_channels: channels,
        }
    }
}

pub fn draw_block(cfg: &ChannelModelConfig, rng: &mut RngStream) -> Result<ChannelRealization> {
    cfg.validate()?;
    let nt = cfg.nt;
    let err_var = cfg.estimation_error_variance();
    let err_std = err_var.sqrt();
    let innovation = (1.0 - cfg.r * cfg.r).max(0.0).sqrt();

    let mut true_channels = Vec::with_capacity(cfg.num_users);
    let mut estimates = Vec::with_capacity(cfg.num_users);
    let mut delayed = Vec::with_capacity(cfg.num_users);

    for _ in 0..cfg.num_users {
        let (h, h_est) = match cfg.csi {
            ReceiverCsi::Perfect => {
                let h = ComplexVector::standard_normal(nt, rng);
                (h.clone(), h)
            }
            ReceiverCsi::Trained { .. } if cfg.mmse_exact => {
                let est_std = (1.0 - err_var).sqrt();
                let est: Vec<_> = (0..nt).map(|_| rng.complex_normal() * est_std).collect();
                let h: Vec<_> = est
                    .iter()
                    .map(|e| e + rng.complex_normal() * err_std)
                    .collect();
                (ComplexVector::new(h), ComplexVector::new(est))
            }
            ReceiverCsi::Trained { .. } => {
                let h = ComplexVector::standard_normal(nt, rng);
                let est: Vec<_> = h
                    .iter()
                    .map(|x| x - rng.complex_normal() * err_std)
                    .collect();
                (h, ComplexVector::new(est))
            }
        };
        let h_plus = if cfg.r == 1.0 {
            h.clone()
        } else {
            ComplexVector::new(
                h.iter()
                    .map(|x| x * cfg.r + rng.complex_normal() * innovation)
                    .collect(),
            )
        };
        true_channels.push(h);
        estimates.push(h_est);
        delayed.push(h_plus);
    }

    Ok(ChannelRealization {
        true_channels,
        estimates,
        delayed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn ideal_mode_copies_channel() {
        let cfg = ChannelModelConfig::ideal(4, 8, 10.0);
        let block = draw_block(&cfg, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(block.true_channels, block.estimates);
        assert_eq!(block.true_channels, block.delayed);
        assert_eq!(block.num_users(), 8);
        assert!(block.true_channels.iter().all(|h| h.len() == 4));
    }

    #[test]
    fn channel_norm_mean_is_nt() {
        let cfg = ChannelModelConfig::ideal(4, 100_000, 10.0);
        let block = draw_block(&cfg, &mut RngStream::new(2, 0)).unwrap();
        let norms: Vec<f64> = block.true_channels.iter().map(|h| h.norm_sqr()).collect();
        let (mean, se) = mean_and_se(&norms);
        assert!((mean - 4.0).abs() <= 3.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn delay_preserves_power_and_has_correlation_r() {
        let cfg = ChannelModelConfig {
            r: 0.9,
            ..ChannelModelConfig::ideal(4, 100_000, 10.0)
        };
        let block = draw_block(&cfg, &mut RngStream::new(3, 0)).unwrap();
        let norms: Vec<f64> = block.delayed.iter().map(|h| h.norm_sqr()).collect();
        let (mean, se) = mean_and_se(&norms);
        assert!((mean - 4.0).abs() <= 3.0 * se);

        // Re(h[0]) and Re(h+[0]) both have variance 1/2.
        let prods: Vec<f64> = block
            .true_channels
            .iter()
            .zip(&block.delayed)
            .map(|(h, hp)| 2.0 * h[0].re * hp[0].re)
            .collect();
        let (corr, se) = mean_and_se(&prods);
        assert!((corr - 0.9).abs() <= 3.0 * se, "{corr} +- {se}");
    }

    #[test]
    fn estimation_error_variance_matches_training() {
        for mmse_exact in [true, false] {
            let cfg = ChannelModelConfig {
                csi: ReceiverCsi::Trained { beta: 1.0 },
                mmse_exact,
                ..ChannelModelConfig::ideal(4, 50_000, 10.0)
            };
            let block = draw_block(&cfg, &mut RngStream::new(4, 0)).unwrap();
            let errs: Vec<f64> = block
                .true_channels
                .iter()
                .zip(&block.estimates)
                .flat_map(|(h, e)| {
                    h.iter()
                        .zip(e.iter())
                        .map(|(a, b)| (a - b).norm_sqr())
                        .collect::<Vec<_>>()
                })
                .collect();
            let (var, se) = mean_and_se(&errs);
            let expected = 1.0 / 11.0;
            assert!(
                (var - expected).abs() <= 3.0 * se,
                "mmse_exact={mmse_exact}: {var} +- {se}"
            );

            let norms: Vec<f64> = block.true_channels.iter().map(|h| h.norm_sqr()).collect();
            let (mean, se) = mean_and_se(&norms);
            assert!((mean - 4.0).abs() <= 3.0 * se);
        }
    }

    #[test]
    fn identical_streams_reproduce_blocks() {
        let cfg = ChannelModelConfig {
            csi: ReceiverCsi::Trained { beta: 2.0 },
            r: 0.8,
            ..ChannelModelConfig::ideal(3, 5, 3.0)
        };
        let a = draw_block(&cfg, &mut RngStream::new(77, 5)).unwrap();
        let b = draw_block(&cfg, &mut RngStream::new(77, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ChannelModelConfig::ideal(4, 4, 1.0);
        for bad in [
            ChannelModelConfig {
                nt: 0,
                ..base.clone()
            },
            ChannelModelConfig {
                r: 1.5,
                ..base.clone()
            },
            ChannelModelConfig {
                snr: 0.0,
                ..base.clone()
            },
            ChannelModelConfig {
                csi: ReceiverCsi::Trained { beta: -1.0 },
                ..base.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn phi_combines_training_and_delay() {
        let cfg = ChannelModelConfig {
            csi: ReceiverCsi::Trained { beta: 1.0 },
            r: 0.95,
            ..ChannelModelConfig::ideal(4, 1, 10.0)
        };
        assert!((cfg.phi() - (1.0 - 0.9025 + 1.0 / 11.0)).abs() < 1e-15);
    }
}
