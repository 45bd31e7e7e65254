//! Multi-user MIMO downlink with finite-rate channel feedback.
//!
//! The crate answers one design question: with a fixed aggregate feedback
//! budget `T_fb`, how many direction bits per user `B` maximize sum rate?
//! Each user that feeds back spends `B` bits, so `T_fb / B` users are
//! available for scheduling. Fewer bits mean more users (multi-user
//! diversity); more bits mean better channel direction information.
//!
//! Layout:
//!
//! - [`numerics`]: complex vectors, seeded streams, Haar sets, zero-forcing
//!   directions, Lambert W (branch -1), order-statistic helpers.
//! - [`channel`]: Rayleigh block channels with receiver training and
//!   feedback delay.
//! - [`quantization`]: RVQ (explicit and statistical), scalar, idealized and
//!   orthonormal-set codebooks, plus the CQI quantizer.
//! - [`schemes`]: zero-forcing (greedy / simplified selection), RBF, PU2RC
//!   and single-user beamforming.
//! - [`analytic`]: closed-form rate approximations and `B` optimizers.
//! - [`montecarlo`]: the seeded trial engine and `B` sweeps.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod quantization;
pub mod schemes;

pub use error::{Error, Result};
pub use numerics::{ComplexVector, OrthonormalSet, RngStream};

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
