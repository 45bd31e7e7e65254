//! Closed-form sum-rate approximations and the bit-allocation optimizers
//! built on them.
//!
//! Inner logarithms (multi-user diversity terms such as `ln(tfb nt / b)`) are
//! natural; rates are in bps/Hz.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::lambert_w_m1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticParams {
    /// Linear SNR.
    pub snr: f64,
    pub nt: usize,
    /// Total feedback bits per block.
    pub tfb: f64,
    /// Bits per user, real-valued.
    pub b: f64,
    /// Training/delay interference coefficient, `0` for ideal CSI.
    pub phi: f64,
}

impl AnalyticParams {
    pub fn new(snr: f64, nt: usize, tfb: f64, b: f64) -> Self {
        Self {
            snr,
            nt,
            tfb,
            b,
            phi: 0.0,
        }
    }

    /// Sets `phi = 1 - r^2 + (1 + beta snr)^{-1}`.
    pub fn with_training_delay(mut self, r: f64, beta: f64) -> Self {
        self.phi = phi(self.snr, r, beta);
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// `ln(tfb nt / b)`, the expected largest channel norm among `tfb / b` users.
    fn diversity(&self) -> Result<f64> {
        diversity_term(self.tfb, self.nt, self.b)
    }
}

/// Training/delay interference coefficient; `beta = inf` means perfect
/// receiver CSI.
pub fn phi(snr: f64, r: f64, beta: f64) -> f64 {
    let training = if beta.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + beta * snr)
    };
    1.0 - r * r + training
}

fn check_nt(nt: usize) -> Result<f64> {
    if nt < 2 {
        return Err(Error::InvalidDimension(format!("needs nt >= 2, got {nt}")));
    }
    Ok(nt as f64)
}

fn diversity_term(tfb: f64, nt: usize, b: f64) -> Result<f64> {
    let k = tfb * nt as f64 / b;
    if !(k > 1.0) {
        return Err(Error::Domain {
            function: "ln(tfb nt / b)",
            value: k,
        });
    }
    Ok(k.ln())
}

/// Quantization error scale `2^{-b/(nt-1)}`.
fn distortion(nt: f64, b: f64) -> f64 {
    (-b / (nt - 1.0)).exp2()
}

/// Upper bound on the zero-forcing rate loss from `b`-bit RVQ without user
/// selection: `nt log2(1 + snr 2^{-b/(nt-1)})`.
pub fn zf_loss_bound(snr: f64, nt: usize, b: f64) -> Result<f64> {
    let n = check_nt(nt)?;
    Ok(n * (1.0 + snr * distortion(n, b)).log2())
}

/// Approximate zero-forcing sum rate with `tfb / b` users, including the
/// training/delay term when `phi > 0`.
pub fn zf_rate_approx(p: &AnalyticParams) -> Result<f64> {
    let n = check_nt(p.nt)?;
    let l = p.diversity()?;
    let s = p.snr / n;
    let signal = s * l;
    let denom = 1.0 + p.phi * n / (n - 1.0) * p.snr + s * distortion(n, p.b) * l;
    Ok(n * (1.0 + signal / denom).log2())
}

/// Crude small-`b` regime: `nt b / (nt - 1)`.
pub fn zf_rate_linear_regime(nt: usize, b: f64) -> Result<f64> {
    let n = check_nt(nt)?;
    Ok(n * b / (n - 1.0))
}

/// Multi-user interference penalty relative to perfect CSI with the same
/// user count: `nt log2(1 + (snr/nt) 2^{-b/(nt-1)} ln(tfb nt / b))`.
pub fn zf_penalty_approx(p: &AnalyticParams) -> Result<f64> {
    let n = check_nt(p.nt)?;
    let l = p.diversity()?;
    Ok(n * (1.0 + p.snr / n * distortion(n, p.b) * l).log2())
}

/// Stationarity condition of [`zf_rate_approx`] in `b`, written as
/// `lhs(b) - 1`.
pub fn zf_bopt_residual(snr: f64, nt: usize, tfb: f64, b: f64) -> Result<f64> {
    let n = check_nt(nt)?;
    let l = diversity_term(tfb, nt, b)?;
    Ok(snr / n * distortion(n, b) * (b * LN_2 / (n - 1.0)) * l * l - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoptSolution {
    pub b: f64,
    /// Stationarity residual at `b`.
    pub residual: f64,
    /// No sign change on the search interval; `b` is the better endpoint.
    pub at_boundary: bool,
}

const BISECTION_TOL: f64 = 1e-9;

/// Rate-maximizing continuous `b` for zero-forcing, by bisection of the
/// stationarity condition on `[log2 nt, tfb / nt]`.
pub fn zf_bopt_fixed_point(snr: f64, nt: usize, tfb: f64) -> Result<BoptSolution> {
    let n = check_nt(nt)?;
    if !(snr > 0.0) {
        return Err(Error::Domain {
            function: "zf_bopt_fixed_point snr",
            value: snr,
        });
    }
    let (mut lo, mut hi) = (n.log2(), tfb / n);
    if !(hi > lo) {
        return Err(Error::Infeasible(format!(
            "tfb = {tfb} leaves no room for b in [log2 nt, tfb / nt]"
        )));
    }
    let f = |b: f64| zf_bopt_residual(snr, nt, tfb, b);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo.signum() == f_hi.signum() {
        let rate = |b: f64| zf_rate_approx(&AnalyticParams::new(snr, nt, tfb, b));
        let b = if rate(lo)? >= rate(hi)? { lo } else { hi };
        return Ok(BoptSolution {
            b,
            residual: f(b)?,
            at_boundary: true,
        });
    }
    // residual is positive below the optimum
    let increasing = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() <= BISECTION_TOL || hi - lo <= f64::EPSILON * hi {
            return Ok(BoptSolution {
                b: mid,
                residual: fm,
                at_boundary: false,
            });
        }
        if (fm < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    Ok(BoptSolution {
        b,
        residual: f(b)?,
        at_boundary: false,
    })
}

const LAMBERT_STEP_TOL: f64 = 1e-6;
const LAMBERT_MAX_ITER: usize = 1000;

/// The LambertW form of the zero-forcing optimum,
/// `b = -(nt-1)/ln 2 * W_{-1}(-nt / (snr L(b)))` with `L(b) = ln(tfb nt / b)^2`,
/// solved by iterating from the high-SNR estimate `(nt-1) log2(snr/nt)`.
///
/// Returns [`Error::Infeasible`] when an iterate leaves the real domain of
/// `W_{-1}`.
pub fn zf_bopt_lambert(snr: f64, nt: usize, tfb: f64) -> Result<f64> {
    let n = check_nt(nt)?;
    let step = |b: f64| -> Result<f64> {
        let l = diversity_term(tfb, nt, b)?;
        let x = -n / (snr * l * l);
        if x < -(-1.0f64).exp() {
            return Err(Error::Infeasible(format!(
                "LambertW argument {x:.6} below -1/e at b = {b:.4}"
            )));
        }
        Ok(-(n - 1.0) / LN_2 * lambert_w_m1(x)?)
    };

    let mut b = ((n - 1.0) * (snr / n).log2()).max(n.log2());
    let mut damping = 1.0;
    let mut last_delta = 0.0f64;
    for _ in 0..LAMBERT_MAX_ITER {
        let delta = step(b)? - b;
        if delta.abs() <= LAMBERT_STEP_TOL {
            return Ok(b + delta);
        }
        if delta * last_delta < 0.0 && delta.abs() > 0.5 * last_delta.abs() {
            damping = 0.5;
        }
        last_delta = delta;
        b += damping * delta;
    }
    Err(Error::Infeasible(format!(
        "LambertW iteration did not settle after {LAMBERT_MAX_ITER} steps"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RbfBudget {
    /// Users RBF needs to match zero-forcing.
    pub users: f64,
    /// Their total feedback, `users * log2 nt` bits.
    pub t_rbf: f64,
}

/// Feedback RBF needs to match zero-forcing run with budget `t_zf` at `b_opt`
/// bits per user.
pub fn rbf_matching_budget(t_zf: f64, nt: usize, snr: f64, b_opt: f64) -> Result<RbfBudget> {
    let n = check_nt(nt)?;
    if !(b_opt > 0.0) {
        return Err(Error::Domain {
            function: "rbf_matching_budget b_opt",
            value: b_opt,
        });
    }
    let k_zf = t_zf * n / b_opt;
    let users = k_zf * (1.0 + snr / n * k_zf.ln()).powf(n - 1.0);
    Ok(RbfBudget {
        users,
        t_rbf: users * n.log2(),
    })
}

/// Which single-user beamforming approximation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubfForm {
    /// `log2(1 + snr (1 + (1 - 2^{-b/(nt-1)}) ln(tfb nt / b)))`.
    Full,
    /// `log2(1 + snr (ln(tfb nt / b) - 2^{-b/(nt-1)} ln(tfb nt)))`, the form
    /// the optimizer maximizes.
    Simplified,
}

pub fn subf_rate_approx(snr: f64, nt: usize, tfb: f64, b: f64, form: SubfForm) -> Result<f64> {
    let n = check_nt(nt)?;
    let l = diversity_term(tfb, nt, b)?;
    let d = distortion(n, b);
    let inner = match form {
        SubfForm::Full => 1.0 + snr * (1.0 + (1.0 - d) * l),
        SubfForm::Simplified => 1.0 + snr * (l - d * (tfb * n).ln()),
    };
    if !(inner > 0.0) {
        return Err(Error::Domain {
            function: "subf_rate_approx",
            value: inner,
        });
    }
    Ok(inner.log2())
}

/// Maximizer of the simplified single-user beamforming rate,
/// `-(nt-1)/ln 2 * W_{-1}(-1 / ln(tfb nt))`, truncated to `[1, tfb]`.
/// It does not depend on SNR.
pub fn subf_bopt(nt: usize, tfb: f64) -> Result<f64> {
    let n = check_nt(nt)?;
    let ln_k = (tfb * n).ln();
    let x = -1.0 / ln_k;
    if !(ln_k > 0.0) || x < -(-1.0f64).exp() {
        return Err(Error::Infeasible(format!(
            "ln(tfb nt) = {ln_k:.4} is below e; no interior optimum"
        )));
    }
    let b = -(n - 1.0) / LN_2 * lambert_w_m1(x)?;
    Ok(b.clamp(1.0, tfb.max(1.0)))
}

/// Leading-order growth terms of the zero-forcing optimum next to the exact
/// solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingReport {
    /// Growth with `tfb`: `ln ln tfb` (order only).
    pub tfb_term: f64,
    /// Growth with `nt`: `(nt-1) log2 snr`.
    pub nt_term: f64,
    /// Growth with SNR: `(nt-1) log2(snr / nt)`.
    pub snr_term: f64,
    pub exact: BoptSolution,
}

pub fn bopt_scaling_report(snr: f64, nt: usize, tfb: f64) -> Result<ScalingReport> {
    let n = check_nt(nt)?;
    Ok(ScalingReport {
        tfb_term: tfb.ln().ln(),
        nt_term: (n - 1.0) * snr.log2(),
        snr_term: (n - 1.0) * (snr / n).log2(),
        exact: zf_bopt_fixed_point(snr, nt, tfb)?,
    })
}

/// Integer `b` nearest to `b_cont` that gives a whole number of users
/// (`tfb % b == 0`) within `[ceil(log2 nt), tfb / nt]`; of the nearest
/// feasible value on each side, the one with the larger approximate rate.
pub fn integer_b_projection(snr: f64, nt: usize, tfb: u32, b_cont: f64) -> Result<u32> {
    let n = check_nt(nt)?;
    let lo = n.log2().ceil() as u32;
    let hi = tfb / nt as u32;
    let feasible: Vec<u32> = (lo.max(1)..=hi)
        .filter(|b| tfb.is_multiple_of(*b))
        .collect();
    if feasible.is_empty() {
        return Err(Error::Infeasible(format!(
            "no integer b in [{lo}, {hi}] divides tfb = {tfb}"
        )));
    }
    let below = feasible
        .iter()
        .rev()
        .find(|&&b| b as f64 <= b_cont)
        .copied();
    let above = feasible.iter().find(|&&b| b as f64 >= b_cont).copied();
    let rate = |b: u32| zf_rate_approx(&AnalyticParams::new(snr, nt, tfb as f64, b as f64));
    Ok(match (below, above) {
        (Some(a), Some(c)) if a != c => {
            if rate(a)? >= rate(c)? {
                a
            } else {
                c
            }
        }
        (Some(a), _) => a,
        (None, Some(c)) => c,
        (None, None) => unreachable!("feasible set is non-empty"),
    })
}
