//! Expected maximum of `K` i.i.d. `Gamma(nt, 1)` variates (the largest
//! squared channel norm among `K` users).

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxGammaForm {
    /// `H_{K nt} = sum_{k=1}^{K nt} 1/k`, the expected maximum of `K nt`
    /// unit exponentials; a lower bound on the `Gamma(nt, 1)` maximum.
    HarmonicSum,
    /// `ln(K nt) + gamma`.
    Asymptotic,
    /// `ln(K nt)`, the form used inside the rate approximations.
    LogOnly,
}

pub fn max_gamma_expectation(k_users: u64, nt: u64, form: MaxGammaForm) -> Result<f64> {
    if k_users == 0 || nt == 0 {
        return Err(Error::Domain {
            function: "max_gamma_expectation",
            value: (k_users * nt) as f64,
        });
    }
    let m = k_users * nt;
    Ok(match form {
        // summed smallest-first for accuracy
        MaxGammaForm::HarmonicSum => (1..=m).rev().map(|k| 1.0 / k as f64).sum(),
        MaxGammaForm::Asymptotic => (m as f64).ln() + EULER_GAMMA,
        MaxGammaForm::LogOnly => (m as f64).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(
            max_gamma_expectation(1, 1, MaxGammaForm::HarmonicSum).unwrap(),
            1.0
        );
        let h4 = max_gamma_expectation(2, 2, MaxGammaForm::HarmonicSum).unwrap();
        assert!((h4 - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_form() {
        let a = max_gamma_expectation(100, 4, MaxGammaForm::Asymptotic).unwrap();
        assert!((a - 6.5686).abs() < 1e-4);
        let h = max_gamma_expectation(100, 4, MaxGammaForm::HarmonicSum).unwrap();
        assert!(h - a > 0.0 && h - a <= 0.002);
        let l = max_gamma_expectation(100, 4, MaxGammaForm::LogOnly).unwrap();
        assert!((a - l - EULER_GAMMA).abs() < 1e-15);
    }

    #[test]
    fn harmonic_sum_is_increasing_and_above_asymptote() {
        let mut prev = 0.0;
        for m in 1..2000u64 {
            let h = max_gamma_expectation(m, 1, MaxGammaForm::HarmonicSum).unwrap();
            assert!(h > prev);
            prev = h;
            if m >= 10 {
                let a = max_gamma_expectation(m, 1, MaxGammaForm::Asymptotic).unwrap();
                assert!(h > a - 1.0 / m as f64);
            }
        }
    }

    #[test]
    fn zero_counts_are_rejected() {
        assert!(max_gamma_expectation(0, 4, MaxGammaForm::HarmonicSum).is_err());
        assert!(max_gamma_expectation(4, 0, MaxGammaForm::LogOnly).is_err());
    }
}
