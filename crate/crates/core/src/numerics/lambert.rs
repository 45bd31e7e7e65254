//! Lambert W, lower real branch.

use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const STEP_TOL: f64 = 1e-12;

/// `W_{-1}(x)` for `-1/e <= x < 0`: the root `w <= -1` of `w e^w = x`.
///
/// Near the branch point the start comes from the series in
/// `p = -sqrt(2 (e x + 1))`; elsewhere from the two leading terms of the
/// small-argument expansion, `ln(-x) - ln(-ln(-x))`. Halley's method then
/// runs until the step falls below `1e-12` (relative to `|w|`).
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    let branch_point = -(-1.0f64).exp();
    // allow a few ulps of slack for callers that compute -1/e themselves
    if !x.is_finite() || x >= 0.0 || x < branch_point * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::Domain {
            function: "lambert_w_m1",
            value: x,
        });
    }

    let q = 2.0 * (std::f64::consts::E * x + 1.0);
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let p = -q.sqrt();
    let series = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if p.abs() < 1e-4 {
        return Ok(series.min(-1.0));
    }

    let mut w = if p.abs() < 1.0 {
        series
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2
    };

    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let fp = ew * wp1;
        let denom = fp - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= STEP_TOL * w.abs().max(1.0) {
            break;
        }
    }
    Ok(w.min(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on `w e^w = x` over `[-800, -1]`, where `w e^w` decreases
    /// from `0-` to `-1/e`.
    fn bisect(x: f64) -> f64 {
        let (mut lo, mut hi) = (-800.0f64, -1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn branch_point_is_minus_one() {
        let w = lambert_w_m1(-1.0 / std::f64::consts::E).unwrap();
        assert!((w + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn matches_bisection_oracle() {
        // bisection oracle values, frozen: -3.577152063957297, -3.08538971654063
        assert!((bisect(-0.1) - (-3.577152063957297)).abs() < 1e-9);
        assert!((lambert_w_m1(-0.1).unwrap() - (-3.577152)).abs() < 1e-5);
        assert!((lambert_w_m1(-0.14104).unwrap() - (-3.08538971654063)).abs() < 1e-9);
        for x in [-0.36, -0.3, -0.2, -0.05, -1e-3, -1e-8, -1e-30] {
            let w = lambert_w_m1(x).unwrap();
            assert!((w - bisect(x)).abs() < 1e-8 * w.abs(), "x = {x}");
        }
    }

    #[test]
    fn residual_on_grid() {
        let lo = -1.0 / std::f64::consts::E;
        let hi = -1e-6;
        for i in 1..=1000 {
            let x = lo + (hi - lo) * i as f64 / 1000.0;
            let w = lambert_w_m1(x).unwrap();
            assert!(w <= -1.0);
            assert!((w * w.exp() - x).abs() <= 1e-10, "x = {x}");
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        for x in [0.0, 0.5, -0.4, f64::NAN, f64::NEG_INFINITY] {
            assert!(
                matches!(lambert_w_m1(x), Err(Error::Domain { .. })),
                "x = {x}"
            );
        }
    }
}
