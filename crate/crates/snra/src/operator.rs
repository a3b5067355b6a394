//! Smooth numerical reward activation.
//!
//! Maps a non-negative task error `e` to a reward in `(0, 1]`:
//!
//! ```text
//! sigmoid:        r = 2 / (1 + exp(k·e))
//! shifted tanh:   r = 1 - tanh(k·e)       (= 2 / (1 + exp(2·k·e)))
//! ```
//!
//! Both operators are exactly 1 at `e = 0`, strictly decreasing in `e`, and
//! approach the 0/1 indicator of exact correctness as the sharpness `k`
//! grows ("reward hardening", see [`hardened_reward`]).
//!
//! Evaluation goes through `2·t/(1+t)` with `t = exp(-x)`, `x = k·e >= 0`,
//! so the exponential never overflows; when `t` underflows the reward
//! saturates at [`REWARD_FLOOR`] instead of reaching 0, keeping the output
//! strictly positive for any finite input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functional form of the reward activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    /// `2 / (1 + exp(k·e))` — the default operator.
    #[default]
    Sigmoid,
    /// `1 - tanh(k·e)` — parity variant; same range and monotone decay.
    TanhShifted,
}

/// Sharpness and operator choice for one reward evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnraParams {
    k: f64,
    kind: OperatorKind,
}

impl SnraParams {
    /// Validates `k > 0` (finite).
    pub fn new(k: f64, kind: OperatorKind) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::field("k", format!("sharpness must be positive, got {k}")));
        }
        Ok(Self { k, kind })
    }

    /// Sigmoid operator at sharpness `k`.
    pub fn sigmoid(k: f64) -> Result<Self> {
        Self::new(k, OperatorKind::Sigmoid)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
}

/// Smallest reward returned once the underlying exponential underflows:
/// the smallest positive representable double (subnormal).
///
/// Keeps the reward strictly positive in the hardening regime (`k·e` up to
/// 1e4 and beyond) without ever producing 0, Inf or NaN, and sits below
/// every reward the formula can still compute, preserving monotonicity.
pub const REWARD_FLOOR: f64 = 5e-324;

fn check_error_domain(e: f64) -> Result<()> {
    if !e.is_finite() {
        return Err(Error::domain(format!("error must be finite, got {e}")));
    }
    if e < 0.0 {
        return Err(Error::domain(format!("error must be non-negative, got {e}")));
    }
    Ok(())
}

/// `2 / (1 + exp(x))` for `x >= 0`, evaluated without overflow.
fn two_over_one_plus_exp(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let t = (-x).exp();
    let r = 2.0 * t / (1.0 + t);
    if r == 0.0 {
        REWARD_FLOOR
    } else {
        r
    }
}

/// Smooth reward for a non-negative error.
///
/// Exactly 1 at `e = 0`, strictly positive and monotone non-increasing in
/// `e` for both operator kinds.
pub fn snra(params: SnraParams, e: f64) -> Result<f64> {
    check_error_domain(e)?;
    let x = params.k * e;
    Ok(match params.kind {
        OperatorKind::Sigmoid => two_over_one_plus_exp(x),
        // 1 - tanh(x) == 2 / (1 + exp(2x)), which stays exact near x = 0
        // and strictly positive far past where tanh saturates to 1.
        OperatorKind::TanhShifted => two_over_one_plus_exp(2.0 * x),
    })
}

/// Analytic derivative of [`snra`] with respect to the error.
///
/// Sigmoid: `-2k·exp(k·e) / (1 + exp(k·e))²`; non-positive everywhere, with
/// peak magnitude `k/2` at `e = 0`. The shifted-tanh variant peaks at `k`.
pub fn snra_gradient(params: SnraParams, e: f64) -> Result<f64> {
    check_error_domain(e)?;
    let k = params.k;
    let g = match params.kind {
        OperatorKind::Sigmoid => {
            // exp(ke)/(1+exp(ke))^2 == t/(1+t)^2 with t = exp(-ke)
            let t = (-k * e).exp();
            -2.0 * k * t / ((1.0 + t) * (1.0 + t))
        }
        OperatorKind::TanhShifted => {
            // -k·sech²(ke) == -4k·t/(1+t)² with t = exp(-2ke)
            let t = (-2.0 * k * e).exp();
            -4.0 * k * t / ((1.0 + t) * (1.0 + t))
        }
    };
    // normalize -0.0 from underflow so records never print a negative zero
    Ok(if g == 0.0 { 0.0 } else { g })
}

/// The `k -> ∞` limit of the smooth reward: 1 iff the error is exactly 0.
///
/// Serves both as the reference for hardening-limit tests and as the binary
/// reward used by the baseline training mechanism.
pub fn hardened_reward(e: f64) -> Result<f64> {
    check_error_domain(e)?;
    Ok(if e == 0.0 { 1.0 } else { 0.0 })
}

/// Inverse of the sigmoid operator: the error whose reward equals `reward`
/// at sharpness `k`, i.e. `ln(2/reward - 1) / k` for `reward` in `(0, 1]`.
pub fn snra_inverse(k: f64, reward: f64) -> Result<f64> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::field("k", format!("sharpness must be positive, got {k}")));
    }
    if !reward.is_finite() || reward <= 0.0 || reward > 1.0 {
        return Err(Error::domain(format!("reward must lie in (0, 1], got {reward}")));
    }
    Ok((2.0 / reward - 1.0).ln() / k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(k: f64) -> SnraParams {
        SnraParams::sigmoid(k).unwrap()
    }

    fn tanh_shifted(k: f64) -> SnraParams {
        SnraParams::new(k, OperatorKind::TanhShifted).unwrap()
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SnraParams::sigmoid(0.0).is_err());
        assert!(SnraParams::sigmoid(-1.0).is_err());
        assert!(SnraParams::sigmoid(f64::NAN).is_err());
        assert!(SnraParams::sigmoid(f64::INFINITY).is_err());
    }

    #[test]
    fn invalid_error_rejected() {
        for p in [sig(1.0), tanh_shifted(1.0)] {
            assert!(snra(p, -1e-12).is_err());
            assert!(snra(p, f64::NAN).is_err());
            assert!(snra(p, f64::INFINITY).is_err());
            assert!(snra_gradient(p, -1.0).is_err());
        }
        assert!(hardened_reward(-1.0).is_err());
        assert!(hardened_reward(f64::NAN).is_err());
    }

    #[test]
    fn anchor_is_exactly_one_at_zero_error() {
        for k in [1e-3, 0.5, 1.0, 5.0, 100.0, 1e4] {
            assert_eq!(snra(sig(k), 0.0).unwrap(), 1.0);
            assert_eq!(snra(tanh_shifted(k), 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn frozen_points_match_extended_precision_oracle() {
        // 2/(1+exp(ln 3)) = 1/2 exactly
        let r = snra(sig(1.0), 3.0_f64.ln()).unwrap();
        assert!((r - 0.5).abs() < 1e-15, "got {r}");

        // inverse of the operator at reward 0.01: e = ln(199)/100
        let e_star = 199.0_f64.ln() / 100.0;
        assert!((e_star - 0.052933048247244924).abs() < 1e-16);
        let r = snra(sig(100.0), e_star).unwrap();
        assert!((r - 0.01).abs() < 1e-15, "got {r}");

        // 2/(1+exp(2))
        let r = snra(sig(2.0), 1.0).unwrap();
        assert!((r - 0.23840584404423511).abs() < 1e-15, "got {r}");

        assert_eq!(snra(tanh_shifted(5.0), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn gradient_frozen_points() {
        // magnitude k/2 at the origin, negative sign
        assert!((snra_gradient(sig(4.0), 0.0).unwrap() + 2.0).abs() < 1e-15);
        assert!((snra_gradient(sig(1.0), 0.0).unwrap() + 0.5).abs() < 1e-15);
        // -4·exp(2)/(1+exp(2))^2
        let g = snra_gradient(sig(2.0), 1.0).unwrap();
        assert!((g + 0.41997434161402607).abs() < 1e-15, "got {g}");
        // exponential suppression far out
        assert_eq!(snra_gradient(sig(1.0), 1e4).unwrap(), 0.0);
        // tanh variant peaks at k
        assert!((snra_gradient(tanh_shifted(3.0), 0.0).unwrap() + 3.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_finite_difference() {
        let h = 1e-6;
        for &k in &[0.5, 1.0, 10.0, 100.0] {
            for kind in [OperatorKind::Sigmoid, OperatorKind::TanhShifted] {
                let p = SnraParams::new(k, kind).unwrap();
                let mut e = 0.0f64;
                while e <= 10.0 {
                    let base = e.max(h);
                    let fd = (snra(p, base + h).unwrap() - snra(p, base - h).unwrap()) / (2.0 * h);
                    let an = snra_gradient(p, base).unwrap();
                    let tol = (1e-4 * an.abs()).max(1e-6);
                    assert!(
                        (an - fd).abs() <= tol,
                        "k={k} kind={kind:?} e={base}: analytic {an} vs fd {fd}"
                    );
                    e += 0.25;
                }
            }
        }
    }

    #[test]
    fn hardening_limit_saturates_cleanly() {
        // k·e = 100: well below underflow, astronomically small reward
        let r = snra(sig(1e4), 0.01).unwrap();
        assert!(r > 0.0 && r < 1e-40, "got {r}");
        // k·e = 1e4: exp underflows, reward pinned at the floor
        let r = snra(sig(1e4), 1.0).unwrap();
        assert_eq!(r, REWARD_FLOOR);
        let r = snra(tanh_shifted(1e4), 1.0).unwrap();
        assert_eq!(r, REWARD_FLOOR);
        // monotone approach to 0 in k at fixed e
        let mut prev = f64::INFINITY;
        for k in [1.0, 10.0, 100.0, 1e3, 1e4] {
            let r = snra(sig(k), 0.01).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn hardened_reward_is_exact_indicator() {
        assert_eq!(hardened_reward(0.0).unwrap(), 1.0);
        assert_eq!(hardened_reward(1e-9).unwrap(), 0.0);
        assert_eq!(hardened_reward(5.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_round_trips_through_operator() {
        for &(k, r) in &[(1.0, 0.5), (100.0, 0.01), (50.0, 0.001), (3.0, 1.0)] {
            let e = snra_inverse(k, r).unwrap();
            let back = snra(sig(k), e).unwrap();
            assert!((back - r).abs() < 1e-12, "k={k} r={r}: got {back}");
        }
        assert!(snra_inverse(1.0, 0.0).is_err());
        assert!(snra_inverse(1.0, 1.5).is_err());
        assert!(snra_inverse(0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn reward_in_unit_interval(k in 1e-3f64..1e4, e in 0.0f64..1e4) {
            for kind in [OperatorKind::Sigmoid, OperatorKind::TanhShifted] {
                let r = snra(SnraParams::new(k, kind).unwrap(), e).unwrap();
                prop_assert!(r > 0.0 && r <= 1.0);
                prop_assert!(r.is_finite());
            }
        }

        #[test]
        fn monotone_decreasing_in_error(k in 1e-2f64..100.0, e1 in 0.0f64..50.0, gap in 1e-6f64..10.0) {
            let p = SnraParams::sigmoid(k).unwrap();
            let lo = snra(p, e1 + gap).unwrap();
            let hi = snra(p, e1).unwrap();
            // strict except where both have saturated to the floor
            prop_assert!(hi > lo || (hi == REWARD_FLOOR && lo == REWARD_FLOOR) || hi == lo && hi < 1e-300);
        }

        #[test]
        fn monotone_decreasing_in_sharpness(e in 1e-6f64..50.0, k1 in 1e-2f64..100.0, factor in 1.001f64..100.0) {
            let lo = snra(SnraParams::sigmoid(k1 * factor).unwrap(), e).unwrap();
            let hi = snra(SnraParams::sigmoid(k1).unwrap(), e).unwrap();
            prop_assert!(hi > lo || (hi == lo && lo <= REWARD_FLOOR));
        }

        #[test]
        fn gradient_non_positive(k in 1e-2f64..1e3, e in 0.0f64..100.0) {
            prop_assert!(snra_gradient(SnraParams::sigmoid(k).unwrap(), e).unwrap() <= 0.0);
        }
    }

    #[test]
    fn gradient_extremum_on_log_grid() {
        // scan a log-spaced grid; the largest magnitude must sit at the
        // smallest error and equal k/2 within 1e-12
        for &k in &[0.5, 1.0, 10.0, 100.0] {
            let p = sig(k);
            let mut grid = vec![0.0];
            // start where the true drop from the origin (~(k·e)²/4 relative)
            // clears floating-point noise
            let mut e = 3e-5 / k;
            while e <= 20.0 / k {
                grid.push(e);
                e *= 1.6;
            }
            let mags: Vec<f64> = grid
                .iter()
                .map(|&e| snra_gradient(p, e).unwrap().abs())
                .collect();
            let (argmax, &max) = mags
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            assert_eq!(argmax, 0, "k={k}: extremum drifted off the origin");
            assert!((max - k / 2.0).abs() < 1e-12 * k.max(1.0), "k={k}: max {max}");
        }
    }
}
