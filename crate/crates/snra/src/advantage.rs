//! Composite rewards and group-relative advantage estimation.
//!
//! For a group of `G` responses to one query with composite rewards `R_i`,
//! the relative term standardizes within the group,
//!
//! ```text
//! A_i = (R_i - R̄) / (σ_R + ε)          (population σ, divide by G)
//! ```
//!
//! and the absolute-modulated estimator multiplies by the smooth numerical
//! reward raised to `α`:
//!
//! ```text
//! A'_i = A_i · r_i^α
//! ```
//!
//! The modulation preserves the sign and the positive ordering of the
//! relative advantages, suppresses update variance when rewards are small,
//! and recovers plain standardization as rewards approach 1. A centered
//! absolute scalar (`R_i - 1/2`) is included as a baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-trajectory reward decomposition.
///
/// `composite = (1-λ)·smooth + λ·format_bit` holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Task error fed to the reward operator.
    pub error: f64,
    /// Smooth numerical reward; in `(0, 1]` for the smooth operator, and
    /// exactly 0 or 1 under the hardened baseline.
    pub smooth: f64,
    /// Structural-compliance bit.
    pub format_ok: bool,
    /// Blended reward entering the relative advantage term.
    pub composite: f64,
    /// Blend weight `λ`.
    pub balance: f64,
}

impl RewardBreakdown {
    pub fn new(error: f64, smooth: f64, format_ok: bool, balance: f64) -> Result<Self> {
        let composite = composite_reward(smooth, format_ok, balance)?;
        Ok(Self {
            error,
            smooth,
            format_ok,
            composite,
            balance,
        })
    }
}

/// `(1-λ)·r + λ·r_fmt` for `λ` in `[0, 1)`.
pub fn composite_reward(smooth: f64, format_ok: bool, balance: f64) -> Result<f64> {
    if !balance.is_finite() || !(0.0..1.0).contains(&balance) {
        return Err(Error::field("lambda", format!("must lie in [0, 1), got {balance}")));
    }
    if !smooth.is_finite() || !(0.0..=1.0).contains(&smooth) {
        return Err(Error::domain(format!("smooth reward must lie in [0, 1], got {smooth}")));
    }
    let fmt = if format_ok { 1.0 } else { 0.0 };
    Ok((1.0 - balance) * smooth + balance * fmt)
}

/// `G` sampled responses to one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryGroup {
    /// Index of the query context the group answers.
    pub context_id: usize,
    /// Sampled action bins.
    pub actions: Vec<usize>,
    /// Composite rewards `R_i` in `[0, 1]`.
    pub rewards: Vec<f64>,
    /// Smooth numerical rewards `r_i` (the modulation base).
    pub smooth_rewards: Vec<f64>,
    /// Log-probabilities under the current policy, in nats.
    pub logprob_current: Vec<f64>,
    /// Log-probabilities at sampling time.
    pub logprob_old: Vec<f64>,
}

impl TrajectoryGroup {
    pub fn new(
        context_id: usize,
        actions: Vec<usize>,
        rewards: Vec<f64>,
        smooth_rewards: Vec<f64>,
        logprob_current: Vec<f64>,
        logprob_old: Vec<f64>,
    ) -> Result<Self> {
        let g = rewards.len();
        if g < 2 {
            return Err(Error::domain(format!("group size must be at least 2, got {g}")));
        }
        if [actions.len(), smooth_rewards.len(), logprob_current.len(), logprob_old.len()]
            .iter()
            .any(|&len| len != g)
        {
            return Err(Error::domain("group vectors must share one length".to_string()));
        }
        for &r in rewards.iter().chain(smooth_rewards.iter()) {
            if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                return Err(Error::domain(format!("rewards must lie in [0, 1], got {r}")));
            }
        }
        for &lp in logprob_current.iter().chain(logprob_old.iter()) {
            if !lp.is_finite() {
                return Err(Error::domain(format!("log-probabilities must be finite, got {lp}")));
            }
        }
        Ok(Self {
            context_id,
            actions,
            rewards,
            smooth_rewards,
            logprob_current,
            logprob_old,
        })
    }

    /// Convenience constructor for reward-only groups in tests and checkers.
    pub fn from_rewards(rewards: Vec<f64>, smooth_rewards: Vec<f64>) -> Result<Self> {
        let g = rewards.len();
        Self::new(0, vec![0; g], rewards, smooth_rewards, vec![0.0; g], vec![0.0; g])
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Which advantage estimator a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvantageEstimator {
    /// Intra-group standardization only.
    StandardGrpo,
    /// Standardization multiplied by `r^α` (the default).
    #[default]
    ApGrpo,
    /// Centered absolute scalar `R - 1/2`, no group normalization.
    PureAbsolute,
}

/// Estimator choice plus its numeric knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageConfig {
    /// Guard added to the group standard deviation.
    pub norm_epsilon: f64,
    /// Modulation exponent `α`. The supported surface is `α >= 1`; values
    /// in `[0, 1)` are accepted so ablations can reduce to the standard
    /// estimator (`α = 0` reproduces it exactly).
    pub abs_exponent: f64,
    /// Symmetric advantage clamp `c`.
    pub adv_clip: f64,
    pub estimator: AdvantageEstimator,
}

impl AdvantageConfig {
    pub fn new(
        norm_epsilon: f64,
        abs_exponent: f64,
        adv_clip: f64,
        estimator: AdvantageEstimator,
    ) -> Result<Self> {
        if !norm_epsilon.is_finite() || norm_epsilon <= 0.0 {
            return Err(Error::field(
                "norm_epsilon",
                format!("must be positive, got {norm_epsilon}"),
            ));
        }
        if !abs_exponent.is_finite() || abs_exponent < 0.0 {
            return Err(Error::field(
                "alpha",
                format!("must be non-negative, got {abs_exponent}"),
            ));
        }
        if !adv_clip.is_finite() || adv_clip <= 0.0 {
            return Err(Error::field("adv_clip", format!("must be positive, got {adv_clip}")));
        }
        Ok(Self {
            norm_epsilon,
            abs_exponent,
            adv_clip,
            estimator,
        })
    }
}

impl Default for AdvantageConfig {
    fn default() -> Self {
        Self {
            norm_epsilon: 1e-6,
            abs_exponent: 1.0,
            adv_clip: 1.5,
            estimator: AdvantageEstimator::ApGrpo,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divide by G, no Bessel correction).
fn population_std(values: &[f64], mean: f64) -> f64 {
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Standardized within-group advantages `(R_i - R̄) / (σ_R + ε)`.
///
/// A degenerate group (all rewards equal) yields exactly zero advantages;
/// otherwise the output is mean-centered. The equality check is explicit:
/// summation rounding would otherwise leave ~1e-11 dust on degenerate
/// groups.
pub fn grpo_advantage(group: &TrajectoryGroup, norm_epsilon: f64) -> Vec<f64> {
    if group.rewards.windows(2).all(|w| w[0] == w[1]) {
        return vec![0.0; group.len()];
    }
    let m = mean(&group.rewards);
    let denom = population_std(&group.rewards, m) + norm_epsilon;
    group.rewards.iter().map(|r| (r - m) / denom).collect()
}

/// Absolute-modulated advantages `A_i · r_i^α`.
///
/// The relative term uses the composite rewards; the modulation base is the
/// smooth numerical reward.
pub fn ap_grpo_advantage(group: &TrajectoryGroup, cfg: &AdvantageConfig) -> Vec<f64> {
    let relative = grpo_advantage(group, cfg.norm_epsilon);
    relative
        .iter()
        .zip(group.smooth_rewards.iter())
        .map(|(a, r)| a * r.powf(cfg.abs_exponent))
        .collect()
}

/// Centered absolute scalar baseline: `R_i - 1/2` per member.
pub fn pure_absolute_advantage(group: &TrajectoryGroup) -> Vec<f64> {
    group.rewards.iter().map(|r| r - 0.5).collect()
}

/// Element-wise clamp to `[-c, c]`.
pub fn clip_advantage(adv: &[f64], c: f64) -> Vec<f64> {
    adv.iter().map(|a| a.clamp(-c, c)).collect()
}

/// Unclipped advantages under the configured estimator.
pub fn estimate_advantages(group: &TrajectoryGroup, cfg: &AdvantageConfig) -> Vec<f64> {
    match cfg.estimator {
        AdvantageEstimator::StandardGrpo => grpo_advantage(group, cfg.norm_epsilon),
        AdvantageEstimator::ApGrpo => ap_grpo_advantage(group, cfg),
        AdvantageEstimator::PureAbsolute => pure_absolute_advantage(group),
    }
}

/// Estimator dispatch followed by the symmetric clamp; the vector that
/// enters the surrogate loss.
pub fn compute_advantages(group: &TrajectoryGroup, cfg: &AdvantageConfig) -> Vec<f64> {
    clip_advantage(&estimate_advantages(group, cfg), cfg.adv_clip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn group(rewards: &[f64]) -> TrajectoryGroup {
        TrajectoryGroup::from_rewards(rewards.to_vec(), rewards.to_vec()).unwrap()
    }

    fn cfg(alpha: f64) -> AdvantageConfig {
        AdvantageConfig::new(1e-12, alpha, 1.5, AdvantageEstimator::ApGrpo).unwrap()
    }

    #[test]
    fn composite_reward_examples() {
        assert_eq!(composite_reward(1.0, true, 0.1).unwrap(), 1.0);
        let v = composite_reward(0.8, true, 0.1).unwrap();
        assert!((v - 0.82).abs() < 1e-15);
        let v = composite_reward(0.8, false, 0.1).unwrap();
        assert!((v - 0.72).abs() < 1e-15);
        assert!(composite_reward(0.8, true, 1.0).is_err());
        assert!(composite_reward(0.8, true, -0.1).is_err());
        assert!(composite_reward(1.5, true, 0.1).is_err());
    }

    #[test]
    fn breakdown_identity_holds_exactly() {
        let b = RewardBreakdown::new(0.25, 0.8, true, 0.1).unwrap();
        assert_eq!(b.composite, (1.0 - 0.1) * 0.8 + 0.1);
    }

    #[test]
    fn group_construction_invariants() {
        assert!(TrajectoryGroup::from_rewards(vec![0.5], vec![0.5]).is_err());
        assert!(TrajectoryGroup::from_rewards(vec![0.5, 1.5], vec![0.5, 0.5]).is_err());
        assert!(TrajectoryGroup::from_rewards(vec![0.5, 0.5], vec![0.5]).is_err());
        assert!(TrajectoryGroup::new(
            0,
            vec![0, 1],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![f64::NAN, 0.0],
            vec![0.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn grpo_advantage_frozen_examples() {
        assert_eq!(grpo_advantage(&group(&[0.5; 4]), 1e-6), vec![0.0; 4]);

        // independently recomputed: mean 0.5, population std sqrt(0.05)
        let adv = grpo_advantage(&group(&[0.2, 0.4, 0.6, 0.8]), 1e-12);
        let expected = [-1.3416407864998738, -0.4472135954999579, 0.4472135954999579, 1.3416407864998738];
        for (a, e) in adv.iter().zip(expected.iter()) {
            assert!((a - e).abs() < 1e-9, "got {a}, want {e}");
        }

        let adv = grpo_advantage(&group(&[0.0, 1.0]), 1e-12);
        assert!((adv[0] + 1.0).abs() < 1e-9);
        assert!((adv[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grpo_advantage_is_mean_centered() {
        let adv = grpo_advantage(&group(&[0.1, 0.9, 0.3, 0.6, 0.2]), 1e-6);
        let m: f64 = adv.iter().sum::<f64>() / adv.len() as f64;
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn ap_grpo_frozen_examples() {
        let g = group(&[0.2, 0.4, 0.6, 0.8]);

        let adv = ap_grpo_advantage(&g, &cfg(1.0));
        let expected = [-0.26832815729997476, -0.17888543819998315, 0.26832815729997476, 1.073312629199899];
        for (a, e) in adv.iter().zip(expected.iter()) {
            assert!((a - e).abs() < 1e-9, "got {a}, want {e}");
        }

        let adv = ap_grpo_advantage(&g, &cfg(2.0));
        let expected = [-0.05366563145999495, -0.07155417527999326, 0.16099689437998486, 0.8586501033599192];
        for (a, e) in adv.iter().zip(expected.iter()) {
            assert!((a - e).abs() < 1e-9, "got {a}, want {e}");
        }

        // unit modulation: all smooth rewards 1 reproduces the relative term
        let g = TrajectoryGroup::from_rewards(vec![0.2, 0.4, 0.6, 0.8], vec![1.0; 4]).unwrap();
        assert_eq!(ap_grpo_advantage(&g, &cfg(1.0)), grpo_advantage(&g, 1e-12));
    }

    #[test]
    fn alpha_zero_reduces_to_standard_exactly() {
        let g = group(&[0.15, 0.95, 0.4, 0.7]);
        assert_eq!(ap_grpo_advantage(&g, &cfg(0.0)), grpo_advantage(&g, 1e-12));
    }

    #[test]
    fn pure_absolute_examples() {
        assert_eq!(pure_absolute_advantage(&group(&[0.5, 0.5])), vec![0.0, 0.0]);
        assert_eq!(pure_absolute_advantage(&group(&[1.0, 0.0])), vec![0.5, -0.5]);
        let adv = pure_absolute_advantage(&group(&[0.2, 0.8, 0.8, 0.8]));
        for (a, e) in adv.iter().zip([-0.3, 0.3, 0.3, 0.3].iter()) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_advantage(&[2.0], 1.5), vec![1.5]);
        assert_eq!(clip_advantage(&[-0.3], 1.5), vec![-0.3]);
        assert_eq!(clip_advantage(&[-9.0, 9.0], 1.5), vec![-1.5, 1.5]);
    }

    #[test]
    fn degenerate_group_zero_under_all_estimators() {
        let g = group(&[0.5; 8]);
        for est in [
            AdvantageEstimator::StandardGrpo,
            AdvantageEstimator::ApGrpo,
            AdvantageEstimator::PureAbsolute,
        ] {
            let c = AdvantageConfig::new(1e-6, 1.0, 1.5, est).unwrap();
            assert_eq!(compute_advantages(&g, &c), vec![0.0; 8]);
        }
    }

    #[test]
    fn config_validation() {
        assert!(AdvantageConfig::new(0.0, 1.0, 1.5, AdvantageEstimator::ApGrpo).is_err());
        assert!(AdvantageConfig::new(1e-6, -0.5, 1.5, AdvantageEstimator::ApGrpo).is_err());
        assert!(AdvantageConfig::new(1e-6, 1.0, 0.0, AdvantageEstimator::ApGrpo).is_err());
    }

    fn sign_of(x: f64) -> i8 {
        if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        }
    }

    proptest! {
        /// Modulation by a non-negative scalar cannot flip a sign.
        #[test]
        fn sign_preservation(
            rewards in proptest::collection::vec(0.001f64..=1.0, 2..=16),
            alpha in prop_oneof![Just(1.0f64), Just(1.5), Just(2.0)],
        ) {
            let g = TrajectoryGroup::from_rewards(rewards.clone(), rewards).unwrap();
            let base = grpo_advantage(&g, 1e-6);
            let modulated = ap_grpo_advantage(
                &g,
                &AdvantageConfig::new(1e-6, alpha, 1.5, AdvantageEstimator::ApGrpo).unwrap(),
            );
            for (a, m) in base.iter().zip(modulated.iter()) {
                prop_assert_eq!(sign_of(*a), sign_of(*m));
            }
        }

        /// With rewards monotone in the relative advantage (R = r), positive
        /// advantages keep their ranking after modulation.
        #[test]
        fn positive_ordering_preservation(
            rewards in proptest::collection::vec(0.001f64..=1.0, 2..=16),
            alpha in prop_oneof![Just(1.0f64), Just(1.5), Just(2.0)],
        ) {
            let g = TrajectoryGroup::from_rewards(rewards.clone(), rewards).unwrap();
            let base = grpo_advantage(&g, 1e-6);
            let modulated = ap_grpo_advantage(
                &g,
                &AdvantageConfig::new(1e-6, alpha, 1.5, AdvantageEstimator::ApGrpo).unwrap(),
            );
            for i in 0..base.len() {
                for j in 0..base.len() {
                    if base[i] > base[j] && base[j] > 0.0 {
                        prop_assert!(modulated[i] >= modulated[j]);
                    }
                }
            }
        }

        /// Rescaling all rewards by one positive constant cannot change the
        /// sign pattern of the relative term (near-zero entries excepted).
        #[test]
        fn scale_sign_invariance(
            rewards in proptest::collection::vec(0.0f64..=1.0, 2..=12),
            scale in 0.1f64..1.0,
        ) {
            let g = TrajectoryGroup::from_rewards(rewards.clone(), rewards.clone()).unwrap();
            let scaled: Vec<f64> = rewards.iter().map(|r| r * scale).collect();
            let gs = TrajectoryGroup::from_rewards(scaled.clone(), scaled).unwrap();
            let a = grpo_advantage(&g, 1e-9);
            let b = grpo_advantage(&gs, 1e-9);
            for (x, y) in a.iter().zip(b.iter()) {
                if x.abs() > 1e-9 && y.abs() > 1e-9 {
                    prop_assert_eq!(sign_of(*x), sign_of(*y));
                }
            }
        }

        /// Raising α weakly shrinks every modulated magnitude when r <= 1.
        #[test]
        fn alpha_suppression_monotone(
            rewards in proptest::collection::vec(0.001f64..0.999, 3..=12),
        ) {
            let g = TrajectoryGroup::from_rewards(rewards.clone(), rewards).unwrap();
            let mut prev: Option<Vec<f64>> = None;
            for alpha in [1.0, 1.5, 2.0, 3.0] {
                let adv = ap_grpo_advantage(
                    &g,
                    &AdvantageConfig::new(1e-6, alpha, 1.5, AdvantageEstimator::ApGrpo).unwrap(),
                );
                if let Some(p) = &prev {
                    for (cur, old) in adv.iter().zip(p.iter()) {
                        prop_assert!(cur.abs() <= old.abs() + 1e-15);
                    }
                }
                prev = Some(adv);
            }
        }
    }
}
