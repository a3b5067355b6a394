//! Smooth verifiable reward shaping and group-relative policy optimization,
//! at desk scale.
//!
//! The crate is organized around a single reward pipeline:
//!
//! ```text
//! prediction --verifier--> score V in [0,1] --Φ--> error e >= 0
//!                                   (discrete)          |
//! prediction --squared distance--> error e >= 0 --------+
//!                                                       v
//!                    smooth reward r = 2 / (1 + exp(k(t) * e))
//!                                                       |
//!          composite R = (1-λ)·r + λ·r_fmt              v
//!                    group advantages A_i = (R_i - R̄)/(σ_R + ε) · r_i^α
//! ```
//!
//! * [`operator`] — the sigmoid reward activation, its shifted-tanh variant,
//!   the analytic gradient, and the hardened (0/1) limit.
//! * [`schedule`] — the dynamic sharpness curriculum `k(t)`.
//! * [`verifiers`] — graded verifiers for direction / order / count / position
//!   subtasks, plus the log-scaled `Φ` mapping and its `η` calibration.
//! * [`advantage`] — composite rewards and the three advantage estimators
//!   (standard group-relative, absolute-modulated, pure absolute).
//! * [`envs`] — seeded synthetic task generators and a tabular softmax policy
//!   with exactly computable log-probabilities.
//! * [`trainer`] — clipped-surrogate policy-gradient training with KL
//!   regularization against a frozen reference.
//! * [`analysis`] — run metrics and Monte-Carlo checkers for the variance
//!   suppression / sensitivity recovery / gradient extremum properties.
//! * [`cli`] — the experiment runner behind the `snra` binary
//!   (`train`, `roadmap`, `verify-theory`, `verify-verifiers`, `ablate`).
//!
//! See the crate `examples/` directory for one runnable walkthrough per
//! capability.

pub mod advantage;
pub mod analysis;
pub mod cli;
pub mod envs;
pub mod error;
pub mod operator;
pub mod schedule;
pub mod trainer;
pub mod verifiers;

pub use advantage::{
    ap_grpo_advantage, clip_advantage, composite_reward, compute_advantages, grpo_advantage,
    pure_absolute_advantage, AdvantageConfig, AdvantageEstimator, RewardBreakdown,
    TrajectoryGroup,
};
pub use error::{Error, Result};
pub use operator::{hardened_reward, snra, snra_gradient, OperatorKind, SnraParams};
pub use schedule::{ScheduleShape, SharpnessSchedule};
pub use verifiers::{
    calibrate_phi, continuous_error, phi_map, verify_count, verify_direction, verify_order_list,
    verify_order_pair, verify_position, ContinuousError, PhiParams, VerifierOutcome,
};
