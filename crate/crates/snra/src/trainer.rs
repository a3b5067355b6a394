//! Group-sampling policy-gradient trainer.
//!
//! One step samples a group of `G` responses per corpus task, grades them
//! through the reward pipeline at the scheduled sharpness `k(t)`, turns the
//! rewards into (clipped) advantages, and descends the objective
//!
//! ```text
//! L = -(1/B) Σ_groups (1/G) Σ_i min(ρ_i·A_i, clip(ρ_i, 1-ε, 1+ε)·A_i)
//!     + β · (1/B) Σ_contexts KL(π_current ‖ π_reference)
//! ```
//!
//! with plain SGD on the policy logits. `ρ_i` is the probability ratio
//! `exp(logπ_current - logπ_old)`; groups are consumed in the step they are
//! sampled, so ratios equal 1 on the first inner epoch and depart from 1
//! only when `inner_epochs > 1`. Advantages are treated as constants of the
//! optimization (they depend on rewards, not on the logits), which keeps
//! the analytic gradient exactly checkable against finite differences.
//!
//! Each episode is a single action, so per-token advantage broadcasting is
//! the identity at this scale. The learning rate defaults to 0.1, sized for
//! tabular logits rather than network weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::advantage::{clip_advantage, estimate_advantages, AdvantageConfig, TrajectoryGroup};
use crate::analysis::advantage_variance;
use crate::envs::{
    expected_accuracy, sample_group, ActionCodec, RewardPipeline, TaskInstance, TaskTable,
    ToyPolicy, ACTION_BINS,
};
use crate::error::{Error, Result};
use crate::schedule::{schedule_k, SharpnessSchedule};

/// Everything a training run needs besides the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    /// Responses sampled per task per step.
    pub group_size: usize,
    /// Ratio clip ε of the surrogate, in (0, 1).
    pub ratio_clip: f64,
    /// KL regularization weight β ≥ 0.
    pub kl_coeff: f64,
    /// SGD step size on the logits.
    pub learning_rate: f64,
    /// Gradient evaluations per sampled batch (ratios stay 1 when this
    /// is 1).
    pub inner_epochs: usize,
    /// Sharpness curriculum; also fixes the number of training steps.
    pub schedule: SharpnessSchedule,
    /// Advantage estimator and its knobs.
    pub advantage: AdvantageConfig,
    /// Reward assembly (operator, Φ parameters, format balance λ).
    pub pipeline: RewardPipeline,
    /// Master seed for sampling.
    pub seed: u64,
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_size < 2 {
            return Err(Error::field("group_size", "must be at least 2"));
        }
        if !self.ratio_clip.is_finite() || self.ratio_clip <= 0.0 || self.ratio_clip >= 1.0 {
            return Err(Error::field(
                "ratio_clip",
                format!("must lie in (0, 1), got {}", self.ratio_clip),
            ));
        }
        if !self.kl_coeff.is_finite() || self.kl_coeff < 0.0 {
            return Err(Error::field(
                "kl_coeff",
                format!("must be non-negative, got {}", self.kl_coeff),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::field(
                "learning_rate",
                format!("must be positive, got {}", self.learning_rate),
            ));
        }
        if self.inner_epochs == 0 {
            return Err(Error::field("inner_epochs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.schedule.total_steps()
    }
}

/// Per-step metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub step: usize,
    /// Sharpness used for every reward this step; equals `schedule_k(step)`.
    pub sharpness: f64,
    /// Mean composite reward over all sampled responses.
    pub mean_reward: f64,
    /// Probability mass on correct answers, averaged over the corpus.
    pub accuracy: f64,
    /// Group-wise population variance of the unclipped advantage estimates,
    /// averaged over the batch (clipping would truncate the quantity being
    /// diagnosed).
    pub adv_variance: f64,
    /// Clipped surrogate component of the objective.
    pub loss: f64,
    /// Mean KL from the frozen reference over batch contexts.
    pub kl: f64,
}

/// A step's record plus diagnostics that do not belong in the record.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub record: TrainRecord,
    /// Mean |A| over the batch before clipping.
    pub mean_abs_advantage: f64,
}

/// End-of-run aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// First step whose accuracy reached 95% of the run maximum.
    pub t_conv: Option<usize>,
    /// Accuracy averaged over the last tenth of the run.
    pub final_accuracy: f64,
    pub max_accuracy: f64,
    pub mean_adv_variance: f64,
    pub mean_abs_advantage: f64,
    pub final_mean_reward: f64,
}

/// Records plus summary of one full run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<TrainRecord>,
    pub summary: RunSummary,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct TrainerState {
    policy: ToyPolicy,
    tables: Vec<TaskTable>,
    rng: ChaCha8Rng,
    step: usize,
}

impl TrainerState {
    /// Uniform initial policy over [`ACTION_BINS`] bins, one context per
    /// corpus task. Task contexts must equal corpus positions.
    pub fn new(config: &TrainerConfig, corpus: &[TaskInstance]) -> Result<Self> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::domain("corpus must be non-empty".to_string()));
        }
        for (i, task) in corpus.iter().enumerate() {
            if task.context_id != i {
                return Err(Error::domain(format!(
                    "task at position {i} carries context id {}; corpora must be indexed by position",
                    task.context_id
                )));
            }
        }
        let codec = ActionCodec::new(ACTION_BINS)?;
        let tables = corpus
            .iter()
            .map(|task| TaskTable::build(task, &codec, &config.pipeline.phi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            policy: ToyPolicy::uniform(corpus.len(), ACTION_BINS)?,
            tables,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            step: 0,
        })
    }

    pub fn policy(&self) -> &ToyPolicy {
        &self.policy
    }

    pub fn step(&self) -> usize {
        self.step
    }
}

/// Negated clipped surrogate objective of one group (a loss to minimize):
/// `-(1/G) Σ min(ρ_i·A_i, clip(ρ_i, 1-ε, 1+ε)·A_i)` with
/// `ρ_i = exp(logprob_current - logprob_old)`.
pub fn surrogate_loss(group: &TrajectoryGroup, advantages: &[f64], ratio_clip: f64) -> Result<f64> {
    if advantages.len() != group.len() {
        return Err(Error::domain(format!(
            "advantage vector length {} does not match group size {}",
            advantages.len(),
            group.len()
        )));
    }
    if !ratio_clip.is_finite() || ratio_clip <= 0.0 || ratio_clip >= 1.0 {
        return Err(Error::field("ratio_clip", format!("must lie in (0, 1), got {ratio_clip}")));
    }
    let mut objective = 0.0;
    for i in 0..group.len() {
        let rho = (group.logprob_current[i] - group.logprob_old[i]).exp();
        let unclipped = rho * advantages[i];
        let clipped = rho.clamp(1.0 - ratio_clip, 1.0 + ratio_clip) * advantages[i];
        objective += unclipped.min(clipped);
    }
    Ok(-objective / group.len() as f64)
}

/// Exact categorical KL from the frozen reference:
/// `Σ_b p_b (ln p_b - ln q_b)` over action bins.
pub fn kl_penalty(policy: &ToyPolicy, context_id: usize) -> Result<f64> {
    let current = policy.log_softmax(context_id)?;
    let reference = policy.reference_log_softmax(context_id)?;
    let kl = current
        .iter()
        .zip(reference.iter())
        .map(|(ls, ls_ref)| {
            let p = ls.exp();
            if p == 0.0 {
                0.0
            } else {
                p * (ls - ls_ref)
            }
        })
        .sum::<f64>();
    // Gibbs inequality guarantees non-negativity; rounding can leave dust
    Ok(kl.max(0.0))
}

/// Objective of one batch at the policy's current distribution: the SUM
/// over groups of per-group surrogate losses plus `β` times each context's
/// KL. Groups touch disjoint context rows, so summing (rather than
/// averaging over the batch) gives every context its own full-rate bandit
/// update regardless of corpus size. Ratios are re-evaluated against the
/// current log-probabilities (the stored `logprob_current` is ignored), so
/// the value moves as the logits move.
pub fn batch_objective(
    policy: &ToyPolicy,
    groups: &[TrajectoryGroup],
    advantages: &[Vec<f64>],
    ratio_clip: f64,
    kl_coeff: f64,
) -> Result<f64> {
    let (surrogate, kl, _) = batch_pass(policy, groups, advantages, ratio_clip, kl_coeff, false)?;
    Ok(surrogate + kl_coeff * kl)
}

/// Analytic gradient of [`batch_objective`] with respect to every logit,
/// along with the surrogate and KL components.
pub fn batch_gradients(
    policy: &ToyPolicy,
    groups: &[TrajectoryGroup],
    advantages: &[Vec<f64>],
    ratio_clip: f64,
    kl_coeff: f64,
) -> Result<(f64, f64, Vec<Vec<f64>>)> {
    batch_pass(policy, groups, advantages, ratio_clip, kl_coeff, true)
}

fn batch_pass(
    policy: &ToyPolicy,
    groups: &[TrajectoryGroup],
    advantages: &[Vec<f64>],
    ratio_clip: f64,
    kl_coeff: f64,
    with_grads: bool,
) -> Result<(f64, f64, Vec<Vec<f64>>)> {
    if groups.is_empty() {
        return Err(Error::domain("batch must contain at least one group".to_string()));
    }
    if groups.len() != advantages.len() {
        return Err(Error::domain("one advantage vector per group required".to_string()));
    }
    let bins = policy.bins();
    let mut grads = if with_grads {
        vec![vec![0.0; bins]; policy.contexts()]
    } else {
        Vec::new()
    };
    let mut surrogate_sum = 0.0;
    let mut kl_sum = 0.0;

    for (group, adv) in groups.iter().zip(advantages.iter()) {
        if adv.len() != group.len() {
            return Err(Error::domain("advantage vector length mismatch".to_string()));
        }
        let ctx = group.context_id;
        let ls = policy.log_softmax(ctx)?;
        let ls_ref = policy.reference_log_softmax(ctx)?;
        let probs: Vec<f64> = ls.iter().map(|l| l.exp()).collect();
        let g = group.len() as f64;

        let kl = kl_penalty(policy, ctx)?;
        kl_sum += kl;

        let mut group_objective = 0.0;
        for (i, &action) in group.actions.iter().enumerate() {
            let rho = (ls[action] - group.logprob_old[i]).exp();
            let unclipped = rho * adv[i];
            let clipped = rho.clamp(1.0 - ratio_clip, 1.0 + ratio_clip) * adv[i];
            group_objective += unclipped.min(clipped);
            // gradient flows only through the branch the min selects; the
            // clipped branch is constant in the logits once the clamp binds
            if with_grads && unclipped <= clipped {
                let coeff = adv[i] * rho / g;
                let row = &mut grads[ctx];
                for (b, p) in probs.iter().enumerate() {
                    row[b] += coeff * p;
                }
                row[action] -= coeff;
            }
        }
        surrogate_sum += -group_objective / g;

        if with_grads && kl_coeff > 0.0 {
            let row = &mut grads[ctx];
            for b in 0..bins {
                row[b] += kl_coeff * probs[b] * (ls[b] - ls_ref[b] - kl);
            }
        }
    }
    Ok((surrogate_sum, kl_sum, grads))
}

/// Runs one optimization step: sample, grade, estimate advantages, descend.
/// Deterministic given the state's RNG stream.
pub fn train_step(
    state: &mut TrainerState,
    corpus: &[TaskInstance],
    config: &TrainerConfig,
) -> Result<StepOutcome> {
    let t = state.step;
    if t >= config.total_steps() {
        return Err(Error::domain(format!(
            "step counter {t} reached total steps {}",
            config.total_steps()
        )));
    }
    let sharpness = schedule_k(&config.schedule, t)?;

    let mut groups = Vec::with_capacity(corpus.len());
    for task in corpus {
        groups.push(sample_group(
            &state.policy,
            task,
            &state.tables[task.context_id],
            &config.pipeline,
            sharpness,
            config.group_size,
            &mut state.rng,
        )?);
    }

    let raw: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| estimate_advantages(g, &config.advantage))
        .collect();
    let clipped: Vec<Vec<f64>> = raw
        .iter()
        .map(|a| clip_advantage(a, config.advantage.adv_clip))
        .collect();

    let mean_reward = groups.iter().flat_map(|g| g.rewards.iter()).sum::<f64>()
        / (groups.len() * config.group_size) as f64;
    let adv_variance = raw.iter().map(|a| advantage_variance(a)).sum::<f64>() / raw.len() as f64;
    let mean_abs_advantage = raw
        .iter()
        .flat_map(|a| a.iter())
        .map(|v| v.abs())
        .sum::<f64>()
        / (raw.len() * config.group_size) as f64;
    let mut accuracy = 0.0;
    for task in corpus {
        accuracy += expected_accuracy(&state.policy, task, &state.tables[task.context_id])?;
    }
    accuracy /= corpus.len() as f64;

    let batch = groups.len() as f64;
    let mut recorded_loss = f64::NAN;
    let mut recorded_kl = f64::NAN;
    for epoch in 0..config.inner_epochs {
        let (surrogate, kl, grads) = batch_gradients(
            &state.policy,
            &groups,
            &clipped,
            config.ratio_clip,
            config.kl_coeff,
        )?;
        let objective = surrogate + config.kl_coeff * kl;
        if !objective.is_finite() {
            return Err(Error::Diverged {
                step: t,
                detail: format!("objective {objective} (surrogate {surrogate}, kl {kl})"),
            });
        }
        if epoch == 0 {
            // records carry per-group means
            recorded_loss = surrogate / batch;
            recorded_kl = kl / batch;
        }
        for (ctx, grad) in grads.iter().enumerate() {
            state.policy.descend(ctx, grad, config.learning_rate);
        }
    }

    state.step += 1;
    Ok(StepOutcome {
        record: TrainRecord {
            step: t,
            sharpness,
            mean_reward,
            accuracy,
            adv_variance,
            loss: recorded_loss,
            kl: recorded_kl,
        },
        mean_abs_advantage,
    })
}

/// Executes a full run over the schedule and aggregates the summary.
pub fn run_experiment(config: &TrainerConfig, corpus: &[TaskInstance]) -> Result<RunOutcome> {
    let mut state = TrainerState::new(config, corpus)?;
    let total = config.total_steps();
    let mut records = Vec::with_capacity(total);
    let mut abs_adv_sum = 0.0;
    for _ in 0..total {
        let outcome = train_step(&mut state, corpus, config)?;
        abs_adv_sum += outcome.mean_abs_advantage;
        records.push(outcome.record);
    }

    let accuracies: Vec<f64> = records.iter().map(|r| r.accuracy).collect();
    let t_conv = crate::analysis::convergence_steps(&accuracies);
    let tail = (total / 10).max(1);
    let final_accuracy =
        records[total - tail..].iter().map(|r| r.accuracy).sum::<f64>() / tail as f64;
    let final_mean_reward =
        records[total - tail..].iter().map(|r| r.mean_reward).sum::<f64>() / tail as f64;
    let summary = RunSummary {
        t_conv,
        final_accuracy,
        max_accuracy: accuracies.iter().copied().fold(0.0, f64::max),
        mean_adv_variance: records.iter().map(|r| r.adv_variance).sum::<f64>() / total as f64,
        mean_abs_advantage: abs_adv_sum / total as f64,
        final_mean_reward,
    };
    Ok(RunOutcome { records, summary })
}
