//! Seeded synthetic tasks and a tabular softmax policy.
//!
//! Tasks stand in for a verifiable-reward corpus at desk scale: each
//! instance carries a ground truth checkable by exactly one verifier. The
//! policy is a per-context categorical distribution over a fixed set of
//! action bins, so log-probabilities, ratios and KL terms are exactly
//! computable and the trainer's gradients can be checked against finite
//! differences.
//!
//! Action decoding: the last bin always decodes to a structurally malformed
//! output (it receives the task's maximum penalty and a zero format bit);
//! the remaining bins map onto the task's answer space — scalar bin centers
//! over `[0, 10]` for estimation tasks, and `action mod m` for a discrete
//! answer space of size `m`. Generator ranges: scalar truths lie in
//! `[0, 10]`, counts in `[0, 20]`, order lists are permutations of 4,
//! direction rings have 4 or 8 bins, position truths are 1–2 labels out
//! of 5.
//!
//! Maximum penalties are sized so that even the softest default sharpness
//! pins them near zero reward: `snra(1, e_max) < 0.05` requires
//! `e_max > ln(39) ≈ 3.66`; scalar tasks use the squared answer range (100)
//! and discrete tasks use 5.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::advantage::{RewardBreakdown, TrajectoryGroup};
use crate::error::{Error, Result};
use crate::operator::{hardened_reward, snra, OperatorKind, SnraParams};
use crate::verifiers::{
    continuous_error, phi_map, verify_count, verify_direction, verify_order_list,
    verify_order_pair, verify_position, ContinuousError, FirstSeen, PhiParams,
};

/// Default number of action bins per context (including the malformed bin).
pub const ACTION_BINS: usize = 64;
/// Upper edge of the scalar answer range.
pub const SCALAR_RANGE: f64 = 10.0;
/// Largest generated count.
pub const COUNT_MAX: u32 = 20;
/// Objects in a listwise-order task (24 permutations).
pub const ORDER_LIST_LEN: usize = 4;
/// Maximum penalty for malformed outputs on scalar tasks (range squared).
pub const SCALAR_E_MAX: f64 = 100.0;
/// Maximum penalty for malformed outputs on discrete tasks.
pub const DISCRETE_E_MAX: f64 = 5.0;
/// Near-miss credit for adjacent direction bins.
pub const DEFAULT_NEAR_CREDIT: f64 = 0.5;
/// Margin scale for pairwise order scoring.
pub const DEFAULT_ORDER_MARGIN: f64 = 1.0;
/// Tolerance for the exponential counting score.
pub const DEFAULT_COUNT_TOLERANCE: f64 = 1.0;

/// Spatial relation labels for position tasks. Six labels give 63
/// non-empty subsets, so under the default codec every subset is reachable
/// by exactly one action bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Left,
    Right,
    InFront,
    Behind,
    Inside,
    Near,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Left,
        Relation::Right,
        Relation::InFront,
        Relation::Behind,
        Relation::Inside,
        Relation::Near,
    ];
}

/// Subtask families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    ScalarEstimate,
    Direction,
    OrderPair,
    OrderList,
    Count,
    Position,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::ScalarEstimate,
        TaskKind::Direction,
        TaskKind::OrderPair,
        TaskKind::OrderList,
        TaskKind::Count,
        TaskKind::Position,
    ];

    fn tag(self) -> u64 {
        match self {
            TaskKind::ScalarEstimate => 0,
            TaskKind::Direction => 1,
            TaskKind::OrderPair => 2,
            TaskKind::OrderList => 3,
            TaskKind::Count => 4,
            TaskKind::Position => 5,
        }
    }

    /// Whether the subtask grades through a discrete verifier.
    pub fn is_discrete(self) -> bool {
        !matches!(self, TaskKind::ScalarEstimate)
    }
}

/// Kind-specific ground truth payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "answer")]
pub enum GroundTruth {
    Scalar { value: f64 },
    Direction { ring: usize, bin: usize },
    OrderPair { t_a: f64, t_b: f64 },
    OrderList { order: Vec<usize> },
    Count { value: u32 },
    Position { relations: BTreeSet<Relation> },
}

/// One synthetic, verifiable query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub kind: TaskKind,
    pub seed: u64,
    pub difficulty: f64,
    pub context_id: usize,
    pub ground_truth: GroundTruth,
}

impl TaskInstance {
    /// Maximum penalty assigned to malformed outputs for this task.
    pub fn e_max(&self) -> f64 {
        if self.kind.is_discrete() {
            DISCRETE_E_MAX
        } else {
            SCALAR_E_MAX
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.difficulty.is_finite() || self.difficulty <= 0.0 {
            return Err(Error::field("difficulty", "must be positive"));
        }
        match (&self.kind, &self.ground_truth) {
            (TaskKind::ScalarEstimate, GroundTruth::Scalar { value }) => {
                if !value.is_finite() || !(0.0..=SCALAR_RANGE).contains(value) {
                    return Err(Error::domain(format!("scalar truth {value} outside [0, {SCALAR_RANGE}]")));
                }
            }
            (TaskKind::Direction, GroundTruth::Direction { ring, bin }) => {
                if *ring != 4 && *ring != 8 {
                    return Err(Error::domain(format!("direction ring must be 4 or 8, got {ring}")));
                }
                if bin >= ring {
                    return Err(Error::domain(format!("direction bin {bin} outside ring {ring}")));
                }
            }
            (TaskKind::OrderPair, GroundTruth::OrderPair { t_a, t_b }) => {
                if !t_a.is_finite() || !t_b.is_finite() {
                    return Err(Error::domain("order-pair timestamps must be finite".to_string()));
                }
            }
            (TaskKind::OrderList, GroundTruth::OrderList { order }) => {
                if order.len() != ORDER_LIST_LEN {
                    return Err(Error::domain(format!("order list must have {ORDER_LIST_LEN} objects")));
                }
            }
            (TaskKind::Count, GroundTruth::Count { value }) => {
                if *value > COUNT_MAX {
                    return Err(Error::domain(format!("count {value} outside [0, {COUNT_MAX}]")));
                }
            }
            (TaskKind::Position, GroundTruth::Position { relations }) => {
                if relations.is_empty() {
                    return Err(Error::domain("position truth must be non-empty".to_string()));
                }
            }
            (kind, truth) => {
                return Err(Error::domain(format!("ground truth {truth:?} does not match kind {kind:?}")));
            }
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Derives a child seed from a master seed and a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

/// Deterministically generates one task. Identical `(kind, seed,
/// difficulty)` triples produce bit-identical instances.
///
/// Difficulty controls the target dispersion where the subtask has one:
/// scalar truths spread away from bin centers by `min(d, 1)` half-widths
/// (creating near-miss targets on demand), pairwise-order margins shrink
/// as `1/d` (approaching the near-tie regime), and direction rings widen
/// from 4 to 8 bins at `d >= 1`.
pub fn generate_task(kind: TaskKind, seed: u64, difficulty: f64) -> Result<TaskInstance> {
    if !difficulty.is_finite() || difficulty <= 0.0 {
        return Err(Error::field("difficulty", format!("must be positive, got {difficulty}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, kind.tag()));
    let ground_truth = match kind {
        TaskKind::ScalarEstimate => {
            let bins = ACTION_BINS - 1;
            let width = SCALAR_RANGE / bins as f64;
            let bin = rng.gen_range(0..bins);
            let center = (bin as f64 + 0.5) * width;
            let offset: f64 = rng.gen_range(-1.0..1.0);
            let value = (center + 0.5 * width * difficulty.min(1.0) * offset)
                .clamp(0.0, SCALAR_RANGE);
            GroundTruth::Scalar { value }
        }
        TaskKind::Direction => {
            let ring = if difficulty < 1.0 { 4 } else { 8 };
            GroundTruth::Direction {
                ring,
                bin: rng.gen_range(0..ring),
            }
        }
        TaskKind::OrderPair => {
            let t_a: f64 = rng.gen_range(0.0..SCALAR_RANGE);
            let gap: f64 = rng.gen_range(0.05..2.5) / difficulty.max(0.1);
            let a_first = rng.gen_bool(0.5);
            let t_b = if a_first { t_a + gap } else { t_a - gap };
            GroundTruth::OrderPair { t_a, t_b }
        }
        TaskKind::OrderList => {
            let mut order: Vec<usize> = (0..ORDER_LIST_LEN).collect();
            order.shuffle(&mut rng);
            GroundTruth::OrderList { order }
        }
        TaskKind::Count => GroundTruth::Count {
            value: rng.gen_range(0..=COUNT_MAX),
        },
        TaskKind::Position => {
            let mut labels = Relation::ALL;
            labels.shuffle(&mut rng);
            let size = rng.gen_range(1..=2);
            GroundTruth::Position {
                relations: labels[..size].iter().copied().collect(),
            }
        }
    };
    let task = TaskInstance {
        kind,
        seed,
        difficulty,
        context_id: 0,
        ground_truth,
    };
    task.validate()?;
    Ok(task)
}

/// The default 50/50 continuous/discrete corpus: even slots are scalar
/// estimation, odd slots cycle through the five discrete kinds. Context ids
/// equal corpus positions.
pub fn default_corpus(master_seed: u64, size: usize, difficulty: f64) -> Result<Vec<TaskInstance>> {
    const DISCRETE: [TaskKind; 5] = [
        TaskKind::Direction,
        TaskKind::OrderPair,
        TaskKind::OrderList,
        TaskKind::Count,
        TaskKind::Position,
    ];
    if size == 0 {
        return Err(Error::field("corpus_size", "must be at least 1"));
    }
    let mut tasks = Vec::with_capacity(size);
    for i in 0..size {
        let kind = if i % 2 == 0 {
            TaskKind::ScalarEstimate
        } else {
            DISCRETE[(i / 2) % DISCRETE.len()]
        };
        let mut task = generate_task(kind, derive_seed(master_seed, i as u64), difficulty)?;
        task.context_id = i;
        tasks.push(task);
    }
    Ok(tasks)
}

/// Writes one task per line as JSON.
pub fn save_corpus(path: &Path, tasks: &[TaskInstance]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    for task in tasks {
        serde_json::to_writer(&mut file, task)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a line-delimited corpus and re-indexes context ids by position.
pub fn load_corpus(path: &Path) -> Result<Vec<TaskInstance>> {
    let file = std::fs::File::open(path)?;
    let mut tasks = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut task: TaskInstance = serde_json::from_str(&line)?;
        task.validate()?;
        task.context_id = i;
        tasks.push(task);
    }
    if tasks.is_empty() {
        return Err(Error::domain("corpus file contains no tasks".to_string()));
    }
    Ok(tasks)
}

/// A structured response decoded from an action bin.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Scalar(f64),
    Direction(usize),
    OrderPair(FirstSeen),
    OrderList(Vec<usize>),
    Count(u32),
    Position(BTreeSet<Relation>),
    /// Structurally invalid output; graded at the maximum penalty with a
    /// zero format bit.
    Malformed,
}

/// Maps action bins onto task answer spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionCodec {
    bins: usize,
    values: Vec<f64>,
}

impl ActionCodec {
    /// `bins` includes the trailing malformed bin; the remaining `bins - 1`
    /// bins carry scalar centers over `[0, SCALAR_RANGE]`.
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::field("action_bins", "need at least one value bin plus the malformed bin"));
        }
        let valued = bins - 1;
        let width = SCALAR_RANGE / valued as f64;
        let values = (0..valued).map(|i| (i as f64 + 0.5) * width).collect();
        Ok(Self { bins, values })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_values(&self) -> &[f64] {
        &self.values
    }

    pub fn bin_width(&self) -> f64 {
        SCALAR_RANGE / (self.bins - 1) as f64
    }

    /// Accuracy tolerance for scalar tasks: one bin width, squared.
    pub fn e_tol(&self) -> f64 {
        self.bin_width() * self.bin_width()
    }

    /// Index of the bin that decodes to a malformed output.
    pub fn malformed_action(&self) -> usize {
        self.bins - 1
    }

    /// Decodes an action bin into a structured prediction for `task`.
    pub fn decode(&self, task: &TaskInstance, action: usize) -> Result<Prediction> {
        if action >= self.bins {
            return Err(Error::domain(format!("action {action} outside {} bins", self.bins)));
        }
        if action == self.malformed_action() {
            return Ok(Prediction::Malformed);
        }
        Ok(match &task.ground_truth {
            GroundTruth::Scalar { .. } => Prediction::Scalar(self.values[action]),
            GroundTruth::Direction { ring, .. } => Prediction::Direction(action % ring),
            GroundTruth::OrderPair { .. } => Prediction::OrderPair(if action % 2 == 0 {
                FirstSeen::A
            } else {
                FirstSeen::B
            }),
            GroundTruth::OrderList { order } => {
                Prediction::OrderList(nth_permutation(order.len(), action % factorial(order.len())))
            }
            // counts span the whole representable range: well-formed but
            // absurd predictions (beyond the generator's [0, 20]) still get
            // graded distance credit
            GroundTruth::Count { .. } => Prediction::Count(action as u32),
            GroundTruth::Position { .. } => {
                let subsets = (1usize << Relation::ALL.len()) - 1;
                let mask = 1 + action % subsets;
                Prediction::Position(
                    Relation::ALL
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, r)| *r)
                        .collect(),
                )
            }
        })
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The `index`-th permutation of `0..n` in lexicographic order.
fn nth_permutation(n: usize, mut index: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (1..=n).rev() {
        let f = factorial(i - 1);
        out.push(pool.remove(index / f));
        index %= f;
    }
    out
}

/// Verifier outcome for one decoded action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedAction {
    /// Error in the unified non-negative space.
    pub error: f64,
    /// Structural-compliance bit.
    pub format_ok: bool,
    /// Binary accuracy proxy: scalar predictions within one bin width of
    /// the truth; discrete predictions exactly right (order match for the
    /// pairwise task, whose graded score never reaches 1).
    pub correct: bool,
    /// Graded verifier score, when the subtask is discrete.
    pub score: Option<f64>,
}

/// Grades one action against a task through the unified error pipeline.
pub fn grade_action(
    task: &TaskInstance,
    codec: &ActionCodec,
    phi: &PhiParams,
    action: usize,
) -> Result<GradedAction> {
    let prediction = codec.decode(task, action)?;
    if matches!(prediction, Prediction::Malformed) {
        return Ok(GradedAction {
            error: task.e_max(),
            format_ok: false,
            correct: false,
            score: None,
        });
    }
    Ok(match (&task.ground_truth, &prediction) {
        (GroundTruth::Scalar { value }, Prediction::Scalar(pred)) => {
            let e = continuous_error(&ContinuousError::new(Some(*pred), *value, task.e_max())?);
            GradedAction {
                error: e,
                format_ok: true,
                correct: e < codec.e_tol(),
                score: None,
            }
        }
        (GroundTruth::Direction { ring, bin }, Prediction::Direction(pred)) => {
            let v = verify_direction(*ring, *bin, *pred, DEFAULT_NEAR_CREDIT)?;
            discrete_grade(phi, v, pred == bin)?
        }
        (GroundTruth::OrderPair { t_a, t_b }, Prediction::OrderPair(pred)) => {
            let v = verify_order_pair(*t_a, *t_b, *pred, DEFAULT_ORDER_MARGIN)?;
            let correct = match pred {
                FirstSeen::A => t_a < t_b,
                FirstSeen::B => t_b < t_a,
            };
            discrete_grade(phi, v, correct)?
        }
        (GroundTruth::OrderList { order }, Prediction::OrderList(pred)) => {
            let v = verify_order_list(order, pred)?;
            discrete_grade(phi, v, pred == order)?
        }
        (GroundTruth::Count { value }, Prediction::Count(pred)) => {
            let v = verify_count(*value, *pred, DEFAULT_COUNT_TOLERANCE)?;
            discrete_grade(phi, v, pred == value)?
        }
        (GroundTruth::Position { relations }, Prediction::Position(pred)) => {
            let v = verify_position(relations, pred)?;
            discrete_grade(phi, v, pred == relations)?
        }
        _ => unreachable!("decode produces kind-matched predictions"),
    })
}

fn discrete_grade(phi: &PhiParams, score: f64, correct: bool) -> Result<GradedAction> {
    Ok(GradedAction {
        error: phi_map(phi, score)?,
        format_ok: true,
        correct,
        score: Some(score),
    })
}

/// Per-action grading of one task, precomputed for every bin.
#[derive(Debug, Clone)]
pub struct TaskTable {
    pub grades: Vec<GradedAction>,
}

impl TaskTable {
    pub fn build(task: &TaskInstance, codec: &ActionCodec, phi: &PhiParams) -> Result<Self> {
        let grades = (0..codec.bins())
            .map(|a| grade_action(task, codec, phi, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grades })
    }
}

/// How graded errors become rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    /// Smooth activation at the scheduled sharpness.
    #[default]
    Smooth,
    /// Binary indicator of exact correctness (the hardened baseline).
    Hardened,
}

/// Error-to-composite-reward assembly shared by sampling and training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardPipeline {
    pub mode: RewardMode,
    pub operator: OperatorKind,
    pub phi: PhiParams,
    /// Format-reward blend weight λ.
    pub balance: f64,
}

impl RewardPipeline {
    pub fn new(mode: RewardMode, operator: OperatorKind, phi: PhiParams, balance: f64) -> Result<Self> {
        if !balance.is_finite() || !(0.0..1.0).contains(&balance) {
            return Err(Error::field("lambda", format!("must lie in [0, 1), got {balance}")));
        }
        Ok(Self {
            mode,
            operator,
            phi,
            balance,
        })
    }

    /// Smooth (or hardened) reward for an error at sharpness `k`.
    pub fn activation(&self, sharpness: f64, error: f64) -> Result<f64> {
        match self.mode {
            RewardMode::Smooth => snra(SnraParams::new(sharpness, self.operator)?, error),
            RewardMode::Hardened => hardened_reward(error),
        }
    }

    /// Full per-sample reward decomposition.
    pub fn breakdown(&self, sharpness: f64, grade: &GradedAction) -> Result<RewardBreakdown> {
        let smooth = self.activation(sharpness, grade.error)?;
        RewardBreakdown::new(grade.error, smooth, grade.format_ok, self.balance)
    }
}

/// Tabular softmax policy over action bins, one logit row per context,
/// carrying a frozen copy of its initial logits as the KL reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyPolicy {
    logits: Vec<Vec<f64>>,
    reference_logits: Vec<Vec<f64>>,
}

impl ToyPolicy {
    /// Uniform policy: all logits zero.
    pub fn uniform(contexts: usize, bins: usize) -> Result<Self> {
        Self::from_logits(vec![vec![0.0; bins]; contexts])
    }

    /// Policy with explicit logits; the reference copy freezes them.
    pub fn from_logits(logits: Vec<Vec<f64>>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::domain("policy needs at least one context".to_string()));
        }
        let bins = logits[0].len();
        if bins < 2 {
            return Err(Error::domain("policy needs at least two action bins".to_string()));
        }
        for row in &logits {
            if row.len() != bins {
                return Err(Error::domain("logit rows must share one length".to_string()));
            }
            if row.iter().any(|l| !l.is_finite()) {
                return Err(Error::domain("logits must be finite".to_string()));
            }
        }
        Ok(Self {
            reference_logits: logits.clone(),
            logits,
        })
    }

    pub fn contexts(&self) -> usize {
        self.logits.len()
    }

    pub fn bins(&self) -> usize {
        self.logits[0].len()
    }

    fn check_context(&self, context_id: usize) -> Result<()> {
        if context_id >= self.contexts() {
            return Err(Error::domain(format!(
                "context {context_id} outside {} contexts",
                self.contexts()
            )));
        }
        Ok(())
    }

    /// Stable log-softmax of one logit row.
    pub fn log_softmax(&self, context_id: usize) -> Result<Vec<f64>> {
        self.check_context(context_id)?;
        Ok(log_softmax_row(&self.logits[context_id]))
    }

    /// Log-softmax of the frozen reference row.
    pub fn reference_log_softmax(&self, context_id: usize) -> Result<Vec<f64>> {
        self.check_context(context_id)?;
        Ok(log_softmax_row(&self.reference_logits[context_id]))
    }

    pub fn probs(&self, context_id: usize) -> Result<Vec<f64>> {
        Ok(self.log_softmax(context_id)?.iter().map(|l| l.exp()).collect())
    }

    pub fn logit(&self, context_id: usize, bin: usize) -> Result<f64> {
        self.check_context(context_id)?;
        self.logits[context_id]
            .get(bin)
            .copied()
            .ok_or_else(|| Error::domain(format!("bin {bin} outside {} bins", self.bins())))
    }

    pub fn set_logit(&mut self, context_id: usize, bin: usize, value: f64) -> Result<()> {
        self.check_context(context_id)?;
        if bin >= self.bins() {
            return Err(Error::domain(format!("bin {bin} outside {} bins", self.bins())));
        }
        if !value.is_finite() {
            return Err(Error::domain(format!("logit must be finite, got {value}")));
        }
        self.logits[context_id][bin] = value;
        Ok(())
    }

    /// Gradient-descent step on one context row: `z -= lr · grad`.
    pub(crate) fn descend(&mut self, context_id: usize, grad: &[f64], learning_rate: f64) {
        for (z, g) in self.logits[context_id].iter_mut().zip(grad.iter()) {
            *z -= learning_rate * g;
        }
    }


    /// Draws one action from the per-context categorical distribution.
    pub fn sample_action(&self, context_id: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let probs = self.probs(context_id)?;
        let u: f64 = rng.gen();
        let mut cumulative = 0.0;
        for (bin, p) in probs.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                return Ok(bin);
            }
        }
        Ok(probs.len() - 1)
    }
}

fn log_softmax_row(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    logits.iter().map(|z| z - lse).collect()
}

/// Log-probability of one action bin under the current policy, in nats.
pub fn policy_logprob(policy: &ToyPolicy, context_id: usize, action_bin: usize) -> Result<f64> {
    let row = policy.log_softmax(context_id)?;
    row.get(action_bin)
        .copied()
        .ok_or_else(|| Error::domain(format!("bin {action_bin} outside {} bins", policy.bins())))
}

/// Samples `group_size` responses to one task and grades them through the
/// reward pipeline at sharpness `sharpness`. Log-probabilities are recorded
/// at sampling time (`logprob_old == logprob_current`).
pub fn sample_group(
    policy: &ToyPolicy,
    task: &TaskInstance,
    table: &TaskTable,
    pipeline: &RewardPipeline,
    sharpness: f64,
    group_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrajectoryGroup> {
    if group_size < 2 {
        return Err(Error::field("group_size", format!("must be at least 2, got {group_size}")));
    }
    let log_probs = policy.log_softmax(task.context_id)?;
    let mut actions = Vec::with_capacity(group_size);
    let mut rewards = Vec::with_capacity(group_size);
    let mut smooth = Vec::with_capacity(group_size);
    let mut lps = Vec::with_capacity(group_size);
    for _ in 0..group_size {
        let action = policy.sample_action(task.context_id, rng)?;
        let grade = &table.grades[action];
        let breakdown = pipeline.breakdown(sharpness, grade)?;
        actions.push(action);
        rewards.push(breakdown.composite);
        smooth.push(breakdown.smooth);
        lps.push(log_probs[action]);
    }
    TrajectoryGroup::new(task.context_id, actions, rewards, smooth, lps.clone(), lps)
}

/// Probability mass the policy places on correct answers for one task.
pub fn expected_accuracy(policy: &ToyPolicy, task: &TaskInstance, table: &TaskTable) -> Result<f64> {
    let probs = policy.probs(task.context_id)?;
    Ok(probs
        .iter()
        .zip(table.grades.iter())
        .filter(|(_, g)| g.correct)
        .map(|(p, _)| p)
        .sum())
}
