//! Graded verifiers and the unified error mapping.
//!
//! Continuous subtasks score by squared distance. Discrete relational
//! subtasks (direction, order, count, position) produce a deterministic
//! graded score `V in [0,1]` with partial credit for near-misses, which the
//! log-scaled mapping `Φ` converts into the same non-negative error space
//! the smooth reward operator consumes:
//!
//! ```text
//! e_disc = Φ(1 - V) = η·[-ln(V + ε)]^γ        (inner value clamped at 0,
//!                                              V clipped up to ε first)
//! ```
//!
//! [`calibrate_phi`] picks `η` so that a complete failure (`V = 0`) lands
//! exactly on the error `e*` whose reward at terminal sharpness `k_max`
//! equals a target near-zero level `ε_r`:
//!
//! ```text
//! e* = ln(2/ε_r - 1) / k_max,     η = e* / [-ln(2ε)]^γ
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::snra_inverse;

/// A continuous prediction against a scalar ground truth.
///
/// `predicted` is `None` (or non-finite) when the response could not be
/// parsed into a value at all; such outputs receive the task-specific
/// maximum penalty `e_max` instead of a squared distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousError {
    pub predicted: Option<f64>,
    pub truth: f64,
    pub e_max: f64,
}

impl ContinuousError {
    pub fn new(predicted: Option<f64>, truth: f64, e_max: f64) -> Result<Self> {
        if !truth.is_finite() {
            return Err(Error::field("truth", format!("must be finite, got {truth}")));
        }
        if !e_max.is_finite() || e_max <= 0.0 {
            return Err(Error::field("e_max", format!("must be positive, got {e_max}")));
        }
        Ok(Self {
            predicted,
            truth,
            e_max,
        })
    }
}

/// Squared distance for a valid prediction, `e_max` for an invalid one.
pub fn continuous_error(pred: &ContinuousError) -> f64 {
    match pred.predicted {
        Some(p) if p.is_finite() => {
            let d = p - pred.truth;
            d * d
        }
        _ => pred.e_max,
    }
}

/// Which of two objects a pairwise-order prediction puts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstSeen {
    A,
    B,
}

/// Graded score for a direction prediction on a `K`-way ring (`K` in {4, 8}).
///
/// Exact bin scores 1, an adjacent bin scores `near_credit`, anything
/// further scores 0. Distance is circular: `d = min(|i-j|, K - |i-j|)`.
pub fn verify_direction(bins: usize, truth_bin: usize, pred_bin: usize, near_credit: f64) -> Result<f64> {
    if bins != 4 && bins != 8 {
        return Err(Error::domain(format!("direction ring must have 4 or 8 bins, got {bins}")));
    }
    if truth_bin >= bins || pred_bin >= bins {
        return Err(Error::domain(format!(
            "direction bins out of range: truth {truth_bin}, pred {pred_bin}, ring {bins}"
        )));
    }
    if !near_credit.is_finite() || near_credit <= 0.0 || near_credit >= 1.0 {
        return Err(Error::field(
            "near_credit",
            format!("must lie in (0, 1), got {near_credit}"),
        ));
    }
    let raw = truth_bin.abs_diff(pred_bin);
    let d = raw.min(bins - raw);
    Ok(match d {
        0 => 1.0,
        1 => near_credit,
        _ => 0.0,
    })
}

/// Pairwise appearance-order score.
///
/// The indicator of a correct order prediction (induced by the sign of
/// `t_b - t_a`) is down-weighted by `1 - exp(-|t_a - t_b| / margin)`, so
/// nearly-tied timestamps never score close to 1 even when the predicted
/// order matches. Exact ties score 0 regardless of the prediction.
pub fn verify_order_pair(t_a: f64, t_b: f64, predicted_first: FirstSeen, margin: f64) -> Result<f64> {
    if !t_a.is_finite() || !t_b.is_finite() {
        return Err(Error::domain("timestamps must be finite".to_string()));
    }
    if !margin.is_finite() || margin <= 0.0 {
        return Err(Error::field("margin", format!("must be positive, got {margin}")));
    }
    let correct = match predicted_first {
        FirstSeen::A => t_a < t_b,
        FirstSeen::B => t_b < t_a,
    };
    if !correct {
        return Ok(0.0);
    }
    Ok(1.0 - (-(t_a - t_b).abs() / margin).exp())
}

fn validate_permutation(name: &str, perm: &[usize]) -> Result<()> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &v in perm {
        if v >= n || seen[v] {
            return Err(Error::domain(format!("{name} is not a permutation of 0..{n}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Merge-sort inversion count.
fn count_inversions(seq: &mut [usize]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = seq.split_at_mut(mid);
    let mut inv = count_inversions(left) + count_inversions(right);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            merged.push(left[i]);
            i += 1;
        } else {
            inv += (left.len() - i) as u64;
            merged.push(right[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&left[i..]);
    merged.extend_from_slice(&right[j..]);
    seq.copy_from_slice(&merged);
    inv
}

/// Listwise appearance-order score: `1 - K(π, π̂) / C(n, 2)` where `K`
/// counts pairs whose relative order differs between the two permutations.
///
/// Implemented by relabeling objects by their ground-truth position and
/// counting inversions of the relabeled prediction with a merge sort.
pub fn verify_order_list(truth: &[usize], pred: &[usize]) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::domain(format!(
            "permutation lengths differ: {} vs {}",
            truth.len(),
            pred.len()
        )));
    }
    let n = truth.len();
    if n < 2 {
        return Err(Error::domain("listwise order needs at least 2 objects".to_string()));
    }
    validate_permutation("truth permutation", truth)?;
    validate_permutation("predicted permutation", pred)?;

    let mut truth_pos = vec![0usize; n];
    for (rank, &obj) in truth.iter().enumerate() {
        truth_pos[obj] = rank;
    }
    let mut relabeled: Vec<usize> = pred.iter().map(|&obj| truth_pos[obj]).collect();
    let discordant = count_inversions(&mut relabeled);
    let total_pairs = (n * (n - 1) / 2) as f64;
    Ok(1.0 - discordant as f64 / total_pairs)
}

/// Exponentially decaying counting score: `exp(-|n̂ - n| / tolerance)`.
///
/// With tolerance 1 an off-by-one prediction receives `e⁻¹`.
pub fn verify_count(truth: u32, pred: u32, tolerance: f64) -> Result<f64> {
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::field(
            "count_tolerance",
            format!("must be positive, got {tolerance}"),
        ));
    }
    let delta = truth.abs_diff(pred) as f64;
    Ok((-delta / tolerance).exp())
}

/// Jaccard similarity between a predicted and a ground-truth relation set.
///
/// An empty prediction scores 0; an empty ground truth is a domain error.
pub fn verify_position<T: Ord>(truth: &BTreeSet<T>, pred: &BTreeSet<T>) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::domain("ground-truth relation set must be non-empty".to_string()));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let intersection = truth.intersection(pred).count() as f64;
    let union = truth.union(pred).count() as f64;
    Ok(intersection / union)
}

/// Alternative scorers. The default task pipeline never selects these; they
/// are drop-in variants for datasets with continuous geometry, wide count
/// ranges, or mutually exclusive relation labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "variant")]
pub enum ScoringVariant {
    /// `exp(-Δ²/(2σ²))` over the wrapped angular gap `Δ in [0, π]`.
    AngularDirection { sigma_theta: f64 },
    /// `max(0, 1 - |n̂-n| / (max(n,1) + c))`.
    LinearCount { stabilizer: f64 },
    /// `1 - d/d_max` over a relation-graph shortest-path distance.
    GraphPosition { d_max: u32 },
}

impl ScoringVariant {
    /// Smooth angular direction credit from bearing angles in radians.
    pub fn score_angles(&self, theta: f64, theta_hat: f64) -> Result<f64> {
        let ScoringVariant::AngularDirection { sigma_theta } = *self else {
            return Err(Error::domain("variant does not score angles".to_string()));
        };
        if !sigma_theta.is_finite() || sigma_theta <= 0.0 {
            return Err(Error::field("sigma_theta", "must be positive"));
        }
        if !theta.is_finite() || !theta_hat.is_finite() {
            return Err(Error::domain("angles must be finite".to_string()));
        }
        let two_pi = std::f64::consts::TAU;
        let mut delta = (theta - theta_hat).abs() % two_pi;
        if delta > std::f64::consts::PI {
            delta = two_pi - delta;
        }
        Ok((-delta * delta / (2.0 * sigma_theta * sigma_theta)).exp())
    }

    /// Normalized linear counting credit.
    pub fn score_counts(&self, truth: u32, pred: u32) -> Result<f64> {
        let ScoringVariant::LinearCount { stabilizer } = *self else {
            return Err(Error::domain("variant does not score counts".to_string()));
        };
        if !stabilizer.is_finite() || stabilizer <= 0.0 {
            return Err(Error::field("stabilizer", "must be positive"));
        }
        let delta = truth.abs_diff(pred) as f64;
        Ok((1.0 - delta / (truth.max(1) as f64 + stabilizer)).max(0.0))
    }

    /// Graph-distance credit for mutually exclusive relation labels.
    pub fn score_graph_distance(&self, distance: u32) -> Result<f64> {
        let ScoringVariant::GraphPosition { d_max } = *self else {
            return Err(Error::domain("variant does not score graph distances".to_string()));
        };
        if d_max == 0 {
            return Err(Error::field("d_max", "must be at least 1"));
        }
        if distance > d_max {
            return Err(Error::domain(format!("distance {distance} exceeds d_max {d_max}")));
        }
        Ok(1.0 - distance as f64 / d_max as f64)
    }
}

/// Parameters of the log-scaled discrete-error mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    /// Scale factor `η > 0`.
    pub eta: f64,
    /// Curvature exponent `γ >= 1` (typically in `[1, 2]`).
    pub gamma: f64,
    /// Log stabilizer `ε in (0, 1)`; scores are clipped up to `ε` before
    /// the logarithm so exact failures map to a finite error.
    pub eps_log: f64,
    /// Score treated as complete failure during calibration (usually 0).
    pub score_floor: f64,
}

impl PhiParams {
    pub fn new(eta: f64, gamma: f64, eps_log: f64, score_floor: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::field("eta", format!("must be positive, got {eta}")));
        }
        if !gamma.is_finite() || gamma < 1.0 {
            return Err(Error::field("gamma", format!("must be at least 1, got {gamma}")));
        }
        if !eps_log.is_finite() || eps_log <= 0.0 || eps_log >= 1.0 {
            return Err(Error::field("eps_log", format!("must lie in (0, 1), got {eps_log}")));
        }
        if !score_floor.is_finite() || !(0.0..1.0).contains(&score_floor) {
            return Err(Error::field(
                "score_floor",
                format!("must lie in [0, 1), got {score_floor}"),
            ));
        }
        Ok(Self {
            eta,
            gamma,
            eps_log,
            score_floor,
        })
    }
}

/// A graded score together with its mapped error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifierOutcome {
    pub score: f64,
    pub mapped_error: f64,
}

impl VerifierOutcome {
    pub fn from_score(params: &PhiParams, score: f64) -> Result<Self> {
        Ok(Self {
            score,
            mapped_error: phi_map(params, score)?,
        })
    }
}

/// Maps a verifier score into the unified non-negative error space:
/// `η·[-ln(max(V, ε) + ε)]^γ`, with the bracketed value clamped at 0.
///
/// The clamp makes a perfect score map to exactly 0 (the stabilizer would
/// otherwise push the logarithm slightly negative at `V = 1`); the inner
/// clip of `V` up to `ε` bounds the error for exact failures, so
/// `phi_map(V = 0)` equals the calibrated failure error.
pub fn phi_map(params: &PhiParams, score: f64) -> Result<f64> {
    if !score.is_finite() || !(0.0..=1.0).contains(&score) {
        return Err(Error::domain(format!("verifier score must lie in [0, 1], got {score}")));
    }
    let clipped = score.max(params.eps_log);
    let inner = -(clipped + params.eps_log).ln();
    if inner <= 0.0 {
        return Ok(0.0);
    }
    Ok(params.eta * inner.powf(params.gamma))
}

/// Calibrates the `Φ` scale so that terminal-sharpness rewards for complete
/// failures land exactly on `ε_r`.
///
/// The failure error is the operator inverse `e* = ln(2/ε_r - 1) / k_max`;
/// with the failure floor at score 0 the clipped log argument is `2ε`, so
/// `η = e* / [-ln(2ε)]^γ`.
pub fn calibrate_phi(k_max: f64, eps_r: f64, gamma: f64, eps_log: f64) -> Result<PhiParams> {
    if !k_max.is_finite() || k_max <= 0.0 {
        return Err(Error::field("k_max", format!("must be positive, got {k_max}")));
    }
    if !eps_r.is_finite() || eps_r <= 0.0 || eps_r >= 1.0 {
        return Err(Error::field(
            "epsilon_r",
            format!("target reward level must lie in (0, 1), got {eps_r}"),
        ));
    }
    if !eps_log.is_finite() || eps_log <= 0.0 || eps_log >= 0.5 {
        return Err(Error::field(
            "eps_log",
            format!("must lie in (0, 1/2) so the failure log stays positive, got {eps_log}"),
        ));
    }
    if !gamma.is_finite() || gamma < 1.0 {
        return Err(Error::field("gamma", format!("must be at least 1, got {gamma}")));
    }
    let e_star = snra_inverse(k_max, eps_r)?;
    let denom = (-(2.0 * eps_log).ln()).powf(gamma);
    PhiParams::new(e_star / denom, gamma, eps_log, 0.0)
}
