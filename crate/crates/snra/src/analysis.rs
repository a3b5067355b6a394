//! Run metrics and Monte-Carlo validators.
//!
//! The checkers simulate the idealized group models behind the estimator's
//! variance properties and measure whether the implementation reproduces
//! them:
//!
//! * **Variance suppression** — groups with rewards `r_i = ε + ξ_i`
//!   (`ξ` truncated Gaussian, `σ = ε/10`): the variance of the modulated
//!   advantage scales like `ε^{2α}`, so the log-log slope against `ε`
//!   should read `2α`.
//! * **Sensitivity recovery** — groups with rewards `r_i = 1 - δ_i`
//!   (`δ_i` uniform in `[0, δ]`): the modulated-to-standard variance ratio
//!   approaches 1 as `δ` shrinks.
//! * **Gradient extremum** — the reward-operator gradient magnitude peaks
//!   at zero error with value `k/2`.
//! * **Sharpness dynamics** — high sharpness suppresses gradients at far
//!   errors while amplifying the reward contrast of near-misses by `≈ k/2·δ`.
//!
//! Checkers use the unclipped modulated advantages (clipping would truncate
//! the variance being measured) and `R = r` with no format blending,
//! matching the idealized models. All checkers derive per-level seeds from
//! one master seed and are fully deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::advantage::{
    ap_grpo_advantage, grpo_advantage, AdvantageConfig, AdvantageEstimator, TrajectoryGroup,
};
use crate::envs::derive_seed;
use crate::error::{Error, Result};
use crate::operator::{snra, snra_gradient, SnraParams};

/// Population variance of an advantage vector (division by the length).
pub fn advantage_variance(adv: &[f64]) -> f64 {
    if adv.is_empty() {
        return 0.0;
    }
    let mean = adv.iter().sum::<f64>() / adv.len() as f64;
    adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / adv.len() as f64
}

/// First index whose accuracy reaches 95% of the sequence maximum, or
/// `None` when the maximum is not positive.
pub fn convergence_steps(accuracies: &[f64]) -> Option<usize> {
    let max = accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let threshold = 0.95 * max;
    accuracies.iter().position(|&a| a >= threshold)
}

/// Measured variance sweep against the reward floor `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSweepResult {
    pub alpha: f64,
    /// Noise scale as a fraction of each level (`σ = ratio · ε`).
    pub noise_ratio: f64,
    pub epsilon_levels: Vec<f64>,
    pub variances: Vec<f64>,
    /// Least-squares slope of `ln Var` against `ln ε`.
    pub slope: f64,
    pub expected_slope: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Simulates sparse-regime groups and fits the variance scaling slope.
///
/// Each level draws `samples` groups of `group_size` rewards
/// `clamp(ε + ξ, 0, 1)` with `ξ ~ N(0, (ratio·ε)²)`, runs the modulated
/// estimator with `R = r` and measures the pooled variance. The slope
/// tolerance is `0.3·α` around `2α`.
pub fn check_variance_suppression(
    alpha: f64,
    noise_ratio: f64,
    epsilon_levels: &[f64],
    samples: usize,
    group_size: usize,
    seed: u64,
) -> Result<VarianceSweepResult> {
    if epsilon_levels.len() < 2 {
        return Err(Error::domain("need at least two epsilon levels for a slope".to_string()));
    }
    if epsilon_levels.iter().any(|&e| e <= 0.0 || e >= 1.0) {
        return Err(Error::domain("epsilon levels must lie in (0, 1)".to_string()));
    }
    if !(noise_ratio > 0.0 && noise_ratio < 1.0) {
        return Err(Error::field("noise_ratio", "must lie in (0, 1)"));
    }
    if samples == 0 || group_size < 2 {
        return Err(Error::domain("need samples >= 1 and group_size >= 2".to_string()));
    }
    let cfg = AdvantageConfig::new(1e-6, alpha, 1e18, AdvantageEstimator::ApGrpo)?;
    let mut variances = Vec::with_capacity(epsilon_levels.len());
    for (level, &eps) in epsilon_levels.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, level as u64));
        let normal = Normal::new(0.0, noise_ratio * eps)
            .map_err(|e| Error::domain(format!("noise distribution: {e}")))?;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for _ in 0..samples {
            let rewards: Vec<f64> = (0..group_size)
                .map(|_| (eps + normal.sample(&mut rng)).clamp(0.0, 1.0))
                .collect();
            let group = TrajectoryGroup::from_rewards(rewards.clone(), rewards)?;
            for a in ap_grpo_advantage(&group, &cfg) {
                sum += a;
                sum_sq += a * a;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        variances.push(sum_sq / count as f64 - mean * mean);
    }
    let xs: Vec<f64> = epsilon_levels.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let expected_slope = 2.0 * alpha;
    let tolerance = 0.3 * alpha;
    Ok(VarianceSweepResult {
        alpha,
        noise_ratio,
        epsilon_levels: epsilon_levels.to_vec(),
        variances,
        slope,
        expected_slope,
        tolerance,
        passed: (slope - expected_slope).abs() <= tolerance,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Modulated-to-standard variance ratio at one residual level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub residual: f64,
    pub variance_ratio: f64,
}

/// Simulates high-precision groups `r_i = 1 - δ_i`, `δ_i ~ U[0, residual]`,
/// and reports `Var(A_modulated) / Var(A_standard)` per level. Fully
/// degenerate levels report a ratio of 1 by convention.
pub fn check_recovery(
    alpha: f64,
    delta_levels: &[f64],
    samples: usize,
    group_size: usize,
    seed: u64,
) -> Result<Vec<RecoveryResult>> {
    if delta_levels.iter().any(|&d| d <= 0.0 || d > 0.5) {
        return Err(Error::domain("residual levels must lie in (0, 1/2]".to_string()));
    }
    if samples == 0 || group_size < 2 {
        return Err(Error::domain("need samples >= 1 and group_size >= 2".to_string()));
    }
    let cfg = AdvantageConfig::new(1e-6, alpha, 1e18, AdvantageEstimator::ApGrpo)?;
    let mut out = Vec::with_capacity(delta_levels.len());
    for (level, &delta) in delta_levels.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5EC0 + level as u64));
        let mut sums = [0.0f64; 2];
        let mut sums_sq = [0.0f64; 2];
        let mut count = 0usize;
        for _ in 0..samples {
            let rewards: Vec<f64> = (0..group_size)
                .map(|_| 1.0 - rng.gen_range(0.0..delta))
                .collect();
            let group = TrajectoryGroup::from_rewards(rewards.clone(), rewards)?;
            let standard = grpo_advantage(&group, cfg.norm_epsilon);
            let modulated = ap_grpo_advantage(&group, &cfg);
            for (s, m) in standard.iter().zip(modulated.iter()) {
                sums[0] += s;
                sums_sq[0] += s * s;
                sums[1] += m;
                sums_sq[1] += m * m;
                count += 1;
            }
        }
        let var = |i: usize| {
            let mean = sums[i] / count as f64;
            sums_sq[i] / count as f64 - mean * mean
        };
        let (var_std, var_mod) = (var(0), var(1));
        let variance_ratio = if var_std == 0.0 && var_mod == 0.0 {
            1.0
        } else {
            var_mod / var_std
        };
        out.push(RecoveryResult {
            residual: delta,
            variance_ratio,
        });
    }
    Ok(out)
}

/// Location and size of the gradient-magnitude peak for one sharpness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumCheck {
    pub k: f64,
    pub argmax_error: f64,
    pub max_magnitude: f64,
    pub expected_magnitude: f64,
    pub passed: bool,
}

/// Scans `|d reward / d e|` over a dense grid `e in [0, 20/k]` and checks
/// the peak sits at the origin with magnitude `k/2` (tolerance 1e-9).
pub fn check_gradient_extremum(k_grid: &[f64]) -> Result<Vec<ExtremumCheck>> {
    const POINTS: usize = 4000;
    let mut out = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let params = SnraParams::sigmoid(k)?;
        let span = 20.0 / k;
        let mut argmax = 0.0;
        let mut max_magnitude = f64::NEG_INFINITY;
        for i in 0..=POINTS {
            let e = span * i as f64 / POINTS as f64;
            let mag = snra_gradient(params, e)?.abs();
            if mag > max_magnitude {
                max_magnitude = mag;
                argmax = e;
            }
        }
        let expected = k / 2.0;
        out.push(ExtremumCheck {
            k,
            argmax_error: argmax,
            max_magnitude,
            expected_magnitude: expected,
            passed: argmax == 0.0 && (max_magnitude - expected).abs() <= 1e-9 * expected.max(1.0),
        });
    }
    Ok(out)
}

/// Far-error gradient comparison and near-miss contrast ratio for a low
/// and a high sharpness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsCheck {
    pub far_error: f64,
    pub near_error: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    /// `|∇(k, far_error)|` for the two sharpness values.
    pub grad_far_lo: f64,
    pub grad_far_hi: f64,
    /// `|reward(k, near) - reward(k, 0)|` for the two sharpness values.
    pub contrast_lo: f64,
    pub contrast_hi: f64,
    pub contrast_ratio: f64,
    pub expected_contrast_ratio: f64,
    pub passed: bool,
}

/// Checks the two scheduling regimes: at a far error the high-sharpness
/// gradient is exponentially smaller than the low-sharpness one, and at a
/// small residual the reward contrast grows like `k/2·δ`, so the contrast
/// ratio approximates `k_hi/k_lo` (within 10%) when `k·δ ≪ 1`.
pub fn check_sharpness_dynamics(
    far_error: f64,
    near_error: f64,
    k_lo: f64,
    k_hi: f64,
) -> Result<DynamicsCheck> {
    if k_lo >= k_hi {
        return Err(Error::domain(format!("need k_lo < k_hi, got {k_lo} >= {k_hi}")));
    }
    let p_lo = SnraParams::sigmoid(k_lo)?;
    let p_hi = SnraParams::sigmoid(k_hi)?;
    let grad_far_lo = snra_gradient(p_lo, far_error)?.abs();
    let grad_far_hi = snra_gradient(p_hi, far_error)?.abs();
    let contrast = |p: SnraParams| -> Result<f64> {
        Ok((snra(p, near_error)? - snra(p, 0.0)?).abs())
    };
    let contrast_lo = contrast(p_lo)?;
    let contrast_hi = contrast(p_hi)?;
    let contrast_ratio = if near_error == 0.0 {
        0.0
    } else {
        contrast_hi / contrast_lo
    };
    let expected_contrast_ratio = k_hi / k_lo;
    let ratio_ok = if near_error == 0.0 {
        contrast_lo == 0.0 && contrast_hi == 0.0
    } else {
        (contrast_ratio - expected_contrast_ratio).abs() <= 0.1 * expected_contrast_ratio
    };
    Ok(DynamicsCheck {
        far_error,
        near_error,
        k_lo,
        k_hi,
        grad_far_lo,
        grad_far_hi,
        contrast_lo,
        contrast_hi,
        contrast_ratio,
        expected_contrast_ratio,
        passed: grad_far_hi < grad_far_lo && ratio_ok,
    })
}

/// Recovery grid plus the pinned pass criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub alpha: f64,
    pub levels: Vec<RecoveryResult>,
    /// Ratio at the finest residual must land in `[0.99, 1.0]`.
    pub fine_ratio: f64,
    /// Ratio at the coarsest residual must show strict suppression.
    pub coarse_ratio: f64,
    pub passed: bool,
}

/// Structured output of every theorem checker with pass/fail flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub seed: u64,
    pub suppression: Vec<VarianceSweepResult>,
    pub recovery: RecoveryReport,
    pub extremum: Vec<ExtremumCheck>,
    pub dynamics: DynamicsCheck,
    pub passed: bool,
}

/// Verifier cross-checks and calibration round-trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierReport {
    /// Largest permutation length checked exhaustively.
    pub kendall_max_n: usize,
    /// Permutation pairs compared against the brute-force oracle.
    pub kendall_pairs: usize,
    pub kendall_passed: bool,
    /// Calibration grid size (`k_max` × `ε_r` × `γ` combinations).
    pub calibration_combos: usize,
    /// Largest `|reward(k_max, Φ(failure)) - ε_r|` over the grid.
    pub calibration_max_error: f64,
    pub calibration_passed: bool,
    /// Frozen direction / order / count / position examples.
    pub examples_passed: bool,
    pub passed: bool,
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force_order_score(truth: &[usize], pred: &[usize]) -> f64 {
    let n = truth.len();
    let pos = |perm: &[usize], obj: usize| perm.iter().position(|&x| x == obj).unwrap();
    let mut discordant = 0u64;
    for a in 0..n {
        for b in (a + 1)..n {
            if (pos(truth, a) < pos(truth, b)) != (pos(pred, a) < pos(pred, b)) {
                discordant += 1;
            }
        }
    }
    1.0 - discordant as f64 / (n * (n - 1) / 2) as f64
}

/// Runs the verifier property suite: the listwise-order score against a
/// brute-force discordant-pair oracle for every permutation pair up to
/// n = 5, the 27-combination calibration round-trip grid at 1e-9, and the
/// frozen scoring examples of the other verifiers.
pub fn run_verifier_checks() -> Result<VerifierReport> {
    use crate::verifiers::{
        calibrate_phi, phi_map, verify_count, verify_direction, verify_order_list,
        verify_order_pair, verify_position, FirstSeen,
    };

    let kendall_max_n = 5;
    let mut kendall_pairs = 0;
    let mut kendall_passed = true;
    for n in 2..=kendall_max_n {
        let perms = all_permutations(n);
        for a in &perms {
            for b in &perms {
                kendall_pairs += 1;
                if verify_order_list(a, b)? != brute_force_order_score(a, b) {
                    kendall_passed = false;
                }
            }
        }
    }

    let mut calibration_combos = 0;
    let mut calibration_max_error = 0.0f64;
    for &k_max in &[50.0, 100.0, 200.0] {
        for &eps_r in &[1e-3, 5e-3, 1e-2] {
            for &gamma in &[1.0, 1.5, 2.0] {
                calibration_combos += 1;
                let phi = calibrate_phi(k_max, eps_r, gamma, 1e-4)?;
                let failure = phi_map(&phi, 0.0)?;
                let reward = snra(SnraParams::sigmoid(k_max)?, failure)?;
                calibration_max_error = calibration_max_error.max((reward - eps_r).abs());
            }
        }
    }
    let calibration_passed = calibration_max_error < 1e-9;

    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let examples_passed = verify_direction(8, 3, 3, 0.5)? == 1.0
        && verify_direction(8, 0, 7, 0.5)? == 0.5
        && verify_direction(4, 0, 2, 0.5)? == 0.0
        && close(verify_order_pair(1.0, 5.0, FirstSeen::A, 2.0)?, 1.0 - (-2.0f64).exp())
        && verify_order_pair(3.0, 3.0, FirstSeen::A, 2.0)? == 0.0
        && verify_order_pair(1.0, 5.0, FirstSeen::B, 2.0)? == 0.0
        && verify_count(5, 5, 1.0)? == 1.0
        && close(verify_count(5, 6, 1.0)?, (-1.0f64).exp())
        && close(verify_count(5, 8, 1.0)?, (-3.0f64).exp())
        && {
            let s: std::collections::BTreeSet<&str> = ["a", "b"].into_iter().collect();
            let p: std::collections::BTreeSet<&str> = ["a"].into_iter().collect();
            verify_position(&s, &s)? == 1.0 && verify_position(&s, &p)? == 0.5
        };

    let passed = kendall_passed && calibration_passed && examples_passed;
    Ok(VerifierReport {
        kendall_max_n,
        kendall_pairs,
        kendall_passed,
        calibration_combos,
        calibration_max_error,
        calibration_passed,
        examples_passed,
        passed,
    })
}

/// Runs every checker at the pinned grids and tolerances.
pub fn run_theory_checks(seed: u64) -> Result<TheoryReport> {
    const EPSILON_LEVELS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
    const SAMPLES: usize = 100_000;
    const GROUP: usize = 8;

    let suppression = vec![
        check_variance_suppression(1.0, 0.1, &EPSILON_LEVELS, SAMPLES, GROUP, seed)?,
        check_variance_suppression(2.0, 0.1, &EPSILON_LEVELS, SAMPLES, GROUP, seed)?,
    ];

    let levels = check_recovery(1.0, &[0.1, 0.01, 1e-3], SAMPLES, GROUP, seed)?;
    let fine_ratio = levels.last().unwrap().variance_ratio;
    let coarse_ratio = levels.first().unwrap().variance_ratio;
    let recovery_passed = (0.99..=1.0 + 1e-9).contains(&fine_ratio) && coarse_ratio < 1.0;
    let recovery = RecoveryReport {
        alpha: 1.0,
        levels,
        fine_ratio,
        coarse_ratio,
        passed: recovery_passed,
    };

    let extremum = check_gradient_extremum(&[0.5, 1.0, 10.0, 100.0])?;
    let dynamics = check_sharpness_dynamics(5.0, 1e-3, 1.0, 100.0)?;

    let passed = suppression.iter().all(|s| s.passed)
        && recovery.passed
        && extremum.iter().all(|e| e.passed)
        && dynamics.passed;
    Ok(TheoryReport {
        seed,
        suppression,
        recovery,
        extremum,
        dynamics,
        passed,
    })
}
