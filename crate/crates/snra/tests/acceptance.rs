//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured quantities (run with `--nocapture` to see them).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snra::advantage::{
    ap_grpo_advantage, grpo_advantage, AdvantageConfig, AdvantageEstimator, TrajectoryGroup,
};
use snra::analysis::{check_gradient_extremum, check_recovery, check_variance_suppression};
use snra::cli::{run_roadmap, ExperimentConfig, Mechanism};
use snra::envs::ToyPolicy;
use snra::operator::{snra, snra_gradient, OperatorKind, SnraParams};
use snra::trainer::{batch_gradients, batch_objective, run_experiment};
use snra::verifiers::{calibrate_phi, phi_map};

fn report(criterion: &str, passed: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if passed { "PASS" } else { "FAIL" });
}

/// Independent oracle route for the reward operator: the textbook form
/// `2/(1 + exp(x))` with the argument product compensated by its exact
/// rounding error (`exp(x + err) = exp(x)·(1 + err)` to first order).
fn oracle_reward(k: f64, e: f64, kind: OperatorKind) -> f64 {
    let scale = match kind {
        OperatorKind::Sigmoid => 1.0,
        OperatorKind::TanhShifted => 2.0,
    };
    let p = scale * k * e;
    let err = (scale * k).mul_add(e, -p);
    let u = p.exp() * (1.0 + err);
    2.0 / (1.0 + u)
}

fn oracle_gradient(k: f64, e: f64, kind: OperatorKind) -> f64 {
    let (scale, factor) = match kind {
        OperatorKind::Sigmoid => (1.0, 2.0),
        OperatorKind::TanhShifted => (2.0, 4.0),
    };
    let p = scale * k * e;
    let err = (scale * k).mul_add(e, -p);
    let u = p.exp() * (1.0 + err);
    if u > 1.0 {
        // u/(1+u)² = 1/(u·(1+1/u)²); avoids overflow of (1+u)²
        let inv = 1.0 / u;
        -factor * k * inv / ((1.0 + inv) * (1.0 + inv))
    } else {
        -factor * k * u / ((1.0 + u) * (1.0 + u))
    }
}

#[test]
fn criterion_01_snra_exactness() {
    let start = std::time::Instant::now();
    let mut max_rel = 0.0f64;
    let mut points = 0;
    for kind in [OperatorKind::Sigmoid, OperatorKind::TanhShifted] {
        // anchors: exactly 1 at zero error
        for i in 0..10 {
            let k = 10f64.powf(-2.0 + 0.5 * i as f64);
            assert_eq!(snra(SnraParams::new(k, kind).unwrap(), 0.0).unwrap(), 1.0);
        }
        for i in 0..25 {
            let k = 10f64.powf(-2.0 + 5.0 * i as f64 / 24.0);
            let params = SnraParams::new(k, kind).unwrap();
            for j in 0..40 {
                let e = 10f64.powf(-6.0 + 7.0 * j as f64 / 39.0);
                if 2.0 * k * e > 700.0 {
                    continue; // saturation regime checked separately
                }
                points += 1;
                let r = snra(params, e).unwrap();
                let o = oracle_reward(k, e, kind);
                max_rel = max_rel.max((r - o).abs() / o);
                let g = snra_gradient(params, e).unwrap();
                let og = oracle_gradient(k, e, kind);
                max_rel = max_rel.max((g - og).abs() / og.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = max_rel < 1e-12 && points >= 1000 && elapsed.as_secs_f64() < 1.0;
    report(
        "01 snra exactness",
        passed,
        &format!("max rel err {max_rel:.2e} over {points} grid points, {elapsed:.2?}"),
    );
    assert!(passed);
}

#[test]
fn criterion_02_gradient_extremum() {
    let start = std::time::Instant::now();
    let checks = check_gradient_extremum(&[0.5, 1.0, 10.0, 100.0]).unwrap();
    let elapsed = start.elapsed();
    let passed = checks.iter().all(|c| c.passed) && elapsed.as_secs_f64() < 1.0;
    let detail: Vec<String> = checks
        .iter()
        .map(|c| format!("k={}: argmax {} max {:.6}", c.k, c.argmax_error, c.max_magnitude))
        .collect();
    report("02 gradient extremum", passed, &detail.join("; "));
    assert!(passed);
}

#[test]
fn criterion_03_calibration_round_trip() {
    let start = std::time::Instant::now();
    let mut max_err = 0.0f64;
    let mut combos = 0;
    for &k_max in &[50.0, 100.0, 200.0] {
        for &eps_r in &[1e-3, 5e-3, 1e-2] {
            for &gamma in &[1.0, 1.5, 2.0] {
                combos += 1;
                let phi = calibrate_phi(k_max, eps_r, gamma, 1e-4).unwrap();
                let failure = phi_map(&phi, 0.0).unwrap();
                let reward = snra(SnraParams::sigmoid(k_max).unwrap(), failure).unwrap();
                max_err = max_err.max((reward - eps_r).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = combos == 27 && max_err < 1e-9 && elapsed.as_secs_f64() < 1.0;
    report(
        "03 calibration round trip",
        passed,
        &format!("{combos} combos, max |reward - eps_r| = {max_err:.2e}"),
    );
    assert!(passed);
}

#[test]
fn criterion_04_variance_suppression_slopes() {
    let start = std::time::Instant::now();
    let levels = [0.2, 0.1, 0.05, 0.025];
    let a1 = check_variance_suppression(1.0, 0.1, &levels, 100_000, 8, 1).unwrap();
    let a2 = check_variance_suppression(2.0, 0.1, &levels, 100_000, 8, 1).unwrap();
    let elapsed = start.elapsed();
    let passed = (a1.slope - 2.0).abs() <= 0.3
        && (a2.slope - 4.0).abs() <= 0.6
        && elapsed.as_secs_f64() < 30.0;
    report(
        "04 variance suppression",
        passed,
        &format!("slope(alpha=1) = {:.3} (target 2 ± 0.3), slope(alpha=2) = {:.3} (target 4 ± 0.6), {elapsed:.2?}", a1.slope, a2.slope),
    );
    assert!(passed);
}

#[test]
fn criterion_05_sensitivity_recovery() {
    let start = std::time::Instant::now();
    let levels = check_recovery(1.0, &[1e-3], 100_000, 8, 1).unwrap();
    let ratio = levels[0].variance_ratio;
    let elapsed = start.elapsed();
    let passed = (0.99..=1.0 + 1e-9).contains(&ratio) && elapsed.as_secs_f64() < 10.0;
    report(
        "05 sensitivity recovery",
        passed,
        &format!("Var ratio at delta=1e-3: {ratio:.5} (target [0.99, 1.0]), {elapsed:.2?}"),
    );
    assert!(passed);
}

#[test]
fn criterion_06_sign_and_ordering_preservation() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0u64;
    let mut groups_checked = 0u64;
    let alphas = [1.0, 1.5, 2.0];
    for &g in &[2usize, 4, 8, 16] {
        for trial in 0..25_000 {
            let rewards: Vec<f64> = (0..g).map(|_| rng.gen_range(0.001..=1.0)).collect();
            let group = TrajectoryGroup::from_rewards(rewards.clone(), rewards).unwrap();
            let alpha = alphas[trial % alphas.len()];
            let cfg = AdvantageConfig::new(1e-6, alpha, 1e18, AdvantageEstimator::ApGrpo).unwrap();
            let base = grpo_advantage(&group, 1e-6);
            let modulated = ap_grpo_advantage(&group, &cfg);
            for i in 0..g {
                let sign = |x: f64| (x > 0.0) as i8 - (x < 0.0) as i8;
                if sign(base[i]) != sign(modulated[i]) {
                    violations += 1;
                }
                for j in 0..g {
                    if base[i] > base[j] && base[j] > 0.0 && modulated[i] < modulated[j] {
                        violations += 1;
                    }
                }
            }
            groups_checked += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed = violations == 0 && groups_checked == 100_000 && elapsed.as_secs_f64() < 10.0;
    report(
        "06 sign/ordering preservation",
        passed,
        &format!("{violations} violations over {groups_checked} groups, {elapsed:.2?}"),
    );
    assert!(passed);
}

#[test]
fn criterion_07_verifier_oracles() {
    let start = std::time::Instant::now();
    let verifier_report = snra::analysis::run_verifier_checks().unwrap();
    let elapsed = start.elapsed();
    let passed = verifier_report.passed
        && verifier_report.kendall_max_n == 5
        && verifier_report.kendall_pairs >= 14_400
        && elapsed.as_secs_f64() < 10.0;
    report(
        "07 verifier oracles",
        passed,
        &format!(
            "kendall pairs {} (exhaustive to n=5), calibration max err {:.2e}, examples {}",
            verifier_report.kendall_pairs,
            verifier_report.calibration_max_error,
            verifier_report.examples_passed
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_08_trainer_gradient_check() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let contexts = 3;
        let bins = 7;
        let logits: Vec<Vec<f64>> = (0..contexts)
            .map(|_| (0..bins).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect();
        let policy = ToyPolicy::from_logits(logits).unwrap();
        let mut groups = Vec::new();
        let mut advantages = Vec::new();
        for ctx in 0..contexts {
            let ls = policy.log_softmax(ctx).unwrap();
            let g = 6;
            let actions: Vec<usize> = (0..g).map(|_| rng.gen_range(0..bins)).collect();
            let lp_old: Vec<f64> = actions.iter().map(|&a| ls[a] + rng.gen_range(-0.35..0.35)).collect();
            let lp_cur: Vec<f64> = actions.iter().map(|&a| ls[a]).collect();
            let rewards: Vec<f64> = (0..g).map(|_| rng.gen_range(0.0..1.0)).collect();
            advantages.push((0..g).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<f64>>());
            groups.push(
                TrajectoryGroup::new(ctx, actions, rewards.clone(), rewards, lp_cur, lp_old).unwrap(),
            );
        }
        let (_, _, analytic) = batch_gradients(&policy, &groups, &advantages, 0.2, 0.02).unwrap();
        let scale = analytic.iter().flatten().map(|g| g.abs()).fold(1e-8, f64::max);
        let h = 1e-6;
        for ctx in 0..contexts {
            for b in 0..bins {
                let z = policy.logit(ctx, b).unwrap();
                let mut plus = policy.clone();
                plus.set_logit(ctx, b, z + h).unwrap();
                let mut minus = policy.clone();
                minus.set_logit(ctx, b, z - h).unwrap();
                let fd = (batch_objective(&plus, &groups, &advantages, 0.2, 0.02).unwrap()
                    - batch_objective(&minus, &groups, &advantages, 0.2, 0.02).unwrap())
                    / (2.0 * h);
                worst = worst.max((analytic[ctx][b] - fd).abs() / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = worst < 1e-5 && elapsed.as_secs_f64() < 5.0;
    report(
        "08 trainer gradient check",
        passed,
        &format!("worst relative deviation {worst:.2e} over 20 random policies, {elapsed:.2?}"),
    );
    assert!(passed);
}

fn median_usize(values: &mut Vec<usize>) -> usize {
    values.sort_unstable();
    values[values.len() / 2]
}

fn median_f64(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

#[test]
fn criterion_09_roadmap_ordering() {
    let start = std::time::Instant::now();
    let mut per_mech: Vec<(Vec<usize>, Vec<f64>, Vec<f64>)> =
        vec![(Vec::new(), Vec::new(), Vec::new()); Mechanism::ALL.len()];
    for seed in [1u64, 2, 3] {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        let rows = run_roadmap(&cfg).unwrap();
        for (i, row) in rows.iter().enumerate() {
            per_mech[i].0.push(row.t_conv.unwrap_or(usize::MAX));
            per_mech[i].1.push(row.adv_variance);
            per_mech[i].2.push(row.final_accuracy);
        }
    }
    let idx = |m: Mechanism| Mechanism::ALL.iter().position(|&x| x == m).unwrap();
    let summary = |m: Mechanism| {
        let (mut tc, mut var, mut acc) = per_mech[idx(m)].clone();
        (median_usize(&mut tc), median_f64(&mut var), median_f64(&mut acc))
    };
    let (tc_sig, var_sig, acc_sig) = summary(Mechanism::ApGrpoSigmoid);
    let (tc_fix, _, acc_fix) = summary(Mechanism::ApGrpoFixed);
    let (tc_bin, var_bin, acc_bin) = summary(Mechanism::BinaryGrpo);
    let elapsed = start.elapsed();

    let leg_tc_sig_fix = tc_sig <= tc_fix;
    let leg_tc_fix_bin = tc_fix <= tc_bin;
    let leg_acc = acc_sig >= acc_fix && acc_fix >= acc_bin;
    let leg_var = var_sig <= var_bin;
    let passed =
        leg_tc_sig_fix && leg_tc_fix_bin && leg_acc && leg_var && elapsed.as_secs_f64() < 300.0;
    report(
        "09 roadmap ordering",
        passed,
        &format!(
            "median T_conv sigmoid {tc_sig} <= fixed {tc_fix}: {leg_tc_sig_fix}; fixed {tc_fix} <= binary {tc_bin}: {leg_tc_fix_bin}; \
             median final acc sigmoid {acc_sig:.3} >= fixed {acc_fix:.3} >= binary {acc_bin:.3}: {leg_acc}; \
             mean adv variance sigmoid {var_sig:.3} <= binary {var_bin:.3}: {leg_var}; {elapsed:.1?}"
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_10_advantage_formulation_ablation() {
    let start = std::time::Instant::now();
    let mut ap_accs = Vec::new();
    let mut pure_accs = Vec::new();
    for seed in [1u64, 2, 3] {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        let corpus = cfg.corpus().unwrap();
        let ap = run_experiment(&cfg.trainer_config().unwrap(), &corpus).unwrap();
        ap_accs.push(ap.summary.final_accuracy);
        let mut pure_cfg = cfg.clone();
        pure_cfg.estimator = AdvantageEstimator::PureAbsolute;
        let pure = run_experiment(&pure_cfg.trainer_config().unwrap(), &corpus).unwrap();
        pure_accs.push(pure.summary.final_accuracy);
    }
    let ap = median_f64(&mut ap_accs);
    let pure = median_f64(&mut pure_accs);
    let elapsed = start.elapsed();
    let passed = ap > pure && elapsed.as_secs_f64() < 180.0;
    report(
        "10 advantage formulation",
        passed,
        &format!("median final accuracy: modulated {ap:.3} vs pure absolute {pure:.3}, {elapsed:.1?}"),
    );
    assert!(passed);
}

#[test]
fn criterion_11_alpha_ablation_vanishing() {
    let start = std::time::Instant::now();
    let mut ratios = Vec::new();
    for seed in [1u64, 2, 3] {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        let corpus = cfg.corpus().unwrap();
        let mut magnitudes = Vec::new();
        for alpha in [1.0, 2.0] {
            let mut acfg = cfg.clone();
            acfg.alpha = alpha;
            let run = run_experiment(&acfg.trainer_config().unwrap(), &corpus).unwrap();
            magnitudes.push(run.summary.mean_abs_advantage);
        }
        ratios.push(magnitudes[0] / magnitudes[1].max(1e-12));
    }
    let ratio = median_f64(&mut ratios);
    let elapsed = start.elapsed();
    let passed = ratio >= 2.0 && elapsed.as_secs_f64() < 120.0;
    report(
        "11 alpha vanishing",
        passed,
        &format!("median mean|A| ratio alpha1/alpha2 = {ratio:.2} (target >= 2), {elapsed:.1?}"),
    );
    assert!(passed);
}

#[test]
fn criterion_12_operator_parity() {
    let start = std::time::Instant::now();
    let mut worst_gap = 0.0f64;
    for seed in [1u64, 2, 3] {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        let corpus = cfg.corpus().unwrap();
        let sigmoid = run_experiment(&cfg.trainer_config().unwrap(), &corpus).unwrap();
        let mut tanh_cfg = cfg.clone();
        tanh_cfg.operator = OperatorKind::TanhShifted;
        let tanh = run_experiment(&tanh_cfg.trainer_config().unwrap(), &corpus).unwrap();
        worst_gap = worst_gap
            .max((sigmoid.summary.final_accuracy - tanh.summary.final_accuracy).abs());
    }
    let elapsed = start.elapsed();
    let passed = worst_gap < 0.05 && elapsed.as_secs_f64() < 120.0;
    report(
        "12 operator parity",
        passed,
        &format!("worst |sigmoid - tanh| final accuracy gap {:.1} pp, {elapsed:.1?}", worst_gap * 100.0),
    );
    assert!(passed);
}

#[test]
fn criterion_13_roadmap_determinism() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        // exit status reflects the roadmap's trend assertion, which is
        // reported separately; determinism concerns the bytes only
        let _ = snra::cli::run([
            "snra",
            "roadmap",
            "--seed",
            "1",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
    }
    let body_a = std::fs::read(dir_a.path().join("roadmap_seed1.csv")).unwrap();
    let body_b = std::fs::read(dir_b.path().join("roadmap_seed1.csv")).unwrap();
    let passed = body_a == body_b && !body_a.is_empty();
    report(
        "13 roadmap determinism",
        passed,
        &format!("two runs produced identical {} byte bodies", body_a.len()),
    );
    assert!(passed);
}
