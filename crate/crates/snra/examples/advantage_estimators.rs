//! Compares the three advantage estimators on one trajectory group.
//!
//! ```text
//! cargo run --example advantage_estimators
//! ```

use snra::advantage::{
    ap_grpo_advantage, clip_advantage, grpo_advantage, pure_absolute_advantage, AdvantageConfig,
    AdvantageEstimator, TrajectoryGroup,
};

fn main() {
    // one sparse-regime group: mostly near-misses, one decent answer
    let rewards = vec![0.05, 0.08, 0.02, 0.07, 0.95, 0.04, 0.06, 0.03];
    let group = TrajectoryGroup::from_rewards(rewards.clone(), rewards.clone()).unwrap();

    println!("rewards:        {rewards:?}\n");
    let standard = grpo_advantage(&group, 1e-6);
    println!("standardized:   {}", fmt(&standard));
    for alpha in [1.0, 2.0] {
        let cfg = AdvantageConfig::new(1e-6, alpha, 1.5, AdvantageEstimator::ApGrpo).unwrap();
        let modulated = ap_grpo_advantage(&group, &cfg);
        println!("modulated a={alpha}: {}", fmt(&modulated));
    }
    println!("pure absolute:  {}", fmt(&pure_absolute_advantage(&group)));
    println!("clipped (1.5):  {}", fmt(&clip_advantage(&standard, 1.5)));

    // high-precision regime: modulation fades out as rewards approach 1
    let rewards = vec![0.995, 0.999, 0.992, 0.998];
    let group = TrajectoryGroup::from_rewards(rewards.clone(), rewards.clone()).unwrap();
    let cfg = AdvantageConfig::default();
    println!("\nnear-perfect rewards: {rewards:?}");
    println!("standardized:   {}", fmt(&grpo_advantage(&group, 1e-6)));
    println!("modulated a=1:  {}", fmt(&ap_grpo_advantage(&group, &cfg)));
}

fn fmt(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:+.3}")).collect();
    format!("[{}]", parts.join(", "))
}
