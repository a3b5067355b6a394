//! Runs the optimization-mechanism matrix on one seed and prints the
//! summary table (binary rewards, fixed sharpness with and without
//! modulation, linear and sigmoid curricula).
//!
//! ```text
//! cargo run --release --example roadmap_matrix [seed]
//! ```

use snra::cli::{run_roadmap, ExperimentConfig};

fn main() {
    let mut config = ExperimentConfig::default();
    config.seed = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    println!("seed {}, {} steps per run\n", config.seed, config.total_steps);
    println!("{:<16} {:>8} {:>10} {:>10}", "mechanism", "t_conv", "adv_var", "final_acc");
    for row in run_roadmap(&config).unwrap() {
        println!(
            "{:<16} {:>8} {:>10.4} {:>10.4}",
            row.mechanism.label(),
            row.t_conv.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
            row.adv_variance,
            row.final_accuracy
        );
    }
}
