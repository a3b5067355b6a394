//! Trains the default configuration on the default synthetic corpus and
//! prints a condensed training curve plus the run summary.
//!
//! ```text
//! cargo run --release --example train_basic
//! ```

use snra::cli::ExperimentConfig;
use snra::trainer::run_experiment;

fn main() {
    let config = ExperimentConfig::default();
    let corpus = config.corpus().unwrap();
    println!("corpus:");
    for task in &corpus {
        println!("  ctx {} {:?}", task.context_id, task.kind);
    }

    let outcome = run_experiment(&config.trainer_config().unwrap(), &corpus).unwrap();
    println!("\n{:>6} {:>8} {:>9} {:>9} {:>9} {:>9}", "step", "k", "reward", "accuracy", "adv_var", "kl");
    let stride = (outcome.records.len() / 16).max(1);
    for record in outcome.records.iter().step_by(stride) {
        println!(
            "{:>6} {:>8.2} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            record.step, record.sharpness, record.mean_reward, record.accuracy, record.adv_variance, record.kl
        );
    }

    let s = outcome.summary;
    println!(
        "\nsummary: final accuracy {:.4}, max {:.4}, converged at {:?}, mean adv variance {:.4}",
        s.final_accuracy, s.max_accuracy, s.t_conv, s.mean_adv_variance
    );
}
