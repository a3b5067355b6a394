//! Generates a task corpus, round-trips it through the line-delimited
//! format, and grades every action bin of one instance.
//!
//! ```text
//! cargo run --example task_corpus
//! ```

use snra::envs::{
    default_corpus, grade_action, load_corpus, save_corpus, ActionCodec, ACTION_BINS,
};
use snra::verifiers::calibrate_phi;

fn main() {
    let corpus = default_corpus(42, 10, 1.0).unwrap();
    let dir = std::env::temp_dir().join("snra_corpus_example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("corpus.jsonl");
    save_corpus(&path, &corpus).unwrap();
    let reloaded = load_corpus(&path).unwrap();
    println!("wrote and reloaded {} tasks at {}", reloaded.len(), path.display());

    for task in reloaded.iter().take(4) {
        println!("  {:?}", task);
    }

    // grade every action of the counting task
    let phi = calibrate_phi(100.0, 0.01, 1.0, 1e-4).unwrap();
    let codec = ActionCodec::new(ACTION_BINS).unwrap();
    let task = reloaded
        .iter()
        .find(|t| matches!(t.kind, snra::envs::TaskKind::Count))
        .unwrap();
    println!("\ngrading {:?}:", task.ground_truth);
    println!("{:>7} {:>8} {:>10} {:>8}", "action", "score", "error", "correct");
    for action in (0..codec.bins()).step_by(7) {
        let grade = grade_action(task, &codec, &phi, action).unwrap();
        println!(
            "{:>7} {:>8} {:>10.5} {:>8}",
            action,
            grade.score.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
            grade.error,
            grade.correct
        );
    }
}
