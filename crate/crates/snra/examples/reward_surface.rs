//! Sweeps the smooth reward operator and the sharpness schedule.
//!
//! Prints plot-ready CSV to stdout: first the reward and gradient over a
//! log-spaced error grid for several sharpness values, then the scheduled
//! sharpness over a 100-step run.
//!
//! ```text
//! cargo run --example reward_surface
//! ```

use snra::operator::{snra, snra_gradient, OperatorKind, SnraParams};
use snra::schedule::{schedule_k, SharpnessSchedule};

fn main() {
    println!("# reward and gradient vs error");
    println!("k,e,reward,gradient,reward_tanh");
    for &k in &[1.0, 10.0, 100.0] {
        let sigmoid = SnraParams::sigmoid(k).unwrap();
        let tanh = SnraParams::new(k, OperatorKind::TanhShifted).unwrap();
        let mut e = 1e-4;
        while e <= 10.0 {
            println!(
                "{k},{e},{},{},{}",
                snra(sigmoid, e).unwrap(),
                snra_gradient(sigmoid, e).unwrap(),
                snra(tanh, e).unwrap()
            );
            e *= 2.0;
        }
    }

    println!("\n# scheduled sharpness, k_min=1 k_max=100 s=10 center=0.5");
    println!("t,k");
    let sched = SharpnessSchedule::new(1.0, 100.0, 10.0, 0.5, 100).unwrap();
    for t in (0..=100).step_by(5) {
        println!("{t},{}", schedule_k(&sched, t).unwrap());
    }
}
