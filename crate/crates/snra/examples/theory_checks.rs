//! Runs every Monte-Carlo checker and prints the measured quantities
//! against their targets.
//!
//! ```text
//! cargo run --release --example theory_checks [seed]
//! ```

use snra::analysis::run_theory_checks;

fn main() {
    let seed = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let report = run_theory_checks(seed).unwrap();

    for sweep in &report.suppression {
        println!(
            "variance suppression alpha={}: slope {:.3} (target {} ± {}) [{}]",
            sweep.alpha,
            sweep.slope,
            sweep.expected_slope,
            sweep.tolerance,
            ok(sweep.passed)
        );
        for (eps, var) in sweep.epsilon_levels.iter().zip(sweep.variances.iter()) {
            println!("    eps {eps:<6} -> Var {var:.3e}");
        }
    }

    println!(
        "sensitivity recovery: ratio {:.5} at the finest residual, {:.5} at the coarsest [{}]",
        report.recovery.fine_ratio,
        report.recovery.coarse_ratio,
        ok(report.recovery.passed)
    );
    for level in &report.recovery.levels {
        println!("    delta {:<7} -> Var ratio {:.5}", level.residual, level.variance_ratio);
    }

    for check in &report.extremum {
        println!(
            "gradient extremum k={}: peak {:.4} at e={} (expect {:.4} at 0) [{}]",
            check.k,
            check.max_magnitude,
            check.argmax_error,
            check.expected_magnitude,
            ok(check.passed)
        );
    }

    let d = &report.dynamics;
    println!(
        "sharpness dynamics: far-error gradient {:.3e} (k={}) vs {:.3e} (k={}); near contrast ratio {:.1} (expect ~{:.0}) [{}]",
        d.grad_far_hi, d.k_hi, d.grad_far_lo, d.k_lo, d.contrast_ratio, d.expected_contrast_ratio, ok(d.passed)
    );
    println!("\noverall: {}", ok(report.passed));
}

fn ok(passed: bool) -> &'static str {
    if passed {
        "ok"
    } else {
        "FAILED"
    }
}
