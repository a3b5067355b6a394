//! Walks every discrete verifier and the calibrated error mapping.
//!
//! ```text
//! cargo run --example verifier_scores
//! ```

use std::collections::BTreeSet;

use snra::operator::{snra, SnraParams};
use snra::verifiers::{
    calibrate_phi, continuous_error, phi_map, verify_count, verify_direction, verify_order_list,
    verify_order_pair, verify_position, ContinuousError, FirstSeen,
};

fn main() {
    let phi = calibrate_phi(100.0, 0.01, 1.0, 1e-4).unwrap();
    println!("calibration: eta = {:.6}, failure error = {:.6}", phi.eta, phi_map(&phi, 0.0).unwrap());
    println!(
        "terminal reward of a complete failure: {:.6}\n",
        snra(SnraParams::sigmoid(100.0).unwrap(), phi_map(&phi, 0.0).unwrap()).unwrap()
    );

    println!("{:<34} {:>7} {:>10}", "prediction", "score", "error");
    let show = |label: &str, score: f64| {
        println!("{:<34} {:>7.4} {:>10.6}", label, score, phi_map(&phi, score).unwrap());
    };

    show("direction: exact bin", verify_direction(8, 3, 3, 0.5).unwrap());
    show("direction: adjacent bin", verify_direction(8, 3, 4, 0.5).unwrap());
    show("direction: opposite bin", verify_direction(8, 3, 7, 0.5).unwrap());

    show(
        "order pair: right, wide margin",
        verify_order_pair(1.0, 5.0, FirstSeen::A, 1.0).unwrap(),
    );
    show(
        "order pair: right, near tie",
        verify_order_pair(1.0, 1.1, FirstSeen::A, 1.0).unwrap(),
    );
    show(
        "order pair: wrong order",
        verify_order_pair(1.0, 5.0, FirstSeen::B, 1.0).unwrap(),
    );

    show("order list: exact", verify_order_list(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap());
    show("order list: one swap", verify_order_list(&[0, 1, 2, 3], &[1, 0, 2, 3]).unwrap());
    show("order list: reversed", verify_order_list(&[0, 1, 2, 3], &[3, 2, 1, 0]).unwrap());

    show("count: exact", verify_count(5, 5, 1.0).unwrap());
    show("count: off by one", verify_count(5, 6, 1.0).unwrap());
    show("count: off by three", verify_count(5, 8, 1.0).unwrap());

    let truth: BTreeSet<&str> = ["left", "near"].into_iter().collect();
    let partial: BTreeSet<&str> = ["left"].into_iter().collect();
    let wrong: BTreeSet<&str> = ["right"].into_iter().collect();
    show("position: exact set", verify_position(&truth, &truth).unwrap());
    show("position: subset", verify_position(&truth, &partial).unwrap());
    show("position: disjoint", verify_position(&truth, &wrong).unwrap());

    let exact = ContinuousError::new(Some(2.0), 2.0, 100.0).unwrap();
    let near = ContinuousError::new(Some(2.3), 2.0, 100.0).unwrap();
    let unparsed = ContinuousError::new(None, 2.0, 100.0).unwrap();
    println!("\ncontinuous squared errors:");
    println!("  exact answer      -> {}", continuous_error(&exact));
    println!("  off by 0.3        -> {}", continuous_error(&near));
    println!("  invalid parse     -> {} (maximum penalty)", continuous_error(&unparsed));
}
