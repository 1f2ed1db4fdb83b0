//! Every constant the transport certifies, for a few profiles: the growth
//! envelope's Lipschitz constant and the functional-inequality constants it
//! transfers from the Gaussian, plus the pieces of the empirical-measure
//! concentration bound.
//!
//! Run: `cargo run --example constants_calculator`

use follmer_flow::bounds::{concentration_bound, functional_constants};
use follmer_flow::measures::ConvexityProfile;

fn main() {
    let profiles = [
        (
            "strongly log-concave, kappa = 4",
            ConvexityProfile::log_concave(4.0).unwrap(),
        ),
        (
            "bounded support, kappa = 0, D = 1",
            ConvexityProfile::bounded_support(0.0, 1.0).unwrap(),
        ),
        (
            "mixture sigma = 1, R = 1",
            ConvexityProfile::mixture(1.0, 1.0).unwrap(),
        ),
        (
            "mixture sigma = 2, R = 0 (pure Gaussian)",
            ConvexityProfile::mixture(2.0, 0.0).unwrap(),
        ),
    ];
    for (label, profile) in &profiles {
        let report = functional_constants(profile, Some(4), None).unwrap();
        println!("{label}:");
        println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).unwrap()
        );
        println!();
    }

    println!("concentration bound pieces (mixture sigma = 1, R = 1; d = 2, eps = 0.1,");
    println!("fifth moment 1, c_d = 1):");
    let profile = ConvexityProfile::mixture(1.0, 1.0).unwrap();
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "n", "deviation", "mean term", "total"
    );
    for n in [100usize, 1000, 10_000] {
        let b = concentration_bound(&profile, 2, n, 0.1, 1.0, 1.0).unwrap();
        println!(
            "{n:>8} {:>12.4} {:>12.4} {:>12.4}",
            b.deviation_term, b.mean_term, b.total
        );
    }
}
