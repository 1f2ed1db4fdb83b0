//! Empirical measures drift toward their law at a dimension-dependent rate.
//! This measures the decay of the (sliced) transport distance between
//! n-sample empirical measures and a large reference sample, in d = 2 and
//! d = 6, and prints the fitted log-log slopes next to the rate exponents.
//!
//! Run: `cargo run --example concentration`

use follmer_flow::config::{ExperimentSpec, GridSpec, RunConfig, TargetSpec};
use follmer_flow::experiments::run_concentration;

fn main() {
    for (name, expected) in [("std-gaussian", -0.5), ("mix-d6", -1.0 / 3.0)] {
        let cfg = RunConfig {
            seed: 424242,
            target: TargetSpec::of_preset(name),
            grid: GridSpec::default(),
            threads: None,
            sample: None,
            experiment: Some(ExperimentSpec::Concentration {
                n_list: vec![250, 500, 1000, 2000, 4000],
                repeats: 20,
                reference_n: 20_000,
                eps: 0.1,
                n_projections: 64,
            }),
            output: None,
        };
        let report = run_concentration(&cfg).unwrap();
        println!("{name} (rate exponent {expected:.3}):");
        for c in &report.checks {
            println!(
                "  {:<26} estimate {:>9.4}  bound/target {:>9.4}  pass {}",
                c.name, c.estimate, c.bound_or_target, c.pass
            );
        }
        println!();
    }
}
