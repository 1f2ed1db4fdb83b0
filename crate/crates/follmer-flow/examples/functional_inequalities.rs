//! The Lipschitz transport transfers the Gaussian Poincare and log-Sobolev
//! inequalities to the target with constants L^2 and 2 L^2. Plug-in
//! estimators over a test-function family give lower estimates that must
//! stay below those constants.
//!
//! Run: `cargo run --example functional_inequalities`

use follmer_flow::bounds::functional_constants;
use follmer_flow::config::preset;
use follmer_flow::measures::TargetMeasure;
use follmer_flow::metrics::{
    bootstrap_stderr, default_log_sobolev_family, default_poincare_family, empirical_log_sobolev,
    empirical_poincare, SampleSet,
};
use follmer_flow::rng::substream;

fn main() {
    for name in ["mix-r1", "mix-sym"] {
        let target = preset(name).unwrap();
        let consts = functional_constants(&target.convexity_profile(), None, None).unwrap();
        let mut rng = substream(13, 0);
        let samples = SampleSet::new(target.sample(&mut rng, 100_000).unwrap(), name).unwrap();

        let pf = default_poincare_family(target.dim(), 13);
        let est_p = empirical_poincare(&samples, &pf).unwrap();
        let se_p = bootstrap_stderr(&samples, &pf, false, 24, 14).unwrap();

        let lf = default_log_sobolev_family(target.dim(), 13);
        let est_ls = empirical_log_sobolev(&samples, &lf).unwrap();
        let se_ls = bootstrap_stderr(&samples, &lf, true, 24, 15).unwrap();

        println!("{name}:");
        println!(
            "  Poincare:    empirical {est_p:.3} +- {se_p:.3}   constant {:.3}",
            consts.c_p
        );
        println!(
            "  log-Sobolev: empirical {est_ls:.3} +- {se_ls:.3}   constant {:.3}",
            consts.c_ls
        );
        println!();
    }
    println!("(estimates are lower bounds from a finite family; the constants cap them)");
}
