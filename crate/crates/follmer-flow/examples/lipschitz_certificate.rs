//! The time-1 flow map is Lipschitz with a constant computable in closed
//! form: exp of the integrated growth envelope. Propagating the variational
//! equation along trajectories gives the realized operator norms, which
//! must stay under the running bound exp(int_0^t theta).
//!
//! Run: `cargo run --example lipschitz_certificate`

use follmer_flow::bounds::theta_profile;
use follmer_flow::config::preset;
use follmer_flow::flow::{jacobian_along_flow, IntegrationMethod, TimeGrid};
use follmer_flow::rng::{standard_normal_vector, substream};

fn main() {
    let target = preset("mix-r1").unwrap();
    let theta = theta_profile(&target.convexity_profile()).unwrap();
    println!(
        "target mix-r1 (sigma = 1, R = 1): certified Lipschitz constant {:.6}",
        theta.lipschitz_constant
    );

    let grid = TimeGrid::uniform(256).unwrap();
    let n_starts = 200;
    let mut max_at: Vec<f64> = vec![0.0; grid.nodes().len()];
    for i in 0..n_starts {
        let mut rng = substream(21, i);
        let x0 = standard_normal_vector(&mut rng, target.dim());
        let tr = jacobian_along_flow(&target, &target, &x0, &grid, IntegrationMethod::Rk4).unwrap();
        for (k, &v) in tr.op_norms.as_ref().unwrap().iter().enumerate() {
            max_at[k] = max_at[k].max(v);
        }
    }

    println!(
        "\n{:>5} {:>14} {:>14}",
        "t", "max ||grad X||", "exp(int theta)"
    );
    for k in (0..grid.nodes().len()).step_by(32) {
        let t = grid.nodes()[k];
        println!(
            "{t:>5.2} {:>14.6} {:>14.6}",
            max_at[k],
            theta.integral(t).exp()
        );
    }
    let last = grid.nodes().len() - 1;
    println!(
        "{:>5.2} {:>14.6} {:>14.6}",
        1.0, max_at[last], theta.lipschitz_constant
    );
    println!(
        "\nfinal max over {n_starts} starts: {:.6} <= {:.6}",
        max_at[last], theta.lipschitz_constant
    );
}
