//! Along the flow, the time-t marginal of pushed Gaussian draws has the
//! closed form t X + sqrt(1 - t^2) Y with X from the target and Y standard
//! Gaussian. This compares the two with the sliced transport distance at
//! several times, against the distance between two independent direct
//! draws (the sampling floor).
//!
//! Run: `cargo run --example marginal_law`

use follmer_flow::config::preset;
use follmer_flow::flow::{
    forward_marginal_sample, push_forward_marginals, IntegrationMethod, TimeGrid,
};
use follmer_flow::metrics::{sliced_w2, SampleSet};
use follmer_flow::rng::substream;

fn main() {
    let target = preset("mix-sym").unwrap();
    let t_list = [0.25, 0.5, 0.75, 1.0];
    let n = 4000;
    let grid = TimeGrid::uniform(256).unwrap();
    let marginals =
        push_forward_marginals(&target, n, &grid, IntegrationMethod::Rk4, &t_list, 5).unwrap();

    println!(
        "{:>6} {:>12} {:>12} {:>8}",
        "t", "flow vs law", "floor", "ratio"
    );
    for (k, &t) in t_list.iter().enumerate() {
        let draw = |stream: u64| {
            let mut rng = substream(6 + stream, k as u64);
            SampleSet::new(
                (0..n)
                    .map(|_| forward_marginal_sample(&target, t, &mut rng).unwrap())
                    .collect::<Vec<_>>(),
                "direct",
            )
            .unwrap()
        };
        let (direct_a, direct_b) = (draw(0), draw(1));
        let flow_set = SampleSet::new(marginals[k].clone(), "flow").unwrap();
        let dist = sliced_w2(&flow_set, &direct_a, 64, &mut substream(8, k as u64)).unwrap();
        let floor = sliced_w2(&direct_b, &direct_a, 64, &mut substream(8, k as u64)).unwrap();
        println!(
            "{t:>6.2} {:>12.4} {:>12.4} {:>8.2}",
            dist.value,
            floor.value,
            dist.value / floor.value
        );
    }
    println!("\n(ratios near 1 mean the flow marginal is statistically indistinguishable)");
}
