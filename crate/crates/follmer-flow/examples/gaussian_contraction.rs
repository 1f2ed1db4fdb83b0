//! A centered Gaussian N(0, 1/beta) has a fully analytic flow:
//! X_t(x) = x sqrt((beta + (1-beta) t^2)/beta), so the time-1 map is the
//! linear contraction x -> x/sqrt(beta) with Jacobian norm 1/sqrt(beta).
//! RK4 should reproduce both to solver accuracy and converge at fourth
//! order.
//!
//! Run: `cargo run --example gaussian_contraction`

use nalgebra::DVector;

use follmer_flow::flow::{
    gaussian_flow_map, integrate, jacobian_along_flow, IntegrationMethod, TimeGrid,
};
use follmer_flow::measures::GaussianMixture;

fn main() {
    let beta = 4.0f64;
    let target = GaussianMixture::single(DVector::zeros(1), 1.0 / beta.sqrt()).unwrap();
    let grid = TimeGrid::uniform(100).unwrap();

    println!("target N(0, 1/{beta}): time-1 map x -> x/{}", beta.sqrt());
    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "x", "X_1(x)", "exact", "error"
    );
    for xi in [-3.0, -1.0, 0.5, 2.0, 3.0] {
        let x = DVector::from_vec(vec![xi]);
        let tr = integrate(&target, &x, &grid, IntegrationMethod::Rk4).unwrap();
        let exact = gaussian_flow_map(beta, 1.0, xi);
        println!(
            "{xi:>6.1} {:>12.8} {:>12.8} {:>10.2e}",
            tr.final_state()[0],
            exact,
            (tr.final_state()[0] - exact).abs()
        );
    }

    let tr = jacobian_along_flow(
        &target,
        &target,
        &DVector::from_vec(vec![1.0]),
        &grid,
        IntegrationMethod::Rk4,
    )
    .unwrap();
    println!(
        "\n||grad X_1|| = {:.10}  (analytic {})",
        tr.final_op_norm().unwrap(),
        1.0 / beta.sqrt()
    );

    println!("\nRK4 endpoint error vs step count (x = 2):");
    println!("{:>8} {:>12} {:>8}", "steps", "error", "ratio");
    let mut prev: Option<f64> = None;
    for steps in [25usize, 50, 100, 200] {
        let tr = integrate(
            &target,
            &DVector::from_vec(vec![2.0]),
            &TimeGrid::uniform(steps).unwrap(),
            IntegrationMethod::Rk4,
        )
        .unwrap();
        let err = (tr.final_state()[0] - gaussian_flow_map(beta, 1.0, 2.0)).abs();
        match prev {
            Some(p) => println!("{steps:>8} {err:>12.3e} {:>8.1}", p / err),
            None => println!("{steps:>8} {err:>12.3e} {:>8}", "-"),
        }
        prev = Some(err);
    }
    println!("(fourth-order convergence doubles steps -> ~16x smaller error)");
}
