//! The standard Gaussian maps to itself: the velocity field vanishes
//! identically, so every trajectory is constant and the time-1 map is the
//! identity with Jacobian I.
//!
//! Run: `cargo run --example identity_flow`

use nalgebra::DVector;

use follmer_flow::flow::{jacobian_along_flow, IntegrationMethod, TimeGrid};
use follmer_flow::measures::GaussianMixture;
use follmer_flow::rng::{standard_normal_vector, substream};
use follmer_flow::velocity::velocity_exact;

fn main() {
    let target = GaussianMixture::standard(2);
    let grid = TimeGrid::uniform(64).unwrap();
    let mut rng = substream(7, 0);

    println!("velocity along a few (t, x):");
    for k in 0..5 {
        let t = k as f64 / 4.0;
        let x = standard_normal_vector(&mut rng, 2);
        let v = velocity_exact(&target, t, &x);
        println!(
            "  t = {t:.2}  x = ({:+.3}, {:+.3})  V = ({:.1}, {:.1})",
            x[0], x[1], v.value[0], v.value[1]
        );
    }

    let x0 = DVector::from_vec(vec![0.8, -1.3]);
    let tr = jacobian_along_flow(&target, &target, &x0, &grid, IntegrationMethod::Rk4).unwrap();
    println!("\nflow from x0 = ({}, {}):", x0[0], x0[1]);
    println!(
        "  X_1(x0)      = ({}, {})",
        tr.final_state()[0],
        tr.final_state()[1]
    );
    println!("  |X_1 - x0|   = {:.2e}", (tr.final_state() - &x0).norm());
    println!("  ||grad X_1|| = {}", tr.final_op_norm().unwrap());
}
