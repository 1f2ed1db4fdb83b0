//! Acceptance suite: one test per release criterion, each printing a
//! [PASS]/[FAIL] line. Tests serialize on a global gate so the stated
//! runtime budgets are measured on an uncontended machine.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use follmer_flow::bounds::{functional_constants, theta_profile};
use follmer_flow::config::{preset, ExperimentSpec, GridSpec, RunConfig, TargetSpec};
use follmer_flow::experiments::{
    run_concentration, run_estimator_consistency, run_lipschitz_check, run_marginal_check,
    run_time_change, ExperimentReport,
};
use follmer_flow::flow::{
    gaussian_flow_map, integrate, jacobian_along_flow, reverse_marginal_sample,
    reverse_sde_simulate, IntegrationMethod, TimeGrid,
};
use follmer_flow::measures::{ConvexityProfile, GaussianMixture, TargetMeasure};
use follmer_flow::metrics::{
    bootstrap_stderr, default_log_sobolev_family, default_poincare_family, empirical_log_sobolev,
    empirical_poincare, sliced_w2, wasserstein2_exact, SampleSet,
};
use follmer_flow::quad::adaptive_simpson;
use follmer_flow::rng::{standard_normal_vector, substream};
use follmer_flow::velocity::{
    jacobian_exact, jacobian_fd, mixture_lambda_max_envelope, velocity_exact,
};

static GATE: Mutex<()> = Mutex::new(());

fn gate() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn announce(n: u32, what: &str, started: Instant, budget_secs: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_secs,
        "criterion {n}: runtime {elapsed:.1}s exceeds the {budget_secs}s budget"
    );
    println!("[PASS] criterion {n:02}: {what} ({elapsed:.2}s)");
}

fn base_config(preset_name: &str, seed: u64, experiment: ExperimentSpec) -> RunConfig {
    RunConfig {
        seed,
        target: TargetSpec::of_preset(preset_name),
        grid: GridSpec::default(),
        threads: None,
        sample: None,
        experiment: Some(experiment),
        output: None,
    }
}

fn assert_all_pass(report: &ExperimentReport) {
    for c in &report.checks {
        assert!(
            c.pass,
            "check `{}` failed: estimate {} vs {} (tolerance {})",
            c.name, c.estimate, c.bound_or_target, c.tolerance
        );
    }
}

/// Criterion 1: the standard Gaussian target produces the identity flow to
/// round-off: V = 0, X_1(x) = x, grad X_1 = I.
#[test]
fn criterion_01_identity_flow() {
    let _g = gate();
    let started = Instant::now();
    let m = GaussianMixture::standard(2);
    let mut rng = substream(101, 0);
    let grid = TimeGrid::uniform(64).unwrap();
    let id = DMatrix::<f64>::identity(2, 2);
    for _ in 0..16 {
        let x = standard_normal_vector(&mut rng, 2);
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            assert_eq!(velocity_exact(&m, t, &x).value.amax(), 0.0);
        }
        let tr = jacobian_along_flow(&m, &m, &x, &grid, IntegrationMethod::Rk4).unwrap();
        assert!((tr.final_state() - &x).amax() <= 1e-12);
        assert!((tr.jacobians.as_ref().unwrap().last().unwrap() - &id).amax() <= 1e-12);
        assert!((tr.final_op_norm().unwrap() - 1.0).abs() <= 1e-12);
    }
    announce(
        1,
        "identity flow is exact for the standard Gaussian",
        started,
        1.0,
    );
}

/// Criterion 2: analytic Gaussian oracle, beta in {1/4, 1, 4}: the RK4 flow
/// map and its Jacobian match x/sqrt(beta) and 1/sqrt(beta) to 1e-6, with
/// observed convergence order at least 3.5.
#[test]
fn criterion_02_analytic_gaussian_oracle() {
    let _g = gate();
    let started = Instant::now();
    let grid = TimeGrid::uniform(100).unwrap();
    for beta in [0.25f64, 1.0, 4.0] {
        let sigma = 1.0 / beta.sqrt();
        let m = GaussianMixture::single(DVector::zeros(1), sigma).unwrap();
        for xi in -3..=3 {
            let x = DVector::from_vec(vec![xi as f64]);
            let tr = jacobian_along_flow(&m, &m, &x, &grid, IntegrationMethod::Rk4).unwrap();
            let want = xi as f64 / beta.sqrt();
            assert!(
                (tr.final_state()[0] - want).abs() < 1e-6,
                "beta={beta} x={xi}: {} vs {want}",
                tr.final_state()[0]
            );
            assert!(
                (tr.final_op_norm().unwrap() - 1.0 / beta.sqrt()).abs() < 1e-6,
                "beta={beta} x={xi}: jacobian"
            );
        }
    }
    // Observed order on the beta = 4 case.
    let m = GaussianMixture::single(DVector::zeros(1), 0.5).unwrap();
    let x = DVector::from_vec(vec![2.0]);
    let exact = gaussian_flow_map(4.0, 1.0, 2.0);
    let mut pts = Vec::new();
    for steps in [25usize, 50, 100, 200] {
        let tr = integrate(
            &m,
            &x,
            &TimeGrid::uniform(steps).unwrap(),
            IntegrationMethod::Rk4,
        )
        .unwrap();
        let err = (tr.final_state()[0] - exact).abs().max(1e-300);
        pts.push(((1.0 / steps as f64).ln(), err.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let order = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    assert!(order >= 3.5, "observed RK4 order {order}");
    announce(
        2,
        "analytic Gaussian flow map and Jacobian to 1e-6, RK4 order >= 3.5",
        started,
        5.0,
    );
}

/// Criterion 3: closed-form Jacobian against central differences to 1e-5 on
/// 100 random (t, x) for three mixture presets.
#[test]
fn criterion_03_jacobian_formula() {
    let _g = gate();
    let started = Instant::now();
    for (pi, name) in ["mix-sym", "mix-sym-1d", "mix-r1"].iter().enumerate() {
        let m = preset(name).unwrap();
        let mut rng = substream(303, pi as u64);
        for _ in 0..100 {
            let t: f64 = 0.99 * rand::Rng::gen::<f64>(&mut rng);
            let x = 2.0 * standard_normal_vector(&mut rng, m.dim());
            let exact = jacobian_exact(&m, t, &x).unwrap();
            let fd = jacobian_fd(&m, t, &x, 1e-4);
            let dev = (&exact.matrix - &fd.matrix).amax();
            assert!(dev < 1e-5, "{name}: t={t} dev={dev}");
        }
    }
    announce(
        3,
        "Jacobian covariance formula matches finite differences",
        started,
        10.0,
    );
}

/// Criterion 4: the mixture spectral envelope dominates lambda_max(grad V)
/// for mix-sym on a 50 x 50 (t, x) grid.
#[test]
fn criterion_04_spectral_bound() {
    let _g = gate();
    let started = Instant::now();
    let m = preset("mix-sym").unwrap();
    let (sigma, r) = (m.sigma(), m.radius());
    let mut rng = substream(404, 0);
    let xs: Vec<DVector<f64>> = (0..50)
        .map(|_| 2.0 * standard_normal_vector(&mut rng, 2))
        .collect();
    for k in 0..50 {
        let t = k as f64 / 49.0;
        let envelope = mixture_lambda_max_envelope(sigma, r, t);
        for x in &xs {
            let j = jacobian_exact(&m, t, x).unwrap();
            assert!(
                j.lambda_max <= envelope + 1e-8,
                "t={t}: lambda_max {} > envelope {envelope}",
                j.lambda_max
            );
        }
    }
    announce(
        4,
        "spectral envelope dominates the mixture Jacobian on a 50x50 grid",
        started,
        10.0,
    );
}

/// Criterion 5: the flow-map operator norm stays within 1.02x the certified
/// Lipschitz constant over 500 starts, for the beta = 4 Gaussian (1/2) and
/// the unit-radius mixture (exp(1/2)).
#[test]
fn criterion_05_lipschitz_bound() {
    let _g = gate();
    let started = Instant::now();
    for (name, constant) in [("gauss-beta4", 0.5), ("mix-r1", 0.5f64.exp())] {
        let cfg = base_config(name, 505, ExperimentSpec::Lipschitz { n_points: 500 });
        let report = run_lipschitz_check(&cfg).unwrap();
        assert_all_pass(&report);
        let max_norm = &report.checks[0];
        assert!((max_norm.bound_or_target - constant).abs() < 1e-12);
        println!(
            "    {name}: max opnorm {:.6} <= {:.6} * 1.02",
            max_norm.estimate, constant
        );
    }
    announce(
        5,
        "flow map respects the certified Lipschitz constants",
        started,
        60.0,
    );
}

/// Criterion 6: flow marginals match the closed-form law within 3x the
/// direct-sampling floor at t in {0.25, 0.5, 0.75, 1}, d in {1, 2}.
#[test]
fn criterion_06_marginal_law() {
    let _g = gate();
    let started = Instant::now();
    for name in ["mix-sym-1d", "mix-sym"] {
        let cfg = base_config(
            name,
            606,
            ExperimentSpec::Marginal {
                t_list: vec![0.25, 0.5, 0.75, 1.0],
                n: 5000,
                n_projections: 64,
            },
        );
        let report = run_marginal_check(&cfg).unwrap();
        assert_all_pass(&report);
    }
    announce(
        6,
        "flow marginals match t X + sqrt(1-t^2) Y within 3x the floor",
        started,
        120.0,
    );
}

/// Criterion 7: Monte Carlo velocity error has log-log slope in
/// [-0.65, -0.35] over n in {1e3..1e6} and every point sits within four
/// jackknife standard errors of the exact field.
#[test]
fn criterion_07_mc_velocity_consistency() {
    let _g = gate();
    let started = Instant::now();
    let cfg = base_config(
        "mix-sym-1d",
        707,
        ExperimentSpec::EstimatorConsistency {
            t_grid: vec![0.3, 0.5, 0.7],
            x_grid: vec![-1.0, 0.0, 1.5],
            n_list: vec![1_000, 10_000, 100_000, 1_000_000],
        },
    );
    let report = run_estimator_consistency(&cfg).unwrap();
    assert_all_pass(&report);
    let slope = report.checks.last().unwrap();
    assert_eq!(slope.name, "mc-error-slope");
    println!("    slope {:.3}", slope.estimate);
    announce(
        7,
        "Monte Carlo velocity is jackknife-consistent with slope -1/2",
        started,
        120.0,
    );
}

/// Criterion 8: the two parameterizations of the reversed flow agree to
/// 5e-3 at 1000 steps on mix-sym, and refinement halves the deviation.
#[test]
fn criterion_08_time_change() {
    let _g = gate();
    let started = Instant::now();
    let cfg = base_config(
        "mix-sym",
        808,
        ExperimentSpec::TimeChange {
            s_max: 6.0,
            resolution: 1000,
        },
    );
    let report = run_time_change(&cfg).unwrap();
    assert_all_pass(&report);
    let dev = &report.checks[0];
    assert!(dev.estimate < 5e-3, "deviation {}", dev.estimate);
    println!("    deviation {:.2e}", dev.estimate);
    announce(
        8,
        "time-change equivalence holds and sharpens under refinement",
        started,
        30.0,
    );
}

/// Criterion 9: the reversed-SDE marginal at t = 0.5 matches the law
/// (1-t) X + sqrt(t(2-t)) Y within 3x the direct floor, n = 1e4.
#[test]
fn criterion_09_reverse_sde_marginal() {
    let _g = gate();
    let started = Instant::now();
    let m = preset("mix-sym").unwrap();
    let t_half = 0.5;
    let n = 10_000;
    let grid = TimeGrid::uniform_to(400, t_half).unwrap();
    let snapshots = reverse_sde_simulate(&m, &grid, n, 909).unwrap();
    let sim = SampleSet::new(snapshots.last().unwrap().clone(), "sde").unwrap();
    let draw = |stream: u64| {
        let mut rng = substream(910, stream);
        SampleSet::new(
            (0..n)
                .map(|_| reverse_marginal_sample(&m, t_half, &mut rng).unwrap())
                .collect::<Vec<_>>(),
            "direct",
        )
        .unwrap()
    };
    let direct_a = draw(0);
    let direct_b = draw(1);
    let dist = sliced_w2(&sim, &direct_a, 64, &mut substream(911, 0)).unwrap();
    let floor = sliced_w2(&direct_b, &direct_a, 64, &mut substream(911, 0)).unwrap();
    assert!(
        dist.value <= 3.0 * floor.value,
        "distance {} vs floor {}",
        dist.value,
        floor.value
    );
    println!(
        "    distance {:.4} <= 3 x floor {:.4}",
        dist.value, floor.value
    );
    announce(
        9,
        "reversed-SDE marginal matches the closed-form law",
        started,
        60.0,
    );
}

/// Criterion 10: the constant calculators reproduce every closed form
/// against independent quadrature of the envelope to 1e-6 relative.
#[test]
fn criterion_10_constants_spot_checks() {
    let _g = gate();
    let started = Instant::now();
    let quad_lipschitz = |profile: &ConvexityProfile| {
        let theta = theta_profile(profile).unwrap();
        let integral = match theta.t0 {
            Some(t0) => {
                adaptive_simpson(|t| theta.theta(t), 0.0, t0, 1e-9)
                    + adaptive_simpson(|t| theta.theta(t), t0, 1.0, 1e-9)
            }
            None => adaptive_simpson(|t| theta.theta(t), 0.0, 1.0, 1e-9),
        };
        integral.exp()
    };
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();

    // 1/sqrt(kappa).
    let p = ConvexityProfile::log_concave(4.0).unwrap();
    let theta = theta_profile(&p).unwrap();
    assert_eq!(theta.lipschitz_constant, 0.5);
    assert!(rel(quad_lipschitz(&p), 0.5) < 1e-6);

    // t0 and D exp((1 - kappa D^2)/2) at kappa = 0, D = 1.
    let p = ConvexityProfile::bounded_support(0.0, 1.0).unwrap();
    let theta = theta_profile(&p).unwrap();
    assert!((theta.t0.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(rel(theta.lipschitz_constant, 0.5f64.exp()) < 1e-12);
    assert!(rel(quad_lipschitz(&p), theta.lipschitz_constant) < 1e-6);

    // sigma exp(R^2 / (2 sigma^2)) and the Remark constants at sigma = R = 1.
    let p = ConvexityProfile::mixture(1.0, 1.0).unwrap();
    let c = functional_constants(&p, None, None).unwrap();
    assert!(rel(c.lipschitz, 0.5f64.exp()) < 1e-12);
    assert!(rel(c.c_p, std::f64::consts::E) < 1e-12);
    assert!(rel(c.c_ls, 2.0 * std::f64::consts::E) < 1e-12);
    assert!(rel(quad_lipschitz(&p), c.lipschitz) < 1e-6);

    // q-Poincare ((q-1)/kappa)^{q/2} against quadrature of the envelope.
    let p = ConvexityProfile::log_concave(2.0).unwrap();
    let c = functional_constants(&p, Some(4), None).unwrap();
    assert!(rel(c.q_poincare_value, (3.0f64 / 2.0).powi(2)) < 1e-12);
    let via_quad = 3.0f64.powi(2).sqrt().powi(2) * quad_lipschitz(&p).powi(4);
    assert!(rel(c.q_poincare_value, via_quad) < 1e-6);

    announce(
        10,
        "constant calculators agree with quadrature of the envelope",
        started,
        1.0,
    );
}

/// Criterion 11: empirical Poincare / log-Sobolev lower estimates on
/// mix-sym samples stay below the closed-form constants within three
/// bootstrap standard errors.
#[test]
fn criterion_11_functional_inequalities() {
    let _g = gate();
    let started = Instant::now();
    let m = preset("mix-sym").unwrap();
    let consts = functional_constants(&m.convexity_profile(), None, None).unwrap();
    let mut rng = substream(1111, 0);
    let set = SampleSet::new(m.sample(&mut rng, 100_000).unwrap(), "mix-sym").unwrap();

    let pf = default_poincare_family(m.dim(), 1111);
    let est_p = empirical_poincare(&set, &pf).unwrap();
    let se_p = bootstrap_stderr(&set, &pf, false, 32, 1112).unwrap();
    assert!(
        est_p <= consts.c_p + 3.0 * se_p,
        "Poincare estimate {est_p} vs constant {} (se {se_p})",
        consts.c_p
    );

    let lf = default_log_sobolev_family(m.dim(), 1111);
    let est_ls = empirical_log_sobolev(&set, &lf).unwrap();
    let se_ls = bootstrap_stderr(&set, &lf, true, 32, 1113).unwrap();
    assert!(
        est_ls <= consts.c_ls + 3.0 * se_ls,
        "log-Sobolev estimate {est_ls} vs constant {} (se {se_ls})",
        consts.c_ls
    );
    println!(
        "    Poincare {est_p:.3} <= {:.3}; log-Sobolev {est_ls:.3} <= {:.3}",
        consts.c_p, consts.c_ls
    );
    announce(
        11,
        "empirical functional-inequality estimates respect the constants",
        started,
        120.0,
    );
}

/// Criterion 12: empirical-measure distance decay slopes: -1/2 +- 0.15 in
/// d = 2 and -1/3 +- 0.15 in d = 6 (absolute levels not asserted).
#[test]
fn criterion_12_concentration_slopes() {
    let _g = gate();
    let started = Instant::now();
    for (name, expected) in [("std-gaussian", -0.5), ("mix-d6", -1.0 / 3.0)] {
        let cfg = base_config(
            name,
            424242,
            ExperimentSpec::Concentration {
                n_list: vec![250, 500, 1000, 2000, 4000],
                repeats: 20,
                reference_n: 20_000,
                eps: 0.1,
                n_projections: 64,
            },
        );
        let report = run_concentration(&cfg).unwrap();
        assert_all_pass(&report);
        let slope = &report.checks[0];
        assert_eq!(slope.bound_or_target, expected);
        println!(
            "    {name}: slope {:.3} (expected {expected:.3} +- 0.15)",
            slope.estimate
        );
    }
    announce(
        12,
        "empirical-measure decay slopes match the rate exponents",
        started,
        300.0,
    );
}

/// Criterion 13: the exact transport distance equals factorial brute force
/// for n <= 6 and satisfies the metric axioms on random triples.
#[test]
fn criterion_13_exact_w2_oracle() {
    let _g = gate();
    let started = Instant::now();
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for slot in 0..n {
                let mut q: Vec<usize> = p
                    .iter()
                    .map(|&v| if v >= slot { v + 1 } else { v })
                    .collect();
                q.insert(0, slot);
                out.push(q);
            }
        }
        out
    }
    let mut rng = substream(1313, 0);
    for n in 2..=6 {
        for _ in 0..4 {
            let a = SampleSet::new(
                (0..n)
                    .map(|_| standard_normal_vector(&mut rng, 2))
                    .collect::<Vec<_>>(),
                "a",
            )
            .unwrap();
            let b = SampleSet::new(
                (0..n)
                    .map(|_| standard_normal_vector(&mut rng, 2))
                    .collect::<Vec<_>>(),
                "b",
            )
            .unwrap();
            let solver = wasserstein2_exact(&a, &b).unwrap();
            let mut brute = f64::INFINITY;
            for perm in permutations(n) {
                let total: f64 = perm
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| (&a.points()[i] - &b.points()[j]).norm_squared())
                    .sum();
                brute = brute.min((total / n as f64).sqrt());
            }
            assert!((solver - brute).abs() < 1e-12, "n={n}: {solver} vs {brute}");
        }
    }
    for _ in 0..8 {
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            SampleSet::new(
                (0..8)
                    .map(|_| standard_normal_vector(rng, 2))
                    .collect::<Vec<_>>(),
                "t",
            )
            .unwrap()
        };
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let dab = wasserstein2_exact(&a, &b).unwrap();
        let dba = wasserstein2_exact(&b, &a).unwrap();
        assert!((dab - dba).abs() < 1e-12);
        let dac = wasserstein2_exact(&a, &c).unwrap();
        let dcb = wasserstein2_exact(&c, &b).unwrap();
        assert!(dab <= dac + dcb + 1e-9);
    }
    announce(
        13,
        "exact transport distance matches brute force and is a metric",
        started,
        5.0,
    );
}

/// Criterion 14: `verify` runs with the same seed and thread counts 1 and 8
/// produce byte-identical report bodies.
#[test]
fn criterion_14_reproducibility() {
    let _g = gate();
    let started = Instant::now();
    let exe = env!("CARGO_BIN_EXE_follmer-flow");
    let configs_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let dir = tempfile::tempdir().unwrap();
    for config in [
        "verify_marginal_mix_sym.toml",
        "verify_time_change_mix_sym.toml",
    ] {
        let mut bodies = Vec::new();
        for (i, threads) in ["1", "8", "1", "8"].iter().enumerate() {
            let out = dir.path().join(format!("report_{config}_{i}.json"));
            let status = std::process::Command::new(exe)
                .args([
                    "verify",
                    "--config",
                    &format!("{configs_dir}/{config}"),
                    "--threads",
                    threads,
                    "--out",
                    out.to_str().unwrap(),
                ])
                .status()
                .unwrap();
            assert!(status.success(), "{config}: verify exited {status}");
            let text = std::fs::read_to_string(&out).unwrap();
            let cut = text.find("\n\"timing\"").expect("timing section");
            bodies.push(text[..cut].to_string());
        }
        assert!(
            bodies.windows(2).all(|w| w[0] == w[1]),
            "{config}: report bodies differ across runs/thread counts"
        );
    }
    announce(
        14,
        "verify reports are byte-identical across seeds-fixed reruns and thread counts",
        started,
        300.0,
    );
}
