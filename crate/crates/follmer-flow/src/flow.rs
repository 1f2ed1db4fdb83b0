//! Fixed-step integration of the transport ODE dX_t/dt = V(t, X_t).
//!
//! The flow starts from standard Gaussian draws at t = 0 and reaches the
//! target at t = 1. Alongside the state this module co-integrates the
//! variational equation d(grad X_t)/dt = grad V(t, X_t) grad X_t, simulates
//! the time-reversed SDE whose marginals are known in closed form, and
//! checks the equivalence of the t- and s-parameterizations of the reversed
//! flow under t = 1 - exp(-s).

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::operator_norm;
use crate::measures::TargetMeasure;
use crate::rng::{standard_normal_vector, substream};
use crate::velocity::{JacobianField, VelocityField};

/// Node-placement scheme of a [`TimeGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    Uniform,
    /// Sine-warped nodes concentrating near t = 1, where the tilted measure
    /// sharpens.
    Cosine,
    Custom,
}

/// Explicit one-step scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationMethod {
    Euler,
    Rk4,
}

/// Strictly increasing time nodes t_0 = 0 < t_1 < ... <= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    scheme: GridScheme,
}

impl TimeGrid {
    /// `steps` uniform intervals covering [0, t_max].
    pub fn uniform_to(steps: usize, t_max: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "need at least one step".into(),
            });
        }
        if !(t_max > 0.0 && t_max <= 1.0) {
            return Err(Error::InvalidTime {
                t: t_max,
                range: "(0, 1]",
            });
        }
        let nodes = (0..=steps)
            .map(|k| t_max * k as f64 / steps as f64)
            .collect();
        Ok(Self {
            nodes,
            scheme: GridScheme::Uniform,
        })
    }

    /// `steps` uniform intervals covering [0, 1].
    pub fn uniform(steps: usize) -> Result<Self> {
        Self::uniform_to(steps, 1.0)
    }

    /// Nodes t_k = t_max sin(pi k / 2K): spacing shrinks toward t_max.
    pub fn cosine_to(steps: usize, t_max: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "need at least one step".into(),
            });
        }
        if !(t_max > 0.0 && t_max <= 1.0) {
            return Err(Error::InvalidTime {
                t: t_max,
                range: "(0, 1]",
            });
        }
        let k = steps as f64;
        let nodes = (0..=steps)
            .map(|j| t_max * (std::f64::consts::FRAC_PI_2 * j as f64 / k).sin())
            .collect();
        Ok(Self {
            nodes,
            scheme: GridScheme::Cosine,
        })
    }

    pub fn cosine(steps: usize) -> Result<Self> {
        Self::cosine_to(steps, 1.0)
    }

    /// Nodes uniform in s = -log(1 - t) up to `t_max` < 1: density grows
    /// like 1/(1-t) toward the endpoint, matching the blowup of the reversed
    /// SDE coefficients.
    pub fn log_uniform_to(steps: usize, t_max: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "need at least one step".into(),
            });
        }
        if !(t_max > 0.0 && t_max < 1.0) {
            return Err(Error::InvalidTime {
                t: t_max,
                range: "(0, 1)",
            });
        }
        let s_max = -(1.0 - t_max).ln();
        let mut nodes: Vec<f64> = (0..=steps)
            .map(|k| 1.0 - (-s_max * k as f64 / steps as f64).exp())
            .collect();
        // Pin the endpoints exactly.
        nodes[0] = 0.0;
        *nodes.last_mut().unwrap() = t_max;
        Ok(Self {
            nodes,
            scheme: GridScheme::Custom,
        })
    }

    /// A grid from explicit nodes (validated).
    pub fn custom(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "nodes",
                reason: "need at least two nodes".into(),
            });
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "nodes",
                reason: format!("first node must be 0 (got {})", nodes[0]),
            });
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter {
                    name: "nodes",
                    reason: format!("nodes must increase strictly ({} then {})", w[0], w[1]),
                });
            }
        }
        let last = *nodes.last().unwrap();
        if last > 1.0 {
            return Err(Error::InvalidTime {
                t: last,
                range: "[0, 1]",
            });
        }
        Ok(Self {
            nodes,
            scheme: GridScheme::Custom,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node equal to `t` within 1e-9, if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.nodes.iter().position(|&s| (s - t).abs() <= 1e-9)
    }
}

/// One integrated path, with optional Jacobian propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub jacobians: Option<Vec<DMatrix<f64>>>,
    pub op_norms: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has nodes")
    }

    pub fn final_op_norm(&self) -> Option<f64> {
        self.op_norms.as_ref().map(|v| *v.last().expect("nodes"))
    }
}

fn check_finite(t: f64, x: &DVector<f64>, particle: Option<usize>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t, particle })
    }
}

/// Integrate dX/dt = V(t, X) through the grid nodes; one step per interval.
pub fn integrate<V: VelocityField + ?Sized>(
    v: &V,
    x0: &DVector<f64>,
    grid: &TimeGrid,
    method: IntegrationMethod,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(grid.nodes.len());
    let mut x = x0.clone();
    check_finite(0.0, &x, None)?;
    states.push(x.clone());
    for w in grid.nodes.windows(2) {
        let (t, t_next) = (w[0], w[1]);
        let h = t_next - t;
        x = match method {
            IntegrationMethod::Euler => {
                let k1 = v.velocity(t, &x);
                x + h * k1
            }
            IntegrationMethod::Rk4 => {
                let k1 = v.velocity(t, &x);
                let k2 = v.velocity(t + 0.5 * h, &(&x + (0.5 * h) * &k1));
                let k3 = v.velocity(t + 0.5 * h, &(&x + (0.5 * h) * &k2));
                let k4 = v.velocity(t_next, &(&x + h * &k3));
                x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
        };
        check_finite(t_next, &x, None)?;
        states.push(x.clone());
    }
    Ok(Trajectory {
        times: grid.nodes.clone(),
        states,
        jacobians: None,
        op_norms: None,
    })
}

/// Integrate the state jointly with the variational equation
/// d(grad X)/dt = grad V(t, X) grad X, recording operator norms per node.
/// The Jacobian shares the state's RK4 stages so both stay consistent to
/// scheme order.
pub fn jacobian_along_flow<V, J>(
    v: &V,
    jac: &J,
    x0: &DVector<f64>,
    grid: &TimeGrid,
    method: IntegrationMethod,
) -> Result<Trajectory>
where
    V: VelocityField + ?Sized,
    J: JacobianField + ?Sized,
{
    let d = x0.len();
    let mut x = x0.clone();
    let mut m = DMatrix::<f64>::identity(d, d);
    check_finite(0.0, &x, None)?;
    let mut states = vec![x.clone()];
    let mut jacobians = vec![m.clone()];
    let mut op_norms = vec![operator_norm(&m)];
    for w in grid.nodes.windows(2) {
        let (t, t_next) = (w[0], w[1]);
        let h = t_next - t;
        match method {
            IntegrationMethod::Euler => {
                let k1 = v.velocity(t, &x);
                let g1 = jac.jacobian(t, &x) * &m;
                x += h * k1;
                m += h * g1;
            }
            IntegrationMethod::Rk4 => {
                let k1 = v.velocity(t, &x);
                let g1 = jac.jacobian(t, &x) * &m;

                let x2 = &x + (0.5 * h) * &k1;
                let m2 = &m + (0.5 * h) * &g1;
                let k2 = v.velocity(t + 0.5 * h, &x2);
                let g2 = jac.jacobian(t + 0.5 * h, &x2) * &m2;

                let x3 = &x + (0.5 * h) * &k2;
                let m3 = &m + (0.5 * h) * &g2;
                let k3 = v.velocity(t + 0.5 * h, &x3);
                let g3 = jac.jacobian(t + 0.5 * h, &x3) * &m3;

                let x4 = &x + h * &k3;
                let m4 = &m + h * &g3;
                let k4 = v.velocity(t_next, &x4);
                let g4 = jac.jacobian(t_next, &x4) * &m4;

                x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                m += (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
            }
        }
        check_finite(t_next, &x, None)?;
        states.push(x.clone());
        jacobians.push(m.clone());
        op_norms.push(operator_norm(&m));
    }
    Ok(Trajectory {
        times: grid.nodes.clone(),
        states,
        jacobians: Some(jacobians),
        op_norms: Some(op_norms),
    })
}

/// Push `n` standard Gaussian draws through the flow; particle `i` owns the
/// RNG substream `(seed, i)`, so the output is identical for every thread
/// count.
pub fn push_forward_samples<V: VelocityField + ?Sized>(
    v: &V,
    n: usize,
    grid: &TimeGrid,
    method: IntegrationMethod,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    let dim = v.dim();
    let results: Vec<Result<DVector<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let x0 = standard_normal_vector(&mut rng, dim);
            integrate(v, &x0, grid, method)
                .map(|tr| tr.states.into_iter().next_back().expect("nodes"))
                .map_err(|e| match e {
                    Error::NonFiniteState { t, .. } => Error::NonFiniteState {
                        t,
                        particle: Some(i),
                    },
                    other => other,
                })
        })
        .collect();
    results.into_iter().collect()
}

/// Flow marginals at several requested node times for `n` particles.
/// Returns one sample set per requested time, in the given order.
pub fn push_forward_marginals<V: VelocityField + ?Sized>(
    v: &V,
    n: usize,
    grid: &TimeGrid,
    method: IntegrationMethod,
    t_list: &[f64],
    seed: u64,
) -> Result<Vec<Vec<DVector<f64>>>> {
    let indices: Vec<usize> = t_list
        .iter()
        .map(|&t| {
            grid.node_index(t).ok_or(Error::InvalidParameter {
                name: "t_list",
                reason: format!("t = {t} is not a node of the integration grid"),
            })
        })
        .collect::<Result<_>>()?;
    let dim = v.dim();
    let per_particle: Vec<Result<Vec<DVector<f64>>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let x0 = standard_normal_vector(&mut rng, dim);
            let tr = integrate(v, &x0, grid, method).map_err(|e| match e {
                Error::NonFiniteState { t, .. } => Error::NonFiniteState {
                    t,
                    particle: Some(i),
                },
                other => other,
            })?;
            Ok(indices.iter().map(|&k| tr.states[k].clone()).collect())
        })
        .collect();
    let per_particle: Vec<Vec<DVector<f64>>> = per_particle.into_iter().collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(n); t_list.len()];
    for snapshot in per_particle {
        for (slot, state) in out.iter_mut().zip(snapshot) {
            slot.push(state);
        }
    }
    Ok(out)
}

/// Euler-Maruyama simulation of the time-reversed SDE
/// dX = -X/(1-t) dt + sqrt(2/(1-t)) dW, started from direct target samples.
/// The grid must stop strictly before t = 1. Returns the particle states at
/// every grid node (outer index = node, inner = particle).
pub fn reverse_sde_simulate<T: TargetMeasure + ?Sized>(
    target: &T,
    grid: &TimeGrid,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<DVector<f64>>>> {
    if grid.t_end() >= 1.0 {
        return Err(Error::InvalidTime {
            t: grid.t_end(),
            range: "[0, 1)",
        });
    }
    let paths: Vec<Result<Vec<DVector<f64>>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let mut x = target
                .sample(&mut rng, 1)
                .ok_or(Error::SamplerUnavailable)?
                .pop()
                .expect("one sample");
            let mut snapshots = Vec::with_capacity(grid.nodes.len());
            snapshots.push(x.clone());
            for w in grid.nodes.windows(2) {
                let (t, t_next) = (w[0], w[1]);
                let h = t_next - t;
                let drift = -1.0 / (1.0 - t);
                let diff = (2.0 / (1.0 - t)).sqrt();
                let noise = DVector::from_fn(x.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                x = &x + (h * drift) * &x + (diff * h.sqrt()) * noise;
                check_finite(t_next, &x, Some(i))?;
                snapshots.push(x.clone());
            }
            Ok(snapshots)
        })
        .collect();
    let paths: Vec<Vec<DVector<f64>>> = paths.into_iter().collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(n); grid.nodes.len()];
    for path in paths {
        for (slot, state) in out.iter_mut().zip(path) {
            slot.push(state);
        }
    }
    Ok(out)
}

/// Draw one sample of the closed-form reversed-SDE marginal at time `t`:
/// (1-t) X + sqrt(t(2-t)) Y with X from the target and Y standard Gaussian.
pub fn reverse_marginal_sample<T, R>(target: &T, t: f64, rng: &mut R) -> Result<DVector<f64>>
where
    T: TargetMeasure + ?Sized,
    R: Rng,
{
    let x = target
        .sample(rng, 1)
        .ok_or(Error::SamplerUnavailable)?
        .pop()
        .expect("one sample");
    let y = standard_normal_vector(rng, target.dim());
    Ok((1.0 - t) * x + (t * (2.0 - t)).sqrt() * y)
}

/// Draw one sample of the closed-form forward flow marginal at time `t`:
/// t X + sqrt(1 - t^2) Y with X from the target and Y standard Gaussian.
pub fn forward_marginal_sample<T, R>(target: &T, t: f64, rng: &mut R) -> Result<DVector<f64>>
where
    T: TargetMeasure + ?Sized,
    R: Rng,
{
    let x = target
        .sample(rng, 1)
        .ok_or(Error::SamplerUnavailable)?
        .pop()
        .expect("one sample");
    let y = standard_normal_vector(rng, target.dim());
    Ok(t * x + (1.0 - t * t).sqrt() * y)
}

/// Compare the reversed flow integrated in its native time against the same
/// flow integrated in the stretched parameter s, where t = 1 - exp(-s):
/// d/dtau X = -V(1 - tau, X) on tau_k = 1 - exp(-s_k), versus
/// d/ds Y = -exp(-s) V(exp(-s), Y) on the s-grid itself. Returns the largest
/// state deviation across corresponding nodes.
pub fn time_change_check<V: VelocityField + ?Sized>(
    v: &V,
    x0: &DVector<f64>,
    s_grid: &[f64],
    method: IntegrationMethod,
) -> Result<f64> {
    if s_grid.len() < 2 || s_grid[0] != 0.0 {
        return Err(Error::InvalidParameter {
            name: "s_grid",
            reason: "need s_0 = 0 and at least two nodes".into(),
        });
    }
    for w in s_grid.windows(2) {
        if !(w[1] > w[0] && w[1].is_finite()) {
            return Err(Error::InvalidParameter {
                name: "s_grid",
                reason: "nodes must increase strictly and stay finite".into(),
            });
        }
    }
    let tau_nodes: Vec<f64> = s_grid.iter().map(|&s| 1.0 - (-s).exp()).collect();
    let tau_grid = TimeGrid::custom(tau_nodes)?;

    // Native parameterization: velocity -V(1 - tau, .).
    let reversed = (v.dim(), |tau: f64, x: &DVector<f64>| {
        -v.velocity((1.0 - tau).clamp(0.0, 1.0), x)
    });
    let native = integrate(&reversed, x0, &tau_grid, method)?;

    // Stretched parameterization, integrated on the s-nodes directly.
    let mut y = x0.clone();
    let mut dev: f64 = 0.0;
    let g = |s: f64, x: &DVector<f64>| -(-s).exp() * v.velocity((-s).exp().min(1.0), x);
    for (k, w) in s_grid.windows(2).enumerate() {
        let (s, s_next) = (w[0], w[1]);
        let h = s_next - s;
        y = match method {
            IntegrationMethod::Euler => {
                let k1 = g(s, &y);
                y + h * k1
            }
            IntegrationMethod::Rk4 => {
                let k1 = g(s, &y);
                let k2 = g(s + 0.5 * h, &(&y + (0.5 * h) * &k1));
                let k3 = g(s + 0.5 * h, &(&y + (0.5 * h) * &k2));
                let k4 = g(s_next, &(&y + h * &k3));
                y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
        };
        check_finite(s_next, &y, None)?;
        dev = dev.max((&y - &native.states[k + 1]).norm());
    }
    Ok(dev)
}

/// Write trajectories as CSV: one record per (particle, node), columns
/// seed, particle_id, t, x0..x{d-1}, opnorm (empty when not recorded).
pub fn write_trajectories_csv<W: Write>(
    w: &mut W,
    seed: u64,
    trajectories: &[Trajectory],
) -> Result<()> {
    let d = trajectories
        .first()
        .map(|tr| tr.states[0].len())
        .unwrap_or(0);
    write!(w, "seed,particle_id,t")?;
    for k in 0..d {
        write!(w, ",x{k}")?;
    }
    writeln!(w, ",opnorm")?;
    for (i, tr) in trajectories.iter().enumerate() {
        for (k, t) in tr.times.iter().enumerate() {
            write!(w, "{seed},{i},{t}")?;
            for v in tr.states[k].iter() {
                write!(w, ",{v}")?;
            }
            match tr.op_norms.as_ref() {
                Some(ops) => writeln!(w, ",{}", ops[k])?,
                None => writeln!(w, ",")?,
            }
        }
    }
    Ok(())
}

/// Write trajectories as line-delimited JSON with fields seed, particle_id,
/// t, x, opnorm.
pub fn write_trajectories_jsonl<W: Write>(
    w: &mut W,
    seed: u64,
    trajectories: &[Trajectory],
) -> Result<()> {
    #[derive(Serialize)]
    struct Record<'a> {
        seed: u64,
        particle_id: usize,
        t: f64,
        x: &'a [f64],
        opnorm: Option<f64>,
    }
    for (i, tr) in trajectories.iter().enumerate() {
        for (k, &t) in tr.times.iter().enumerate() {
            let rec = Record {
                seed,
                particle_id: i,
                t,
                x: tr.states[k].as_slice(),
                opnorm: tr.op_norms.as_ref().map(|ops| ops[k]),
            };
            serde_json::to_writer(&mut *w, &rec).map_err(std::io::Error::other)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Closed-form flow map of the single Gaussian N(0, 1/beta I):
/// X_t(x) = x sqrt((beta + (1-beta) t^2) / beta).
pub fn gaussian_flow_map(beta: f64, t: f64, x: f64) -> f64 {
    x * ((beta + (1.0 - beta) * t * t) / beta).sqrt()
}
