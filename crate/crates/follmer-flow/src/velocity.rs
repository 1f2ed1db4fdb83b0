//! The transport velocity field and its Jacobian.
//!
//! For a target with relative density r = p/phi, the field is
//! V(t, x) = grad log Q_{1-t} r(x) / t, where Q_{1-t} r(x) averages r over
//! N(tx, (1-t^2) I). Three equivalent forms matter here:
//!
//! - posterior-mean form: V = (m(t,x) - t x) / (1 - t^2) with m the mean of
//!   the tilted measure,
//! - score form: V = (x + S(t,x)) / t with S the smoothed score,
//! - endpoint values: V(0, .) = target mean, V(1, x) = x + grad log p(x).
//!
//! For Gaussian mixtures the posterior-mean form reduces algebraically to
//! V(t, x) = (mbar(t,x) + (sigma^2 - 1) t x) / (1 + (sigma^2 - 1) t^2),
//! where mbar is the tilted-weight average of the component centers. That
//! expression has no 1/(1-t^2) factor, so it is evaluated verbatim on the
//! whole of [0, 1], endpoints included.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen_bounds;
use crate::measures::{logsumexp, GaussianMixture, TargetMeasure};

/// A velocity value with optional diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEval {
    /// V(t, x).
    pub value: DVector<f64>,
    /// Mean m(t, x) of the tilted measure, when the producer computes it.
    pub posterior_mean: Option<DVector<f64>>,
    /// Largest per-coordinate jackknife standard error (Monte Carlo only).
    pub mc_stderr: Option<f64>,
    /// Monte Carlo sample count.
    pub n_samples: Option<usize>,
}

/// A Jacobian value grad V(t, x) with its extreme eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianEval {
    pub matrix: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl JacobianEval {
    fn from_symmetric(matrix: DMatrix<f64>) -> Self {
        let (lambda_min, lambda_max) = symmetric_eigen_bounds(&matrix);
        Self {
            matrix,
            lambda_min,
            lambda_max,
        }
    }
}

/// A velocity field defined on [0, 1] x R^d.
pub trait VelocityField: Sync {
    fn dim(&self) -> usize;
    fn velocity(&self, t: f64, x: &DVector<f64>) -> DVector<f64>;
}

impl<F> VelocityField for (usize, F)
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn velocity(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        (self.1)(t, x)
    }
}

/// A Jacobian field grad V(t, x).
pub trait JacobianField: Sync {
    fn jacobian(&self, t: f64, x: &DVector<f64>) -> DMatrix<f64>;
}

impl<F> JacobianField for F
where
    F: Fn(f64, &DVector<f64>) -> DMatrix<f64> + Sync,
{
    fn jacobian(&self, t: f64, x: &DVector<f64>) -> DMatrix<f64> {
        self(t, x)
    }
}

impl VelocityField for GaussianMixture {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn velocity(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        velocity_exact(self, t, x).value
    }
}

impl JacobianField for GaussianMixture {
    fn jacobian(&self, t: f64, x: &DVector<f64>) -> DMatrix<f64> {
        jacobian_exact(self, t, x)
            .expect("mixture Jacobian is defined on [0, 1]")
            .matrix
    }
}

/// Exact velocity of a Gaussian-mixture target, valid for t in [0, 1].
///
/// Evaluates the cancellation-free mixture form above; at t = 0 it equals
/// the mixture mean, at t = 1 it equals x + grad log p(x).
pub fn velocity_exact(m: &GaussianMixture, t: f64, x: &DVector<f64>) -> VelocityEval {
    assert!(
        (0.0..=1.0).contains(&t),
        "velocity_exact: t = {t} outside [0, 1]"
    );
    let s2 = m.sigma() * m.sigma();
    let u = 1.0 + (s2 - 1.0) * t * t;
    let weights = m
        .tilted_weights(t, x)
        .expect("finite point has finite tilted weights");
    let mut center_mean = DVector::zeros(m.dim());
    for (w, mu) in weights.iter().zip(m.centers()) {
        center_mean += *w * mu;
    }
    let value = (&center_mean + ((s2 - 1.0) * t) * x) / u;
    // m(t, x) = ((1-t^2) mbar + sigma^2 t x) / u, finite for all t in [0, 1].
    let one_minus_t2 = (1.0 - t) * (1.0 + t);
    let posterior_mean = (one_minus_t2 * &center_mean + (s2 * t) * x) / u;
    VelocityEval {
        value,
        posterior_mean: Some(posterior_mean),
        mc_stderr: None,
        n_samples: None,
    }
}

/// Exact Jacobian of the mixture velocity, valid for t in [0, 1].
///
/// The covariance representation
/// grad V = t/(1-t^2)^2 Cov(tilted) - t/(1-t^2) I
/// reduces for mixtures to
/// grad V = t (sigma^2 - 1)/u I + t Cbar / u^2,
/// with Cbar the tilted-weight covariance of the component centers and
/// u = 1 + (sigma^2 - 1) t^2; the reduced form stays finite at t = 1.
pub fn jacobian_exact(m: &GaussianMixture, t: f64, x: &DVector<f64>) -> Result<JacobianEval> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidTime { t, range: "[0, 1]" });
    }
    let d = m.dim();
    if t == 0.0 {
        return Ok(JacobianEval {
            matrix: DMatrix::zeros(d, d),
            lambda_min: 0.0,
            lambda_max: 0.0,
        });
    }
    let s2 = m.sigma() * m.sigma();
    let u = 1.0 + (s2 - 1.0) * t * t;
    let weights = m.tilted_weights(t, x)?;
    let mut center_mean = DVector::zeros(d);
    for (w, mu) in weights.iter().zip(m.centers()) {
        center_mean += *w * mu;
    }
    let mut cbar = DMatrix::zeros(d, d);
    for (w, mu) in weights.iter().zip(m.centers()) {
        let dev = mu - &center_mean;
        cbar.syger(*w, &dev, &dev, 1.0);
    }
    cbar.fill_upper_triangle_with_lower_triangle();
    let mut matrix = cbar * (t / (u * u));
    for i in 0..d {
        matrix[(i, i)] += t * (s2 - 1.0) / u;
    }
    Ok(JacobianEval::from_symmetric(matrix))
}

/// Central-difference Jacobian of an arbitrary velocity field, symmetrized.
/// This is the independent oracle for [`jacobian_exact`].
pub fn jacobian_fd<V: VelocityField + ?Sized>(
    v: &V,
    t: f64,
    x: &DVector<f64>,
    h: f64,
) -> JacobianEval {
    assert!(h > 0.0, "jacobian_fd: step must be positive");
    let d = x.len();
    let mut jac = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (v.velocity(t, &xp) - v.velocity(t, &xm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    let sym = 0.5 * (&jac + jac.transpose());
    JacobianEval::from_symmetric(sym)
}

/// Monte Carlo velocity for a black-box target, t strictly inside (0, 1).
///
/// Draws z_j ~ gamma_d and evaluates the self-normalized estimator
/// Vhat = (1 / sqrt(1-t^2)) * sum_j p_j z_j, where p_j are softmax
/// weights of log r(t x + sqrt(1-t^2) z_j); the prefactor comes from moving
/// the gradient onto z by Gaussian integration by parts. Jackknife standard
/// errors use the O(n) leave-one-out identity for ratio estimators.
pub fn velocity_mc<T: TargetMeasure + ?Sized, R: Rng + ?Sized>(
    target: &T,
    t: f64,
    x: &DVector<f64>,
    n: usize,
    rng: &mut R,
) -> Result<VelocityEval> {
    let d = target.dim();
    assert_eq!(x.len(), d, "velocity_mc: dimension mismatch");
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidTime { t, range: "(0, 1)" });
    }
    if n < 2 {
        return Err(Error::InvalidSampleCount { n, min: 2 });
    }
    let sq = (1.0 - t * t).sqrt();

    // Flat storage: z is n x d row-major.
    let mut z = vec![0.0f64; n * d];
    let mut log_w = vec![0.0f64; n];
    let mut point = DVector::zeros(d);
    for j in 0..n {
        for k in 0..d {
            let zk: f64 = rng.sample(StandardNormal);
            z[j * d + k] = zk;
            point[k] = t * x[k] + sq * zk;
        }
        log_w[j] = target.log_relative_density(&point);
    }
    let lse = logsumexp(&log_w);
    if !lse.is_finite() {
        return Err(Error::WeightUnderflow);
    }
    // Normalized weights and the weighted mean of z.
    let p: Vec<f64> = log_w.iter().map(|&lw| (lw - lse).exp()).collect();
    let mut theta = vec![0.0f64; d];
    for j in 0..n {
        for k in 0..d {
            theta[k] += p[j] * z[j * d + k];
        }
    }

    // Leave-one-out: theta_{-j} = (theta - p_j z_j) / (1 - p_j).
    let mut loo_mean = vec![0.0f64; d];
    let mut loo = vec![0.0f64; n * d];
    for j in 0..n {
        let denom = 1.0 - p[j];
        for k in 0..d {
            let v = if denom > 0.0 {
                (theta[k] - p[j] * z[j * d + k]) / denom
            } else {
                theta[k]
            };
            loo[j * d + k] = v;
            loo_mean[k] += v / n as f64;
        }
    }
    let scale = 1.0 / sq;
    let mut stderr_max = 0.0f64;
    for k in 0..d {
        let mut ss = 0.0;
        for j in 0..n {
            let dlt = loo[j * d + k] - loo_mean[k];
            ss += dlt * dlt;
        }
        let var = (n as f64 - 1.0) / n as f64 * ss;
        stderr_max = stderr_max.max(var.sqrt() * scale);
    }

    let value = DVector::from_iterator(d, theta.iter().map(|&v| v * scale));
    Ok(VelocityEval {
        value,
        posterior_mean: None,
        mc_stderr: Some(stderr_max),
        n_samples: Some(n),
    })
}

/// Upper spectral envelope for the mixture Jacobian:
/// lambda_max(grad V(t, .)) <= t [ (s^2-1)(1+(s^2-1)t^2) + R^2 ] / (1+(s^2-1)t^2)^2.
pub fn mixture_lambda_max_envelope(sigma: f64, r: f64, t: f64) -> f64 {
    let a = sigma * sigma - 1.0;
    let u = 1.0 + a * t * t;
    t * (a * u + r * r) / (u * u)
}

/// Lower spectral envelope for the mixture Jacobian:
/// lambda_min(grad V(t, .)) >= (s^2-1) t / (1+(s^2-1)t^2).
pub fn mixture_lambda_min_envelope(sigma: f64, t: f64) -> f64 {
    let a = sigma * sigma - 1.0;
    a * t / (1.0 + a * t * t)
}

/// Exact Jacobian multiplier of a single Gaussian N(0, 1/beta I):
/// grad V(t, x) = t (1 - beta) / (beta (1 - t^2) + t^2) I.
pub fn gaussian_jacobian_coefficient(beta: f64, t: f64) -> f64 {
    t * (1.0 - beta) / (beta * (1.0 - t * t) + t * t)
}
