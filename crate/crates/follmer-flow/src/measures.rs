//! Target-measure abstractions and the isotropic Gaussian-mixture target.
//!
//! A target is anything with a density against Lebesgue measure and a
//! relative density r = p/phi against the standard Gaussian. The concrete
//! workhorse is [`GaussianMixture`], sum_i w_i N(mu_i, sigma^2 I): every
//! quantity the transport needs (tilted posterior, velocity, Jacobian) is
//! closed-form for it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// log(sum exp(x_i)) without overflow; returns -inf for an empty slice or
/// when every entry is -inf.
pub(crate) fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Normalize log-weights into probabilities (softmax). Errors when every
/// entry underflowed to -inf.
pub(crate) fn softmax(log_w: &[f64]) -> Result<Vec<f64>> {
    let lse = logsumexp(log_w);
    if !lse.is_finite() {
        return Err(Error::WeightUnderflow);
    }
    Ok(log_w.iter().map(|&lw| (lw - lse).exp()).collect())
}

/// Parameters of the convolution form N(0, sigma^2 I) * rho with rho
/// supported in a ball of radius `r` about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub sigma: f64,
    pub r: f64,
}

/// Convexity metadata of a target measure.
///
/// `kappa` is a lower bound on the Hessian of -log p (use `-inf` when none
/// is known), `beta` an upper bound (`+inf` when none), and `d_half_diameter`
/// the support half-diameter D = diam(supp)/sqrt(2) (`+inf` for unbounded
/// support). `mixture_params` carries (sigma, R) when the measure has the
/// convolution form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityProfile {
    pub kappa: f64,
    pub beta: f64,
    pub d_half_diameter: f64,
    pub mixture_params: Option<MixtureParams>,
}

/// Which admissible convexity branch a profile falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityBranch {
    /// kappa > 0 (any D).
    StrictlyLogConcave,
    /// kappa finite with D finite.
    BoundedSupport,
    /// Convolution form (sigma, R).
    MixtureForm,
}

impl ConvexityProfile {
    pub fn new(
        kappa: f64,
        beta: f64,
        d_half_diameter: f64,
        mixture_params: Option<MixtureParams>,
    ) -> Result<Self> {
        if kappa.is_nan() || kappa == f64::INFINITY {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: "must be finite or -inf".into(),
            });
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("must be positive (got {beta})"),
            });
        }
        if !(d_half_diameter > 0.0) {
            return Err(Error::InvalidParameter {
                name: "d_half_diameter",
                reason: format!("must be positive (got {d_half_diameter})"),
            });
        }
        if kappa.is_finite() && beta.is_finite() && kappa > beta {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("kappa = {kappa} exceeds beta = {beta}"),
            });
        }
        if let Some(mp) = mixture_params {
            if !(mp.sigma > 0.0) || !mp.sigma.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    reason: format!("must be positive and finite (got {})", mp.sigma),
                });
            }
            if !(mp.r >= 0.0) || !mp.r.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "r",
                    reason: format!("must be nonnegative and finite (got {})", mp.r),
                });
            }
        }
        let profile = Self {
            kappa,
            beta,
            d_half_diameter,
            mixture_params,
        };
        if profile.branch().is_none() {
            return Err(Error::NoAdmissibleBranch);
        }
        Ok(profile)
    }

    /// Profile of a strictly log-concave target: kappa > 0, everything else
    /// unconstrained.
    pub fn log_concave(kappa: f64) -> Result<Self> {
        Self::new(kappa, f64::INFINITY, f64::INFINITY, None)
    }

    /// Profile of a compactly supported target with half-diameter `d`.
    pub fn bounded_support(kappa: f64, d: f64) -> Result<Self> {
        Self::new(kappa, f64::INFINITY, d, None)
    }

    /// Profile of a convolution-form target N(0, sigma^2 I) * rho.
    pub fn mixture(sigma: f64, r: f64) -> Result<Self> {
        Self::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::INFINITY,
            Some(MixtureParams { sigma, r }),
        )
    }

    /// The first admissible branch, preferring the kappa-based cases (their
    /// constants are at least as sharp where both apply).
    pub fn branch(&self) -> Option<ConvexityBranch> {
        if self.kappa > 0.0 {
            return Some(ConvexityBranch::StrictlyLogConcave);
        }
        if self.kappa.is_finite() && self.d_half_diameter.is_finite() {
            return Some(ConvexityBranch::BoundedSupport);
        }
        if self.mixture_params.is_some() {
            return Some(ConvexityBranch::MixtureForm);
        }
        None
    }
}

/// Abstract target measure.
///
/// `log_density` must be finite on the declared support; `log_relative_density`
/// may be off by an additive constant (self-normalized consumers only). The
/// sampler, when present, is used by validation experiments, never by the
/// transport itself.
pub trait TargetMeasure: Sync {
    fn dim(&self) -> usize;

    /// log p(x), up to an additive constant.
    fn log_density(&self, x: &DVector<f64>) -> f64;

    /// log r(x) = log(p/phi)(x), up to an additive constant.
    fn log_relative_density(&self, x: &DVector<f64>) -> f64 {
        self.log_density(x) + 0.5 * x.norm_squared()
    }

    /// grad log p(x), when available.
    fn score(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// Direct i.i.d. samples, when available.
    fn sample(&self, _rng: &mut dyn rand::RngCore, _n: usize) -> Option<Vec<DVector<f64>>> {
        None
    }

    fn profile(&self) -> ConvexityProfile;
}

/// Isotropic Gaussian mixture sum_i w_i N(mu_i, sigma^2 I_d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    dim: usize,
    weights: Vec<f64>,
    centers: Vec<DVector<f64>>,
    sigma: f64,
}

/// The tilted measure obtained by reweighting the target with the Gaussian
/// kernel N(tx, (1-t^2) I) / phi: again a Gaussian mixture, with a shared
/// shrunk variance, shifted component means, and reweighted components.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedMixture {
    pub variance: f64,
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
}

impl TiltedMixture {
    /// Mean of the tilted measure.
    pub fn mean(&self) -> DVector<f64> {
        let dim = self.means[0].len();
        let mut m = DVector::zeros(dim);
        for (w, mu) in self.weights.iter().zip(&self.means) {
            m += *w * mu;
        }
        m
    }

    /// Covariance of the tilted measure:
    /// variance * I + sum_i w_i (mu_i - m)(mu_i - m)^T.
    pub fn covariance(&self) -> DMatrix<f64> {
        let dim = self.means[0].len();
        let m = self.mean();
        let mut cov = DMatrix::from_diagonal_element(dim, dim, self.variance);
        for (w, mu) in self.weights.iter().zip(&self.means) {
            let d = mu - &m;
            cov.syger(*w, &d, &d, 1.0);
        }
        // syger fills the lower triangle; mirror it.
        cov.fill_upper_triangle_with_lower_triangle();
        cov
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl GaussianMixture {
    /// Build a mixture from weights, centers, and a shared component
    /// standard deviation. Weights must be nonnegative and sum to 1 within
    /// 1e-12; all centers must share a dimension.
    pub fn new(weights: Vec<f64>, centers: Vec<DVector<f64>>, sigma: f64) -> Result<Self> {
        if weights.is_empty() || centers.is_empty() {
            return Err(Error::EmptyMixture);
        }
        if weights.len() != centers.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: centers.len(),
            });
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights {
                sum: weights.iter().sum(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights { sum });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be positive and finite (got {sigma})"),
            });
        }
        let dim = centers[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "centers",
                reason: "zero-dimensional center".into(),
            });
        }
        for c in &centers {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "centers",
                    reason: "non-finite coordinate".into(),
                });
            }
        }
        Ok(Self {
            dim,
            weights,
            centers,
            sigma,
        })
    }

    /// A single Gaussian N(mu, sigma^2 I).
    pub fn single(center: DVector<f64>, sigma: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![center], sigma)
    }

    /// The standard Gaussian on R^dim.
    pub fn standard(dim: usize) -> Self {
        Self::single(DVector::zeros(dim), 1.0).expect("standard Gaussian is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    /// Radius of the smallest origin-centered ball containing all centers.
    pub fn radius(&self) -> f64 {
        self.centers.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Mean of the mixture, sum_i w_i mu_i.
    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim);
        for (w, mu) in self.weights.iter().zip(&self.centers) {
            m += *w * mu;
        }
        m
    }

    fn check_dim(&self, x: &DVector<f64>) {
        assert_eq!(
            x.len(),
            self.dim,
            "dimension mismatch: point has {} coordinates, mixture is {}-dimensional",
            x.len(),
            self.dim
        );
    }

    /// log p(x) by log-sum-exp over components.
    pub fn log_density_at(&self, x: &DVector<f64>) -> f64 {
        self.check_dim(x);
        let inv_two_var = 0.5 / (self.sigma * self.sigma);
        let log_terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.centers)
            .map(|(w, mu)| w.ln() - inv_two_var * (x - mu).norm_squared())
            .collect();
        let norm =
            (self.dim as f64) * 0.5 * (2.0 * std::f64::consts::PI * self.sigma * self.sigma).ln();
        logsumexp(&log_terms) - norm
    }

    /// grad log p(x) = sum_i what_i(x) (mu_i - x) / sigma^2, with what the
    /// component posterior weights at x.
    pub fn score_at(&self, x: &DVector<f64>) -> DVector<f64> {
        self.check_dim(x);
        let inv_two_var = 0.5 / (self.sigma * self.sigma);
        let log_w: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.centers)
            .map(|(w, mu)| w.ln() - inv_two_var * (x - mu).norm_squared())
            .collect();
        let what = softmax(&log_w).expect("finite point has finite density");
        let mut s = DVector::zeros(self.dim);
        for (w, mu) in what.iter().zip(&self.centers) {
            s += *w * (mu - x);
        }
        s / (self.sigma * self.sigma)
    }

    /// Component weights of the tilted measure at (t, x), for t in [0, 1]:
    /// w~_i proportional to w_i N(t mu_i, (1 + (sigma^2-1) t^2) I)(x).
    pub fn tilted_weights(&self, t: f64, x: &DVector<f64>) -> Result<Vec<f64>> {
        self.check_dim(x);
        let u = 1.0 + (self.sigma * self.sigma - 1.0) * t * t;
        let log_w: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.centers)
            .map(|(w, mu)| w.ln() - (x - t * mu).norm_squared() / (2.0 * u))
            .collect();
        softmax(&log_w)
    }

    /// The tilted measure p^{tx, 1-t^2} as an explicit Gaussian mixture,
    /// for t in [0, 1): shared variance sigma^2 (1-t^2) / u, component means
    /// ((1-t^2) mu_i + sigma^2 t x) / u, and weights from
    /// [`Self::tilted_weights`], where u = 1 + (sigma^2 - 1) t^2.
    pub fn posterior(&self, t: f64, x: &DVector<f64>) -> Result<TiltedMixture> {
        self.check_dim(x);
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidTime { t, range: "[0, 1)" });
        }
        let s2 = self.sigma * self.sigma;
        let u = 1.0 + (s2 - 1.0) * t * t;
        let one_minus_t2 = (1.0 - t) * (1.0 + t);
        let variance = s2 * one_minus_t2 / u;
        let weights = self.tilted_weights(t, x)?;
        let means = self
            .centers
            .iter()
            .map(|mu| (one_minus_t2 * mu + (s2 * t) * x) / u)
            .collect();
        Ok(TiltedMixture {
            variance,
            weights,
            means,
        })
    }

    /// Convexity metadata: (sigma, R) always; kappa, beta, D only for a
    /// single component, where -log p is exactly (1/sigma^2)-convex.
    pub fn convexity_profile(&self) -> ConvexityProfile {
        let mp = MixtureParams {
            sigma: self.sigma,
            r: self.radius(),
        };
        if self.n_components() == 1 {
            let prec = 1.0 / (self.sigma * self.sigma);
            ConvexityProfile::new(prec, prec, f64::INFINITY, Some(mp))
                .expect("single-component profile is admissible")
        } else {
            ConvexityProfile::mixture(self.sigma, self.radius())
                .expect("mixture profile is admissible")
        }
    }

    /// Rotate every center by an orthogonal matrix (the mixture class is
    /// closed under rotations about the origin).
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        assert_eq!(q.nrows(), self.dim);
        assert_eq!(q.ncols(), self.dim);
        Self {
            dim: self.dim,
            weights: self.weights.clone(),
            centers: self.centers.iter().map(|c| q * c).collect(),
            sigma: self.sigma,
        }
    }

    /// Draw one sample: categorical component, then Gaussian around its
    /// center.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut idx = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.centers[idx] + self.sigma * z
    }
}

impl TargetMeasure for GaussianMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &DVector<f64>) -> f64 {
        self.log_density_at(x)
    }

    fn score(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(self.score_at(x))
    }

    fn sample(&self, rng: &mut dyn rand::RngCore, n: usize) -> Option<Vec<DVector<f64>>> {
        Some((0..n).map(|_| self.sample_one(rng)).collect())
    }

    fn profile(&self) -> ConvexityProfile {
        self.convexity_profile()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive_simpson, adaptive_simpson_panels};
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    fn two_component_1d() -> GaussianMixture {
        GaussianMixture::new(vec![0.5, 0.5], vec![vec1(-1.0), vec1(1.0)], 1.0).unwrap()
    }

    #[test]
    fn standard_normal_log_density_at_zero() {
        let m = GaussianMixture::standard(1);
        let expected = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(m.log_density_at(&vec1(0.0)), expected, max_relative = 1e-14);
    }

    #[test]
    fn two_component_log_density_matches_direct_evaluation() {
        // log( exp(-1/2) / sqrt(2 pi) ) at x = 0, both components equidistant.
        let m = two_component_1d();
        let expected = (-0.5f64).exp().ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(m.log_density_at(&vec1(0.0)), expected, epsilon = 1e-12);
        assert_relative_eq!(
            m.log_density_at(&vec1(0.0)),
            -1.4189385332046727,
            epsilon = 1e-10
        );
    }

    #[test]
    fn two_component_density_normalizes_to_one() {
        // Independent route: quadrature of exp(log_density) over a wide interval.
        let m = two_component_1d();
        let total = adaptive_simpson(|y| m.log_density_at(&vec1(y)).exp(), -12.0, 12.0, 1e-10);
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn log_density_is_finite_far_in_the_tail() {
        let m = two_component_1d();
        let v = m.log_density_at(&vec1(1e6));
        assert!(v.is_finite());
        assert!(v < -1e9);
    }

    #[test]
    fn posterior_at_time_zero_is_the_target() {
        let m = two_component_1d();
        let p = m.posterior(0.0, &vec1(3.0)).unwrap();
        assert_relative_eq!(p.variance, 1.0, epsilon = 1e-15);
        for (w, w0) in p.weights.iter().zip(m.weights()) {
            assert_relative_eq!(w, w0, epsilon = 1e-15);
        }
        for (mu, mu0) in p.means.iter().zip(m.centers()) {
            assert_relative_eq!(mu[0], mu0[0], epsilon = 1e-15);
        }
    }

    #[test]
    fn single_component_posterior_is_complete_the_square() {
        // For N(0, I): variance 1 - t^2, mean t x, for all t, x.
        let m = GaussianMixture::standard(1);
        for &t in &[0.1, 0.5, 0.9, 0.999] {
            for &x in &[-3.0, 0.0, 2.5] {
                let p = m.posterior(t, &vec1(x)).unwrap();
                assert_relative_eq!(p.variance, 1.0 - t * t, epsilon = 1e-14);
                assert_relative_eq!(p.means[0][0], t * x, epsilon = 1e-14);
                assert_relative_eq!(p.weights[0], 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn posterior_weights_approach_component_posterior_as_t_approaches_one() {
        let m = two_component_1d();
        let x = vec1(0.8);
        let t = 1.0 - 1e-6;
        let p = m.posterior(t, &x).unwrap();
        // Limit: w~_i proportional to w_i N(mu_i, sigma^2)(x), means -> x.
        let lw: Vec<f64> = m
            .weights()
            .iter()
            .zip(m.centers())
            .map(|(w, mu)| w.ln() - (x[0] - mu[0]).powi(2) / 2.0)
            .collect();
        let expected = softmax(&lw).unwrap();
        for (got, want) in p.weights.iter().zip(&expected) {
            assert_relative_eq!(got, want, epsilon = 1e-5);
        }
        for mu in &p.means {
            assert_relative_eq!(mu[0], x[0], epsilon = 1e-5);
        }
    }

    /// Quadrature oracle: first and second moments of the tilted measure in
    /// d = 1 against direct integration of phi^{tx,1-t^2}(y) r(y) / Z over a
    /// 10-sigma-padded interval.
    #[test]
    fn posterior_moments_match_quadrature() {
        let mixtures = [
            two_component_1d(),
            GaussianMixture::new(vec![0.3, 0.7], vec![vec1(-1.0), vec1(2.0)], 0.8).unwrap(),
            GaussianMixture::new(
                vec![0.2, 0.5, 0.3],
                vec![vec1(-2.0), vec1(0.5), vec1(2.0)],
                1.5,
            )
            .unwrap(),
        ];
        for m in &mixtures {
            let lo = -3.0 - 10.0 * m.sigma() - m.radius();
            let hi = 3.0 + 10.0 * m.sigma() + m.radius();
            for &t in &[0.0, 0.25, 0.5, 0.9, 0.999] {
                for &x in &[-3.0, 0.0, 3.0] {
                    let p = m.posterior(t, &vec1(x)).unwrap();
                    // Unnormalized tilted density: N(tx, 1-t^2)(y) * p(y) / phi(y).
                    let tilted = |y: f64| {
                        let one_minus_t2 = 1.0 - t * t;
                        let log_kernel =
                            -0.5 * (y - t * x).powi(2) / one_minus_t2 - 0.5 * one_minus_t2.ln();
                        let log_phi = -0.5 * y * y;
                        (log_kernel + m.log_density_at(&vec1(y)) - log_phi).exp()
                    };
                    // Panelized: near t = 1 the tilted density is a narrow
                    // spike plain bisection can miss.
                    let z = adaptive_simpson_panels(tilted, lo, hi, 1e-12, 1024);
                    let m1 = adaptive_simpson_panels(|y| y * tilted(y), lo, hi, 1e-12, 1024) / z;
                    let m2 =
                        adaptive_simpson_panels(|y| y * y * tilted(y), lo, hi, 1e-12, 1024) / z;
                    let mean = p.mean()[0];
                    let second = p.covariance()[(0, 0)] + mean * mean;
                    assert_relative_eq!(mean, m1, max_relative = 1e-6, epsilon = 1e-9);
                    assert_relative_eq!(second, m2, max_relative = 1e-6, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn convexity_profile_single_component() {
        let m = GaussianMixture::single(vec1(0.0), 2.0).unwrap();
        let p = m.convexity_profile();
        assert_relative_eq!(p.kappa, 0.25, epsilon = 1e-15);
        assert_relative_eq!(p.beta, 0.25, epsilon = 1e-15);
        assert_eq!(p.d_half_diameter, f64::INFINITY);
        let mp = p.mixture_params.unwrap();
        assert_eq!(mp.sigma, 2.0);
        assert_eq!(mp.r, 0.0);
    }

    #[test]
    fn convexity_profile_two_components() {
        let m = GaussianMixture::new(vec![0.5, 0.5], vec![vec1(-1.0), vec1(2.0)], 1.0).unwrap();
        let p = m.convexity_profile();
        assert_eq!(p.kappa, f64::NEG_INFINITY);
        assert_eq!(p.beta, f64::INFINITY);
        let mp = p.mixture_params.unwrap();
        assert_eq!(mp.r, 2.0);
        assert_eq!(mp.sigma, 1.0);
    }

    #[test]
    fn empty_mixture_is_rejected() {
        assert!(matches!(
            GaussianMixture::new(vec![], vec![], 1.0),
            Err(Error::EmptyMixture)
        ));
    }

    #[test]
    fn bad_weights_are_rejected() {
        let r = GaussianMixture::new(vec![0.6, 0.6], vec![vec1(0.0), vec1(1.0)], 1.0);
        assert!(matches!(r, Err(Error::InvalidWeights { .. })));
        let r = GaussianMixture::new(vec![1.5, -0.5], vec![vec1(0.0), vec1(1.0)], 1.0);
        assert!(matches!(r, Err(Error::InvalidWeights { .. })));
    }

    #[test]
    fn posterior_rejects_t_outside_range() {
        let m = GaussianMixture::standard(1);
        assert!(m.posterior(1.0, &vec1(0.0)).is_err());
        assert!(m.posterior(-0.1, &vec1(0.0)).is_err());
    }

    #[test]
    fn profile_requires_some_branch() {
        // kappa = 0 with unbounded support and no mixture form: inadmissible.
        let r = ConvexityProfile::new(0.0, f64::INFINITY, f64::INFINITY, None);
        assert!(matches!(r, Err(Error::NoAdmissibleBranch)));
    }

    #[test]
    fn sampler_moments_match_analytic() {
        let m = GaussianMixture::new(vec![0.3, 0.7], vec![vec1(-1.0), vec1(2.0)], 1.0).unwrap();
        let mut rng = substream(42, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| m.sample_one(&mut rng)[0]).collect();
        let mean: f64 = xs.iter().sum::<f64>() / n as f64;
        let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        // Analytic: mean 1.1, variance sigma^2 + sum w mu^2 - mean^2.
        let exact_mean = 1.1;
        let exact_var = 1.0 + 0.3 + 0.7 * 4.0 - exact_mean * exact_mean;
        let se_mean = (exact_var / n as f64).sqrt();
        assert!((mean - exact_mean).abs() < 5.0 * se_mean, "mean {mean}");
        assert!((var - exact_var).abs() < 0.05, "var {var}");
    }

    proptest! {
        #[test]
        fn log_density_invariant_under_component_permutation(
            x in -5.0f64..5.0,
            swap in any::<bool>(),
        ) {
            let m1 = GaussianMixture::new(
                vec![0.25, 0.75],
                vec![vec1(-1.5), vec1(0.5)],
                0.9,
            ).unwrap();
            let (w, c) = if swap {
                (vec![0.75, 0.25], vec![vec1(0.5), vec1(-1.5)])
            } else {
                (vec![0.25, 0.75], vec![vec1(-1.5), vec1(0.5)])
            };
            let m2 = GaussianMixture::new(w, c, 0.9).unwrap();
            let a = m1.log_density_at(&vec1(x));
            let b = m2.log_density_at(&vec1(x));
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn posterior_is_a_valid_mixture(
            t in 0.0f64..0.999,
            x in prop::sample::select(vec![-1e6, -3.0, 0.0, 3.0, 1e6]),
            sigma in 0.5f64..2.0,
        ) {
            let m = GaussianMixture::new(
                vec![0.5, 0.5],
                vec![vec1(-1.0), vec1(1.0)],
                sigma,
            ).unwrap();
            let p = m.posterior(t, &vec1(x)).unwrap();
            prop_assert!(p.variance > 0.0);
            let sum: f64 = p.weights.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.weights.iter().all(|&w| w >= 0.0));
            prop_assert!(p.means.iter().all(|mu| mu[0].is_finite()));
        }
    }
}
