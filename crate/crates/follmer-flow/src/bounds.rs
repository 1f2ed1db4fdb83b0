//! Closed-form calculators for every constant the transport certifies.
//!
//! The central object is the growth envelope theta_t, an upper bound on
//! lambda_max(grad V(t, .)) chosen by the convexity branch of the target.
//! Its exponentiated integral exp(int_0^1 theta) bounds the Lipschitz
//! constant of the time-1 flow map, and everything else (Poincare,
//! log-Sobolev, isoperimetric, transportation, concentration constants)
//! follows from that constant by Lipschitz transfer from the standard
//! Gaussian.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{ConvexityBranch, ConvexityProfile};

/// Which envelope applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaCase {
    /// kappa > 0 and kappa D^2 >= 1: theta_t = t(1-kappa) / (t^2(1-kappa)+kappa).
    KappaD2GeOne,
    /// 0 <= kappa, kappa D^2 < 1: bounded-support branch until t0, then the
    /// log-concave branch.
    KappaD2LtOne,
    /// kappa < 0 (finite D required): same piecewise envelope as above.
    KappaNegative,
    /// Convolution form (sigma, R):
    /// theta_t = t[(s^2-1)(1+(s^2-1)t^2) + R^2] / (1+(s^2-1)t^2)^2.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ThetaKind {
    LogConcave { kappa: f64 },
    Piecewise { kappa: f64, d: f64, t0: f64 },
    Mixture { sigma: f64, r: f64 },
}

/// Piecewise envelope theta_t for lambda_max(grad V(t, .)) together with its
/// closed-form integral and Lipschitz constant exp(int_0^1 theta).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProfile {
    kind: ThetaKind,
    case: ThetaCase,
    /// Breakpoint between the two branches, when the envelope is piecewise.
    pub t0: Option<f64>,
    /// exp(int_0^1 theta_s ds), in closed form.
    pub lipschitz_constant: f64,
}

impl ThetaProfile {
    pub fn case(&self) -> ThetaCase {
        self.case
    }

    /// theta(t) for t in [0, 1].
    pub fn theta(&self, t: f64) -> f64 {
        assert!((0.0..=1.0).contains(&t), "theta: t = {t} outside [0, 1]");
        match self.kind {
            ThetaKind::LogConcave { kappa } => log_concave_theta(kappa, t),
            ThetaKind::Piecewise { kappa, d, t0 } => {
                if t <= t0 {
                    bounded_support_theta(d, t)
                } else {
                    log_concave_theta(kappa, t)
                }
            }
            ThetaKind::Mixture { sigma, r } => {
                crate::velocity::mixture_lambda_max_envelope(sigma, r, t)
            }
        }
    }

    /// int_0^t theta_s ds, in closed form.
    pub fn integral(&self, t: f64) -> f64 {
        assert!((0.0..=1.0).contains(&t), "integral: t = {t} outside [0, 1]");
        match self.kind {
            ThetaKind::LogConcave { kappa } => log_concave_integral(kappa, 0.0, t),
            ThetaKind::Piecewise { kappa, d, t0 } => {
                if t <= t0 {
                    bounded_support_integral(d, t)
                } else {
                    bounded_support_integral(d, t0) + log_concave_integral(kappa, t0, t)
                }
            }
            ThetaKind::Mixture { sigma, r } => {
                let u = 1.0 + (sigma * sigma - 1.0) * t * t;
                0.5 * u.ln() + r * r * t * t / (2.0 * u)
            }
        }
    }
}

/// int_a^b s(1-kappa) / (s^2(1-kappa)+kappa) ds = (1/2) log of the
/// denominator ratio.
fn log_concave_integral(kappa: f64, a: f64, b: f64) -> f64 {
    let den = |t: f64| t * t * (1.0 - kappa) + kappa;
    0.5 * (den(b) / den(a)).ln()
}

fn log_concave_theta(kappa: f64, t: f64) -> f64 {
    t * (1.0 - kappa) / (t * t * (1.0 - kappa) + kappa)
}

fn bounded_support_theta(d: f64, t: f64) -> f64 {
    t * (t * t + d * d - 1.0) / ((1.0 - t * t) * (1.0 - t * t))
}

/// int_0^t s(s^2+D^2-1)/(1-s^2)^2 ds
/// = (t^2+D^2-1)/(2(1-t^2)) + log(1-t^2)/2 - (D^2-1)/2.
fn bounded_support_integral(d: f64, t: f64) -> f64 {
    let omt2 = 1.0 - t * t;
    (t * t + d * d - 1.0) / (2.0 * omt2) + 0.5 * omt2.ln() - (d * d - 1.0) / 2.0
}

/// The growth envelope for a convexity profile.
///
/// Branch selection and closed forms:
/// - kappa > 0, kappa D^2 >= 1: single branch, exp(int) = 1/sqrt(kappa);
/// - kappa D^2 < 1 (kappa finite, D finite): piecewise with breakpoint
///   t0 = sqrt((1-kappa D^2) / ((1-kappa) D^2 + 1)),
///   exp(int) = D exp((1-kappa D^2)/2);
/// - convolution form: exp(int) = sigma exp(R^2 / (2 sigma^2)).
pub fn theta_profile(profile: &ConvexityProfile) -> Result<ThetaProfile> {
    let branch = profile.branch().ok_or(Error::NoAdmissibleBranch)?;
    match branch {
        ConvexityBranch::StrictlyLogConcave
            if profile.kappa * profile.d_half_diameter.powi(2) >= 1.0 =>
        {
            Ok(ThetaProfile {
                kind: ThetaKind::LogConcave {
                    kappa: profile.kappa,
                },
                case: ThetaCase::KappaD2GeOne,
                t0: None,
                lipschitz_constant: 1.0 / profile.kappa.sqrt(),
            })
        }
        ConvexityBranch::StrictlyLogConcave | ConvexityBranch::BoundedSupport => {
            let kappa = profile.kappa;
            let d = profile.d_half_diameter;
            if !d.is_finite() {
                // kappa in (0, 1/D^2) with D = inf cannot happen; kappa <= 0
                // with unbounded support has no envelope.
                return Err(Error::NoAdmissibleBranch);
            }
            let kd2 = kappa * d * d;
            let t0 = ((1.0 - kd2) / ((1.0 - kappa) * d * d + 1.0)).sqrt();
            let case = if kappa < 0.0 {
                ThetaCase::KappaNegative
            } else {
                ThetaCase::KappaD2LtOne
            };
            Ok(ThetaProfile {
                kind: ThetaKind::Piecewise { kappa, d, t0 },
                case,
                t0: Some(t0),
                lipschitz_constant: d * ((1.0 - kd2) / 2.0).exp(),
            })
        }
        ConvexityBranch::MixtureForm => {
            let mp = profile.mixture_params.expect("branch implies params");
            Ok(ThetaProfile {
                kind: ThetaKind::Mixture {
                    sigma: mp.sigma,
                    r: mp.r,
                },
                case: ThetaCase::Mixture,
                t0: None,
                lipschitz_constant: mp.sigma * (mp.r * mp.r / (2.0 * mp.sigma * mp.sigma)).exp(),
            })
        }
    }
}

/// Constants for the affine convolution form N(a, Sigma) * rho.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineConstants {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub r: f64,
    /// Multiplier of the energy in the entropy-functional inequality:
    /// lambda_max exp(R^2/lambda_min) / 2.
    pub psi_sobolev: f64,
    /// sqrt(lambda_min lambda_max) exp(R^2 / (2 lambda_min)).
    pub isoperimetric_c: f64,
    /// (q-1)^{q/2} (lambda_min lambda_max)^{q/2} exp(q R^2 / (2 lambda_min)).
    pub q_poincare: f64,
}

impl AffineConstants {
    pub fn new(lambda_min: f64, lambda_max: f64, r: f64, q: u32) -> Result<Self> {
        if !(lambda_min > 0.0) || !(lambda_max >= lambda_min) {
            return Err(Error::InvalidParameter {
                name: "lambda_min",
                reason: format!(
                    "need 0 < lambda_min <= lambda_max (got {lambda_min}, {lambda_max})"
                ),
            });
        }
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("must be nonnegative (got {r})"),
            });
        }
        check_q(q)?;
        let qf = q as f64;
        Ok(Self {
            lambda_min,
            lambda_max,
            r,
            psi_sobolev: 0.5 * lambda_max * (r * r / lambda_min).exp(),
            isoperimetric_c: (lambda_min * lambda_max).sqrt() * (r * r / (2.0 * lambda_min)).exp(),
            q_poincare: (qf - 1.0).powf(qf / 2.0)
                * (lambda_min * lambda_max).powf(qf / 2.0)
                * (qf * r * r / (2.0 * lambda_min)).exp(),
        })
    }
}

/// All constants derived from one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub theta: ThetaProfile,
    /// Lipschitz constant L of the time-1 flow map.
    pub lipschitz: f64,
    /// Poincare constant L^2 (Gaussian constant 1 transferred).
    pub c_p: f64,
    /// Log-Sobolev constant 2 L^2 (Gaussian constant 2 transferred).
    pub c_ls: f64,
    /// Isoperimetric constant L (Gaussian constant 1 transferred).
    pub isoperimetric_c: f64,
    /// Transportation-inequality constant L^2.
    pub t2_c: f64,
    /// The q used for the serialized q-Poincare value.
    pub q: u32,
    /// (q-1)^{q/2} L^q.
    pub q_poincare_value: f64,
    pub affine: Option<AffineConstants>,
}

fn check_q(q: u32) -> Result<()> {
    if q < 2 || !q.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("must be an even integer >= 2 (got {q})"),
        });
    }
    Ok(())
}

impl ConstantsReport {
    /// (q-1)^{q/2} L^q for any even q >= 2.
    pub fn q_poincare(&self, q: u32) -> Result<f64> {
        check_q(q)?;
        let qf = q as f64;
        Ok((qf - 1.0).powf(qf / 2.0) * self.lipschitz.powf(qf))
    }

    /// JSON view with stable key order.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct View<'a> {
            case: ThetaCase,
            #[serde(skip_serializing_if = "Option::is_none")]
            t0: Option<f64>,
            lipschitz: f64,
            #[serde(rename = "C_P")]
            c_p: f64,
            #[serde(rename = "C_LS")]
            c_ls: f64,
            #[serde(rename = "isoperimetric_C")]
            isoperimetric_c: f64,
            #[serde(rename = "T2_C")]
            t2_c: f64,
            q: u32,
            q_poincare: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            affine: Option<&'a AffineConstants>,
        }
        serde_json::to_value(View {
            case: self.theta.case(),
            t0: self.theta.t0,
            lipschitz: self.lipschitz,
            c_p: self.c_p,
            c_ls: self.c_ls,
            isoperimetric_c: self.isoperimetric_c,
            t2_c: self.t2_c,
            q: self.q,
            q_poincare: self.q_poincare_value,
            affine: self.affine.as_ref(),
        })
        .expect("constants serialize")
    }
}

/// Derive every functional-inequality constant from a profile via the
/// Lipschitz constant L of the time-1 map: C_P = L^2, C_LS = 2 L^2,
/// isoperimetric constant L, T2 constant L^2, q-Poincare (q-1)^{q/2} L^q.
pub fn functional_constants(
    profile: &ConvexityProfile,
    q: Option<u32>,
    affine: Option<(f64, f64, f64)>,
) -> Result<ConstantsReport> {
    let q = q.unwrap_or(2);
    check_q(q)?;
    let theta = theta_profile(profile)?;
    let l = theta.lipschitz_constant;
    let qf = q as f64;
    let affine = match affine {
        Some((lo, hi, r)) => Some(AffineConstants::new(lo, hi, r, q)?),
        None => None,
    };
    Ok(ConstantsReport {
        lipschitz: l,
        c_p: l * l,
        c_ls: 2.0 * l * l,
        isoperimetric_c: l,
        t2_c: l * l,
        q,
        q_poincare_value: (qf - 1.0).powf(qf / 2.0) * l.powf(qf),
        affine,
        theta,
    })
}

/// Pieces of the high-probability bound on W_2(nu_n, nu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationBound {
    /// sqrt(C log(1/eps) / n), C the transportation constant of the branch.
    pub deviation_term: f64,
    /// The same term with C placed in the denominator, as printed for the
    /// bounded-support and convolution branches; emitted whenever it differs
    /// from `deviation_term`.
    pub deviation_term_paper_printed: Option<f64>,
    /// c_d * (fifth moment)^{2/5} * rate(d, n).
    pub mean_term: f64,
    pub total: f64,
    /// The dimension-dependent rate exponent of n in the mean term
    /// (-1/2 for d < 4, -1/2 with a log factor for d = 4, -2/d for d > 4).
    pub rate_exponent: f64,
}

/// The transportation constant C of the applicable branch: 1/kappa,
/// D^2 exp(1 - kappa D^2), or sigma^2 exp(R^2/sigma^2).
pub fn t2_constant(profile: &ConvexityProfile) -> Result<f64> {
    Ok(theta_profile(profile)?.lipschitz_constant.powi(2))
}

/// Sample-size rate of the expected-distance term for dimension `d`:
/// n^{-1/2} below dimension 4, n^{-1/2} log(1+n) at 4, n^{-2/d} above.
pub fn mean_rate(d: usize, n: usize) -> f64 {
    let nf = n as f64;
    match d {
        0 => panic!("dimension must be positive"),
        1..=3 => nf.powf(-0.5),
        4 => nf.powf(-0.5) * (1.0 + nf).ln(),
        _ => nf.powf(-2.0 / d as f64),
    }
}

/// High-probability bound on W_2(nu_n, nu): deviation term from inverting
/// the Gaussian concentration inequality exp(-n t^2 / C) = eps, plus the
/// expected-distance term c_d (fifth moment)^{2/5} rate(d, n).
pub fn concentration_bound(
    profile: &ConvexityProfile,
    d: usize,
    n: usize,
    eps: f64,
    fifth_moment: f64,
    c_d: f64,
) -> Result<ConcentrationBound> {
    if n < 1 {
        return Err(Error::InvalidSampleCount { n, min: 1 });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("must lie in (0, 1) (got {eps})"),
        });
    }
    if !fifth_moment.is_finite() || fifth_moment < 0.0 {
        return Err(Error::InvalidParameter {
            name: "fifth_moment",
            reason: format!("must be finite and nonnegative (got {fifth_moment})"),
        });
    }
    if !(c_d > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c_d",
            reason: format!("must be positive (got {c_d})"),
        });
    }
    let c = t2_constant(profile)?;
    let log_inv_eps = (1.0 / eps).ln();
    let nf = n as f64;
    let deviation_term = (c * log_inv_eps / nf).sqrt();
    // The printed form for the non-log-concave branches divides by C instead.
    let printed = (log_inv_eps / (nf * c)).sqrt();
    let deviation_term_paper_printed =
        if (printed - deviation_term).abs() > 1e-15 * deviation_term.max(printed) {
            Some(printed)
        } else {
            None
        };
    let mean_term = c_d * fifth_moment.powf(0.4) * mean_rate(d, n);
    let rate_exponent = match d {
        1..=4 => -0.5,
        _ => -2.0 / d as f64,
    };
    Ok(ConcentrationBound {
        deviation_term,
        deviation_term_paper_printed,
        mean_term,
        total: deviation_term + mean_term,
        rate_exponent,
    })
}

/// Standard normal CDF via the complementary error function.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ConvexityProfile;
    use crate::quad::adaptive_simpson;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quad_integral(theta: &ThetaProfile) -> f64 {
        // Independent route: adaptive quadrature of theta, split at the
        // breakpoint when there is one.
        match theta.t0 {
            Some(t0) => {
                adaptive_simpson(|t| theta.theta(t), 0.0, t0, 1e-10)
                    + adaptive_simpson(|t| theta.theta(t), t0, 1.0, 1e-10)
            }
            None => adaptive_simpson(|t| theta.theta(t), 0.0, 1.0, 1e-10),
        }
    }

    #[test]
    fn strongly_log_concave_constant() {
        let p = ConvexityProfile::log_concave(4.0).unwrap();
        let theta = theta_profile(&p).unwrap();
        assert_eq!(theta.case(), ThetaCase::KappaD2GeOne);
        assert_relative_eq!(theta.lipschitz_constant, 0.5, epsilon = 1e-15);
        assert_relative_eq!(theta.integral(1.0).exp(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(quad_integral(&theta).exp(), 0.5, max_relative = 1e-8);
    }

    #[test]
    fn bounded_support_breakpoint_and_constant() {
        // kappa = 0, D = 1: t0 = sqrt(1/2), L = exp(1/2).
        let p = ConvexityProfile::bounded_support(0.0, 1.0).unwrap();
        let theta = theta_profile(&p).unwrap();
        assert_eq!(theta.case(), ThetaCase::KappaD2LtOne);
        assert_relative_eq!(theta.t0.unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(theta.lipschitz_constant, 0.5f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(
            theta.lipschitz_constant,
            1.6487212707001282,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            quad_integral(&theta).exp(),
            theta.lipschitz_constant,
            max_relative = 1e-6
        );
    }

    #[test]
    fn mixture_constant() {
        let p = ConvexityProfile::mixture(1.0, 1.0).unwrap();
        let theta = theta_profile(&p).unwrap();
        assert_eq!(theta.case(), ThetaCase::Mixture);
        assert_relative_eq!(theta.lipschitz_constant, 0.5f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(
            quad_integral(&theta).exp(),
            theta.lipschitz_constant,
            max_relative = 1e-8
        );
    }

    #[test]
    fn theta_is_continuous_at_the_breakpoint() {
        for &d in &[0.5, 1.0, 2.0] {
            for &kappa in &[-2.0, -0.5, 0.0, 0.3] {
                if kappa * d * d >= 1.0 {
                    continue;
                }
                let p = ConvexityProfile::bounded_support(kappa, d).unwrap();
                let theta = theta_profile(&p).unwrap();
                let t0 = theta.t0.unwrap();
                let left = bounded_support_theta(d, t0);
                let right = log_concave_theta(kappa, t0);
                assert!(
                    (left - right).abs() < 1e-9,
                    "kappa={kappa} D={d}: {left} vs {right}"
                );
            }
        }
    }

    #[test]
    fn negative_kappa_uses_the_piecewise_envelope() {
        let p = ConvexityProfile::bounded_support(-1.0, 1.0).unwrap();
        let theta = theta_profile(&p).unwrap();
        assert_eq!(theta.case(), ThetaCase::KappaNegative);
        let expected = 1.0f64 * ((1.0 + 1.0) / 2.0f64).exp();
        assert_relative_eq!(theta.lipschitz_constant, expected, epsilon = 1e-14);
        assert_relative_eq!(
            quad_integral(&theta).exp(),
            theta.lipschitz_constant,
            max_relative = 1e-6
        );
    }

    #[test]
    fn inadmissible_profile_is_rejected() {
        // Constructed directly to bypass the constructor check.
        let p = ConvexityProfile {
            kappa: 0.0,
            beta: f64::INFINITY,
            d_half_diameter: f64::INFINITY,
            mixture_params: None,
        };
        assert!(matches!(theta_profile(&p), Err(Error::NoAdmissibleBranch)));
    }

    #[test]
    fn functional_constants_for_the_unit_mixture() {
        let p = ConvexityProfile::mixture(1.0, 1.0).unwrap();
        let c = functional_constants(&p, None, None).unwrap();
        assert_relative_eq!(c.c_p, std::f64::consts::E, epsilon = 1e-12);
        assert_relative_eq!(c.c_ls, 2.0 * std::f64::consts::E, epsilon = 1e-12);
        assert_relative_eq!(c.t2_c, std::f64::consts::E, epsilon = 1e-12);
        assert_relative_eq!(c.isoperimetric_c, 0.5f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn gaussian_constants_are_optimal_at_r_zero() {
        let p = ConvexityProfile::mixture(1.0, 0.0).unwrap();
        let c = functional_constants(&p, None, None).unwrap();
        assert_relative_eq!(c.c_p, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.c_ls, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mixture_constant_tends_to_sigma_as_r_vanishes() {
        let sigma = 1.7;
        let mut prev = f64::INFINITY;
        for &r in &[1.0, 0.5, 0.1, 0.01, 1e-4] {
            let p = ConvexityProfile::mixture(sigma, r).unwrap();
            let l = theta_profile(&p).unwrap().lipschitz_constant;
            assert!(l < prev);
            prev = l;
        }
        assert_relative_eq!(prev, sigma, max_relative = 1e-7);
    }

    #[test]
    fn q_poincare_matches_the_transfer_form() {
        let p = ConvexityProfile::log_concave(1.0).unwrap();
        let c = functional_constants(&p, Some(2), None).unwrap();
        assert_relative_eq!(c.q_poincare_value, 1.0, epsilon = 1e-15);
        // ((q-1)/kappa)^{q/2} at kappa = 2, q = 4: (3/2)^2.
        let p = ConvexityProfile::log_concave(2.0).unwrap();
        let c = functional_constants(&p, Some(4), None).unwrap();
        assert_relative_eq!(c.q_poincare_value, 2.25, epsilon = 1e-12);
        assert!(c.q_poincare(3).is_err());
        assert!(functional_constants(&p, Some(1), None).is_err());
    }

    #[test]
    fn affine_constants_match_their_formulas() {
        let a = AffineConstants::new(0.5, 2.0, 1.0, 2).unwrap();
        assert_relative_eq!(a.psi_sobolev, 0.5 * 2.0 * (2.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(a.isoperimetric_c, 1.0 * (1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(a.q_poincare, 1.0 * (2.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn concentration_deviation_term() {
        let p = ConvexityProfile::log_concave(1.0).unwrap();
        let b = concentration_bound(&p, 2, 100, (-1.0f64).exp(), 1.0, 1.0).unwrap();
        assert_relative_eq!(b.deviation_term, 0.1, epsilon = 1e-12);
        // kappa = 1 makes C = 1, so the printed variant coincides.
        assert!(b.deviation_term_paper_printed.is_none());

        let p = ConvexityProfile::mixture(1.0, 1.0).unwrap();
        let b = concentration_bound(&p, 2, 100, 0.1, 1.0, 1.0).unwrap();
        let c = std::f64::consts::E;
        assert_relative_eq!(
            b.deviation_term,
            (c * 10.0f64.ln() / 100.0).sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            b.deviation_term_paper_printed.unwrap(),
            (10.0f64.ln() / (100.0 * c)).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn concentration_rates_by_dimension() {
        let n = 1000;
        assert_relative_eq!(mean_rate(2, n), (n as f64).powf(-0.5), epsilon = 1e-15);
        assert_relative_eq!(
            mean_rate(4, n),
            (n as f64).powf(-0.5) * (1.0 + n as f64).ln(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            mean_rate(6, n),
            (n as f64).powf(-1.0 / 3.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn deviation_term_vanishes_as_eps_tends_to_one() {
        let p = ConvexityProfile::log_concave(1.0).unwrap();
        let b = concentration_bound(&p, 2, 100, 1.0 - 1e-12, 1.0, 1.0).unwrap();
        assert!(b.deviation_term < 1e-6);
    }

    #[test]
    fn gaussian_cdf_values() {
        assert_relative_eq!(gaussian_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(gaussian_cdf(1.0), 0.8413447460685429, epsilon = 1e-12);
        assert_relative_eq!(
            gaussian_cdf(-1.0),
            1.0 - 0.8413447460685429,
            epsilon = 1e-12
        );
        assert!(gaussian_cdf(40.0) == 1.0);
        assert!(gaussian_cdf(-40.0) >= 0.0);
        // Quadrature of the density as an independent route.
        let q = adaptive_simpson(
            |x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -12.0,
            1.0,
            1e-13,
        );
        assert_relative_eq!(gaussian_cdf(1.0), q, epsilon = 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Closed-form integral against quadrature on random admissible
        /// profiles, and monotonicity of the constant in kappa.
        #[test]
        fn closed_form_matches_quadrature(
            kappa in -2.0f64..3.9,
            d in prop::sample::select(vec![0.5, 1.0, 2.0]),
            use_mixture in any::<bool>(),
            sigma in 0.5f64..2.0,
            r in 0.0f64..2.0,
        ) {
            let profile = if use_mixture {
                ConvexityProfile::mixture(sigma, r).unwrap()
            } else {
                ConvexityProfile::bounded_support(kappa, d).unwrap()
            };
            let theta = theta_profile(&profile).unwrap();
            let quad = quad_integral(&theta);
            prop_assert!(
                (quad.exp() - theta.lipschitz_constant).abs()
                    <= 1e-6 * theta.lipschitz_constant,
                "quad {} vs closed {}",
                quad.exp(),
                theta.lipschitz_constant
            );
            // Partial integral agrees too, at a few interior times.
            for &t in &[0.3, 0.8] {
                let part = match theta.t0 {
                    Some(t0) if t > t0 => {
                        adaptive_simpson(|s| theta.theta(s), 0.0, t0, 1e-10)
                            + adaptive_simpson(|s| theta.theta(s), t0, t, 1e-10)
                    }
                    _ => adaptive_simpson(|s| theta.theta(s), 0.0, t, 1e-10),
                };
                prop_assert!((part - theta.integral(t)).abs() < 1e-7);
            }
        }

        #[test]
        fn lipschitz_constant_is_nonincreasing_in_kappa(
            d in prop::sample::select(vec![0.5, 1.0, 2.0]),
            k1 in -2.0f64..3.0,
            dk in 0.01f64..1.0,
        ) {
            let k2 = k1 + dk;
            let l = |k: f64| {
                theta_profile(&ConvexityProfile::bounded_support(k, d).unwrap())
                    .unwrap()
                    .lipschitz_constant
            };
            prop_assert!(l(k2) <= l(k1) + 1e-12);
        }
    }
}
