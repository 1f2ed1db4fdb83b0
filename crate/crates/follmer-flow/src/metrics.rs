//! Sample-based distances and functional-inequality estimators.
//!
//! `wasserstein2_exact` solves the equal-size assignment problem exactly and
//! anchors the scalable surrogate `sliced_w2` (average of 1D transport costs
//! over random projections, never above the true distance). The empirical
//! Poincare and log-Sobolev routines are plug-in lower estimates over a
//! fixed family of test functions, meant to be compared against the
//! closed-form constants from [`crate::bounds`].

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{substream, unit_vector};

/// Hard cap for the exact assignment solver (O(n^3)).
pub const EXACT_W2_CAP: usize = 4096;

/// Cap for the O(n^2) pairwise Lipschitz scan.
pub const LIPSCHITZ_PAIR_CAP: usize = 2000;

/// A finite set of points in R^d with a provenance tag for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    points: Vec<DVector<f64>>,
    provenance: String,
}

impl SampleSet {
    pub fn new(points: Vec<DVector<f64>>, provenance: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: "sample set must be nonempty".into(),
            });
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "points",
                    reason: "non-finite coordinate".into(),
                });
            }
        }
        Ok(Self {
            dim,
            points,
            provenance: provenance.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Minimum-cost perfect matching of a square cost matrix (Hungarian
/// algorithm with potentials, O(n^3)). Returns column assigned to each row.
fn solve_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-indexed arrays with a virtual 0 column, in the classic formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}

/// Exact Wasserstein-2 distance between equal-size empirical measures:
/// sqrt of the minimum over pairings of the mean squared distance.
pub fn wasserstein2_exact(a: &SampleSet, b: &SampleSet) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let n = a.len();
    if n > EXACT_W2_CAP {
        return Err(Error::SizeCap {
            n,
            cap: EXACT_W2_CAP,
        });
    }
    let cost: Vec<Vec<f64>> = a
        .points
        .iter()
        .map(|p| b.points.iter().map(|q| (p - q).norm_squared()).collect())
        .collect();
    let assignment = solve_assignment(&cost);
    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .sum();
    Ok((total / n as f64).sqrt())
}

/// Squared 1D Wasserstein-2 between two sorted samples of possibly
/// different sizes, via the merged piecewise-constant quantile functions.
fn w2_squared_1d_sorted(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as u64;
    let m = b.len() as u64;
    let (mut i, mut j) = (0u64, 0u64);
    let mut level = 0.0f64;
    let mut total = 0.0f64;
    while i < n && j < m {
        // Next quantile break: (i+1)/n vs (j+1)/m, compared exactly.
        let ca = (i + 1) * m;
        let cb = (j + 1) * n;
        let next = if ca <= cb {
            (i + 1) as f64 / n as f64
        } else {
            (j + 1) as f64 / m as f64
        };
        let d = a[i as usize] - b[j as usize];
        total += (next - level) * d * d;
        level = next;
        if ca <= cb {
            i += 1;
        }
        if cb <= ca {
            j += 1;
        }
    }
    total
}

/// A sliced distance estimate with its Monte Carlo error across directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicedDistance {
    /// sqrt of the mean over directions of the squared 1D distance.
    pub value: f64,
    /// Standard error of `value` across directions (delta method).
    pub stderr: f64,
    pub n_projections: usize,
}

/// Sliced Wasserstein-2: project both sets on random unit directions,
/// take 1D transport costs, and return the root mean square. Handles
/// unequal sample sizes through exact 1D quantile coupling.
pub fn sliced_w2<R: Rng + ?Sized>(
    a: &SampleSet,
    b: &SampleSet,
    n_proj: usize,
    rng: &mut R,
) -> Result<SlicedDistance> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    if n_proj == 0 {
        return Err(Error::InvalidParameter {
            name: "n_proj",
            reason: "need at least one projection".into(),
        });
    }
    let mut sq = Vec::with_capacity(n_proj);
    let mut pa = vec![0.0f64; a.len()];
    let mut pb = vec![0.0f64; b.len()];
    for _ in 0..n_proj {
        let dir = unit_vector(rng, a.dim);
        for (slot, p) in pa.iter_mut().zip(&a.points) {
            *slot = dir.dot(p);
        }
        for (slot, p) in pb.iter_mut().zip(&b.points) {
            *slot = dir.dot(p);
        }
        pa.sort_by(f64::total_cmp);
        pb.sort_by(f64::total_cmp);
        sq.push(w2_squared_1d_sorted(&pa, &pb));
    }
    let mean = sq.iter().sum::<f64>() / n_proj as f64;
    let var = sq.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n_proj.max(2) - 1) as f64;
    let se_mean = (var / n_proj as f64).sqrt();
    let value = mean.sqrt();
    let stderr = if value > 0.0 {
        se_mean / (2.0 * value)
    } else {
        0.0
    };
    Ok(SlicedDistance {
        value,
        stderr,
        n_projections: n_proj,
    })
}

/// Two-sample energy distance 2 E|A-B| - E|A-A'| - E|B-B'| (O(n^2)).
pub fn energy_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let cross: f64 = a
        .iter()
        .map(|p| b.iter().map(|q| (p - q).norm()).sum::<f64>())
        .sum::<f64>()
        / (a.len() * b.len()) as f64;
    let within = |s: &[DVector<f64>]| {
        let mut total = 0.0;
        for (i, p) in s.iter().enumerate() {
            for q in &s[i + 1..] {
                total += (p - q).norm();
            }
        }
        2.0 * total / (s.len() * s.len()) as f64
    };
    2.0 * cross - within(a) - within(b)
}

/// Largest pairwise expansion ratio |T(x_i) - T(x_j)| / |x_i - x_j| over all
/// distinct pairs; a lower estimate of the Lipschitz constant of T.
/// Coincident inputs are skipped.
pub fn empirical_lipschitz(pairs: &[(DVector<f64>, DVector<f64>)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InvalidSampleCount {
            n: pairs.len(),
            min: 2,
        });
    }
    if pairs.len() > LIPSCHITZ_PAIR_CAP {
        return Err(Error::SizeCap {
            n: pairs.len(),
            cap: LIPSCHITZ_PAIR_CAP,
        });
    }
    let mut best = 0.0f64;
    let mut seen_any = false;
    for (i, (xi, yi)) in pairs.iter().enumerate() {
        for (xj, yj) in &pairs[i + 1..] {
            let dx = (xi - xj).norm();
            if dx == 0.0 {
                continue;
            }
            seen_any = true;
            best = best.max((yi - yj).norm() / dx);
        }
    }
    if !seen_any {
        return Err(Error::InvalidParameter {
            name: "pairs",
            reason: "all inputs coincide".into(),
        });
    }
    Ok(best)
}

/// A test function with an evaluable gradient, for the plug-in
/// functional-inequality estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// f(x) = x_i.
    Coordinate(usize),
    /// f(x) = x_i x_j.
    Product(usize, usize),
    /// f(x) = sin(omega . x).
    Sine(DVector<f64>),
    /// f(x) = exp(s (u . x) / 2), always positive; the log-Sobolev family.
    LogLinear { s: f64, direction: DVector<f64> },
}

impl TestFunction {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::Coordinate(i) => x[*i],
            Self::Product(i, j) => x[*i] * x[*j],
            Self::Sine(w) => w.dot(x).sin(),
            Self::LogLinear { s, direction } => (0.5 * s * direction.dot(x)).exp(),
        }
    }

    pub fn grad_norm_squared(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::Coordinate(_) => 1.0,
            Self::Product(i, j) => {
                if i == j {
                    4.0 * x[*i] * x[*i]
                } else {
                    x[*i] * x[*i] + x[*j] * x[*j]
                }
            }
            Self::Sine(w) => {
                let c = w.dot(x).cos();
                c * c * w.norm_squared()
            }
            Self::LogLinear { s, direction } => {
                let f = self.eval(x);
                0.25 * s * s * direction.norm_squared() * f * f
            }
        }
    }
}

/// Default variance-ratio family: coordinates, pairwise products, and eight
/// random-frequency sines.
pub fn default_poincare_family(dim: usize, seed: u64) -> Vec<TestFunction> {
    let mut family = Vec::new();
    for i in 0..dim {
        family.push(TestFunction::Coordinate(i));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            family.push(TestFunction::Product(i, j));
        }
    }
    let mut rng = substream(seed, 0);
    for _ in 0..8 {
        family.push(TestFunction::Sine(crate::rng::standard_normal_vector(
            &mut rng, dim,
        )));
    }
    family
}

/// Default entropy-ratio family: positive log-linear bumps along the
/// coordinate axes and four random directions, at two tilts.
pub fn default_log_sobolev_family(dim: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = substream(seed, 1);
    let mut dirs: Vec<DVector<f64>> = (0..dim)
        .map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..4 {
        dirs.push(unit_vector(&mut rng, dim));
    }
    let mut family = Vec::new();
    for dir in dirs {
        for &s in &[0.1, 0.2] {
            family.push(TestFunction::LogLinear {
                s,
                direction: dir.clone(),
            });
        }
    }
    family
}

fn poincare_ratio_on(points: &[&DVector<f64>], f: &TestFunction) -> Option<f64> {
    let n = points.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut energy = 0.0;
    for x in points {
        let v = f.eval(x);
        sum += v;
        sum_sq += v * v;
        energy += f.grad_norm_squared(x);
    }
    let var = sum_sq / n - (sum / n) * (sum / n);
    let energy = energy / n;
    // Functions with no Dirichlet energy on the sample carry no information.
    (energy > 0.0).then_some(var / energy)
}

/// Plug-in lower estimate of the Poincare constant: the largest ratio
/// Var(f) / E|grad f|^2 over the family.
pub fn empirical_poincare(samples: &SampleSet, family: &[TestFunction]) -> Result<f64> {
    let points: Vec<&DVector<f64>> = samples.points.iter().collect();
    ratio_max(&points, family, poincare_ratio_on)
}

fn log_sobolev_ratio_on(points: &[&DVector<f64>], f: &TestFunction) -> Option<f64> {
    let n = points.len() as f64;
    let mut mean_f2 = 0.0;
    let mut mean_f2_log = 0.0;
    let mut energy = 0.0;
    for x in points {
        let v = f.eval(x);
        let f2 = v * v;
        if !(f2 > 0.0) {
            return None;
        }
        mean_f2 += f2;
        mean_f2_log += f2 * f2.ln();
        energy += f.grad_norm_squared(x);
    }
    mean_f2 /= n;
    mean_f2_log /= n;
    energy /= n;
    if !(energy > 0.0) || !(mean_f2 > 0.0) {
        return None;
    }
    let ent = mean_f2_log - mean_f2 * mean_f2.ln();
    // Convention Ent(f^2) <= C_LS E|grad f|^2 (Gaussian constant 2), so the
    // ratio is directly comparable to C_LS.
    Some(ent / energy)
}

/// Plug-in lower estimate of the log-Sobolev constant: the largest ratio
/// Ent(f^2) / E|grad f|^2 over a positive family.
pub fn empirical_log_sobolev(samples: &SampleSet, family: &[TestFunction]) -> Result<f64> {
    let points: Vec<&DVector<f64>> = samples.points.iter().collect();
    ratio_max(&points, family, log_sobolev_ratio_on)
}

fn ratio_max(
    points: &[&DVector<f64>],
    family: &[TestFunction],
    ratio: fn(&[&DVector<f64>], &TestFunction) -> Option<f64>,
) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidParameter {
            name: "family",
            reason: "test-function family is empty".into(),
        });
    }
    let best = family
        .iter()
        .filter_map(|f| ratio(points, f))
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::InvalidParameter {
            name: "family",
            reason: "every test function was degenerate on the sample".into(),
        });
    }
    Ok(best)
}

/// Bootstrap standard error of either plug-in estimator: resample points
/// with replacement `b` times and take the standard deviation of the
/// re-estimates.
pub fn bootstrap_stderr(
    samples: &SampleSet,
    family: &[TestFunction],
    log_sobolev: bool,
    b: usize,
    seed: u64,
) -> Result<f64> {
    let ratio = if log_sobolev {
        log_sobolev_ratio_on as fn(&[&DVector<f64>], &TestFunction) -> Option<f64>
    } else {
        poincare_ratio_on as fn(&[&DVector<f64>], &TestFunction) -> Option<f64>
    };
    if b < 2 {
        return Err(Error::InvalidSampleCount { n: b, min: 2 });
    }
    let n = samples.len();
    let mut estimates = Vec::with_capacity(b);
    for rep in 0..b {
        let mut rng = substream(seed, rep as u64);
        let resampled: Vec<&DVector<f64>> = (0..n)
            .map(|_| &samples.points[rng.gen_range(0..n)])
            .collect();
        estimates.push(ratio_max(&resampled, family, ratio)?);
    }
    let mean = estimates.iter().sum::<f64>() / b as f64;
    let var = estimates
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / (b - 1) as f64;
    Ok(var.sqrt())
}
