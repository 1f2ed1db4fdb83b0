//! Run configuration, target presets, and the on-disk file schemas.
//!
//! All files are TOML with strict parsing: unknown keys are rejected, and
//! the seed is always explicit. The mixture file schema is
//!
//! ```toml
//! dim = 2
//! sigma = 1.0
//! weights = [0.5, 0.5]
//! centers = [[-2.0, 0.0], [2.0, 0.0]]
//! ```

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{GridScheme, IntegrationMethod, TimeGrid};
use crate::measures::{ConvexityProfile, GaussianMixture};

/// On-disk mixture description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub dim: usize,
    pub sigma: f64,
    pub weights: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
}

impl MixtureSpec {
    pub fn build(&self) -> Result<GaussianMixture> {
        for c in &self.centers {
            if c.len() != self.dim {
                return Err(Error::Config(format!(
                    "center {:?} does not have dim = {}",
                    c, self.dim
                )));
            }
        }
        GaussianMixture::new(
            self.weights.clone(),
            self.centers
                .iter()
                .map(|c| DVector::from_vec(c.clone()))
                .collect(),
            self.sigma,
        )
    }

    pub fn from_mixture(m: &GaussianMixture) -> Self {
        Self {
            dim: m.dim(),
            sigma: m.sigma(),
            weights: m.weights().to_vec(),
            centers: m
                .centers()
                .iter()
                .map(|c| c.iter().cloned().collect())
                .collect(),
        }
    }
}

/// Names of the mixtures that ship with the crate.
pub const PRESET_NAMES: &[&str] = &[
    "std-gaussian",
    "gauss-beta4",
    "mix-sym",
    "mix-sym-1d",
    "mix-r1",
    "mix-d6",
];

/// A named preset target.
///
/// - `std-gaussian`: standard Gaussian in d = 2 (identity flow);
/// - `gauss-beta4`: N(0, 1/4) in d = 1 (analytic contraction by 1/2);
/// - `mix-sym`: weights (1/2, 1/2), centers (-2, 0) and (2, 0), sigma 1;
/// - `mix-sym-1d`: the d = 1 version with centers -2 and 2;
/// - `mix-r1`: centers (-1, 0) and (1, 0), sigma 1 (unit-radius case);
/// - `mix-d6`: d = 6, centers at -e1 and e1, sigma 1.
pub fn preset(name: &str) -> Result<GaussianMixture> {
    let e1 = |dim: usize, v: f64| {
        let mut c = DVector::zeros(dim);
        c[0] = v;
        c
    };
    match name {
        "std-gaussian" => Ok(GaussianMixture::standard(2)),
        "gauss-beta4" => GaussianMixture::single(DVector::zeros(1), 0.5),
        "mix-sym" => GaussianMixture::new(vec![0.5, 0.5], vec![e1(2, -2.0), e1(2, 2.0)], 1.0),
        "mix-sym-1d" => GaussianMixture::new(vec![0.5, 0.5], vec![e1(1, -2.0), e1(1, 2.0)], 1.0),
        "mix-r1" => GaussianMixture::new(vec![0.5, 0.5], vec![e1(2, -1.0), e1(2, 1.0)], 1.0),
        "mix-d6" => GaussianMixture::new(vec![0.5, 0.5], vec![e1(6, -1.0), e1(6, 1.0)], 1.0),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Target selector: exactly one of a preset name, a mixture file path, or an
/// inline mixture table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureSpec>,
}

impl TargetSpec {
    pub fn of_preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            file: None,
            mixture: None,
        }
    }

    pub fn resolve(&self) -> Result<GaussianMixture> {
        match (&self.preset, &self.file, &self.mixture) {
            (Some(name), None, None) => preset(name),
            (None, Some(path), None) => load_mixture_file(path)?.build(),
            (None, None, Some(spec)) => spec.build(),
            _ => Err(Error::Config(
                "target needs exactly one of `preset`, `file`, or `mixture`".into(),
            )),
        }
    }

    /// A self-contained copy for report snapshots: file references are
    /// replaced by the mixture they contained, so re-running the snapshot
    /// cannot drift if the file changes.
    pub fn resolved_inline(&self) -> Result<Self> {
        if self.file.is_some() {
            Ok(Self {
                preset: None,
                file: None,
                mixture: Some(MixtureSpec::from_mixture(&self.resolve()?)),
            })
        } else {
            // Presets ship with the binary and inline tables are already
            // self-contained.
            self.resolve()?;
            Ok(self.clone())
        }
    }
}

fn default_steps() -> usize {
    256
}
fn default_scheme() -> GridScheme {
    GridScheme::Uniform
}
fn default_method() -> IntegrationMethod {
    IntegrationMethod::Rk4
}
fn default_eps_endpoint() -> f64 {
    1e-3
}

/// Integration-grid description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_scheme")]
    pub scheme: GridScheme,
    #[serde(default = "default_method")]
    pub method: IntegrationMethod,
    /// Endpoint gap for simulations that must stop before t = 1.
    #[serde(default = "default_eps_endpoint")]
    pub eps_endpoint: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            scheme: default_scheme(),
            method: default_method(),
            eps_endpoint: default_eps_endpoint(),
        }
    }
}

impl GridSpec {
    /// The flow grid on [0, 1].
    pub fn build(&self) -> Result<TimeGrid> {
        match self.scheme {
            GridScheme::Uniform => TimeGrid::uniform(self.steps),
            GridScheme::Cosine => TimeGrid::cosine(self.steps),
            GridScheme::Custom => Err(Error::Config(
                "scheme `custom` is only usable through the library API".into(),
            )),
        }
    }

    /// A grid on [0, 1 - eps_endpoint] whose step density grows like
    /// 1/(1-t), for the reversed SDE.
    pub fn build_sde(&self) -> Result<TimeGrid> {
        if !(self.eps_endpoint > 0.0 && self.eps_endpoint < 1.0) {
            return Err(Error::Config(format!(
                "eps_endpoint must lie in (0, 1), got {}",
                self.eps_endpoint
            )));
        }
        TimeGrid::log_uniform_to(self.steps, 1.0 - self.eps_endpoint)
    }
}

fn default_t_list() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}
fn default_marginal_n() -> usize {
    5000
}
fn default_projections() -> usize {
    64
}
fn default_lipschitz_points() -> usize {
    500
}
fn default_t_grid() -> Vec<f64> {
    vec![0.3, 0.5, 0.7]
}
fn default_x_grid() -> Vec<f64> {
    vec![-1.0, 0.0, 1.5]
}
fn default_n_list() -> Vec<usize> {
    vec![1_000, 10_000, 100_000, 1_000_000]
}
fn default_conc_n_list() -> Vec<usize> {
    vec![250, 500, 1000, 2000, 4000]
}
fn default_repeats() -> usize {
    20
}
fn default_reference_n() -> usize {
    20_000
}
fn default_eps() -> f64 {
    0.1
}
fn default_s_max() -> f64 {
    6.0
}
fn default_resolution() -> usize {
    1000
}

/// Which verification experiment to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// Flow marginals against the closed-form law t X + sqrt(1-t^2) Y.
    Marginal {
        #[serde(default = "default_t_list")]
        t_list: Vec<f64>,
        #[serde(default = "default_marginal_n")]
        n: usize,
        #[serde(default = "default_projections")]
        n_projections: usize,
    },
    /// Jacobian growth along the flow against the certified constant.
    Lipschitz {
        #[serde(default = "default_lipschitz_points")]
        n_points: usize,
    },
    /// Monte Carlo velocity against the exact field across sample sizes.
    EstimatorConsistency {
        #[serde(default = "default_t_grid")]
        t_grid: Vec<f64>,
        #[serde(default = "default_x_grid")]
        x_grid: Vec<f64>,
        #[serde(default = "default_n_list")]
        n_list: Vec<usize>,
    },
    /// Empirical-measure distance decay and deviation quantiles.
    Concentration {
        #[serde(default = "default_conc_n_list")]
        n_list: Vec<usize>,
        #[serde(default = "default_repeats")]
        repeats: usize,
        #[serde(default = "default_reference_n")]
        reference_n: usize,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_projections")]
        n_projections: usize,
    },
    /// Equivalence of the two parameterizations of the reversed flow.
    TimeChange {
        #[serde(default = "default_s_max")]
        s_max: f64,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Marginal { .. } => "marginal",
            Self::Lipschitz { .. } => "lipschitz",
            Self::EstimatorConsistency { .. } => "estimator-consistency",
            Self::Concentration { .. } => "concentration",
            Self::TimeChange { .. } => "time-change",
        }
    }
}

/// Output destination and format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    pub format: OutputFormat,
}

/// Sampling request for the `sample` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub n: usize,
}

/// One reproducible run: target, grid, what to do, and where to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub target: TargetSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    /// A copy whose target is self-contained (no file references); used as
    /// the report snapshot.
    pub fn resolved_inline(&self) -> Result<Self> {
        Ok(Self {
            target: self.target.resolved_inline()?,
            ..self.clone()
        })
    }
}

/// Convexity-profile file for the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileMixtureSection {
    pub sigma: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileAffineSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub d_half_diameter: Option<f64>,
    #[serde(default)]
    pub mixture: Option<ProfileMixtureSection>,
    /// Even q >= 2 for the q-Poincare entry (default 2).
    #[serde(default)]
    pub q: Option<u32>,
    #[serde(default)]
    pub affine: Option<ProfileAffineSection>,
}

impl ProfileConfig {
    pub fn build(&self) -> Result<ConvexityProfile> {
        ConvexityProfile::new(
            self.kappa.unwrap_or(f64::NEG_INFINITY),
            self.beta.unwrap_or(f64::INFINITY),
            self.d_half_diameter.unwrap_or(f64::INFINITY),
            self.mixture
                .as_ref()
                .map(|m| crate::measures::MixtureParams {
                    sigma: m.sigma,
                    r: m.r,
                }),
        )
    }
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_toml(path, &text)
}

pub fn load_mixture_file(path: impl AsRef<Path>) -> Result<MixtureSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_toml(path, &text)
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<ProfileConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_toml(path, &text)
}
