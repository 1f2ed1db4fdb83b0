//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by measure construction, field evaluation, integration,
/// metrics, and configuration parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mixture has no components")]
    EmptyMixture,

    #[error("mixture weights must be nonnegative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} outside the valid range {range}")]
    InvalidTime { t: f64, range: &'static str },

    #[error("all importance weights underflowed: tilt too far in tail; increase n or clamp x")]
    WeightUnderflow,

    #[error("sample count {n} too small; need at least {min}")]
    InvalidSampleCount { n: usize, min: usize },

    #[error("non-finite state at t = {t}{}", particle.map(|p| format!(" (particle {p})")).unwrap_or_default())]
    NonFiniteState { t: f64, particle: Option<usize> },

    #[error("sample sets have different sizes: {a} vs {b}")]
    SizeMismatch { a: usize, b: usize },

    #[error("sample set size {n} exceeds the exact-solver cap {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("profile satisfies no admissible convexity branch (needs kappa > 0, or finite kappa with finite D, or mixture parameters)")]
    NoAdmissibleBranch,

    #[error("target has no sampler; this operation needs direct target samples")]
    SamplerUnavailable,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
