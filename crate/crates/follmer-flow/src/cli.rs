//! Command-line front end.
//!
//! Subcommands:
//! - `sample`: push standard Gaussian draws through the flow and write them;
//! - `bounds`: print the closed-form constants of a convexity profile;
//! - `verify`: run the configured verification experiment, write its report,
//!   exit 0 only when every check passes (1 otherwise);
//! - `concentration`: shortcut for the concentration experiment.
//!
//! Exit codes: 0 success, 1 failing check, 2 configuration error,
//! 3 numerical abort. All commands take `--config`; `--seed`, `--out`,
//! `--format`, and `--threads` override the corresponding config entries.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::functional_constants;
use crate::config::{load_profile, load_run_config, ExperimentSpec, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{run_from_config, ExperimentReport};
use crate::flow::{push_forward_samples, IntegrationMethod};
use crate::rng::derive_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl Error {
    /// Exit code a command should report for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteState { .. } | Error::WeightUnderflow => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "follmer-flow",
    version,
    about = "Unit-time Gaussian-to-target transport: sampling, constants, and verification runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the output format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Cap the worker-thread count (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Push standard Gaussian draws through the flow and write the samples.
    Sample(CommonArgs),
    /// Print the closed-form constants of a convexity profile as JSON.
    Bounds {
        /// Profile file (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the configured verification experiment and write its report.
    Verify(CommonArgs),
    /// Run the empirical-measure concentration experiment.
    Concentration(CommonArgs),
}

/// Parse `argv` and run; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version print and exit 0; usage errors exit 2.
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Sample(args) => cmd_sample(&args),
        Command::Bounds { config } => cmd_bounds(&config),
        Command::Verify(args) => cmd_verify(&args),
        Command::Concentration(args) => cmd_concentration(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_with_overrides(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = load_run_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = Some(threads);
    }
    if let Some(out) = &args.out {
        let format = args
            .format
            .map(OutputFormat::from)
            .or(cfg.output.as_ref().map(|o| o.format))
            .unwrap_or(OutputFormat::Json);
        cfg.output = Some(crate::config::OutputSpec {
            path: out.to_string_lossy().into_owned(),
            format,
        });
    } else if let (Some(format), Some(output)) = (args.format, cfg.output.as_mut()) {
        output.format = format.into();
    }
    Ok(cfg)
}

fn with_threads<F: FnOnce() -> Result<i32> + Send>(threads: Option<usize>, f: F) -> Result<i32> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(f)
        }
        None => f(),
    }
}

/// FNV-1a over the canonical JSON of the resolved target; identifies the
/// target in sample-file headers.
fn target_hash(cfg: &RunConfig) -> Result<String> {
    let inline = cfg.target.resolved_inline()?;
    let bytes = serde_json::to_vec(&inline).expect("target serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Ok(format!("{h:016x}"))
}

fn method_name(m: IntegrationMethod) -> &'static str {
    match m {
        IntegrationMethod::Euler => "euler",
        IntegrationMethod::Rk4 => "rk4",
    }
}

/// `sample`: n pushed samples with a {seed, steps, method, target-hash}
/// header. CSV rows are `particle,x0,...`; JSON carries a `meta` object and
/// a `samples` array.
pub fn cmd_sample(args: &CommonArgs) -> Result<i32> {
    let cfg = load_with_overrides(args)?;
    with_threads(cfg.threads, || {
        let n = cfg
            .sample
            .as_ref()
            .ok_or_else(|| Error::Config("config has no [sample] section".into()))?
            .n;
        let output = cfg
            .output
            .clone()
            .ok_or_else(|| Error::Config("no output path: set [output] or pass --out".into()))?;
        let target = cfg.target.resolve()?;
        let grid = cfg.grid.build()?;
        let samples =
            push_forward_samples(&target, n, &grid, cfg.grid.method, derive_seed(cfg.seed, 1))?;
        let hash = target_hash(&cfg)?;

        let mut out: Vec<u8> = Vec::new();
        match output.format {
            OutputFormat::Csv => {
                writeln!(out, "# seed={}", cfg.seed)?;
                writeln!(out, "# steps={}", cfg.grid.steps)?;
                writeln!(out, "# method={}", method_name(cfg.grid.method))?;
                writeln!(out, "# target_hash={hash}")?;
                write!(out, "particle")?;
                for k in 0..target.dim() {
                    write!(out, ",x{k}")?;
                }
                writeln!(out)?;
                for (i, x) in samples.iter().enumerate() {
                    write!(out, "{i}")?;
                    for v in x.iter() {
                        write!(out, ",{v}")?;
                    }
                    writeln!(out)?;
                }
            }
            OutputFormat::Json => {
                let doc = serde_json::json!({
                    "meta": {
                        "seed": cfg.seed,
                        "steps": cfg.grid.steps,
                        "method": method_name(cfg.grid.method),
                        "target_hash": hash,
                    },
                    "samples": samples
                        .iter()
                        .map(|x| x.iter().cloned().collect::<Vec<f64>>())
                        .collect::<Vec<_>>(),
                });
                out = serde_json::to_vec_pretty(&doc).expect("samples serialize");
                out.push(b'\n');
            }
        }
        std::fs::write(&output.path, out)?;
        Ok(EXIT_OK)
    })
}

/// `bounds`: constants report for a profile file, JSON on stdout.
pub fn cmd_bounds(config: &Path) -> Result<i32> {
    let profile_cfg = load_profile(config)?;
    let profile = profile_cfg.build()?;
    let affine = profile_cfg
        .affine
        .as_ref()
        .map(|a| (a.lambda_min, a.lambda_max, a.r));
    let report = functional_constants(&profile, profile_cfg.q, affine)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.to_json()).expect("json")
    );
    Ok(EXIT_OK)
}

fn write_report(report: &ExperimentReport, cfg: &RunConfig) -> Result<()> {
    let Some(output) = cfg.output.as_ref() else {
        // No destination: print the body.
        println!("{}", report.body_json());
        return Ok(());
    };
    let bytes = match output.format {
        OutputFormat::Json => {
            let doc = format!(
                "{{\n\"report\": {},\n\"timing\": {{\"wall_clock_secs\": {}}}\n}}\n",
                report.body_json(),
                report.wall_clock_secs
            );
            doc.into_bytes()
        }
        OutputFormat::Csv => {
            // Summary table of the checks.
            let mut out = String::from("name,estimate,bound_or_target,tolerance,pass\n");
            for c in &report.checks {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.name, c.estimate, c.bound_or_target, c.tolerance, c.pass
                ));
            }
            out.into_bytes()
        }
    };
    std::fs::write(&output.path, bytes)?;
    Ok(())
}

fn run_and_report(cfg: &RunConfig) -> Result<i32> {
    let report = run_from_config(cfg)?;
    write_report(&report, cfg)?;
    let n_pass = report.checks.iter().filter(|c| c.pass).count();
    eprintln!(
        "{}: {}/{} checks passed",
        report.experiment_id,
        n_pass,
        report.checks.len()
    );
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// `verify`: run whichever experiment the config selects.
pub fn cmd_verify(args: &CommonArgs) -> Result<i32> {
    let cfg = load_with_overrides(args)?;
    with_threads(cfg.threads, || run_and_report(&cfg))
}

/// `concentration`: like `verify`, restricted to the concentration
/// experiment.
pub fn cmd_concentration(args: &CommonArgs) -> Result<i32> {
    let cfg = load_with_overrides(args)?;
    match cfg.experiment {
        Some(ExperimentSpec::Concentration { .. }) => {}
        _ => {
            return Err(Error::Config(
                "the concentration command needs an [experiment.concentration] section".into(),
            ))
        }
    }
    with_threads(cfg.threads, || run_and_report(&cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_every_subcommand() {
        for argv in [
            vec!["follmer-flow", "sample", "--config", "c.toml"],
            vec!["follmer-flow", "bounds", "--config", "p.toml"],
            vec![
                "follmer-flow",
                "verify",
                "--config",
                "c.toml",
                "--seed",
                "7",
                "--threads",
                "2",
                "--format",
                "csv",
                "--out",
                "r.json",
            ],
            vec!["follmer-flow", "concentration", "--config", "c.toml"],
        ] {
            Cli::try_parse_from(argv).unwrap();
        }
    }

    #[test]
    fn help_lists_every_subcommand() {
        let err = Cli::try_parse_from(["follmer-flow", "--help"]).unwrap_err();
        let text = err.to_string();
        for sub in ["sample", "bounds", "verify", "concentration"] {
            assert!(text.contains(sub), "help is missing `{sub}`");
        }
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(
            Cli::try_parse_from(["follmer-flow", "sample", "--config", "c", "--bogus"]).is_err()
        );
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(Error::WeightUnderflow.exit_code(), EXIT_NUMERICAL);
        assert_eq!(
            Error::NonFiniteState {
                t: 0.5,
                particle: None
            }
            .exit_code(),
            EXIT_NUMERICAL
        );
        assert_eq!(Error::Config("x".into()).exit_code(), EXIT_CONFIG);
        assert_eq!(Error::EmptyMixture.exit_code(), EXIT_CONFIG);
    }
}
