//! Command-line driver: JSON configs in, JSON reports and SVG figures out.
#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use recimap::ergodicity::{classify_rotation, ergodicity_verdict, ErgodicityVerdict};
use recimap::first_return::{
    check_surjective, conservativity_certificate, first_return_with_cap, return_time_partition,
    ConservativityCertificate, ReturnError, DEFAULT_BRANCH_CAP,
};
use recimap::maharam::{ergodicity_diagnostic, extend, ratio_set_estimate_with_samples, LeveledSet};
use recimap::render::{self, default_labels, RenderError, RenderOptions};
use recimap::systems::check_conjugacy;
use recimap::{builtin_fixtures, ConfigError, Interval, IntervalSet, Scalar, SystemConfig};

pub use report::*;

pub const BRANCH_CAP_ENV: &str = "RECIMAP_BRANCH_CAP";
const RATIO_SAMPLES: usize = 8;
const RATIO_WINDOW: i64 = 2;
const COCYCLE_STEPS: usize = 500;

const PERMUTATION_HELP: &str = "\
Configs are JSON objects with fields name, field_d, lengths, permutation and
involution_s (plus an optional zeta list of {re, im} pairs). Numbers are
strings such as \"1/3\" or \"1/4+1/4*sqrt(5)\".

permutation[i] is the position of interval i in the image row. For example
lengths [\"3/10\", \"1/2\", \"1/5\"] with permutation [2, 1, 0] sends
A = [0, 3/10) to [7/10, 1), B to [1/5, 7/10) and C to [0, 1/5).";

#[derive(Debug, Parser)]
#[command(name = "recimap", version, about = "Exact analysis of reciprocal transformations", long_about = PERMUTATION_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the first-return, conservativity, ergodicity and Maharam pipeline.
    Analyze(AnalyzeArgs),
    /// Draw a figure as SVG.
    Render(RenderArgs),
    /// List or write the built-in example configs.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub config: PathBuf,
    /// Maximum number of applications of F per piece of S.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    /// Orbit length for the level-range simulation.
    #[arg(long, default_value_t = 2_000)]
    pub orbit_steps: usize,
    /// Number of probe intervals for the ratio-set estimate.
    #[arg(long, default_value_t = 4)]
    pub probes: usize,
    /// Orbit length per start point in the ratio-set estimate.
    #[arg(long, default_value_t = 500)]
    pub ratio_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 2 if any verdict is unknown.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Map,
    Composition,
    FirstReturn,
    Suspension,
    Maharam,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub min_level: i64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub max_level: i64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FixturesArgs {
    #[arg(long)]
    pub list: bool,
    #[arg(long, value_name = "DIR")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Return(#[from] ReturnError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("config {0} has no zeta block; the suspension figure needs one")]
    MissingZeta(String),
    #[error("{BRANCH_CAP_ENV} must be a positive integer, got {0:?}")]
    BadBranchCap(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvariantViolation(_) => 3,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn parse_config(text: &str, path: &Path) -> Result<SystemConfig, CliError> {
    let cfg: SystemConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SystemConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text, path)
}

pub fn branch_cap_from_env() -> Result<usize, CliError> {
    match std::env::var(BRANCH_CAP_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::BadBranchCap(v)),
        },
        Err(_) => Ok(DEFAULT_BRANCH_CAP),
    }
}

fn probe_intervals(k: usize) -> Vec<Interval> {
    let k = k.max(1) as i64;
    (0..k)
        .map(|j| Interval::new(Scalar::ratio(2 * j, 2 * k), Scalar::ratio(2 * j + 1, 2 * k)).expect("non-empty"))
        .collect()
}

/// Rectangles and half-branch sets over levels -2..=2.
fn leveled_samples(f: &recimap::PAMap) -> Vec<LeveledSet> {
    let half = Scalar::ratio(1, 2);
    let halves: IntervalSet = f
        .branches()
        .iter()
        .map(|b| {
            let d = b.domain();
            Interval::new(d.lo().clone(), d.lo() + &(d.length() * &half)).expect("non-empty")
        })
        .collect();
    let mut out: Vec<LeveledSet> = (-2..=2).map(|n| LeveledSet::rectangle(Interval::unit().into(), n)).collect();
    out.push((-2..=2).map(|n| (n, halves.clone())).collect());
    out
}

pub fn analyze(cfg: &SystemConfig, params: &Parameters) -> Result<AnalysisReport, CliError> {
    let started = Instant::now();
    let sys = cfg.build()?;
    let conjugacy = check_conjugacy(&sys);

    let r = first_return_with_cap(&sys, params.budget, params.branch_cap)?;
    let distortion_law = r.branches().iter().all(|b| {
        let q = b.return_time() as i64 - 2;
        b.derivative_exponent() == q && b.map().slope() == &sys.rho().powi(q)
    });
    let partition = return_time_partition(&r);
    let missing = check_surjective(&r, &sys.small_set());
    let first_return = FirstReturnSummary {
        branches: r.branches().iter().map(BranchSummary::from).collect(),
        return_times: partition.by_time,
        unresolved: partition.unresolved,
        residual: r.residual().clone(),
        missing_image: missing.missing,
        missing_image_exact: missing.exact,
        budget_used: r.budget_used(),
    };

    let cert = conservativity_certificate(&sys, &r);
    let conservativity = match &cert {
        ConservativityCertificate::ConservativeCertified => Conservativity::ConservativeCertified,
        ConservativityCertificate::WanderingSetFound { wandering, horizon, trap } => {
            Conservativity::WanderingSetFound { wandering: wandering.clone(), horizon: *horizon, trap: trap.clone() }
        }
        ConservativityCertificate::Unknown { reason } => Conservativity::Unknown { reason: reason.clone() },
    };

    let rotation = classify_rotation(&r, &sys.small_set());
    let verdict = ergodicity_verdict(&sys, &rotation);
    let ergodicity = Ergodicity {
        rotation,
        verdict: match &verdict {
            ErgodicityVerdict::ErgodicCertified => Verdict::ErgodicCertified,
            ErgodicityVerdict::NotErgodicCertified { witness } => {
                Verdict::NotErgodicCertified { witness: witness.clone() }
            }
            ErgodicityVerdict::Unknown => Verdict::Unknown,
        },
    };

    let m = extend(&sys);
    let samples = leveled_samples(sys.f());
    let mut mu_tilde_preserved = true;
    let mut leveled_bijection = true;
    for e in &samples {
        let img = m.image_leveled(e);
        mu_tilde_preserved &= m.mu_tilde(&img) == m.mu_tilde(e);
        leveled_bijection &= &m.preimage_leveled(&img) == e;
    }
    let x0 = sys.small_set().midpoint();
    let level_range =
        m.level_range(&x0, params.orbit_steps).map_err(|e| CliError::InvariantViolation(e.to_string()))?;
    let cocycle_coherent = m
        .cocycle_coherent(&x0, params.orbit_steps.min(COCYCLE_STEPS))
        .map_err(|e| CliError::InvariantViolation(e.to_string()))?;
    let ratio_set =
        ratio_set_estimate_with_samples(&sys, &probe_intervals(params.probes), params.ratio_steps, RATIO_SAMPLES);
    let claim = ergodicity_diagnostic(&sys, &r, &cert, &verdict, &ratio_set.common, RATIO_WINDOW);

    let checks = Checks { conjugacy, distortion_law, cocycle_coherent, leveled_bijection };
    if !checks.all_passed() || !mu_tilde_preserved {
        let mut failed = checks.failures();
        if !mu_tilde_preserved {
            failed.push("mu_tilde_preserved");
        }
        return Err(CliError::InvariantViolation(format!("{}: {}", cfg.name, failed.join(", "))));
    }

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        system: cfg.clone(),
        parameters: params.clone(),
        first_return,
        conservativity,
        ergodicity,
        maharam: MaharamSummary {
            up_set: m.up_set().clone(),
            mu_tilde_checks: samples.len(),
            mu_tilde_preserved,
            level_range,
            ratio_set,
            claim,
        },
        checks,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn render_figure(cfg: &SystemConfig, args: &RenderArgs, branch_cap: usize) -> Result<String, CliError> {
    let sys = cfg.build()?;
    let opts = RenderOptions::default();
    let svg = match args.figure {
        Figure::Map => render::render_two_row(sys.t(), &default_labels(sys.t().len()), &opts)?,
        Figure::Composition => render::render_composition(&sys, &default_labels(sys.t().len()), &opts)?,
        Figure::FirstReturn => {
            let fs = first_return_with_cap(&sys, args.budget, branch_cap)?.as_pamap();
            render::render_two_row(&fs, &default_labels(fs.len()), &opts)?
        }
        Figure::Suspension => {
            let data = cfg.suspension().ok_or_else(|| CliError::MissingZeta(cfg.name.clone()))?;
            render::render_suspension(&data, &default_labels(data.zeta.len()), &opts)?
        }
        Figure::Maharam => render::render_maharam(
            &extend(&sys),
            args.min_level..=args.max_level,
            &default_labels(sys.t().len()),
            &opts,
        )?,
    };
    Ok(svg)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

/// Executes a parsed command and returns the process exit status.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = load_config(&args.config)?;
            let params = Parameters {
                budget: args.budget,
                orbit_steps: args.orbit_steps,
                probes: args.probes,
                ratio_steps: args.ratio_steps,
                branch_cap: branch_cap_from_env()?,
            };
            let report = analyze(&cfg, &params)?;
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            emit(args.out.as_deref(), &text, stdout)?;
            Ok(if args.strict && report.has_unknown() { 2 } else { 0 })
        }
        Command::Render(args) => {
            let cfg = load_config(&args.config)?;
            let svg = render_figure(&cfg, &args, branch_cap_from_env()?)?;
            emit(args.out.as_deref(), &svg, stdout)?;
            Ok(0)
        }
        Command::Fixtures(args) => {
            if let Some(dir) = args.emit {
                fs::create_dir_all(&dir).map_err(io_err(&dir))?;
                for cfg in builtin_fixtures() {
                    let path = dir.join(format!("{}.json", cfg.name));
                    let mut text = serde_json::to_string_pretty(&cfg).expect("config serializes");
                    text.push('\n');
                    fs::write(&path, text).map_err(io_err(&path))?;
                }
            } else {
                let mut listing = String::new();
                for cfg in builtin_fixtures() {
                    listing.push_str(&cfg.name);
                    listing.push('\n');
                }
                emit(None, &listing, stdout)?;
            }
            Ok(0)
        }
    }
}
