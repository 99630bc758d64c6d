//! Command-line front end.
//!
//! Every command reads one JSON document (`--config`) and writes JSON or CSV
//! to standard output or `--out`. Unknown fields are ignored, so the JSON
//! written by `achieve` can be fed straight back into `rate`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::achievability::{
    achieve, alignment_for, apply_power_constraint, choose_amplitude, crossover_probs, qpsk_bound, zchannel_limit,
    AchievabilityResult, AmplitudeSource, ConstructOptions, ThresholdChoice,
};
use crate::channel::{ChannelMode, ComplexGain, WiretapChannel};
use crate::error::Error;
use crate::infotheory::{secrecy_rate, DiscreteInput, RateReport};
use crate::optimizer::{
    check_support_condition, kkt_check, kkt_grid, optimize_wyner_rate, KktReport, OptimizeConfig, RestartSummary,
    SupportVerdict,
};
use crate::verify::{self, Suite, VerifyConfig, VerifyReport};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "WIRETAP_ADC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wiretap-adc", version, about = "Secrecy rates of Gaussian wiretap channels with quantized receivers")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized commands; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact I(X;Y1), I(X;Y2) and their difference for a given input.
    Rate,
    /// Binary input with a positive secrecy rate.
    Achieve {
        /// Also write the (b, phi) sweep trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Multi-start search for the best input under the power budget.
    Optimize,
    /// KKT slack of a real input on a grid.
    KktCheck,
    /// One row per value of a swept parameter.
    Sweep,
    /// Property suites.
    Verify {
        /// Suites to run (default: all).
        #[arg(long = "suite", value_enum)]
        suites: Vec<SuiteArg>,
        /// Random cases per randomized suite.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, hide = true)]
        inject_folding_sign_error: bool,
    },
    /// Exact QPSK rates and the closed-form lower bound.
    QpskBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    ZrateMonotone,
    Folding,
    EntropyGapMonotone,
    Support,
    Qpsk,
    Zlimit,
    Achievability,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::ZrateMonotone => Suite::ZrateMonotone,
            SuiteArg::Folding => Suite::Folding,
            SuiteArg::EntropyGapMonotone => Suite::EntropyGapMonotone,
            SuiteArg::Support => Suite::Support,
            SuiteArg::Qpsk => Suite::Qpsk,
            SuiteArg::Zlimit => Suite::Zlimit,
            SuiteArg::Achievability => Suite::Achievability,
        }
    }
}

/// Everything a command may read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub channel: Option<WiretapChannel>,
    pub input: Option<DiscreteInput>,
    pub power_budget: Option<f64>,
    pub construct: ConstructOptions,
    pub threshold_choice: ThresholdChoice,
    pub optimize: Option<OptimizeConfig>,
    pub grid_points: Option<usize>,
    pub sweep: Option<SweepSpec>,
    pub verify: Option<VerifyConfig>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Far amplitude of the margin-rule construction.
    B,
    /// `|w1|` with the phase kept.
    W1Mag,
    /// `|w2|` with the phase kept.
    W2Mag,
    /// Power budget applied to the construction by duty cycling.
    Power,
    /// Offset added to every eavesdropper threshold.
    EaveShift,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    /// Geometric rather than linear spacing between `start` and `stop`.
    #[serde(default)]
    pub log: bool,
    /// Mass on the near point for the `b` axis (default 0.5).
    #[serde(default)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub i1: f64,
    pub i2: f64,
    pub rs: f64,
    pub limit_rate: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Lib(Error::EqualGainMagnitudes(_)) => 3,
            CliError::Lib(Error::SweepExhausted(_)) => 4,
            CliError::Lib(_) | CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reads `WIRETAP_ADC_THREADS` and sizes the global thread pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| usage(format!("thread pool: {e}")))
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn require<T>(value: Option<T>, what: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("configuration is missing `{what}`")))
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn render<T: Serialize, R: Serialize>(format: Format, value: &T, rows: &[R]) -> CliResult<String> {
    match format {
        Format::Json => to_json(value),
        Format::Csv => to_csv(rows),
    }
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let config = load_config(cli.config.as_deref())?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Rate => cmd_rate(&config, cli.format.unwrap_or(Format::Json), out),
        Command::Achieve { trace } => cmd_achieve(&config, cli.format.unwrap_or(Format::Json), out, trace.as_deref()),
        Command::Optimize => cmd_optimize(&config, cli.seed, cli.format.unwrap_or(Format::Json), out),
        Command::KktCheck => cmd_kkt(&config, cli.format.unwrap_or(Format::Json), out),
        Command::Sweep => cmd_sweep(&config, cli.format.unwrap_or(Format::Csv), out),
        Command::Verify { suites, samples, inject_folding_sign_error } => {
            let mut vc = config.verify.clone().unwrap_or_default();
            if !suites.is_empty() {
                vc.suites = suites.iter().map(|&s| s.into()).collect();
            }
            if let Some(n) = samples {
                vc.samples = *n;
            }
            if let Some(s) = cli.seed.or(config.seed) {
                vc.seed = s;
            }
            vc.flip_folding_sign = *inject_folding_sign_error;
            cmd_verify(&vc, cli.format.unwrap_or(Format::Json), out)
        }
        Command::QpskBound => cmd_qpsk(&config, cli.format.unwrap_or(Format::Json), out),
    }
}

pub fn cmd_rate(config: &RunConfig, format: Format, out: Option<&Path>) -> CliResult<()> {
    let channel = require(config.channel.as_ref(), "channel")?;
    let input = require(config.input.as_ref(), "input")?;
    let report = secrecy_rate(channel, input)?;
    write_output(out, &render(format, &report, &[report])?)
}

#[derive(Debug, Serialize)]
struct AchieveOutput<'a> {
    channel: &'a WiretapChannel,
    /// Input on `channel`; replaying it with `rate` gives `result.exact_rate`.
    input: &'a DiscreteInput,
    power_budget: Option<f64>,
    result: &'a AchievabilityResult,
}

pub fn cmd_achieve(config: &RunConfig, format: Format, out: Option<&Path>, trace: Option<&Path>) -> CliResult<()> {
    let channel = require(config.channel.as_ref(), "channel")?;
    let mut result = achieve(channel, &config.construct, config.threshold_choice)?;
    if let Some(j) = config.power_budget {
        result = apply_power_constraint(&result, j)?;
    }
    if let Some(path) = trace {
        let csv = to_csv(&result.trace)?;
        fs::write(path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let doc = AchieveOutput { channel, input: &result.input, power_budget: config.power_budget, result: &result };
    write_output(out, &render(format, &doc, &result.trace)?)
}

#[derive(Debug, Serialize)]
struct OptimizeOutput<'a> {
    seed: u64,
    optimize: &'a OptimizeConfig,
    channel: &'a WiretapChannel,
    input: &'a DiscreteInput,
    rate_report: RateReport,
    kkt_report: Option<KktReport>,
    support_verdict: Option<SupportVerdict>,
    restarts: &'a [RestartSummary],
}

pub fn cmd_optimize(config: &RunConfig, seed: Option<u64>, format: Format, out: Option<&Path>) -> CliResult<()> {
    let channel = require(config.channel.as_ref(), "channel")?;
    let mut oc = config.optimize.clone().unwrap_or_default();
    if let Some(j) = config.power_budget {
        oc.power_budget = j;
    }
    if let Some(s) = seed.or(config.seed) {
        oc.seed = s;
    }
    let outcome = optimize_wyner_rate(channel, &oc)?;
    let (kkt_report, support_verdict) = if channel.mode() == ChannelMode::Real {
        let grid = kkt_grid(&outcome.input, config.grid_points.unwrap_or(2001));
        let kkt = kkt_check(channel, &outcome.input, oc.power_budget, &grid)?;
        let (w1, w2) = (channel.w1().0.re, channel.w2().0.re);
        let verdict = if w1.abs() != w2.abs() { Some(check_support_condition(&outcome.input, w1, w2)?) } else { None };
        (Some(kkt), verdict)
    } else {
        (None, None)
    };
    let doc = OptimizeOutput {
        seed: oc.seed,
        optimize: &oc,
        channel,
        input: &outcome.input,
        rate_report: outcome.report,
        kkt_report,
        support_verdict,
        restarts: &outcome.restarts,
    };
    write_output(out, &render(format, &doc, &outcome.restarts)?)
}

#[derive(Debug, Serialize)]
struct SlackRow {
    x: f64,
    slack: f64,
}

pub fn cmd_kkt(config: &RunConfig, format: Format, out: Option<&Path>) -> CliResult<()> {
    let channel = require(config.channel.as_ref(), "channel")?;
    let input = require(config.input.as_ref(), "input")?;
    let j = require(config.power_budget, "power_budget")?;
    let n = config.grid_points.unwrap_or(2001);
    if n < 2 {
        return Err(usage("grid_points must be at least 2"));
    }
    let report = kkt_check(channel, input, j, &kkt_grid(input, n))?;
    let rows: Vec<SlackRow> = report.grid.iter().zip(&report.slack).map(|(&x, &slack)| SlackRow { x, slack }).collect();
    write_output(out, &render(format, &report, &rows)?)
}

pub fn cmd_qpsk(config: &RunConfig, format: Format, out: Option<&Path>) -> CliResult<()> {
    let channel = require(config.channel.as_ref(), "channel")?;
    let j = require(config.power_budget, "power_budget")?;
    let report = qpsk_bound(channel, j)?;
    write_output(out, &render(format, &report, &[report])?)
}

#[derive(Debug, Serialize)]
struct PropertyRow<'a> {
    suite: &'static str,
    property: &'a str,
    passed: bool,
    cases: usize,
    failures: usize,
    worst_residual: f64,
}

pub fn cmd_verify(config: &VerifyConfig, format: Format, out: Option<&Path>) -> CliResult<()> {
    let report: VerifyReport = verify::run(config)?;
    let rows: Vec<PropertyRow> = report
        .results
        .iter()
        .map(|r| PropertyRow {
            suite: r.suite.name(),
            property: &r.property,
            passed: r.passed,
            cases: r.cases,
            failures: r.failures,
            worst_residual: r.worst_residual,
        })
        .collect();
    for r in &rows {
        eprintln!(
            "{} {:<20} {} (cases {}, failures {}, worst {:.3e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.property,
            r.cases,
            r.failures,
            r.worst_residual
        );
    }
    write_output(out, &render(format, &report, &rows)?)?;
    if report.all_passed {
        Ok(())
    } else {
        let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.property).collect();
        Err(CliError::Verification(failed.join("; ")))
    }
}

/// Axis values in increasing order.
pub fn axis_values(spec: &SweepSpec) -> CliResult<Vec<f64>> {
    let mut values = if let Some(v) = &spec.values {
        v.clone()
    } else {
        match (spec.start, spec.stop, spec.points) {
            (Some(a), Some(b), Some(n)) => {
                if n == 0 || a.is_nan() || b.is_nan() || a > b {
                    return Err(usage(format!("empty sweep range [{a}, {b}] with {n} points")));
                }
                if spec.log && a <= 0.0 {
                    return Err(usage("log sweep needs a positive start"));
                }
                (0..n)
                    .map(|i| {
                        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                        if spec.log {
                            a * (b / a).powf(t)
                        } else {
                            a + (b - a) * t
                        }
                    })
                    .collect()
            }
            (None, None, None) => Vec::new(),
            _ => return Err(usage("sweep needs all of start, stop and points, or explicit values")),
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(usage("sweep values must be finite"));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn with_magnitude(g: ComplexGain, mag: f64, mode: ChannelMode) -> ComplexGain {
    match mode {
        ChannelMode::Real => ComplexGain::real(mag.abs() * g.0.re.signum()),
        ChannelMode::Complex => ComplexGain::from_polar(mag, g.phase()),
    }
}

/// Z-channel limit of the fixed construction on a modified channel.
fn limit_on(channel: &WiretapChannel, base: &AchievabilityResult) -> Option<f64> {
    if !matches!(base.amplitude_source, AmplitudeSource::Margin | AmplitudeSource::LimitOptimized) {
        return None;
    }
    let (p1, p2) = crossover_probs(channel, base.theta, base.a).ok()?;
    zchannel_limit(base.phi, p1, p2).ok()
}

fn row(axis_value: f64, r: RateReport, limit_rate: Option<f64>) -> SweepRow {
    SweepRow { axis_value, i1: r.i1, i2: r.i2, rs: r.rs, limit_rate }
}

pub fn sweep_rows(config: &RunConfig) -> CliResult<Vec<SweepRow>> {
    let channel = require(config.channel.as_ref(), "channel")?;
    let spec = require(config.sweep.as_ref(), "sweep")?;
    let values = axis_values(spec)?;
    let mode = channel.mode();

    if spec.axis == SweepAxis::B {
        let align = alignment_for(channel)?;
        let a = choose_amplitude(channel, align.theta)?;
        let phi = spec.phi.unwrap_or(0.5);
        let (p1, p2) = crossover_probs(channel, align.theta, a)?;
        let limit = zchannel_limit(phi, p1, p2)?;
        let dir = match mode {
            ChannelMode::Real => Complex64::new(channel.w2().0.re.signum(), 0.0),
            ChannelMode::Complex => Complex64::from_polar(1.0, align.capital_phi),
        };
        let values = if spec.values.is_none() && spec.start.is_none() {
            let base = a.abs().max(1.0);
            (0..=config.construct.max_doublings).map(|k| base * 2f64.powi(k as i32)).collect()
        } else {
            values
        };
        if values.is_empty() {
            return Err(usage("empty sweep"));
        }
        return values
            .into_iter()
            .filter(|&b| b != a)
            .map(|b| {
                let input = DiscreteInput::new(vec![dir * a, dir * b], vec![phi, 1.0 - phi])?;
                Ok(row(b, secrecy_rate(channel, &input)?, Some(limit)))
            })
            .collect();
    }

    if values.is_empty() {
        return Err(usage("empty sweep"));
    }
    let base = achieve(channel, &config.construct, config.threshold_choice)?;
    let input = &base.input;
    values
        .into_iter()
        .map(|v| {
            Ok(match spec.axis {
                SweepAxis::B => unreachable!("handled above"),
                SweepAxis::W1Mag | SweepAxis::W2Mag => {
                    let (mut w1, mut w2) = (channel.w1(), channel.w2());
                    if spec.axis == SweepAxis::W1Mag {
                        w1 = with_magnitude(w1, v, mode);
                    } else {
                        w2 = with_magnitude(w2, v, mode);
                    }
                    let ch = channel.with_gains(w1, w2)?;
                    row(v, secrecy_rate(&ch, input)?, limit_on(&ch, &base))
                }
                SweepAxis::Power => {
                    let r = apply_power_constraint(&base, v)?;
                    let e = base.exact_rate;
                    row(v, RateReport::new(r.alpha * e.i1, r.alpha * e.i2, r.alpha * e.power), None)
                }
                SweepAxis::EaveShift => {
                    let eave = channel.eave_adc();
                    let shifted = crate::adc::ComplexAdcPair::new(
                        eave.real_part.shift_thresholds(-v)?,
                        eave.imag_part.shift_thresholds(-v)?,
                    );
                    let ch = channel.with_adcs(channel.legit_adc().clone(), shifted)?;
                    row(v, secrecy_rate(&ch, input)?, limit_on(&ch, &base))
                }
            })
        })
        .collect()
}

pub fn cmd_sweep(config: &RunConfig, format: Format, out: Option<&Path>) -> CliResult<()> {
    let rows = sweep_rows(config)?;
    write_output(out, &render(format, &rows, &rows)?)
}
