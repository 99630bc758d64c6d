//! Finite-support search for good inputs under an average power budget, and
//! the structural checks an optimal input has to pass.
//!
//! The search is multi-start Nelder-Mead over unconstrained coordinates:
//! support points directly and probabilities through a softmax. Inputs whose
//! power exceeds the budget are scaled radially onto it. Everything returned
//! is a lower bound on the supremum of the Wyner rate, never a certificate.

use std::cmp::Ordering;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{transition_matrix, transition_row, ChannelMode, Receiver, WiretapChannel};
use crate::error::{finite, Error, Result};
use crate::infotheory::{information_density, output_distribution, secrecy_rate, DiscreteInput, RateReport};

/// Points closer than this are merged.
pub const MERGE_TOL: f64 = 1e-9;
/// Probabilities below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;
/// Points lighter than this are dropped in the later polish rounds.
const POLISH_PRUNE: f64 = 1e-6;
/// Points closer than this (relative to the budget radius) are merged in the
/// later polish rounds.
const POLISH_MERGE: f64 = 1e-3;
/// Inputs within this relative distance of the budget are moved onto it.
const SNAP_TOL: f64 = 1e-6;
const MAX_SUPPORT: usize = 64;
const POLISH_ROUNDS: usize = 6;
/// Relative distance to the budget at which the constraint counts as active.
const ACTIVE_TOL: f64 = 1e-12;
const DERIV_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeConfig {
    pub support_size: usize,
    /// Average power budget `J`.
    pub power_budget: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Nelder-Mead stops when the simplex cost spread falls below this (bits).
    pub convergence_tol: f64,
    /// Iteration cap per Nelder-Mead run.
    pub max_iterations: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self { support_size: 4, power_budget: 1.0, restarts: 8, seed: 0, convergence_tol: 1e-13, max_iterations: 4000 }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_SUPPORT).contains(&self.support_size) {
            return Err(Error::InvalidConfig(format!("support_size {} outside 2..={MAX_SUPPORT}", self.support_size)));
        }
        let j = finite("power_budget", self.power_budget)?;
        if j <= 0.0 {
            return Err(Error::InvalidConfig(format!("power budget {j} must be positive")));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig("convergence_tol must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Summary of one restart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub restart: usize,
    pub iterations: u64,
    pub rs: f64,
    pub power: f64,
}

/// Best input over all restarts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeOutcome {
    pub input: DiscreteInput,
    pub report: RateReport,
    /// Per-restart results in restart order.
    pub restarts: Vec<RestartSummary>,
    /// Running maximum of the rate over the restarts.
    pub best_so_far: Vec<f64>,
}

/// Maps search coordinates to an input law.
struct Codec {
    complex: bool,
    power_budget: f64,
}

impl Codec {
    fn dims_per_point(&self) -> usize {
        if self.complex {
            3
        } else {
            2
        }
    }

    fn n_points(&self, params: &[f64]) -> usize {
        params.len() / self.dims_per_point()
    }

    fn decode(&self, params: &[f64]) -> Result<DiscreteInput> {
        let n = self.n_points(params);
        let (coords, logits) = params.split_at(params.len() - n);
        let points: Vec<Complex64> = if self.complex {
            coords.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
        } else {
            coords.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        };
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let power: f64 = points.iter().zip(&probs).map(|(x, p)| p * x.norm_sqr()).sum();
        let points = if power > self.power_budget {
            let scale = (self.power_budget / power).sqrt();
            points.iter().map(|x| x * scale).collect()
        } else {
            points
        };
        canonicalize(&points, &probs, MERGE_TOL, PRUNE_TOL)
    }

    fn encode(&self, input: &DiscreteInput) -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len() * self.dims_per_point());
        for x in input.points() {
            out.push(x.re);
            if self.complex {
                out.push(x.im);
            }
        }
        out.extend(input.probs().iter().map(|p| p.ln()));
        out
    }
}

/// Merges points within `merge` into the heavier one, drops masses below
/// `prune` and renormalizes.
fn canonicalize(points: &[Complex64], probs: &[f64], merge: f64, prune: f64) -> Result<DiscreteInput> {
    let mut pts: Vec<Complex64> = Vec::with_capacity(points.len());
    let mut ps: Vec<f64> = Vec::with_capacity(points.len());
    for (&x, &p) in points.iter().zip(probs) {
        if !(x.re.is_finite() && x.im.is_finite() && p.is_finite()) {
            return Err(Error::InvalidInput("non-finite optimizer state".into()));
        }
        match pts.iter().position(|z| (z - x).norm() <= merge) {
            Some(i) => {
                if p > ps[i] {
                    pts[i] = x;
                }
                ps[i] += p;
            }
            None => {
                pts.push(x);
                ps.push(p);
            }
        }
    }
    let heaviest = ps.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..pts.len()).filter(|&i| ps[i] >= prune || ps[i] == heaviest).collect();
    let total: f64 = keep.iter().map(|&i| ps[i]).sum();
    DiscreteInput::new(keep.iter().map(|&i| pts[i]).collect(), keep.iter().map(|&i| ps[i] / total).collect())
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    channel: &'a WiretapChannel,
    codec: &'a Codec,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, params: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        // Invalid states are pushed out of the simplex rather than aborting it.
        Ok(match self.codec.decode(params) {
            Ok(input) => secrecy_rate(self.channel, &input).map(|r| -r.rs).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        })
    }
}

fn initial_simplex(x0: &[f64], codec: &Codec) -> Vec<Vec<f64>> {
    let n = codec.n_points(x0);
    let coord_dims = x0.len() - n;
    let step = 0.3 * codec.power_budget.sqrt();
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += if i < coord_dims { step } else { 1.0 };
        simplex.push(v);
    }
    simplex
}

fn nelder_mead(objective: &Objective, x0: Vec<f64>, config: &OptimizeConfig) -> Result<(Vec<f64>, f64, u64)> {
    let solver = NelderMead::new(initial_simplex(&x0, objective.codec))
        .with_sd_tolerance(config.convergence_tol)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let res = Executor::new(*objective, solver)
        .configure(|s| s.max_iters(config.max_iterations))
        .run()
        .map_err(|e| Error::InvalidConfig(format!("Nelder-Mead failed: {e}")))?;
    let state = res.state();
    let best = state.get_best_param().cloned().unwrap_or(x0);
    Ok((best, state.get_best_cost(), state.get_iter()))
}

/// Nelder-Mead from `x0`, restarted from its own best point until the gain
/// per round drops below the tolerance. Light points are pruned before the
/// last rounds so every reported support point carries real mass.
fn local_search(objective: &Objective, x0: Vec<f64>, config: &OptimizeConfig) -> Result<(DiscreteInput, u64)> {
    let codec = objective.codec;
    let (mut x, mut cost, mut iters) = nelder_mead(objective, x0, config)?;
    for round in 0..POLISH_ROUNDS {
        if round >= POLISH_ROUNDS / 2 {
            let input = codec.decode(&x)?;
            let radius = POLISH_MERGE * codec.power_budget.sqrt();
            let pruned = canonicalize(input.points(), input.probs(), radius, POLISH_PRUNE)?;
            let px = codec.encode(&pruned);
            let pc = objective.cost(&px).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            if pc.is_finite() {
                x = px;
                cost = pc;
            }
        }
        let (nx, nc, ni) = nelder_mead(objective, x.clone(), config)?;
        iters += ni;
        let gain = cost - nc;
        if nc <= cost {
            x = nx;
            cost = nc;
        }
        if gain <= config.convergence_tol && round >= POLISH_ROUNDS / 2 {
            break;
        }
    }
    let input = codec.decode(&x)?;
    Ok((snap_to_budget(objective.channel, input, codec.power_budget)?, iters))
}

/// Scales an input sitting just inside the budget onto it when that does not
/// lower the rate, so the power constraint is either clearly slack or exact.
fn snap_to_budget(channel: &WiretapChannel, input: DiscreteInput, budget: f64) -> Result<DiscreteInput> {
    let power = input.power();
    if power <= 0.0 || power >= budget || power < budget * (1.0 - SNAP_TOL) {
        return Ok(input);
    }
    let snapped = input.scaled((budget / power).sqrt())?;
    if snapped.power() > budget {
        return Ok(input);
    }
    if secrecy_rate(channel, &snapped)?.rs >= secrecy_rate(channel, &input)?.rs {
        Ok(snapped)
    } else {
        Ok(input)
    }
}

fn starting_point(codec: &Codec, config: &OptimizeConfig, restart: usize) -> Vec<f64> {
    let n = config.support_size;
    let r = config.power_budget.sqrt();
    let mut coords = Vec::with_capacity(n * 2);
    let mut logits = vec![0.0; n];
    if restart == 0 {
        for i in 0..n {
            if codec.complex {
                let z =
                    Complex64::from_polar(r, std::f64::consts::TAU * i as f64 / n as f64 + std::f64::consts::FRAC_PI_4);
                coords.extend([z.re, z.im]);
            } else {
                coords.push(r * (-1.0 + 2.0 * i as f64 / (n - 1) as f64));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        let dims = if codec.complex { 2 * n } else { n };
        for _ in 0..dims {
            coords.push(rng.gen_range(-2.0 * r..2.0 * r));
        }
        for l in logits.iter_mut() {
            *l = rng.gen_range(-1.0..1.0);
        }
    }
    coords.extend(logits);
    coords
}

/// Sorted support used for tie-breaking.
fn sorted_support(input: &DiscreteInput) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = input.points().iter().map(|z| (z.re, z.im)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}

/// True when `a` should be preferred over `b`.
fn better(a: &(DiscreteInput, RateReport), b: &(DiscreteInput, RateReport), tol: f64) -> bool {
    if (a.1.rs - b.1.rs).abs() > tol {
        return a.1.rs > b.1.rs;
    }
    match a.1.power.total_cmp(&b.1.power) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => {
            let (sa, sb) = (sorted_support(&a.0), sorted_support(&b.0));
            for (x, y) in sa.iter().zip(&sb) {
                match x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)) {
                    Ordering::Equal => continue,
                    o => return o == Ordering::Less,
                }
            }
            sa.len() < sb.len()
        }
    }
}

/// Maximizes `I(X;Y1) - I(X;Y2)` over inputs with `E|X|^2 <= J`.
pub fn optimize_wyner_rate(channel: &WiretapChannel, config: &OptimizeConfig) -> Result<OptimizeOutcome> {
    optimize_with_starts(channel, config, &[])
}

/// Like [`optimize_wyner_rate`], with extra starting inputs run after the
/// regular restarts.
pub fn optimize_with_starts(
    channel: &WiretapChannel,
    config: &OptimizeConfig,
    starts: &[DiscreteInput],
) -> Result<OptimizeOutcome> {
    config.validate()?;
    let codec = Codec { complex: channel.mode() == ChannelMode::Complex, power_budget: config.power_budget };
    let objective = Objective { channel, codec: &codec };
    let total = config.restarts + starts.len();
    let runs: Vec<(DiscreteInput, RateReport, u64)> = (0..total)
        .into_par_iter()
        .map(|restart| {
            let x0 = match restart.checked_sub(config.restarts) {
                Some(k) => codec.encode(&starts[k]),
                None => starting_point(&codec, config, restart),
            };
            let (input, iters) = local_search(&objective, x0, config)?;
            let report = secrecy_rate(channel, &input)?;
            Ok((input, report, iters))
        })
        .collect::<Result<_>>()?;

    let mut summaries = Vec::with_capacity(total);
    let mut best_so_far = Vec::with_capacity(total);
    let mut best: Option<(DiscreteInput, RateReport)> = None;
    for (restart, (input, report, iterations)) in runs.into_iter().enumerate() {
        summaries.push(RestartSummary { seed: config.seed, restart, iterations, rs: report.rs, power: report.power });
        let cand = (input, report);
        if best.as_ref().is_none_or(|b| better(&cand, b, config.convergence_tol)) {
            best = Some(cand);
        }
        let current = best.as_ref().map(|b| b.1.rs).unwrap_or(f64::NEG_INFINITY);
        best_so_far.push(best_so_far.last().map_or(current, |&m: &f64| m.max(current)));
    }
    let (input, report) = best.expect("at least one restart");
    Ok(OptimizeOutcome { input, report, restarts: summaries, best_so_far })
}

/// Same search on the role-swapped objective `I(X;Y2) - I(X;Y1)`. The
/// returned report is for the swapped channel, so its `rs` is the value.
pub fn reverse_rate_optimize(channel: &WiretapChannel, config: &OptimizeConfig) -> Result<OptimizeOutcome> {
    optimize_wyner_rate(&channel.swapped(), config)
}

/// Sum of the forward and reverse optima. A candidate value only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub forward: f64,
    pub reverse: f64,
    pub candidate: f64,
}

pub fn decomposition_candidate(channel: &WiretapChannel, config: &OptimizeConfig) -> Result<Decomposition> {
    let forward = optimize_wyner_rate(channel, config)?.report.rs;
    let reverse = reverse_rate_optimize(channel, config)?.report.rs;
    Ok(Decomposition { forward, reverse, candidate: forward + reverse })
}

/// Outcome of the support-sign test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportVerdict {
    pub passed: bool,
    /// `|w1| > |w2|`
    pub legit_stronger: bool,
    pub reason: String,
}

fn real_support(input: &DiscreteInput) -> Result<Vec<f64>> {
    input.require_real()?;
    Ok(input.iter().filter(|&(_, p)| p > 0.0).map(|(x, _)| x.re).collect())
}

/// Sign structure an optimal real input must have: single-signed support when
/// the eavesdropper is stronger, and not confined to either open half-line
/// when the legitimate receiver is stronger.
pub fn check_support_condition(input: &DiscreteInput, w1: f64, w2: f64) -> Result<SupportVerdict> {
    let (m1, m2) = (finite("w1", w1)?.abs(), finite("w2", w2)?.abs());
    if m1 == m2 {
        return Err(Error::EqualGainMagnitudes(m1));
    }
    let support = real_support(input)?;
    let all_nonneg = support.iter().all(|&x| x >= 0.0);
    let all_nonpos = support.iter().all(|&x| x <= 0.0);
    let all_pos = support.iter().all(|&x| x > 0.0);
    let all_neg = support.iter().all(|&x| x < 0.0);
    let (passed, reason) = if m1 < m2 {
        let ok = all_nonneg || all_nonpos;
        (ok, if ok { "support is single-signed" } else { "support has both signs" })
    } else {
        let ok = !all_pos && !all_neg;
        (ok, if ok { "support is not inside an open half-line" } else { "support lies in an open half-line" })
    };
    Ok(SupportVerdict { passed, legit_stronger: m1 > m2, reason: reason.into() })
}

/// Law of `|X|` for a real input.
pub fn fold_input(input: &DiscreteInput) -> Result<DiscreteInput> {
    input.folded()
}

fn require_real_one_bit(channel: &WiretapChannel) -> Result<()> {
    if channel.mode() != ChannelMode::Real
        || !channel.legit_adc().real_part.is_symmetric_one_bit()
        || !channel.eave_adc().real_part.is_symmetric_one_bit()
    {
        return Err(Error::Precondition("needs a real channel with one-bit ADCs at threshold 0 on both sides".into()));
    }
    Ok(())
}

/// `R_s(|X|) - R_s(X)`.
pub fn folding_gap(channel: &WiretapChannel, input: &DiscreteInput) -> Result<f64> {
    require_real_one_bit(channel)?;
    input.require_real()?;
    if input.is_constant() {
        return Err(Error::Precondition("folding gap needs a non-constant input".into()));
    }
    Ok(secrecy_rate(channel, &fold_input(input)?)?.rs - secrecy_rate(channel, input)?.rs)
}

/// Inputs with the same law of `|X|` as `input` but one point reflected.
pub fn unfold_alternatives(input: &DiscreteInput) -> Result<Vec<DiscreteInput>> {
    input.require_real()?;
    let mut out = Vec::new();
    for (i, x) in input.points().iter().enumerate() {
        if x.re == 0.0 {
            continue;
        }
        let mut pts = input.points().to_vec();
        pts[i] = -*x;
        if let Ok(alt) = DiscreteInput::new(pts, input.probs().to_vec()) {
            out.push(alt);
        }
    }
    Ok(out)
}

/// Support test plus, on failure, the best folded or unfolded alternative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportCheck {
    pub verdict: SupportVerdict,
    pub rate: f64,
    /// Strictly better input with the same `|X|` law, when the test failed.
    pub alternative: Option<(DiscreteInput, RateReport)>,
}

pub fn support_check_with_escape(channel: &WiretapChannel, input: &DiscreteInput) -> Result<SupportCheck> {
    let verdict = check_support_condition(input, channel.w1().0.re, channel.w2().0.re)?;
    let rate = secrecy_rate(channel, input)?.rs;
    let mut alternative = None;
    if !verdict.passed {
        let candidates = if verdict.legit_stronger { unfold_alternatives(input)? } else { vec![fold_input(input)?] };
        for cand in candidates {
            let r = secrecy_rate(channel, &cand)?;
            if r.rs > rate && alternative.as_ref().is_none_or(|(_, b): &(DiscreteInput, RateReport)| r.rs > b.rs) {
                alternative = Some((cand, r));
            }
        }
        match &alternative {
            Some((alt, r)) => log::info!(
                "support test failed ({}); alternative {:?} raises the rate from {rate} to {}",
                verdict.reason,
                alt.points().iter().map(|z| z.re).collect::<Vec<_>>(),
                r.rs
            ),
            None => log::warn!("support test failed ({}) and no alternative improved the rate", verdict.reason),
        }
    }
    Ok(SupportCheck { verdict, rate, alternative })
}

/// Numerical KKT evaluation for a real input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub lambda: f64,
    pub rate: f64,
    pub power: f64,
    pub power_budget: f64,
    pub constraint_active: bool,
    pub grid: Vec<f64>,
    /// `i1(x) - i2(x) - lambda (x^2 - E[X^2]) - R_s` on the grid.
    pub slack: Vec<f64>,
    /// Same quantity at each support point.
    pub support_slack: Vec<f64>,
    pub max_offsupport_violation: f64,
    pub max_onsupport_residual: f64,
    pub complementary_slackness_residual: f64,
}

/// `n` evenly spaced points on `[-3 r, 3 r]` with `r` the support radius.
pub fn kkt_grid(input: &DiscreteInput, n: usize) -> Vec<f64> {
    let r = input.points().iter().map(|z| z.re.abs()).fold(0.0, f64::max).max(1e-3);
    let span = 3.0 * r;
    (0..n).map(|i| -span + 2.0 * span * i as f64 / (n - 1).max(1) as f64).collect()
}

pub fn kkt_check(
    channel: &WiretapChannel,
    input: &DiscreteInput,
    power_budget: f64,
    grid: &[f64],
) -> Result<KktReport> {
    if channel.mode() != ChannelMode::Real {
        return Err(Error::Precondition("KKT check is implemented for real channels".into()));
    }
    let j = finite("J", power_budget)?;
    if j <= 0.0 {
        return Err(Error::OutOfRange { name: "J", value: j, range: "(0, inf)" });
    }
    let support = real_support(input)?;
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("grid must be finite".into()));
    }
    let (lo, hi) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if support.iter().any(|&x| x < lo || x > hi) {
        return Err(Error::InvalidInput(format!("grid [{lo}, {hi}] does not cover the support")));
    }

    let py1 = output_distribution(input, &transition_matrix(channel, Receiver::Legit, input)?)?;
    let py2 = output_distribution(input, &transition_matrix(channel, Receiver::Eave, input)?)?;
    let gap = |x: f64| -> Result<f64> {
        let z = Complex64::new(x, 0.0);
        Ok(information_density(&transition_row(channel, Receiver::Legit, z)?, &py1)
            - information_density(&transition_row(channel, Receiver::Eave, z)?, &py2))
    };
    let report = secrecy_rate(channel, input)?;
    let (rate, power) = (report.rs, report.power);
    let active = power >= j * (1.0 - ACTIVE_TOL);

    let d: Vec<f64> = support.iter().map(|&x| gap(x)).collect::<Result<_>>()?;
    let lambda = if active {
        // Each support point is a maximum of the slack, so besides the value
        // equations its derivative vanishes too; both enter the fit.
        let (mut num, mut den) = (0.0, 0.0);
        for (&x, &di) in support.iter().zip(&d) {
            let e = x * x - power;
            let h = DERIV_STEP * x.abs().max(1.0);
            let slope = (gap(x + h)? - gap(x - h)?) / (2.0 * h);
            num += (di - rate) * e + slope * 2.0 * x;
            den += e * e + 4.0 * x * x;
        }
        if den > 0.0 {
            (num / den).max(0.0)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let slack_of = |x: f64, g: f64| g - lambda * (x * x - power) - rate;
    let support_slack: Vec<f64> = support.iter().zip(&d).map(|(&x, &g)| slack_of(x, g)).collect();
    let slack: Vec<f64> = grid.iter().map(|&x| Ok(slack_of(x, gap(x)?))).collect::<Result<_>>()?;
    let max_offsupport_violation = grid
        .iter()
        .zip(&slack)
        .filter(|(x, _)| support.iter().all(|s| (*x - s).abs() > MERGE_TOL))
        .map(|(_, &s)| s.max(0.0))
        .fold(0.0, f64::max);
    let max_onsupport_residual = support_slack.iter().map(|s| s.abs()).fold(0.0, f64::max);
    Ok(KktReport {
        lambda,
        rate,
        power,
        power_budget: j,
        constraint_active: active,
        grid: grid.to_vec(),
        slack,
        support_slack,
        max_offsupport_violation,
        max_onsupport_residual,
        complementary_slackness_residual: lambda * (power - j).abs(),
    })
}
