//! Binary inputs with a positive secrecy rate.
//!
//! The construction puts mass `phi` on `a e^{j Phi}` and `1 - phi` on a far
//! point `b e^{j Phi}`. As `b` grows both receivers degenerate to Z-channels
//! whose crossover probabilities are the chances of seeing the far point's
//! saturated output when `a` was sent. The phase `Phi` is chosen so that the
//! legitimate saturated output can be treated as `1 + j` regardless of the
//! gain phases, and `a` is chosen so that the legitimate crossover is the
//! smaller one. A finite `b` with a positive exact rate is then found by
//! sweeping.
//!
//! Legitimate receivers with general ADCs are handled by translating the
//! input so one legitimate threshold per component sits at the origin
//! ([`reduce_to_symmetric`]).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adc::{AdcSpec, ComplexAdcPair};
use crate::channel::{cell_probability, ChannelMode, ComplexGain, WiretapChannel};
use crate::error::{finite, Error, Result};
use crate::infotheory::{secrecy_rate, z_rate, DiscreteInput, RateReport};

/// Result of the phase alignment step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlignment {
    /// Phase of `w2 X`, in `(0, pi/4]` for complex channels.
    pub theta: f64,
    /// Input phase `Phi = theta - arg w2`.
    pub capital_phi: f64,
    /// Alignment index with `(m-1) pi/2 <= delta < m pi/2`.
    pub m: i64,
    /// `arg w1 - arg w2` normalized to `[0, 2 pi)`.
    pub delta: f64,
    /// Legitimate output the far point saturates to.
    #[serde(with = "complex_value")]
    pub y1_bar: Complex64,
}

/// Aligns the input phase so that `theta + delta = m pi/2 - theta`.
pub fn align_phase(w1: ComplexGain, w2: ComplexGain) -> Result<PhaseAlignment> {
    for (name, w) in [("w1", w1), ("w2", w2)] {
        if w.0.re == 0.0 && w.0.im == 0.0 {
            return Err(Error::InvalidChannel(format!("{name} must be non-zero")));
        }
    }
    let mut delta = (w1.phase() - w2.phase()).rem_euclid(TAU);
    if delta >= TAU {
        delta = 0.0;
    }
    let mut m = (delta / FRAC_PI_2).floor() as i64 + 1;
    // Guard the half-open interval against rounding in the division.
    if delta >= m as f64 * FRAC_PI_2 {
        m += 1;
    } else if delta < (m - 1) as f64 * FRAC_PI_2 {
        m -= 1;
    }
    let theta = (m as f64 * FRAC_PI_2 - delta) / 2.0;
    let corner = m as f64 * FRAC_PI_2 - FRAC_PI_4;
    let y1_bar = Complex64::new(corner.cos().signum(), corner.sin().signum());
    Ok(PhaseAlignment { theta, capital_phi: theta - w2.phase(), m, delta, y1_bar })
}

/// Real-channel analogue: the input sits on `sgn(w2)` times the real line and
/// the legitimate receiver saturates to `sgn(w1 w2)`.
fn align_real(w1: f64, w2: f64) -> PhaseAlignment {
    let capital_phi = if w2 >= 0.0 { 0.0 } else { PI };
    let same = (w1 >= 0.0) == (w2 >= 0.0);
    PhaseAlignment {
        theta: 0.0,
        capital_phi,
        m: 0,
        delta: if same { 0.0 } else { PI },
        y1_bar: Complex64::new(if same { 1.0 } else { -1.0 }, 0.0),
    }
}

/// Phase alignment of a channel; real channels use the sign convention.
pub fn alignment_for(channel: &WiretapChannel) -> Result<PhaseAlignment> {
    match channel.mode() {
        ChannelMode::Real => Ok(align_real(channel.w1().0.re, channel.w2().0.re)),
        ChannelMode::Complex => align_phase(channel.w1(), channel.w2()),
    }
}

fn require_symmetric_legit(channel: &WiretapChannel) -> Result<()> {
    let ok = match channel.mode() {
        ChannelMode::Real => channel.legit_adc().real_part.is_symmetric_one_bit(),
        ChannelMode::Complex => channel.legit_adc().is_symmetric_one_bit(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(
            "the legitimate receiver must use one-bit ADCs with threshold 0; reduce the channel first".into(),
        ))
    }
}

fn upper_cell(spec: &AdcSpec, mean: f64) -> Result<f64> {
    cell_probability(spec, spec.levels() - 1, mean)
}

/// Z-channel crossover probabilities `(p1, p2)` of the construction with
/// near amplitude `a`.
///
/// Complex mode: `p1 = Q(-|w1| a cos t) Q(-|w1| a sin t)` and
/// `p2 = Q(q_R - |w2| a cos t) Q(q_I - |w2| a sin t)` with the top eavesdropper
/// thresholds `q_R`, `q_I`. Real mode drops the second factors and ignores
/// `theta`.
pub fn crossover_probs(channel: &WiretapChannel, theta: f64, a: f64) -> Result<(f64, f64)> {
    require_symmetric_legit(channel)?;
    let a = finite("a", a)?;
    let (m1, m2) = (channel.w1().magnitude(), channel.w2().magnitude());
    let legit = &channel.legit_adc().real_part;
    let eave = channel.eave_adc();
    match channel.mode() {
        ChannelMode::Real => Ok((upper_cell(legit, m1 * a)?, upper_cell(&eave.real_part, m2 * a)?)),
        ChannelMode::Complex => {
            check_theta(theta)?;
            let (s, c) = theta.sin_cos();
            let p1 = upper_cell(legit, m1 * a * c)? * upper_cell(&channel.legit_adc().imag_part, m1 * a * s)?;
            let p2 = upper_cell(&eave.real_part, m2 * a * c)? * upper_cell(&eave.imag_part, m2 * a * s)?;
            Ok((p1, p2))
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= FRAC_PI_4 + 1e-15 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "theta", value: theta, range: "(0, pi/4]" })
    }
}

/// Threshold for `a`: the construction needs `a > bound` when
/// `|w2| > |w1|` and `a < bound` otherwise.
pub fn amplitude_bound(channel: &WiretapChannel, theta: f64) -> Result<f64> {
    let s = channel.w2().magnitude() - channel.w1().magnitude();
    if s == 0.0 {
        return Err(Error::EqualGainMagnitudes(channel.w1().magnitude()));
    }
    let eave = channel.eave_adc();
    Ok(match channel.mode() {
        ChannelMode::Real => eave.real_part.top_threshold() / s,
        ChannelMode::Complex => {
            check_theta(theta)?;
            let (sin, cos) = theta.sin_cos();
            let r = eave.real_part.top_threshold() / (s * cos);
            let i = eave.imag_part.top_threshold() / (s * sin);
            if s > 0.0 {
                r.max(i)
            } else {
                r.min(i)
            }
        }
    })
}

/// Near amplitude satisfying both strict inequalities with margin
/// `max(1, |bound|)` on the feasible side.
pub fn choose_amplitude(channel: &WiretapChannel, theta: f64) -> Result<f64> {
    let bound = amplitude_bound(channel, theta)?;
    let s = channel.w2().magnitude() - channel.w1().magnitude();
    Ok(bound + s.signum() * bound.abs().max(1.0))
}

/// Large-`b` limit of the secrecy rate, `f_phi(p1) - f_phi(p2)`.
pub fn zchannel_limit(phi: f64, p1: f64, p2: f64) -> Result<f64> {
    Ok(z_rate(phi, p1)? - z_rate(phi, p2)?)
}

/// How `construct_positive_rate` picks among successful candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Smallest `b`, then earliest `phi` in grid order.
    #[default]
    First,
    /// Largest exact rate.
    Best,
}

/// Origin of the near amplitude that produced the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeSource {
    /// `choose_amplitude`'s margin rule.
    Margin,
    /// Feasible amplitude maximizing the Z-channel limit.
    LimitOptimized,
    /// Near and far points on opposite sides of a legitimate quadrant
    /// boundary inside the eavesdropper's saturated corner.
    SplitCone,
    /// Amplitude scan outside the feasible half-line, far point in either
    /// direction.
    Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructOptions {
    pub phi_grid: Vec<f64>,
    /// `b_k = max(|a|, 1) 2^k` for `k = 0..=max_doublings`.
    pub max_doublings: u32,
    pub rate_floor: f64,
    pub selection: Selection,
    /// Try further amplitudes when the margin rule finds nothing above the floor.
    pub amplitude_fallback: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        let mut phi_grid = vec![0.5];
        phi_grid.extend((1..=9).filter(|&i| i != 5).map(|i| i as f64 / 10.0));
        Self { phi_grid, max_doublings: 40, rate_floor: 1e-9, selection: Selection::First, amplitude_fallback: true }
    }
}

/// One evaluated `(b, phi)` candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub b: f64,
    pub phi: f64,
    pub i1: f64,
    pub i2: f64,
    pub rs: f64,
    pub limit_rate: f64,
}

/// Constructed binary input together with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AchievabilityResult {
    pub mode: ChannelMode,
    pub phi: f64,
    pub a: f64,
    pub b: f64,
    pub capital_phi: f64,
    /// Phase of the far point; equals `capital_phi` except for split-cone inputs.
    pub far_phase: f64,
    pub m: i64,
    pub theta: f64,
    pub delta: f64,
    #[serde(with = "complex_value")]
    pub y1_bar: Complex64,
    pub p1: f64,
    pub p2: f64,
    pub limit_rate: f64,
    pub exact_rate: RateReport,
    pub alpha: f64,
    /// `alpha * exact_rate.rs`
    pub power_limited_rate: f64,
    pub amplitude_source: AmplitudeSource,
    /// Constructed input on the channel it was built for.
    pub input: DiscreteInput,
    /// Translation applied to reach the original channel, when reduced.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_complex_value")]
    pub translation: Option<Complex64>,
    #[serde(default)]
    pub trace: Vec<SweepSample>,
}

impl AchievabilityResult {
    /// Construction input for another far amplitude `b`.
    pub fn input_at(&self, b: f64) -> Result<DiscreteInput> {
        binary_input(self.capital_phi, self.far_phase, self.phi, self.a, b)
    }
}

fn binary_input(near_phase: f64, far_phase: f64, phi: f64, a: f64, b: f64) -> Result<DiscreteInput> {
    DiscreteInput::new(vec![unit(near_phase) * a, unit(far_phase) * b], vec![phi, 1.0 - phi])
}

/// `e^{j phi}` with exact values on the real axis.
fn unit(phase: f64) -> Complex64 {
    let phase = phase.rem_euclid(TAU);
    if phase == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if phase == PI {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, phase)
    }
}

struct Candidate {
    a: f64,
    near_phase: f64,
    far_phase: f64,
    source: AmplitudeSource,
}

/// Runs the construction on a channel whose legitimate receiver uses
/// symmetric one-bit ADCs.
pub fn construct_positive_rate(channel: &WiretapChannel, options: &ConstructOptions) -> Result<AchievabilityResult> {
    validate_options(options)?;
    let (m1, m2) = (channel.w1().magnitude(), channel.w2().magnitude());
    if m1 == m2 {
        return Err(Error::EqualGainMagnitudes(m1));
    }
    require_symmetric_legit(channel)?;
    let align = alignment_for(channel)?;

    let margin = choose_amplitude(channel, align.theta)?;
    let mut tried = Vec::new();
    let mut best_seen = f64::NEG_INFINITY;
    let first = Candidate {
        a: margin,
        near_phase: align.capital_phi,
        far_phase: align.capital_phi,
        source: AmplitudeSource::Margin,
    };
    for cand in std::iter::once(first).chain(fallback_candidates(channel, &align, options, margin)?) {
        let trace = sweep(channel, &align, options, &cand)?;
        best_seen = trace.iter().map(|s| s.rs).fold(best_seen, f64::max);
        tried.push(cand.a);
        if let Some(pick) = select(&trace, options) {
            let (p1, p2) = crossover_probs(channel, align.theta, cand.a)?;
            let input = binary_input(cand.near_phase, cand.far_phase, pick.phi, cand.a, pick.b)?;
            let exact_rate = secrecy_rate(channel, &input)?;
            return Ok(AchievabilityResult {
                mode: channel.mode(),
                phi: pick.phi,
                a: cand.a,
                b: pick.b,
                capital_phi: cand.near_phase,
                far_phase: cand.far_phase,
                m: align.m,
                theta: align.theta,
                delta: align.delta,
                y1_bar: align.y1_bar,
                p1,
                p2,
                limit_rate: zchannel_limit(pick.phi, p1, p2)?,
                exact_rate,
                alpha: 1.0,
                power_limited_rate: exact_rate.rs,
                amplitude_source: cand.source,
                input,
                translation: None,
                trace,
            });
        }
    }
    Err(Error::SweepExhausted(format!(
        "no candidate exceeded {:e} bits (best {best_seen:e}) over amplitudes {tried:?}",
        options.rate_floor
    )))
}

fn validate_options(options: &ConstructOptions) -> Result<()> {
    if options.phi_grid.is_empty() || options.phi_grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::InvalidConfig("phi grid must be non-empty and inside (0, 1)".into()));
    }
    if !(options.rate_floor.is_finite() && options.rate_floor >= 0.0) {
        return Err(Error::InvalidConfig("rate floor must be finite and nonnegative".into()));
    }
    if options.max_doublings > 1000 {
        return Err(Error::InvalidConfig("max_doublings above 1000".into()));
    }
    Ok(())
}

fn fallback_candidates(
    channel: &WiretapChannel,
    align: &PhaseAlignment,
    options: &ConstructOptions,
    margin: f64,
) -> Result<Vec<Candidate>> {
    if !options.amplitude_fallback {
        return Ok(Vec::new());
    }
    let phase = align.capital_phi;
    let mut out = Vec::new();
    if let Some(a) = limit_optimal_amplitude(channel, align, options)? {
        if a != margin {
            out.push(Candidate { a, near_phase: phase, far_phase: phase, source: AmplitudeSource::LimitOptimized });
        }
    }
    if channel.mode() == ChannelMode::Complex && align.theta < FRAC_PI_4 {
        for k in 0..=30 {
            out.push(Candidate {
                a: 2f64.powi(k),
                near_phase: phase,
                far_phase: phase + FRAC_PI_4,
                source: AmplitudeSource::SplitCone,
            });
        }
    }
    let s = (channel.w2().magnitude() - channel.w1().magnitude()).signum();
    let mut scan = |a: f64| {
        for far_phase in [phase, phase + PI] {
            out.push(Candidate { a, near_phase: phase, far_phase, source: AmplitudeSource::Scan });
        }
    };
    scan(0.0);
    for k in 0..24 {
        let mag = 0.05 * 1.5f64.powi(k);
        scan(s * mag);
        scan(-s * mag);
    }
    Ok(out)
}

/// Feasible amplitude with the largest Z-channel limit over the phi grid.
fn limit_optimal_amplitude(
    channel: &WiretapChannel,
    align: &PhaseAlignment,
    options: &ConstructOptions,
) -> Result<Option<f64>> {
    let bound = amplitude_bound(channel, align.theta)?;
    let s = (channel.w2().magnitude() - channel.w1().magnitude()).signum();
    let scale = bound.abs().max(1.0);
    let mut best: Option<(f64, f64)> = None;
    for k in -40..=12 {
        let a = bound + s * scale * 2f64.powf(k as f64 / 2.0);
        let (p1, p2) = crossover_probs(channel, align.theta, a)?;
        for &phi in &options.phi_grid {
            let lim = zchannel_limit(phi, p1, p2)?;
            if lim > 0.0 && best.is_none_or(|(v, _)| lim > v) {
                best = Some((lim, a));
            }
        }
    }
    Ok(best.map(|(_, a)| a))
}

/// Far amplitudes `b_k = max(|a|, 1) 2^k`, cut where further doubling no
/// longer changes any transition probability.
fn b_schedule(channel: &WiretapChannel, options: &ConstructOptions, cand: &Candidate) -> Result<Vec<f64>> {
    use crate::channel::{transition_row, Receiver};
    let dir = unit(cand.far_phase);
    let base = cand.a.abs().max(1.0);
    let mut out = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for k in 0..=options.max_doublings {
        let b = base * 2f64.powi(k as i32);
        if !b.is_finite() {
            break;
        }
        let rows =
            (transition_row(channel, Receiver::Legit, dir * b)?, transition_row(channel, Receiver::Eave, dir * b)?);
        if prev.as_ref() == Some(&rows) {
            break;
        }
        prev = Some(rows);
        out.push(b);
    }
    Ok(out)
}

fn sweep(
    channel: &WiretapChannel,
    align: &PhaseAlignment,
    options: &ConstructOptions,
    cand: &Candidate,
) -> Result<Vec<SweepSample>> {
    let (p1, p2) = crossover_probs(channel, align.theta, cand.a)?;
    let near = unit(cand.near_phase) * cand.a;
    let far = unit(cand.far_phase);
    let grid: Vec<(f64, f64)> = b_schedule(channel, options, cand)?
        .into_iter()
        .filter(|&b| far * b != near)
        .flat_map(|b| options.phi_grid.iter().map(move |&phi| (b, phi)))
        .collect();
    grid.into_par_iter()
        .map(|(b, phi)| {
            let input = binary_input(cand.near_phase, cand.far_phase, phi, cand.a, b)?;
            let r = secrecy_rate(channel, &input)?;
            Ok(SweepSample { b, phi, i1: r.i1, i2: r.i2, rs: r.rs, limit_rate: zchannel_limit(phi, p1, p2)? })
        })
        .collect()
}

fn select(trace: &[SweepSample], options: &ConstructOptions) -> Option<SweepSample> {
    let mut hits = trace.iter().filter(|s| s.rs > options.rate_floor);
    match options.selection {
        // The trace is ordered by b, then by phi grid position.
        Selection::First => hits.next().copied(),
        Selection::Best => hits
            .fold(None, |acc: Option<&SweepSample>, s| match acc {
                Some(t) if t.rs >= s.rs => Some(t),
                _ => Some(s),
            })
            .copied(),
    }
}

/// Duty-cycles the construction so its average power is at most `power`.
pub fn apply_power_constraint(result: &AchievabilityResult, power: f64) -> Result<AchievabilityResult> {
    let j = finite("J", power)?;
    if j <= 0.0 {
        return Err(Error::OutOfRange { name: "J", value: j, range: "(0, inf)" });
    }
    let used = result.exact_rate.power;
    let alpha = if used <= j { 1.0 } else { j / used };
    let mut out = result.clone();
    out.alpha = alpha;
    out.power_limited_rate = alpha * result.exact_rate.rs;
    Ok(out)
}

/// Which legitimate threshold per component is moved to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdChoice {
    /// Lower median threshold of each component.
    #[default]
    Median,
    /// Explicit zero-based threshold indices for the real and imaginary parts.
    Index { real: usize, imag: usize },
}

/// Equivalent problem with symmetric one-bit legitimate ADCs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub channel: WiretapChannel,
    /// Add to every input point built for `channel` to use it on the original.
    #[serde(with = "complex_value")]
    pub translation: Complex64,
    pub c_real: f64,
    pub c_imag: f64,
}

fn pick_threshold(spec: &AdcSpec, choice: Option<usize>) -> Result<f64> {
    let t = spec.thresholds();
    let idx = choice.unwrap_or((t.len() - 1) / 2);
    t.get(idx)
        .copied()
        .ok_or_else(|| Error::Precondition(format!("threshold index {idx} out of range ({} thresholds)", t.len())))
}

/// Moves the chosen legitimate thresholds to the origin by translating the
/// input, shifting the eavesdropper thresholds to match.
pub fn reduce_to_symmetric(channel: &WiretapChannel, choice: ThresholdChoice) -> Result<Reduction> {
    let (ri, ii) = match choice {
        ThresholdChoice::Median => (None, None),
        ThresholdChoice::Index { real, imag } => (Some(real), Some(imag)),
    };
    let legit = channel.legit_adc();
    let eave = channel.eave_adc();
    let w1 = channel.w1().0;
    let w2 = channel.w2().0;
    match channel.mode() {
        ChannelMode::Real => {
            let c = pick_threshold(&legit.real_part, ri)?;
            let shift = w2.re * c / w1.re;
            let eave_r = eave.real_part.shift_thresholds(shift)?;
            let reduced = channel.with_adcs(ComplexAdcPair::one_bit(), ComplexAdcPair::new(eave_r.clone(), eave_r))?;
            Ok(Reduction { channel: reduced, translation: Complex64::new(c / w1.re, 0.0), c_real: c, c_imag: 0.0 })
        }
        ChannelMode::Complex => {
            let cr = pick_threshold(&legit.real_part, ri)?;
            let ci = pick_threshold(&legit.imag_part, ii)?;
            let c = Complex64::new(cr, ci);
            let shift = w2 / w1 * c;
            let reduced = channel.with_adcs(
                ComplexAdcPair::one_bit(),
                ComplexAdcPair::new(
                    eave.real_part.shift_thresholds(shift.re)?,
                    eave.imag_part.shift_thresholds(shift.im)?,
                ),
            )?;
            Ok(Reduction { channel: reduced, translation: c / w1, c_real: cr, c_imag: ci })
        }
    }
}

/// Full pipeline: reduce when needed, construct, and report the exact rate of
/// the translated input on the original channel.
pub fn achieve(
    channel: &WiretapChannel,
    options: &ConstructOptions,
    choice: ThresholdChoice,
) -> Result<AchievabilityResult> {
    if require_symmetric_legit(channel).is_ok() {
        return construct_positive_rate(channel, options);
    }
    let reduction = reduce_to_symmetric(channel, choice)?;
    let mut result = construct_positive_rate(&reduction.channel, options)?;
    result.input = result.input.translated(reduction.translation)?;
    result.exact_rate = secrecy_rate(channel, &result.input)?;
    result.power_limited_rate = result.alpha * result.exact_rate.rs;
    result.translation = Some(reduction.translation);
    Ok(result)
}

/// Exact rates of QPSK aligned to the legitimate channel, with the
/// closed-form lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QpskReport {
    pub i1: f64,
    pub i2: f64,
    pub rs: f64,
    /// `2 (1 - h(Q(|w1| sqrt(J/2))))`
    pub i1_closed_form: f64,
    /// `2 (h(Q(|w2| sqrt(J/2))) - h(Q(|w1| sqrt(J/2))))`
    pub bound: f64,
    /// `rs >= bound` up to 1e-10.
    pub bound_holds: bool,
}

/// Uniform QPSK with power `J` rotated by `-arg w1`.
pub fn qpsk_input(w1: ComplexGain, power: f64) -> Result<DiscreteInput> {
    let rot = Complex64::from_polar((power / 2.0).sqrt(), -w1.phase());
    DiscreteInput::uniform(
        [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().map(|&(r, i)| Complex64::new(r, i) * rot).collect(),
    )
}

pub fn qpsk_bound(channel: &WiretapChannel, power: f64) -> Result<QpskReport> {
    use crate::channel::q;
    use crate::infotheory::h;
    let j = finite("J", power)?;
    if j <= 0.0 {
        return Err(Error::OutOfRange { name: "J", value: j, range: "(0, inf)" });
    }
    if channel.mode() != ChannelMode::Complex
        || !channel.legit_adc().is_symmetric_one_bit()
        || !channel.eave_adc().is_symmetric_one_bit()
    {
        return Err(Error::Precondition(
            "QPSK bound needs a complex channel with one-bit ADCs at both receivers".into(),
        ));
    }
    let input = qpsk_input(channel.w1(), j)?;
    let r = secrecy_rate(channel, &input)?;
    let amp = (j / 2.0).sqrt();
    let h1 = h(q(channel.w1().magnitude() * amp));
    let h2 = h(q(channel.w2().magnitude() * amp));
    let bound = 2.0 * (h2 - h1);
    Ok(QpskReport {
        i1: r.i1,
        i2: r.i2,
        rs: r.rs,
        i1_closed_form: 2.0 * (1.0 - h1),
        bound,
        bound_holds: r.rs >= bound - 1e-10,
    })
}

#[derive(Serialize, Deserialize)]
struct ReIm {
    re: f64,
    #[serde(default)]
    im: f64,
}

mod complex_value {
    use super::ReIm;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let v = ReIm::deserialize(d)?;
        Ok(Complex64::new(v.re, v.im))
    }
}

mod opt_complex_value {
    use super::ReIm;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| ReIm { re: z.re, im: z.im }).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        Ok(Option::<ReIm>::deserialize(d)?.map(|v| Complex64::new(v.re, v.im)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transition_row, Receiver};
    use proptest::prelude::*;

    const Q_M2: f64 = 0.977_249_868_051_820_8;
    const Q_M3: f64 = 0.998_650_101_968_369_9;

    fn gain_at(delta: f64) -> (ComplexGain, ComplexGain) {
        (ComplexGain::from_polar(1.0, delta), ComplexGain::new(1.0, 0.0))
    }

    fn real_channel(w1: f64, w2: f64, eave: Vec<f64>) -> WiretapChannel {
        let k = eave.len() + 1;
        let adc = AdcSpec::new(eave, (0..k).map(|l| l as f64).collect()).unwrap();
        WiretapChannel::real(w1, w2, AdcSpec::one_bit(), adc).unwrap()
    }

    fn complex_channel(w1: ComplexGain, w2: ComplexGain, eave: ComplexAdcPair) -> WiretapChannel {
        WiretapChannel::complex(w1, w2, ComplexAdcPair::one_bit(), eave).unwrap()
    }

    #[test]
    fn alignment_examples() {
        let (w1, w2) = gain_at(0.0);
        let a = align_phase(w1, w2).unwrap();
        assert_eq!(a.m, 1);
        assert!((a.theta - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(a.y1_bar, Complex64::new(1.0, 1.0));

        let (w1, w2) = gain_at(PI / 3.0);
        let a = align_phase(w1, w2).unwrap();
        assert_eq!(a.m, 1);
        assert!((a.theta - PI / 12.0).abs() < 1e-15);

        let (w1, w2) = gain_at(3.0 * FRAC_PI_4);
        let a = align_phase(w1, w2).unwrap();
        assert_eq!(a.m, 2);
        assert!((a.theta - PI / 8.0).abs() < 1e-15);
        assert_eq!(a.y1_bar, Complex64::new(-1.0, 1.0));
    }

    #[test]
    fn alignment_rejects_zero_gain() {
        assert!(align_phase(ComplexGain::new(0.0, 0.0), ComplexGain::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn crossover_at_zero_amplitude() {
        let ch = complex_channel(ComplexGain::new(1.0, 0.0), ComplexGain::new(2.0, 0.0), ComplexAdcPair::one_bit());
        let (p1, p2) = crossover_probs(&ch, FRAC_PI_4, 0.0).unwrap();
        assert_eq!((p1, p2), (0.25, 0.25));
        let ch = real_channel(1.0, 2.0, vec![0.0]);
        assert_eq!(crossover_probs(&ch, 0.0, 0.0).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn crossover_real_example() {
        let ch = real_channel(1.0, 2.0, vec![1.0]);
        let (p1, p2) = crossover_probs(&ch, 0.0, 2.0).unwrap();
        assert!((p1 - Q_M2).abs() < 1e-15);
        assert!((p2 - Q_M3).abs() < 1e-15);
        assert!(p1 < p2);
    }

    #[test]
    fn crossover_needs_symmetric_legit() {
        let adc = AdcSpec::new(vec![0.5], vec![-1.0, 1.0]).unwrap();
        let ch = WiretapChannel::real(1.0, 2.0, adc, AdcSpec::one_bit()).unwrap();
        assert!(matches!(crossover_probs(&ch, 0.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(choose_amplitude(&real_channel(1.0, 2.0, vec![1.0]), 0.0).unwrap(), 2.0);
        assert!(choose_amplitude(&real_channel(2.0, 1.0, vec![0.5, 1.5]), 0.0).unwrap() < 0.0);
        assert!(choose_amplitude(&real_channel(1.0, 2.0, vec![0.0, 2.0]), 0.0).unwrap() > 0.0);
        let ch =
            complex_channel(ComplexGain::from_polar(1.0, 0.3), ComplexGain::new(1.0, 0.0), ComplexAdcPair::one_bit());
        assert!(matches!(choose_amplitude(&ch, 0.5), Err(Error::EqualGainMagnitudes(_))));
    }

    #[test]
    fn zchannel_limit_examples() {
        assert_eq!(zchannel_limit(0.3, 0.2, 0.2).unwrap(), 0.0);
        assert!(zchannel_limit(0.5, 0.1, 0.4).unwrap() > 0.0);
        let v = zchannel_limit(0.5, Q_M2, Q_M3).unwrap();
        assert!((v - 0.010_794_200_821_397_232).abs() < 1e-14, "{v}");
    }

    #[test]
    fn construction_real_example() {
        let ch = real_channel(1.0, 2.0, vec![1.0]);
        let r = construct_positive_rate(&ch, &ConstructOptions::default()).unwrap();
        assert_eq!(r.amplitude_source, AmplitudeSource::Margin);
        assert_eq!(r.a, 2.0);
        assert_eq!(r.phi, 0.5);
        assert!(r.exact_rate.rs > 1e-9);
        assert!((r.limit_rate - 0.010_794_200_821_397_232).abs() < 1e-14);
        assert!(r.p1 < r.p2 && r.limit_rate > 0.0);
        assert_eq!(r.input.points()[0], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn construction_stronger_legit_uses_opposite_phase() {
        let ch = real_channel(2.0, 1.0, vec![0.5]);
        let r = construct_positive_rate(&ch, &ConstructOptions::default()).unwrap();
        assert!(r.a < 0.0);
        assert!(r.exact_rate.rs > 1e-9);
    }

    #[test]
    fn construction_rejects_equal_magnitudes() {
        let ch = complex_channel(
            ComplexGain::from_polar(1.0, 1.0),
            ComplexGain::from_polar(1.0, -0.4),
            ComplexAdcPair::one_bit(),
        );
        assert!(matches!(
            construct_positive_rate(&ch, &ConstructOptions::default()),
            Err(Error::EqualGainMagnitudes(_))
        ));
    }

    #[test]
    fn best_selection_dominates_first() {
        let ch = real_channel(1.0, 2.0, vec![1.0]);
        let first = construct_positive_rate(&ch, &ConstructOptions::default()).unwrap();
        let best = construct_positive_rate(&ch, &ConstructOptions { selection: Selection::Best, ..Default::default() })
            .unwrap();
        assert!(best.exact_rate.rs >= first.exact_rate.rs);
        assert!(best.trace.iter().all(|s| s.rs <= best.exact_rate.rs));
    }

    #[test]
    fn trace_is_ordered_by_b_then_grid() {
        let ch = real_channel(1.0, 2.0, vec![1.0]);
        let opts = ConstructOptions { selection: Selection::Best, ..Default::default() };
        let r = construct_positive_rate(&ch, &opts).unwrap();
        let g = opts.phi_grid.len();
        for (i, s) in r.trace.iter().enumerate() {
            assert_eq!(s.phi, opts.phi_grid[i % g]);
            assert_eq!(s.b, r.trace[i - i % g].b);
        }
        assert!(r.trace.windows(g + 1).all(|w| w[0].b < w[g].b));
    }

    #[test]
    fn sweep_exhausted_without_fallback() {
        // Margin amplitude far into the tails where the rate is invisible.
        let ch = real_channel(3.0, 3.2, vec![2.9]);
        let opts = ConstructOptions { amplitude_fallback: false, ..Default::default() };
        assert!(matches!(construct_positive_rate(&ch, &opts), Err(Error::SweepExhausted(_))));
    }

    #[test]
    fn reduction_identity() {
        let ch = complex_channel(ComplexGain::new(1.5, 0.0), ComplexGain::new(0.5, 0.5), ComplexAdcPair::one_bit());
        let r = reduce_to_symmetric(&ch, ThresholdChoice::Median).unwrap();
        assert_eq!(r.translation, Complex64::new(0.0, 0.0));
        assert_eq!(r.channel.eave_adc(), ch.eave_adc());
    }

    #[test]
    fn reduction_shift_example() {
        let legit = ComplexAdcPair::new(AdcSpec::new(vec![1.0], vec![-1.0, 1.0]).unwrap(), AdcSpec::one_bit());
        let ch = WiretapChannel::complex(
            ComplexGain::new(1.0, 0.0),
            ComplexGain::new(1.0, 0.0),
            legit,
            ComplexAdcPair::one_bit(),
        )
        .unwrap();
        let r = reduce_to_symmetric(&ch, ThresholdChoice::Median).unwrap();
        assert_eq!(r.translation, Complex64::new(1.0, 0.0));
        assert_eq!(r.channel.eave_adc().real_part.thresholds(), &[-1.0]);
        assert_eq!(r.channel.eave_adc().imag_part.thresholds(), &[0.0]);
        assert!(r.channel.legit_adc().is_symmetric_one_bit());
        let input =
            DiscreteInput::new(vec![Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.7)], vec![0.4, 0.6]).unwrap();
        let reduced = secrecy_rate(&r.channel, &input).unwrap();
        let original = secrecy_rate(&ch, &input.translated(r.translation).unwrap()).unwrap();
        assert!((reduced.rs - original.rs).abs() < 1e-12);
    }

    #[test]
    fn reduction_rejects_bad_index() {
        let legit = AdcSpec::new(vec![-1.0, 1.0], vec![0.0, 1.0, 2.0]).unwrap();
        let ch = WiretapChannel::real(1.0, 2.0, legit, AdcSpec::one_bit()).unwrap();
        assert!(reduce_to_symmetric(&ch, ThresholdChoice::Index { real: 2, imag: 0 }).is_err());
        let r = reduce_to_symmetric(&ch, ThresholdChoice::Index { real: 1, imag: 0 }).unwrap();
        assert_eq!(r.c_real, 1.0);
    }

    #[test]
    fn achieve_multilevel_legit_is_no_worse() {
        let legit = AdcSpec::new(vec![-0.7, 0.4, 1.3], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let eave = AdcSpec::new(vec![-0.2, 0.9], vec![0.0, 1.0, 2.0]).unwrap();
        let ch = WiretapChannel::real(1.3, 0.6, legit, eave).unwrap();
        let reduction = reduce_to_symmetric(&ch, ThresholdChoice::Median).unwrap();
        let r = achieve(&ch, &ConstructOptions::default(), ThresholdChoice::Median).unwrap();
        assert_eq!(r.translation, Some(reduction.translation));
        let on_reduced =
            secrecy_rate(&reduction.channel, &r.input.translated(-reduction.translation).unwrap()).unwrap();
        assert!(r.exact_rate.rs >= on_reduced.rs - 1e-12);
    }

    #[test]
    fn power_constraint_examples() {
        let ch = real_channel(1.0, 2.0, vec![1.0]);
        let r = construct_positive_rate(&ch, &ConstructOptions::default()).unwrap();
        let p = r.exact_rate.power;
        let same = apply_power_constraint(&r, p * 1.5).unwrap();
        assert_eq!(same.alpha, 1.0);
        assert_eq!(same.power_limited_rate, r.exact_rate.rs);
        let half = apply_power_constraint(&r, p / 2.0).unwrap();
        assert_eq!(half.alpha, 0.5);
        assert_eq!(half.power_limited_rate, r.exact_rate.rs / 2.0);
        assert!(half.alpha * p <= p / 2.0 * (1.0 + 1e-15));
        assert!(apply_power_constraint(&r, 0.0).is_err());
    }

    #[test]
    fn qpsk_equal_aligned_is_zero() {
        let ch = complex_channel(ComplexGain::new(1.0, 0.0), ComplexGain::new(1.0, 0.0), ComplexAdcPair::one_bit());
        let r = qpsk_bound(&ch, 2.0).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.rs.abs() < 1e-15);
    }

    #[test]
    fn qpsk_example() {
        // |w1| sqrt(J/2) = 2, |w2| sqrt(J/2) = 1, delta = pi/6.
        let w1 = ComplexGain::from_polar(2.0, PI / 6.0);
        let w2 = ComplexGain::new(1.0, 0.0);
        let r = qpsk_bound(&complex_channel(w1, w2, ComplexAdcPair::one_bit()), 2.0).unwrap();
        assert!((r.bound - 0.948_935_362_560_876_1).abs() < 1e-14, "{}", r.bound);
        assert!(r.bound_holds && r.bound > 0.0);
        assert!((r.i1 - r.i1_closed_form).abs() < 1e-12);
    }

    #[test]
    fn qpsk_rejects_multilevel() {
        let eave = ComplexAdcPair::new(AdcSpec::uniform(3, -1.0, 1.0).unwrap(), AdcSpec::one_bit());
        let ch = complex_channel(ComplexGain::new(2.0, 0.0), ComplexGain::new(1.0, 0.0), eave);
        assert!(qpsk_bound(&ch, 1.0).is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let ch = real_channel(1.0, 2.0, vec![1.0]);
        let r = construct_positive_rate(&ch, &ConstructOptions::default()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: AchievabilityResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    fn output_index(ch: &WiretapChannel, receiver: Receiver, y: Complex64) -> usize {
        ch.output_alphabet(receiver).iter().position(|&o| o == y).unwrap()
    }

    fn arb_eave_pair() -> impl Strategy<Value = ComplexAdcPair> {
        let one = || {
            prop::collection::vec(-3.0f64..3.0, 1..5).prop_filter_map("distinct", |mut t| {
                t.sort_by(f64::total_cmp);
                t.dedup();
                let k = t.len() + 1;
                AdcSpec::new(t, (0..k).map(|l| l as f64).collect()).ok()
            })
        };
        (one(), one()).prop_map(|(r, i)| ComplexAdcPair::new(r, i))
    }

    proptest! {
        #[test]
        fn alignment_identity(p1 in -10.0f64..10.0, p2 in -10.0f64..10.0) {
            let a = align_phase(ComplexGain::from_polar(1.0, p1), ComplexGain::from_polar(2.0, p2)).unwrap();
            prop_assert!(a.theta > 0.0 && a.theta <= FRAC_PI_4 + 1e-15);
            prop_assert!((0.0..TAU).contains(&a.delta));
            prop_assert!((a.theta + a.delta - (a.m as f64 * FRAC_PI_2 - a.theta)).abs() < 1e-14);
            prop_assert!(a.y1_bar.re.abs() == 1.0 && a.y1_bar.im.abs() == 1.0);
        }

        #[test]
        fn real_crossover_matches_rows_exactly(
            m1 in 0.1f64..4.0, m2 in 0.1f64..4.0, s1 in any::<bool>(), s2 in any::<bool>(),
            q in -3.0f64..3.0, a in -20.0f64..20.0,
        ) {
            let w1 = if s1 { m1 } else { -m1 };
            let w2 = if s2 { m2 } else { -m2 };
            let ch = real_channel(w1, w2, vec![q - 1.0, q]);
            let align = alignment_for(&ch).unwrap();
            let (p1, p2) = crossover_probs(&ch, 0.0, a).unwrap();
            let x = Complex64::new(w2.signum() * a, 0.0);
            let legit = transition_row(&ch, Receiver::Legit, x).unwrap();
            let eave = transition_row(&ch, Receiver::Eave, x).unwrap();
            prop_assert_eq!(p1, legit[output_index(&ch, Receiver::Legit, align.y1_bar)]);
            prop_assert_eq!(p2, eave[2]);
        }

        #[test]
        fn complex_crossover_matches_rows(
            m1 in 0.1f64..4.0, m2 in 0.1f64..4.0, p1 in -4.0f64..4.0, p2 in -4.0f64..4.0,
            eave in arb_eave_pair(), a in -20.0f64..20.0,
        ) {
            let ch = complex_channel(ComplexGain::from_polar(m1, p1), ComplexGain::from_polar(m2, p2), eave);
            let align = align_phase(ch.w1(), ch.w2()).unwrap();
            let (c1, c2) = crossover_probs(&ch, align.theta, a).unwrap();
            let x = Complex64::from_polar(a, align.capital_phi);
            let legit = transition_row(&ch, Receiver::Legit, x).unwrap();
            let eave_row = transition_row(&ch, Receiver::Eave, x).unwrap();
            prop_assert!((c1 - legit[output_index(&ch, Receiver::Legit, align.y1_bar)]).abs() <= 1e-14);
            prop_assert!((c2 - eave_row[eave_row.len() - 1]).abs() <= 1e-14);
        }

        #[test]
        fn saturated_output_symmetry(m1 in 0.1f64..4.0, p1 in -4.0f64..4.0, p2 in -4.0f64..4.0, a in -10.0f64..10.0) {
            let w1 = ComplexGain::from_polar(m1, p1);
            let ch = complex_channel(w1, ComplexGain::from_polar(1.0, p2), ComplexAdcPair::one_bit());
            let align = align_phase(ch.w1(), ch.w2()).unwrap();
            let at_phi = transition_row(&ch, Receiver::Legit, Complex64::from_polar(a, align.capital_phi)).unwrap();
            let rotated = Complex64::from_polar(a, align.theta - w1.phase());
            let reference = transition_row(&ch, Receiver::Legit, rotated).unwrap();
            let lhs = at_phi[output_index(&ch, Receiver::Legit, align.y1_bar)];
            let rhs = reference[output_index(&ch, Receiver::Legit, Complex64::new(1.0, 1.0))];
            prop_assert!((lhs - rhs).abs() <= 1e-14, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn margin_amplitude_is_feasible(
            m1 in 0.1f64..4.0, m2 in 0.1f64..4.0, p1 in -4.0f64..4.0, p2 in -4.0f64..4.0, eave in arb_eave_pair(),
        ) {
            prop_assume!((m1 - m2).abs() > 1e-3);
            let ch = complex_channel(ComplexGain::from_polar(m1, p1), ComplexGain::from_polar(m2, p2), eave.clone());
            let align = align_phase(ch.w1(), ch.w2()).unwrap();
            let a = choose_amplitude(&ch, align.theta).unwrap();
            let s = m2 - m1;
            prop_assert!(eave.real_part.top_threshold() < s * a * align.theta.cos());
            prop_assert!(eave.imag_part.top_threshold() < s * a * align.theta.sin());
        }

        #[test]
        fn translation_preserves_rate_for_one_bit_legit(
            w1 in 0.2f64..3.0, w2 in 0.2f64..3.0, c in -2.0f64..2.0, q in -2.0f64..2.0,
            x1 in -3.0f64..3.0, x2 in -3.0f64..3.0, p in 0.05f64..0.95,
        ) {
            prop_assume!((x1 - x2).abs() > 1e-6);
            let legit = AdcSpec::new(vec![c], vec![-1.0, 1.0]).unwrap();
            let eave = AdcSpec::new(vec![q], vec![0.0, 1.0]).unwrap();
            let ch = WiretapChannel::real(w1, w2, legit, eave).unwrap();
            let red = reduce_to_symmetric(&ch, ThresholdChoice::Median).unwrap();
            let input = DiscreteInput::real(&[x1, x2], &[p, 1.0 - p]).unwrap();
            let reduced = secrecy_rate(&red.channel, &input).unwrap().rs;
            let original = secrecy_rate(&ch, &input.translated(red.translation).unwrap()).unwrap().rs;
            prop_assert!((reduced - original).abs() <= 1e-10);
        }
    }
}
