//! Entropies, mutual information and the closed-form reference rates.
//!
//! All quantities are in bits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    complex_points, q, transition_matrix, transition_row, ChannelMode, ComplexGain, Receiver, TransitionMatrix,
    WiretapChannel,
};
use crate::error::{finite, Error, Result};

/// Tolerance on the total probability of an input distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Finite-support input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInput")]
pub struct DiscreteInput {
    #[serde(with = "complex_points")]
    points: Vec<Complex64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawInput {
    #[serde(with = "complex_points")]
    points: Vec<Complex64>,
    probs: Vec<f64>,
}

impl TryFrom<RawInput> for DiscreteInput {
    type Error = Error;

    fn try_from(raw: RawInput) -> Result<Self> {
        Self::new(raw.points, raw.probs)
    }
}

impl DiscreteInput {
    pub fn new(points: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        if points.len() != probs.len() {
            return Err(Error::InvalidInput(format!("{} points but {} probabilities", points.len(), probs.len())));
        }
        if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("support points must be finite".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidInput("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        for (i, a) in points.iter().enumerate() {
            if points[i + 1..].contains(a) {
                return Err(Error::InvalidInput(format!("support point {a} is repeated")));
            }
        }
        Ok(Self { points, probs })
    }

    /// Real-valued support.
    pub fn real(points: &[f64], probs: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| Complex64::new(x, 0.0)).collect(), probs.to_vec())
    }

    /// Point mass at `x`.
    pub fn point(x: Complex64) -> Self {
        Self { points: vec![x], probs: vec![1.0] }
    }

    pub fn uniform(points: Vec<Complex64>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n as f64; n])
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        self.points.iter().copied().zip(self.probs.iter().copied())
    }

    /// `E[|X|^2]`.
    pub fn power(&self) -> f64 {
        self.iter().map(|(x, p)| p * x.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.points.iter().all(|z| z.im == 0.0)
    }

    /// True when all mass sits on one support point.
    pub fn is_constant(&self) -> bool {
        self.probs.iter().filter(|&&p| p > 0.0).count() <= 1
    }

    /// Every point multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|z| z * factor).collect(), self.probs.clone())
    }

    /// Every point shifted by `offset`.
    pub fn translated(&self, offset: Complex64) -> Result<Self> {
        Self::new(self.points.iter().map(|z| z + offset).collect(), self.probs.clone())
    }

    /// Distribution of `|X|` for a real input. Coincident magnitudes are merged;
    /// points keep their first-seen order.
    pub fn folded(&self) -> Result<Self> {
        self.require_real()?;
        let mut points: Vec<Complex64> = Vec::with_capacity(self.len());
        let mut probs: Vec<f64> = Vec::with_capacity(self.len());
        for (x, p) in self.iter() {
            let m = Complex64::new(x.re.abs(), 0.0);
            match points.iter().position(|&z| z == m) {
                Some(i) => probs[i] += p,
                None => {
                    points.push(m);
                    probs.push(p);
                }
            }
        }
        Self::new(points, probs)
    }

    pub(crate) fn require_real(&self) -> Result<()> {
        if self.is_real() {
            Ok(())
        } else {
            Err(Error::InvalidInput("operation needs a real-valued input".into()))
        }
    }
}

/// Mutual informations and their difference for one input distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `I(X;Y1)`
    pub i1: f64,
    /// `I(X;Y2)`
    pub i2: f64,
    /// `i1 - i2`
    pub rs: f64,
    /// `E[|X|^2]`
    pub power: f64,
}

impl RateReport {
    pub fn new(i1: f64, i2: f64, power: f64) -> Self {
        Self { i1, i2, rs: i1 - i2, power }
    }
}

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = finite("p", p)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
    }
    Ok(h(p))
}

/// Unchecked binary entropy for arguments already known to lie in [0, 1].
pub(crate) fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    // (1-p) log(1-p) via ln_1p keeps accuracy for small p.
    -(xlog2x(p) + q * (-p).ln_1p() / std::f64::consts::LN_2)
}

/// Output distribution `P_Y(y) = sum_x P(x) W(y|x)`.
pub fn output_distribution(input: &DiscreteInput, matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    check_aligned(input, matrix)?;
    let mut py = vec![0.0; matrix.n_outputs()];
    for (row, p) in matrix.rows().zip(input.probs()) {
        for (acc, w) in py.iter_mut().zip(row) {
            *acc += p * w;
        }
    }
    Ok(py)
}

fn check_aligned(input: &DiscreteInput, matrix: &TransitionMatrix) -> Result<()> {
    if matrix.n_inputs() != input.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but the input has {} points",
            matrix.n_inputs(),
            input.len()
        )));
    }
    if matrix.inputs() != input.points() {
        return Err(Error::DimensionMismatch("matrix rows are not aligned with input points".into()));
    }
    Ok(())
}

/// Information density `sum_y W(y|x) log2(W(y|x) / P_Y(y))` of one conditional
/// row against an output distribution. Returns `+inf` when the row puts mass on
/// an output that `P_Y` gives probability zero.
pub fn information_density(row: &[f64], output_dist: &[f64]) -> f64 {
    row.iter()
        .zip(output_dist)
        .map(|(&w, &py)| {
            if w <= 0.0 {
                0.0
            } else if py <= 0.0 {
                f64::INFINITY
            } else {
                w * (w / py).log2()
            }
        })
        .sum()
}

/// Information density at an arbitrary point `x`, with the output law induced
/// by `input` through `receiver`'s channel.
pub fn density_at(channel: &WiretapChannel, receiver: Receiver, input: &DiscreteInput, x: Complex64) -> Result<f64> {
    let matrix = transition_matrix(channel, receiver, input)?;
    let py = output_distribution(input, &matrix)?;
    Ok(information_density(&transition_row(channel, receiver, x)?, &py))
}

/// `I(X;Y)` for the input law and channel matrix.
pub fn mutual_information(input: &DiscreteInput, matrix: &TransitionMatrix) -> Result<f64> {
    let py = output_distribution(input, matrix)?;
    let total: f64 = matrix
        .rows()
        .zip(input.probs())
        .filter(|(_, &p)| p > 0.0)
        .map(|(row, &p)| p * information_density(row, &py))
        .sum();
    Ok(total.max(0.0))
}

/// Exact `I(X;Y1)`, `I(X;Y2)` and their difference.
pub fn secrecy_rate(channel: &WiretapChannel, input: &DiscreteInput) -> Result<RateReport> {
    let m1 = transition_matrix(channel, Receiver::Legit, input)?;
    let m2 = transition_matrix(channel, Receiver::Eave, input)?;
    Ok(RateReport::new(mutual_information(input, &m1)?, mutual_information(input, &m2)?, input.power()))
}

/// Z-channel rate `h(phi (1-p)) - phi h(p)` for input `Bern(phi)` and
/// crossover probability `p`.
pub fn z_rate(phi: f64, p: f64) -> Result<f64> {
    let phi = finite("phi", phi)?;
    let p = finite("p", p)?;
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::OutOfRange { name: "phi", value: phi, range: "(0, 1)" });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
    }
    Ok(h(phi * (1.0 - p)) - phi * h(p))
}

/// `h(c - d) - h(c + d)`, the folding gap as a function of its two moments.
pub fn fold_entropy_gap(c: f64, d: f64) -> f64 {
    h(c - d) - h(c + d)
}

/// Moments of a real input behind the folding comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldingFunctions {
    /// `E[Q(wX); X > 0] + P(X <= 0)/2`
    pub c: f64,
    /// `E[Q(wX); X <= 0] - P(X <= 0)/2`
    pub d: f64,
    /// `h(c - d) - h(c + d)`
    pub f: f64,
    /// `E[Q(w|X|)] = c - d`, accumulated directly.
    pub tail_abs: f64,
    /// `E[Q(wX)] = c + d`, accumulated directly.
    pub tail: f64,
}

/// `c(w)`, `d(w)` and `F(w)` for a real input and gain `w > 0`.
pub fn folding_functions(input: &DiscreteInput, w: f64) -> Result<FoldingFunctions> {
    let w = finite("w", w)?;
    if w <= 0.0 {
        return Err(Error::OutOfRange { name: "w", value: w, range: "(0, inf)" });
    }
    input.require_real()?;
    let (mut c, mut d) = (0.0, 0.0);
    let (mut tail_abs, mut tail) = (0.0, 0.0);
    for (x, p) in input.iter() {
        let up = q(w * x.re);
        let down = q(-w * x.re);
        if x.re > 0.0 {
            c += p * up;
            tail_abs += p * up;
        } else {
            c += 0.5 * p;
            d += p * (0.5 - down);
            tail_abs += p * down;
        }
        tail += p * up;
    }
    // c - d and c + d lose the tails to rounding once w|x| is large, so the
    // entropy terms use the directly accumulated means.
    Ok(FoldingFunctions { c, d, f: h(tail_abs) - h(tail), tail_abs, tail })
}

/// Unquantized Gaussian wiretap secrecy capacity
/// `[log2(1 + |w1|^2 J/2) - log2(1 + |w2|^2 J/2)]^+`.
pub fn gaussian_reference_rates(w1: ComplexGain, w2: ComplexGain, power: f64) -> Result<f64> {
    let j = positive_power(power)?;
    let c1 = (w1.magnitude().powi(2) * j / 2.0).ln_1p();
    let c2 = (w2.magnitude().powi(2) * j / 2.0).ln_1p();
    Ok(((c1 - c2) / std::f64::consts::LN_2).max(0.0))
}

/// Capacity of the point-to-point channel with one-bit ADCs: `1 - h(Q(|w| sqrt J))`
/// in real mode, `2 (1 - h(Q(|w| sqrt(J/2))))` in complex mode.
pub fn one_bit_p2p_capacity(w: ComplexGain, power: f64, mode: ChannelMode) -> Result<f64> {
    let j = positive_power(power)?;
    let mag = w.magnitude();
    Ok(match mode {
        ChannelMode::Real => 1.0 - h(q(mag * j.sqrt())),
        ChannelMode::Complex => 2.0 * (1.0 - h(q(mag * (j / 2.0).sqrt()))),
    })
}

fn positive_power(j: f64) -> Result<f64> {
    let j = finite("J", j)?;
    if j <= 0.0 {
        return Err(Error::OutOfRange { name: "J", value: j, range: "(0, inf)" });
    }
    Ok(j)
}
