//! Gaussian wiretap channel with component-wise ADCs at both receivers.
//!
//! Noise has unit variance per real component. A different noise level is
//! expressed by rescaling gains and thresholds.

mod gaussian;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adc::{AdcSpec, ComplexAdcPair};
use crate::error::{finite, Error, Result};
use crate::infotheory::DiscreteInput;

pub(crate) use gaussian::q;
pub use gaussian::{ln_q, q_function};

/// Probabilities below this are flushed to zero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Complex channel gain, serialized as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ReIm", into = "ReIm")]
pub struct ComplexGain(pub Complex64);

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub(crate) struct ReIm {
    re: f64,
    #[serde(default)]
    im: f64,
}

impl From<ReIm> for ComplexGain {
    fn from(v: ReIm) -> Self {
        ComplexGain(Complex64::new(v.re, v.im))
    }
}

impl From<ComplexGain> for ReIm {
    fn from(g: ComplexGain) -> Self {
        ReIm { re: g.0.re, im: g.0.im }
    }
}

impl ComplexGain {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Self {
        Self::new(re, 0.0)
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Self(Complex64::from_polar(magnitude, phase))
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    /// Phase in `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        self.0.arg()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.0.re.is_finite() || !self.0.im.is_finite() {
            return Err(Error::InvalidChannel(format!("{name} is not finite")));
        }
        if self.0.re == 0.0 && self.0.im == 0.0 {
            return Err(Error::InvalidChannel(format!("{name} must be non-zero")));
        }
        Ok(())
    }
}

/// Serde adapter for complex points as `{"re": .., "im": ..}`.
pub(crate) mod complex_points {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(points: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<ReIm> = points.iter().map(|z| ReIm { re: z.re, im: z.im }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
        let v = Vec::<ReIm>::deserialize(d)?;
        Ok(v.into_iter().map(|p| Complex64::new(p.re, p.im)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    Legit,
    Eave,
}

/// Gains, quantizers and mode of a wiretap channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct WiretapChannel {
    mode: ChannelMode,
    w1: ComplexGain,
    w2: ComplexGain,
    legit_adc: ComplexAdcPair,
    eave_adc: ComplexAdcPair,
}

/// Real-mode configs may give a single quantizer instead of a pair.
#[derive(Deserialize)]
#[serde(untagged)]
enum AdcConfig {
    Pair(ComplexAdcPair),
    Single(AdcSpec),
}

impl From<AdcConfig> for ComplexAdcPair {
    fn from(c: AdcConfig) -> Self {
        match c {
            AdcConfig::Pair(p) => p,
            AdcConfig::Single(s) => ComplexAdcPair::new(s.clone(), s),
        }
    }
}

#[derive(Deserialize)]
struct RawChannel {
    mode: ChannelMode,
    w1: ComplexGain,
    w2: ComplexGain,
    legit_adc: AdcConfig,
    eave_adc: AdcConfig,
}

impl TryFrom<RawChannel> for WiretapChannel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        Self::new(raw.mode, raw.w1, raw.w2, raw.legit_adc.into(), raw.eave_adc.into())
    }
}

impl WiretapChannel {
    pub fn new(
        mode: ChannelMode,
        w1: ComplexGain,
        w2: ComplexGain,
        legit_adc: ComplexAdcPair,
        eave_adc: ComplexAdcPair,
    ) -> Result<Self> {
        w1.validate("w1")?;
        w2.validate("w2")?;
        if mode == ChannelMode::Real && (w1.0.im != 0.0 || w2.0.im != 0.0) {
            return Err(Error::InvalidChannel("real mode requires gains with zero imaginary part".into()));
        }
        Ok(Self { mode, w1, w2, legit_adc, eave_adc })
    }

    /// Real channel; only the real-part quantizers are used.
    pub fn real(w1: f64, w2: f64, legit: AdcSpec, eave: AdcSpec) -> Result<Self> {
        Self::new(
            ChannelMode::Real,
            ComplexGain::real(w1),
            ComplexGain::real(w2),
            ComplexAdcPair::new(legit.clone(), legit),
            ComplexAdcPair::new(eave.clone(), eave),
        )
    }

    pub fn complex(w1: ComplexGain, w2: ComplexGain, legit: ComplexAdcPair, eave: ComplexAdcPair) -> Result<Self> {
        Self::new(ChannelMode::Complex, w1, w2, legit, eave)
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    pub fn w1(&self) -> ComplexGain {
        self.w1
    }

    pub fn w2(&self) -> ComplexGain {
        self.w2
    }

    pub fn legit_adc(&self) -> &ComplexAdcPair {
        &self.legit_adc
    }

    pub fn eave_adc(&self) -> &ComplexAdcPair {
        &self.eave_adc
    }

    pub fn gain(&self, receiver: Receiver) -> ComplexGain {
        match receiver {
            Receiver::Legit => self.w1,
            Receiver::Eave => self.w2,
        }
    }

    pub fn adc(&self, receiver: Receiver) -> &ComplexAdcPair {
        match receiver {
            Receiver::Legit => &self.legit_adc,
            Receiver::Eave => &self.eave_adc,
        }
    }

    /// Same channel with the two receivers exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            mode: self.mode,
            w1: self.w2,
            w2: self.w1,
            legit_adc: self.eave_adc.clone(),
            eave_adc: self.legit_adc.clone(),
        }
    }

    pub fn with_gains(&self, w1: ComplexGain, w2: ComplexGain) -> Result<Self> {
        Self::new(self.mode, w1, w2, self.legit_adc.clone(), self.eave_adc.clone())
    }

    pub fn with_adcs(&self, legit: ComplexAdcPair, eave: ComplexAdcPair) -> Result<Self> {
        Self::new(self.mode, self.w1, self.w2, legit, eave)
    }

    /// Number of joint outputs seen by `receiver`.
    pub fn output_count(&self, receiver: Receiver) -> usize {
        let adc = self.adc(receiver);
        match self.mode {
            ChannelMode::Real => adc.real_part.levels(),
            ChannelMode::Complex => adc.joint_levels(),
        }
    }

    /// Output labels in enumeration order: `real_index * k_I + imag_index`.
    pub fn output_alphabet(&self, receiver: Receiver) -> Vec<Complex64> {
        let adc = self.adc(receiver);
        match self.mode {
            ChannelMode::Real => adc.real_part.outputs().iter().map(|&y| Complex64::new(y, 0.0)).collect(),
            ChannelMode::Complex => adc
                .real_part
                .outputs()
                .iter()
                .flat_map(|&yr| adc.imag_part.outputs().iter().map(move |&yi| Complex64::new(yr, yi)))
                .collect(),
        }
    }

    pub(crate) fn check_point(&self, x: Complex64) -> Result<()> {
        finite("Re(x)", x.re)?;
        finite("Im(x)", x.im)?;
        if self.mode == ChannelMode::Real && x.im != 0.0 {
            return Err(Error::InvalidInput(format!("real-mode input point {x} has an imaginary part")));
        }
        Ok(())
    }
}

/// Probability that `mean + N(0,1)` lands in cell `l` of `spec`.
pub fn cell_probability(spec: &AdcSpec, l: usize, mean: f64) -> Result<f64> {
    if l >= spec.levels() {
        return Err(Error::Precondition(format!("cell index {l} out of range for a {}-level ADC", spec.levels())));
    }
    let mean = finite("mean", mean)?;
    Ok(cell_prob(spec, l, mean))
}

fn cell_prob(spec: &AdcSpec, l: usize, mean: f64) -> f64 {
    let (lo, hi) = spec.cell_bounds(l);
    let (lo, hi) = (lo - mean, hi - mean);
    // Subtract tails on whichever side keeps both terms small.
    let p = if lo >= 0.0 {
        q(lo) - q(hi)
    } else if hi <= 0.0 {
        q(-hi) - q(-lo)
    } else {
        1.0 - q(-lo) - q(hi)
    };
    if p < UNDERFLOW_FLOOR {
        if p > 0.0 {
            log::trace!("cell probability {p:e} flushed to zero (mean {mean}, cell {l})");
        }
        0.0
    } else {
        p
    }
}

fn cell_probs(spec: &AdcSpec, mean: f64) -> Vec<f64> {
    (0..spec.levels()).map(|l| cell_prob(spec, l, mean)).collect()
}

/// Conditional output distribution of `receiver` given input `x`.
pub fn transition_row(channel: &WiretapChannel, receiver: Receiver, x: Complex64) -> Result<Vec<f64>> {
    channel.check_point(x)?;
    let w = channel.gain(receiver).0;
    let adc = channel.adc(receiver);
    let row = match channel.mode {
        ChannelMode::Real => cell_probs(&adc.real_part, w.re * x.re),
        ChannelMode::Complex => {
            let y = w * x;
            let pr = cell_probs(&adc.real_part, y.re);
            let pi = cell_probs(&adc.imag_part, y.im);
            pr.iter().flat_map(|&a| pi.iter().map(move |&b| a * b)).collect()
        }
    };
    Ok(row)
}

/// Row-stochastic matrix `P(y | x)` with rows indexed by input support points.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    inputs: Vec<Complex64>,
    outputs: Vec<Complex64>,
    probs: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds a matrix from explicit rows; every row must be a distribution.
    pub fn from_rows(inputs: Vec<Complex64>, outputs: Vec<Complex64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != inputs.len() {
            return Err(Error::DimensionMismatch(format!("{} rows for {} inputs", rows.len(), inputs.len())));
        }
        let n_out = outputs.len();
        let mut probs = Vec::with_capacity(rows.len() * n_out);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_out {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {n_out}", row.len())));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidInput(format!("row {i} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("row {i} sums to {s}")));
            }
            probs.extend(row);
        }
        Ok(Self { inputs, outputs, probs })
    }

    pub fn inputs(&self) -> &[Complex64] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Complex64] {
        &self.outputs
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.outputs.len();
        &self.probs[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.outputs.len().max(1))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.outputs.len() + j]
    }
}

/// Stacks [`transition_row`] over the support of `input`.
pub fn transition_matrix(
    channel: &WiretapChannel,
    receiver: Receiver,
    input: &DiscreteInput,
) -> Result<TransitionMatrix> {
    let mut probs = Vec::with_capacity(input.len() * channel.output_count(receiver));
    for &x in input.points() {
        probs.extend(transition_row(channel, receiver, x)?);
    }
    Ok(TransitionMatrix { inputs: input.points().to_vec(), outputs: channel.output_alphabet(receiver), probs })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::infotheory::{mutual_information, DiscreteInput};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_bit_complex(w1: ComplexGain, w2: ComplexGain) -> WiretapChannel {
        WiretapChannel::complex(w1, w2, ComplexAdcPair::one_bit(), ComplexAdcPair::one_bit()).unwrap()
    }

    #[test]
    fn cell_probability_examples() {
        let one_bit = AdcSpec::one_bit();
        assert_eq!(cell_probability(&one_bit, 1, 0.0).unwrap(), 0.5);
        let three = AdcSpec::new(vec![-1.0, 1.0], vec![0.0, 1.0, 2.0]).unwrap();
        let mid = cell_probability(&three, 1, 0.0).unwrap();
        assert!((mid - 0.682_689_492_137_085_897_170_465_1).abs() < 1e-15, "{mid}");
        assert!(cell_probability(&three, 3, 0.0).is_err());
        assert!(cell_probability(&three, 0, f64::NAN).is_err());
    }

    #[test]
    fn deep_tail_cell_keeps_relative_accuracy() {
        // Upper cell far above the mean: Q(10) ~ 7.6e-24 must not round to zero.
        let spec = AdcSpec::new(vec![-20.0, 10.0], vec![0.0, 1.0, 2.0]).unwrap();
        let p = cell_probability(&spec, 2, 0.0).unwrap();
        assert!(((p - 7.619_853_024_160_526e-24) / 7.619_853_024_160_526e-24).abs() < 1e-13);
        // Lower cell far below: mirrored form.
        let p = cell_probability(&spec, 0, 0.0).unwrap();
        assert!(((p - 2.753_624_118_606_233_7e-89) / 2.753_624_118_606_233_7e-89).abs() < 1e-13);
        // Underflow floor.
        assert_eq!(cell_probability(&spec, 2, -40.0).unwrap(), 0.0);
    }

    #[test]
    fn legit_one_bit_at_origin_is_uniform() {
        let ch = one_bit_complex(ComplexGain::new(0.3, -1.1), ComplexGain::new(2.0, 0.0));
        let row = transition_row(&ch, Receiver::Legit, c(0.0, 0.0)).unwrap();
        assert_eq!(row, vec![0.25; 4]);
        let real = WiretapChannel::real(1.0, 2.0, AdcSpec::one_bit(), AdcSpec::one_bit()).unwrap();
        assert_eq!(transition_row(&real, Receiver::Legit, c(0.0, 0.0)).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn top_right_output_is_product_of_tails() {
        let ch = one_bit_complex(ComplexGain::real(1.0), ComplexGain::real(1.0));
        let row = transition_row(&ch, Receiver::Eave, c(3.0, 3.0)).unwrap();
        let want = 0.997_302_026_161_435_609_750_379_5;
        // Output order is real index * k_I + imag index, so top-right is last.
        assert!((row[3] - want).abs() < 1e-15, "{}", row[3]);
        assert_eq!(ch.output_alphabet(Receiver::Eave)[3], c(1.0, 1.0));
    }

    #[test]
    fn real_mode_rejects_complex_points() {
        let real = WiretapChannel::real(1.0, 2.0, AdcSpec::one_bit(), AdcSpec::one_bit()).unwrap();
        assert!(transition_row(&real, Receiver::Legit, c(0.0, 1.0)).is_err());
        assert!(transition_row(&real, Receiver::Legit, c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn channel_validation() {
        assert!(WiretapChannel::real(0.0, 1.0, AdcSpec::one_bit(), AdcSpec::one_bit()).is_err());
        assert!(WiretapChannel::new(
            ChannelMode::Real,
            ComplexGain::new(1.0, 0.5),
            ComplexGain::real(1.0),
            ComplexAdcPair::one_bit(),
            ComplexAdcPair::one_bit()
        )
        .is_err());
    }

    #[test]
    fn matrix_rows_match_rows() {
        let ch = one_bit_complex(ComplexGain::new(0.7, 0.2), ComplexGain::new(-1.0, 0.4));
        let input = DiscreteInput::new(vec![c(0.5, -1.0), c(2.0, 0.3)], vec![0.4, 0.6]).unwrap();
        let m = transition_matrix(&ch, Receiver::Eave, &input).unwrap();
        assert_eq!(m.n_inputs(), 2);
        for (i, &x) in input.points().iter().enumerate() {
            assert_eq!(m.row(i), transition_row(&ch, Receiver::Eave, x).unwrap().as_slice());
        }
        let single = DiscreteInput::point(c(1.0, 1.0));
        let m = transition_matrix(&ch, Receiver::Legit, &single).unwrap();
        assert_eq!(m.row(0), transition_row(&ch, Receiver::Legit, c(1.0, 1.0)).unwrap().as_slice());
    }

    #[test]
    fn channel_json_accepts_single_adc_in_real_mode() {
        let v = serde_json::json!({
            "mode": "real",
            "w1": {"re": 1.0},
            "w2": {"re": 2.0, "im": 0.0},
            "legit_adc": {"thresholds": [0.0], "outputs": [-1.0, 1.0]},
            "eave_adc": {"real": {"thresholds": [1.0], "outputs": [0.0, 1.0]},
                         "imag": {"thresholds": [1.0], "outputs": [0.0, 1.0]}}
        });
        let ch: WiretapChannel = serde_json::from_value(v).unwrap();
        assert_eq!(ch.mode(), ChannelMode::Real);
        assert_eq!(ch.eave_adc().real_part.thresholds(), &[1.0]);
        let text = serde_json::to_string(&ch).unwrap();
        let back: WiretapChannel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ch);
        let bad = serde_json::json!({"mode": "real", "w1": {"re": 0.0}, "w2": {"re": 1.0},
            "legit_adc": {"thresholds": [0.0], "outputs": [-1.0, 1.0]},
            "eave_adc": {"thresholds": [0.0], "outputs": [-1.0, 1.0]}});
        assert!(serde_json::from_value::<WiretapChannel>(bad).is_err());
    }

    #[test]
    fn sign_flip_swaps_columns_in_real_mode() {
        let eave = AdcSpec::new(vec![-0.7, 0.2, 1.5], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let pos = WiretapChannel::real(1.3, 0.8, AdcSpec::one_bit(), eave.clone()).unwrap();
        let neg = WiretapChannel::real(-1.3, 0.8, AdcSpec::one_bit(), eave).unwrap();
        let input = DiscreteInput::new(vec![c(-1.0, 0.0), c(0.4, 0.0), c(2.5, 0.0)], vec![0.2, 0.5, 0.3]).unwrap();
        let mp = transition_matrix(&pos, Receiver::Legit, &input).unwrap();
        let mn = transition_matrix(&neg, Receiver::Legit, &input).unwrap();
        for i in 0..3 {
            assert!((mp.get(i, 0) - mn.get(i, 1)).abs() < 1e-15);
            assert!((mp.get(i, 1) - mn.get(i, 0)).abs() < 1e-15);
        }
        let ip = mutual_information(&input, &mp).unwrap();
        let in_ = mutual_information(&input, &mn).unwrap();
        assert!((ip - in_).abs() < 1e-14);
    }

    #[test]
    fn coarsening_legit_adc_never_helps() {
        let fine = AdcSpec::new(vec![-1.0, 0.0, 0.8], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let coarse = AdcSpec::new(vec![-1.0, 0.8], vec![0.0, 1.0, 2.0]).unwrap();
        let input =
            DiscreteInput::new(vec![c(-1.5, 0.0), c(-0.2, 0.0), c(0.4, 0.0), c(1.7, 0.0)], vec![0.25, 0.25, 0.3, 0.2])
                .unwrap();
        let f = WiretapChannel::real(1.1, 1.0, fine, AdcSpec::one_bit()).unwrap();
        let g = WiretapChannel::real(1.1, 1.0, coarse, AdcSpec::one_bit()).unwrap();
        let i_fine = mutual_information(&input, &transition_matrix(&f, Receiver::Legit, &input).unwrap()).unwrap();
        let i_coarse = mutual_information(&input, &transition_matrix(&g, Receiver::Legit, &input).unwrap()).unwrap();
        assert!(i_coarse <= i_fine + 1e-15);
    }

    /// Index of output label `y` in the one-bit joint alphabet.
    fn one_bit_index(y: Complex64) -> usize {
        let r = usize::from(y.re > 0.0);
        let i = usize::from(y.im > 0.0);
        r * 2 + i
    }

    fn arb_adc(max_levels: usize) -> impl Strategy<Value = AdcSpec> {
        prop::collection::vec(-3.0f64..3.0, 1..max_levels).prop_filter_map("distinct", |mut t| {
            t.sort_by(f64::total_cmp);
            t.dedup();
            let outputs = (0..=t.len()).map(|l| l as f64).collect();
            AdcSpec::new(t, outputs).ok()
        })
    }

    /// Direct per-entry evaluation of the product-of-tail-differences formula.
    fn direct_entry(pair: &ComplexAdcPair, w: Complex64, x: Complex64, r: usize, i: usize) -> f64 {
        let y = w * x;
        let (ar, br) = pair.real_part.cell_bounds(r);
        let (ai, bi) = pair.imag_part.cell_bounds(i);
        (q(ar - y.re) - q(br - y.re)) * (q(ai - y.im) - q(bi - y.im))
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(
            legit in arb_adc(6), eave in arb_adc(9),
            w1r in -3.0f64..3.0, w1i in -3.0f64..3.0, w2r in 0.1f64..3.0, w2i in -3.0f64..3.0,
            xr in -6.0f64..6.0, xi in -6.0f64..6.0,
        ) {
            let ch = WiretapChannel::complex(
                ComplexGain::new(w1r, w1i), ComplexGain::new(w2r, w2i),
                ComplexAdcPair::new(legit.clone(), legit), ComplexAdcPair::new(eave.clone(), eave),
            ).unwrap();
            for rx in [Receiver::Legit, Receiver::Eave] {
                let row = transition_row(&ch, rx, c(xr, xi)).unwrap();
                prop_assert_eq!(row.len(), ch.output_count(rx));
                prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
                let s: f64 = row.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12, "sum {}", s);
            }
        }

        #[test]
        fn cell_probabilities_partition(spec in arb_adc(12), mean in -20.0f64..20.0) {
            let s: f64 = (0..spec.levels()).map(|l| cell_probability(&spec, l, mean).unwrap()).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn matrix_matches_direct_formula(
            re in arb_adc(3), im in arb_adc(3),
            wr in -2.0f64..2.0, wi in 0.1f64..2.0,
            pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
        ) {
            let pair = ComplexAdcPair::new(re, im);
            let w = ComplexGain::new(wr, wi);
            let ch = WiretapChannel::complex(w, w, pair.clone(), pair.clone()).unwrap();
            let points: Vec<Complex64> = pts.iter().map(|&(a, b)| c(a, b)).collect();
            prop_assume!(DiscreteInput::uniform(points.clone()).is_ok());
            let input = DiscreteInput::uniform(points.clone()).unwrap();
            let m = transition_matrix(&ch, Receiver::Eave, &input).unwrap();
            let k_i = pair.imag_part.levels();
            for (row, &x) in points.iter().enumerate() {
                for col in 0..m.n_outputs() {
                    let want = direct_entry(&pair, w.0, x, col / k_i, col % k_i);
                    prop_assert!((m.get(row, col) - want).abs() <= 1e-14);
                }
            }
        }

        #[test]
        fn quarter_turn_covariance(
            wr in -3.0f64..3.0, wi in -3.0f64..3.0, xr in -4.0f64..4.0, xi in -4.0f64..4.0,
        ) {
            prop_assume!(wr != 0.0 || wi != 0.0);
            let ch = one_bit_complex(ComplexGain::new(wr, wi), ComplexGain::real(1.0));
            let x = c(xr, xi);
            let rot = Complex64::from_polar(1.0, FRAC_PI_2);
            let base = transition_row(&ch, Receiver::Legit, x).unwrap();
            let turned = transition_row(&ch, Receiver::Legit, x * rot).unwrap();
            for y in ch.output_alphabet(Receiver::Legit) {
                let yr = y * rot;
                let yr = c(yr.re.round(), yr.im.round());
                let a = base[one_bit_index(y)];
                let b = turned[one_bit_index(yr)];
                prop_assert!((a - b).abs() <= 1e-14, "{} vs {}", a, b);
            }
        }
    }
}
