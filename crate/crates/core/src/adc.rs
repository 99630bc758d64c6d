//! Scalar finite-resolution quantizers.
//!
//! A `k`-level ADC is described by `k - 1` strictly increasing thresholds and
//! `k` distinct output labels. Cell `l` (zero based) is the half-open interval
//! `[q_{l-1}, q_l)` with `q_{-1} = -inf` and `q_{k-1} = +inf`. Output labels are
//! opaque: rate computations only ever use cell indices.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

/// Largest number of levels accepted per component.
pub const MAX_LEVELS: usize = 4096;

/// One scalar quantizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAdc")]
pub struct AdcSpec {
    thresholds: Vec<f64>,
    outputs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawAdc {
    thresholds: Vec<f64>,
    outputs: Vec<f64>,
}

impl TryFrom<RawAdc> for AdcSpec {
    type Error = Error;

    fn try_from(raw: RawAdc) -> Result<Self> {
        AdcSpec::new(raw.thresholds, raw.outputs)
    }
}

impl AdcSpec {
    pub fn new(thresholds: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        let levels = outputs.len();
        if levels < 2 {
            return Err(Error::InvalidAdc(format!("need at least 2 levels, got {levels}")));
        }
        if levels > MAX_LEVELS {
            return Err(Error::InvalidAdc(format!("{levels} levels exceeds the supported maximum of {MAX_LEVELS}")));
        }
        if thresholds.len() + 1 != levels {
            return Err(Error::InvalidAdc(format!("{} thresholds do not match {levels} outputs", thresholds.len())));
        }
        if let Some(q) = thresholds.iter().find(|q| !q.is_finite()) {
            return Err(Error::InvalidAdc(format!("threshold {q} is not finite")));
        }
        if let Some(y) = outputs.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidAdc(format!("output {y} is not finite")));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAdc("thresholds must be strictly increasing".into()));
        }
        let mut sorted = outputs.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAdc("output labels must be distinct".into()));
        }
        Ok(Self { thresholds, outputs })
    }

    /// Symmetric one-bit ADC: threshold 0, outputs (-1, 1).
    pub fn one_bit() -> Self {
        Self { thresholds: vec![0.0], outputs: vec![-1.0, 1.0] }
    }

    /// Uniform quantizer with `levels` cells whose thresholds are evenly spread
    /// over `[lo, hi]`; outputs are the cell indices.
    pub fn uniform(levels: usize, lo: f64, hi: f64) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidAdc(format!("need at least 2 levels, got {levels}")));
        }
        let n = levels - 1;
        let thresholds = if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Self::new(thresholds, (0..levels).map(|l| l as f64).collect())
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn levels(&self) -> usize {
        self.outputs.len()
    }

    /// Lower and upper edge of cell `l`, with infinite outer edges.
    pub fn cell_bounds(&self, l: usize) -> (f64, f64) {
        let lo = if l == 0 { f64::NEG_INFINITY } else { self.thresholds[l - 1] };
        let hi = self.thresholds.get(l).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Index of the cell containing `x`.
    pub fn cell_index(&self, x: f64) -> Result<usize> {
        let x = finite("x", x)?;
        Ok(self.thresholds.partition_point(|&q| q <= x))
    }

    /// Output label of the cell containing `x`.
    pub fn quantize(&self, x: f64) -> Result<f64> {
        Ok(self.outputs[self.cell_index(x)?])
    }

    /// Moves every threshold down by `delta`, so that
    /// `shifted.quantize(x - delta) == self.quantize(x)`.
    pub fn shift_thresholds(&self, delta: f64) -> Result<Self> {
        let delta = finite("delta", delta)?;
        let thresholds: Vec<f64> = self.thresholds.iter().map(|q| q - delta).collect();
        // Rounding can merge thresholds that are closer than one ulp of the shift.
        Self::new(thresholds, self.outputs.clone())
    }

    /// True for a two-level quantizer whose only threshold is 0.
    pub fn is_symmetric_one_bit(&self) -> bool {
        self.thresholds == [0.0]
    }

    /// Highest threshold `q_{k-1}`.
    pub fn top_threshold(&self) -> f64 {
        *self.thresholds.last().expect("validated ADC has a threshold")
    }
}

/// Component-wise quantizer pair applied to the real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexAdcPair {
    #[serde(rename = "real")]
    pub real_part: AdcSpec,
    #[serde(rename = "imag")]
    pub imag_part: AdcSpec,
}

impl ComplexAdcPair {
    pub fn new(real_part: AdcSpec, imag_part: AdcSpec) -> Self {
        Self { real_part, imag_part }
    }

    pub fn one_bit() -> Self {
        Self::new(AdcSpec::one_bit(), AdcSpec::one_bit())
    }

    /// Size of the joint output alphabet, `k_R * k_I`.
    pub fn joint_levels(&self) -> usize {
        self.real_part.levels() * self.imag_part.levels()
    }

    pub fn is_symmetric_one_bit(&self) -> bool {
        self.real_part.is_symmetric_one_bit() && self.imag_part.is_symmetric_one_bit()
    }
}
