//! Standard normal tail probabilities.

use std::f64::consts::SQRT_2;

use crate::error::{finite, Result};

/// `ln(sqrt(2*pi))`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Beyond this point `ln_q` switches to the continued fraction.
const LOG_DOMAIN_SWITCH: f64 = 8.0;

/// Tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> Result<f64> {
    Ok(q(finite("x", x)?))
}

/// Natural logarithm of `Q(x)`, accurate far beyond the range where `Q`
/// itself underflows.
pub fn ln_q(x: f64) -> Result<f64> {
    let x = finite("x", x)?;
    if x <= -LOG_DOMAIN_SWITCH {
        return Ok((-q(-x)).ln_1p());
    }
    if x <= LOG_DOMAIN_SWITCH {
        return Ok(q(x).ln());
    }
    // Laplace continued fraction Q(x) = pdf(x) / (x + 1/(x + 2/(x + 3/(x + ...)))),
    // evaluated bottom-up. 64 terms are far more than needed for x > 8.
    let mut t = x;
    for k in (1..=64).rev() {
        t = x + k as f64 / t;
    }
    Ok(-0.5 * x * x - LN_SQRT_2PI - t.ln())
}

/// Total version of [`q_function`] that maps the infinities to 1 and 0.
pub(crate) fn q(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x == f64::NEG_INFINITY {
        1.0
    } else {
        0.5 * libm::erfc(x / SQRT_2)
    }
}
