//! Error-function family in double precision.
//!
//! `erf` and `erfc` are the musl/FreeBSD rational approximations (via the
//! `libm` crate). `erfcx` and `inv_erfc` are built on top of them so that
//! ratios such as `exp(-x^2) / erfc(x)` stay finite far into the tail.

use crate::error::{Error, Result};

/// 1/sqrt(pi)
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;
/// 1/sqrt(2*pi)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_9;
/// sqrt(2/pi)
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_355_879_892_119_868_763_7;

// Above this point erfc(x) starts losing bits to subnormals, so erfcx
// switches to the continued fraction.
const ERFCX_CF_SWITCH: f64 = 26.0;
const ERFCX_CF_DEPTH: usize = 64;

/// Error function. Odd, with range (-1, 1).
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function, `1 - erf(x)` without cancellation.
///
/// Underflows silently to 0 for x beyond about 26.5; use [`erfcx`] there.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `exp(x^2)` evaluated as `exp(hi) * exp(lo)` with `x^2 = hi + lo` exactly,
/// which removes the rounding error of `x*x` from the exponent.
fn exp_x2(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    hi.exp() * lo.exp()
}

/// `exp(-x^2)` with the same splitting as [`exp_x2`].
#[cfg(test)]
pub(crate) fn exp_neg_x2(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    (-hi).exp() * (-lo).exp()
}

/// Scaled complementary error function for x >= 0, never overflows.
fn erfcx_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < ERFCX_CF_SWITCH {
        return exp_x2(x) * erfc(x);
    }
    if x > 1e150 {
        return FRAC_1_SQRT_PI / x;
    }
    // erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
    let mut tail = 0.0;
    for k in (1..=ERFCX_CF_DEPTH).rev() {
        tail = (k as f64 * 0.5) / (x + tail);
    }
    FRAC_1_SQRT_PI / (x + tail)
}

/// Scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Finite and positive for every x > -26.6; for more negative arguments
/// `exp(x^2)` is not representable and an [`Error::Overflow`] is returned.
pub fn erfcx(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain {
            arg: "x",
            value: x,
            domain: "finite reals",
        });
    }
    if x >= 0.0 {
        return Ok(erfcx_nonneg(x));
    }
    // erfcx(x) = 2 exp(x^2) - erfcx(-x)
    let v = 2.0 * exp_x2(x) - erfcx_nonneg(-x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(x))
    }
}

/// `ln(erfc(x))`, valid far past the point where `erfc` underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x > 0.0 {
        -x * x + erfcx_nonneg(x).ln()
    } else {
        erfc(x).ln()
    }
}

/// Inverse of [`erfc`] on (0, 2).
pub fn inv_erfc(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::Domain {
            arg: "p",
            value: p,
            domain: "(0, 2)",
        });
    }
    if p > 1.0 {
        // 2 - p is exact for p in [1, 2]
        Ok(-inv_erfc_ln((2.0 - p).ln()))
    } else {
        Ok(inv_erfc_ln(p.ln()))
    }
}

/// Inverse of `ln(erfc(x))` for targets `ln_p <= 0`, returning x >= 0.
///
/// Newton iteration on `g(x) = ln erfc(x) - ln_p` inside a shrinking
/// bracket, so arguments far below the smallest representable `erfc`
/// (e.g. `ln_p = -5000`) are handled without underflow.
pub fn inv_erfc_ln(ln_p: f64) -> f64 {
    debug_assert!(ln_p <= 0.0);
    if ln_p >= 0.0 {
        return 0.0;
    }
    // erfc(x) <= exp(-x^2) for x >= 0, so the root is below sqrt(-ln_p).
    let mut lo = 0.0_f64;
    let mut hi = (-ln_p).sqrt() + 1.0;
    let mut x = initial_guess(ln_p).clamp(lo, hi);

    for _ in 0..100 {
        let g = ln_erfc(x) - ln_p;
        if g > 0.0 {
            lo = x;
        } else if g < 0.0 {
            hi = x;
        } else {
            return x;
        }
        // d/dx ln erfc(x) = -2 / (sqrt(pi) erfcx(x))
        let slope = -2.0 * FRAC_1_SQRT_PI / erfcx_nonneg(x);
        let mut next = x - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    x
}

// Rational approximation to the upper-tail normal quantile (absolute error
// below 4.5e-4), mapped from z to x = z / sqrt(2).
fn initial_guess(ln_p: f64) -> f64 {
    const C: [f64; 3] = [2.515_517, 0.802_853, 0.010_328];
    const D: [f64; 3] = [1.432_788, 0.189_269, 0.001_308];
    // tail probability of the standard normal is p / 2
    let t = (-2.0 * (ln_p - std::f64::consts::LN_2)).sqrt();
    let num = C[0] + t * (C[1] + t * C[2]);
    let den = 1.0 + t * (D[0] + t * (D[1] + t * D[2]));
    ((t - num / den) * std::f64::consts::FRAC_1_SQRT_2).max(0.0)
}

/// Standard normal density `exp(-x^2/2)/sqrt(2*pi)`; 0 on underflow.
#[inline]
pub fn gaussian_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}
