//! Adaptive Gauss-Kronrod (7/15) quadrature on finite and half-infinite
//! intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    fn zero() -> Self {
        QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

/// Stopping rule: `err <= max(abs, rel * |I|)`, at most `max_intervals`
/// subintervals.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-13,
            rel: 1e-13,
            max_intervals: 4000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut f1 = [0.0; 7];
    let mut f2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let (lo, hi) = (f(center - x), f(center + x));
        f1[j] = lo;
        f2[j] = hi;
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    let asc = asc * abs_half;
    let abs_sum = abs_sum * abs_half;
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs_sum;
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < floor {
        err = floor;
    }
    (kronrod * half, err)
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadratureResult::zero());
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;

    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if !(total.is_finite() && total_err.is_finite()) {
            return Err(Error::InvalidParameter(
                "integrand is not finite on the interval".into(),
            ));
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::NonConvergence {
                routine: "adaptive Gauss-Kronrod",
                iterations: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval cannot be split further in floating point
            heap.push(worst);
            return Err(Error::NonConvergence {
                routine: "adaptive Gauss-Kronrod",
                iterations: heap.len(),
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // resum to shed drift from the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(QuadratureResult {
        value,
        abs_error_estimate: error,
        evaluations,
    })
}

/// Integrates `f` over `[a, b]` as a sum of adaptive integrals on panels
/// no wider than `width`, so that a feature narrower than the interval
/// cannot slip between the nodes of the first rule.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    width: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if width.is_nan() || width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "panel width must be positive, got {width}"
        )));
    }
    let panels = ((b - a) / width).ceil().max(1.0);
    if panels.is_nan() || panels > 1e6 {
        return Err(Error::InvalidParameter(format!(
            "too many panels on [{a}, {b}]"
        )));
    }
    let panels = panels as usize;
    let h = (b - a) / panels as f64;
    let mut acc = QuadratureResult::zero();
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == panels {
            b
        } else {
            a + (i + 1) as f64 * h
        };
        acc = acc.combine(integrate(&f, lo, hi, tol)?);
    }
    Ok(acc)
}

/// Integrates `f` over `(-inf, b]` via `y = b - (1 - t)/t`, `t` in `(0, 1]`.
pub fn integrate_to_neg_infinity<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    let g = |t: f64| {
        let s = (1.0 - t) / t;
        let v = f(b - s) / (t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Integrates `f` over `(-inf, b]`: the transformed tail below `split`,
/// and panels of at most `width` on `[split, b]`.
pub fn integrate_lower_half_line<F: Fn(f64) -> f64>(
    f: F,
    split: f64,
    b: f64,
    width: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    let split = split.min(b);
    let body = if split < b {
        integrate_panels(&f, split, b, width, tol)?
    } else {
        QuadratureResult::zero()
    };
    let tail = integrate_to_neg_infinity(&f, split, tol)?;
    Ok(body.combine(tail))
}
