//! Brute-force cross-checks for the closed-form posterior summaries:
//! moments by adaptive quadrature of the density, and inverse-CDF sampling.
//!
//! Nothing here calls the closed-form moment code in `posterior`; the
//! quadrature only touches `pdf`, so agreement between the two is evidence
//! that the Mills-ratio algebra is right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{Side, TruncatedGaussianPosterior};
use crate::quadrature::{integrate_lower_half_line, QuadratureResult, Tolerance};
use crate::rng;

/// Requested absolute accuracy of [`quad_moment`].
pub const MOMENT_ABS_TOL: f64 = 1e-11;

const QUAD_TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-13,
    max_intervals: 4000,
};

/// Draws from a posterior together with the seed that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub draws: Vec<f64>,
    pub seed: u64,
    pub n: usize,
}

/// Integrates `g(y) * pdf(y)` over the posterior support.
fn integrate_against_pdf<G: Fn(f64) -> f64>(
    p: &TruncatedGaussianPosterior,
    g: G,
) -> Result<QuadratureResult> {
    // Work on the lower half-line; a non-negative support is mirrored.
    let s = match p.constraint().side {
        Side::NonPositive => 1.0,
        Side::NonNegative => -1.0,
    };
    let bound = s * p.bound();
    let split = (s * p.location()).min(bound) - 12.0 * p.scale();
    let f = |w: f64| {
        let y = s * w;
        g(y) * p.pdf(y)
    };
    let r = integrate_lower_half_line(f, split, bound, p.scale(), QUAD_TOL)?;
    if r.abs_error_estimate.is_nan() || r.abs_error_estimate > MOMENT_ABS_TOL {
        return Err(Error::NonConvergence {
            routine: "posterior moment quadrature",
            iterations: r.evaluations,
        });
    }
    Ok(r)
}

/// k-th raw moment of the posterior, k in {0, 1, 2}.
pub fn quad_moment(p: &TruncatedGaussianPosterior, k: u32) -> Result<QuadratureResult> {
    if k > 2 {
        return Err(Error::Domain {
            arg: "k",
            value: k as f64,
            domain: "{0, 1, 2}",
        });
    }
    integrate_against_pdf(p, |y| y.powi(k as i32))
}

/// Second central moment about the quadrature mean.
pub fn quad_variance(p: &TruncatedGaussianPosterior) -> Result<QuadratureResult> {
    let m1 = quad_moment(p, 1)?.value;
    integrate_against_pdf(p, |y| (y - m1) * (y - m1))
}

/// Expected value of an arbitrary function of the measurand.
pub fn quad_expectation<G: Fn(f64) -> f64>(
    p: &TruncatedGaussianPosterior,
    g: G,
) -> Result<QuadratureResult> {
    integrate_against_pdf(p, g)
}

/// Probability mass of the posterior at or below `q`, by quadrature of the
/// density alone.
pub fn quad_cdf(p: &TruncatedGaussianPosterior, q: f64) -> Result<f64> {
    if q.is_nan() {
        return Err(Error::Domain {
            arg: "q",
            value: q,
            domain: "not NaN",
        });
    }
    Ok(match p.constraint().side {
        Side::NonPositive => mass_below(p, q)?,
        Side::NonNegative => 1.0 - mass_below(p, -q)?,
    })
}

/// Mass of the mirrored density (support on the lower half-line) below `w`.
fn mass_below(p: &TruncatedGaussianPosterior, w: f64) -> Result<f64> {
    let s = match p.constraint().side {
        Side::NonPositive => 1.0,
        Side::NonNegative => -1.0,
    };
    let top = w.min(s * p.bound());
    if top == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let split = (s * p.location()).min(top) - 12.0 * p.scale();
    let f = |t: f64| p.pdf(s * t);
    let r = integrate_lower_half_line(f, split, top, p.scale(), QUAD_TOL)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Quantile by bisection on [`quad_cdf`]; independent of the closed-form
/// inversion in `posterior`.
pub fn quad_quantile(p: &TruncatedGaussianPosterior, prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain {
            arg: "prob",
            value: prob,
            domain: "(0, 1)",
        });
    }
    // bracket outward from the bound in steps that double
    let s = match p.constraint().side {
        Side::NonPositive => -1.0,
        Side::NonNegative => 1.0,
    };
    let inner = p.bound();
    let mut step = p.scale();
    let mut outer = inner + s * step;
    let below_target = |y: f64| -> Result<bool> { Ok(quad_cdf(p, y)? < prob) };
    // NonPositive: walk down until the cdf drops below prob.
    // NonNegative: walk up until it reaches prob.
    let mut doublings = 0;
    while below_target(outer)? == (s > 0.0) {
        doublings += 1;
        if doublings > 200 {
            return Err(Error::NonConvergence {
                routine: "oracle quantile bracket",
                iterations: doublings,
            });
        }
        step *= 2.0;
        outer = inner + s * step;
    }
    let (mut lo, mut hi) = if s < 0.0 {
        (outer, inner)
    } else {
        (inner, outer)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if below_target(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * p.scale() {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `n` inverse-CDF draws from the posterior, reproducible from `seed`.
pub fn sample(p: &TruncatedGaussianPosterior, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    let draws = rng::generate(n, seed, |r, out: &mut [f64]| {
        for v in out {
            let u = rng::open_unit(r);
            *v = p.quantile(u).expect("open_unit lies in (0, 1)");
        }
    });
    Ok(SampleSet { draws, seed, n })
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `draws` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(draws: &[f64], cdf: F) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
