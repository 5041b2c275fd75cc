//! Point estimates as minimisers of posterior expected loss.
//!
//! Squared error, absolute error and zero-one loss have closed-form
//! minimisers (mean, median, mode). Any other loss of the estimation error
//! goes through [`minimize_expected_loss`], which evaluates the expected
//! loss by quadrature and minimises it by golden-section search.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{Side, TruncatedGaussianPosterior};
use crate::quadrature::{integrate_lower_half_line, integrate_panels, Tolerance};

/// A loss as a function of the estimation error `estimate - true value`.
pub type LossFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum LossKind {
    SquaredError,
    AbsoluteDifference,
    ZeroOne,
    /// Must be total, non-negative and minimal at zero error.
    CustomNumeric(LossFn),
}

impl LossKind {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        LossKind::CustomNumeric(Arc::new(f))
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::SquaredError => "squared",
            LossKind::AbsoluteDifference => "absolute",
            LossKind::ZeroOne => "zero-one",
            LossKind::CustomNumeric(_) => "custom",
        }
    }
}

impl fmt::Debug for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct PointEstimate {
    pub value: f64,
    pub loss: LossKind,
    pub posterior: TruncatedGaussianPosterior,
}

/// Mean, spread and a central credible interval of a posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    pub prob_lo: f64,
    pub prob_hi: f64,
}

pub fn estimate(p: &TruncatedGaussianPosterior, loss: LossKind) -> Result<PointEstimate> {
    let value = match &loss {
        LossKind::SquaredError => p.mean(),
        LossKind::AbsoluteDifference => p.median(),
        LossKind::ZeroOne => p.mode(),
        LossKind::CustomNumeric(f) => minimize_expected_loss(p, f.as_ref())?,
    };
    Ok(PointEstimate {
        value,
        loss,
        posterior: *p,
    })
}

const GOLDEN_MAX_ITER: usize = 500;
const BRACKET_TAIL: f64 = 1e-6;
const LOSS_QUAD_TOL: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-13,
    max_intervals: 4000,
};

/// Posterior expected loss `E[L(estimate - y)]`.
pub fn expected_loss<L: Fn(f64) -> f64 + ?Sized>(
    p: &TruncatedGaussianPosterior,
    loss: &L,
    estimate: f64,
) -> Result<f64> {
    // mirrored coordinates w = s*y put the support on (-inf, s*bound]
    let s = match p.constraint().side {
        Side::NonPositive => 1.0,
        Side::NonNegative => -1.0,
    };
    let bound = s * p.bound();
    let kink = (s * estimate).min(bound);
    let f = |w: f64| {
        let y = s * w;
        loss(estimate - y) * p.pdf(y)
    };
    // the loss is allowed a kink at zero error, so split there
    let split = (s * p.location()).min(kink) - 12.0 * p.scale();
    let below = integrate_lower_half_line(f, split, kink, p.scale(), LOSS_QUAD_TOL)?;
    let above = integrate_panels(f, kink, bound, p.scale(), LOSS_QUAD_TOL)?;
    let total = below.value + above.value;
    if !total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "expected loss is not finite at estimate {estimate}"
        )));
    }
    Ok(total)
}

/// Minimises the posterior expected loss over the bracket from the 1e-6
/// quantile to the bound, to an absolute tolerance of `1e-8 * scale`.
pub fn minimize_expected_loss<L: Fn(f64) -> f64 + ?Sized>(
    p: &TruncatedGaussianPosterior,
    loss: &L,
) -> Result<f64> {
    let at_zero = loss(0.0);
    if !(at_zero.is_finite() && at_zero >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "loss at zero error must be finite and non-negative, got {at_zero}"
        )));
    }
    let (lo, hi) = match p.constraint().side {
        Side::NonPositive => (p.quantile(BRACKET_TAIL)?, p.bound()),
        Side::NonNegative => (p.bound(), p.quantile(1.0 - BRACKET_TAIL)?),
    };
    golden_section(
        |x| expected_loss(p, loss, x),
        lo,
        hi,
        1e-8 * p.scale(),
        GOLDEN_MAX_ITER,
    )
}

fn golden_section<F: Fn(f64) -> Result<f64>>(
    f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            // the ends of the bracket may beat the interior (minimum on the bound)
            return Ok(0.5 * (a + b));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Err(Error::NonConvergence {
        routine: "golden-section search",
        iterations: max_iter,
    })
}

pub fn summarize(
    p: &TruncatedGaussianPosterior,
    prob_lo: f64,
    prob_hi: f64,
) -> Result<CredibleSummary> {
    if !(prob_lo > 0.0 && prob_lo < 0.5) {
        return Err(Error::Domain {
            arg: "prob_lo",
            value: prob_lo,
            domain: "(0, 0.5)",
        });
    }
    if !(prob_hi > 0.5 && prob_hi < 1.0) {
        return Err(Error::Domain {
            arg: "prob_hi",
            value: prob_hi,
            domain: "(0.5, 1)",
        });
    }
    Ok(CredibleSummary {
        mean: p.mean(),
        sd: p.sd(),
        median: p.median(),
        q_lo: p.quantile(prob_lo)?,
        q_hi: p.quantile(prob_hi)?,
        prob_lo,
        prob_hi,
    })
}
