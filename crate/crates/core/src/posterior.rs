//! Post-data density of a sign-constrained measurand.
//!
//! With a flat prior on the half-line `y <= bound` (or `y >= bound`) and a
//! Gaussian likelihood centred on the measured value, the posterior is the
//! Gaussian restricted to the allowed half-line and renormalised.
//!
//! Every summary is computed on the standardized problem
//!
//! ```text
//!     z <= 0,   z ~ N(u, 1) truncated,   u = s * (location - bound) / scale
//! ```
//!
//! with `s = +1` for [`Side::NonPositive`] and `s = -1` for
//! [`Side::NonNegative`], and mapped back through `y = bound + s * scale * z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{erfc, erfcx, gaussian_pdf, inv_erfc, inv_erfc_ln, ln_erfc, SQRT_2_OVER_PI};

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// A single measurement result with its standard uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub sigma: f64,
}

impl Measurement {
    pub fn new(value: f64, sigma: f64) -> Result<Self> {
        let m = Measurement { value, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::InvalidMeasurement(format!(
                "value must be finite, got {}",
                self.value
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidMeasurement(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Which half-line the measurand is known to lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    NonPositive,
    NonNegative,
}

impl Side {
    fn orientation(self) -> f64 {
        match self {
            Side::NonPositive => 1.0,
            Side::NonNegative => -1.0,
        }
    }
}

/// Support of the prior: `y <= bound` or `y >= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignConstraint {
    pub side: Side,
    pub bound: f64,
}

impl SignConstraint {
    pub const fn non_positive() -> Self {
        SignConstraint {
            side: Side::NonPositive,
            bound: 0.0,
        }
    }

    pub const fn non_negative() -> Self {
        SignConstraint {
            side: Side::NonNegative,
            bound: 0.0,
        }
    }

    pub fn with_bound(self, bound: f64) -> Self {
        SignConstraint { bound, ..self }
    }

    /// Whether `y` lies in the closed support.
    pub fn contains(&self, y: f64) -> bool {
        match self.side {
            Side::NonPositive => y <= self.bound,
            Side::NonNegative => y >= self.bound,
        }
    }
}

impl Default for SignConstraint {
    fn default() -> Self {
        Self::non_positive()
    }
}

/// Gaussian with the given location and scale, truncated to the support of
/// a [`SignConstraint`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGaussianPosterior {
    location: f64,
    scale: f64,
    constraint: SignConstraint,
}

/// Builds the posterior for a single measurement under a sign constraint.
pub fn make_posterior(m: Measurement, c: SignConstraint) -> Result<TruncatedGaussianPosterior> {
    TruncatedGaussianPosterior::new(m.value, m.sigma, c)
}

impl TruncatedGaussianPosterior {
    pub fn new(location: f64, scale: f64, constraint: SignConstraint) -> Result<Self> {
        Measurement::new(location, scale)?;
        if !constraint.bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constraint bound must be finite, got {}",
                constraint.bound
            )));
        }
        let p = TruncatedGaussianPosterior {
            location,
            scale,
            constraint,
        };
        debug_assert!(p.ln_normalizer().is_finite());
        Ok(p)
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn constraint(&self) -> SignConstraint {
        self.constraint
    }

    pub fn bound(&self) -> f64 {
        self.constraint.bound
    }

    fn orientation(&self) -> f64 {
        self.constraint.side.orientation()
    }

    /// Location measured in scale units towards the forbidden side:
    /// positive when the measured value lies outside the support.
    pub fn standardized_location(&self) -> f64 {
        self.orientation() * (self.location - self.constraint.bound) / self.scale
    }

    fn standardize(&self, y: f64) -> f64 {
        self.orientation() * (y - self.constraint.bound) / self.scale
    }

    fn unstandardize(&self, z: f64) -> f64 {
        self.constraint.bound + self.orientation() * self.scale * z
    }

    /// Natural log of the prior-support mass of the likelihood,
    /// `ln(erfc(u / sqrt 2) / 2)`. Finite for every valid posterior.
    pub fn ln_normalizer(&self) -> f64 {
        ln_erfc(self.standardized_location() * FRAC_1_SQRT_2) - std::f64::consts::LN_2
    }

    pub fn pdf(&self, y0: f64) -> f64 {
        if !self.constraint.contains(y0) {
            return 0.0;
        }
        std_pdf(self.standardized_location(), self.standardize(y0)) / self.scale
    }

    pub fn cdf(&self, q: f64) -> f64 {
        let u = self.standardized_location();
        let z = self.standardize(q);
        match self.constraint.side {
            Side::NonPositive => std_cdf(u, z),
            Side::NonNegative => std_sf(u, z),
        }
    }

    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::Domain {
                arg: "prob",
                value: prob,
                domain: "(0, 1)",
            });
        }
        let u = self.standardized_location();
        let z = match self.constraint.side {
            Side::NonPositive => std_quantile(u, prob),
            Side::NonNegative => std_quantile(u, 1.0 - prob),
        };
        Ok(self.unstandardize(z))
    }

    /// Posterior expectation, the minimiser of squared-error loss.
    pub fn mean(&self) -> f64 {
        self.unstandardize(std_mean(self.standardized_location()))
    }

    pub fn sd(&self) -> f64 {
        self.scale * std_var(self.standardized_location()).sqrt()
    }

    /// Posterior median, the minimiser of absolute-error loss.
    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is inside (0, 1)")
    }

    /// Posterior mode: the measured value when it lies in the support,
    /// otherwise the bound.
    pub fn mode(&self) -> f64 {
        let bound = self.constraint.bound;
        match self.constraint.side {
            Side::NonPositive if self.location < bound => self.location,
            Side::NonNegative if self.location > bound => self.location,
            _ => bound,
        }
    }
}

// Standardized problem: z <= 0, density proportional to phi(z - u).

/// Above this standardized location the moments come from the Mills-ratio
/// continued fraction instead of `u - r(u)`, which cancels.
const MILLS_CF_SWITCH: f64 = 8.0;
const MILLS_CF_DEPTH: usize = 400;

/// Inverse Mills ratio `r(u) = phi(u) / Q(u)`, with `Q` the upper normal tail.
pub(crate) fn inverse_mills(u: f64) -> f64 {
    if u > 0.0 {
        SQRT_2_OVER_PI / erfcx(u * FRAC_1_SQRT_2).expect("erfcx is finite for positive arguments")
    } else {
        2.0 * gaussian_pdf(u) / erfc(u * FRAC_1_SQRT_2)
    }
}

/// First two tails `(t1, t2)` of the continued fraction
/// `Q(a)/phi(a) = 1/(a + t1)`, `t_k = k / (a + t_{k+1})`.
fn mills_tails(a: f64) -> (f64, f64) {
    let mut t = 0.0;
    for k in (2..=MILLS_CF_DEPTH).rev() {
        t = k as f64 / (a + t);
    }
    let t2 = t;
    let t1 = 1.0 / (a + t2);
    (t1, t2)
}

fn std_pdf(u: f64, z: f64) -> f64 {
    if z > 0.0 {
        return 0.0;
    }
    if u > 0.0 {
        // phi(z - u) / Q(u) = sqrt(2/pi) exp(z u - z^2 / 2) / erfcx(u / sqrt 2)
        let e = erfcx(u * FRAC_1_SQRT_2).expect("erfcx is finite for positive arguments");
        SQRT_2_OVER_PI * (z * u - 0.5 * z * z).exp() / e
    } else {
        2.0 * gaussian_pdf(z - u) / erfc(u * FRAC_1_SQRT_2)
    }
}

fn std_cdf(u: f64, z: f64) -> f64 {
    if z >= 0.0 {
        return 1.0;
    }
    let a = (u - z) * FRAC_1_SQRT_2;
    let b = u * FRAC_1_SQRT_2;
    let v = if u > 0.0 {
        // erfc(a)/erfc(b) = exp(b^2 - a^2) erfcx(a)/erfcx(b), b^2 - a^2 = z(2u - z)/2
        let ea = erfcx(a).expect("a > b > 0");
        let eb = erfcx(b).expect("b > 0");
        (0.5 * z * (2.0 * u - z)).exp() * ea / eb
    } else {
        erfc(a) / erfc(b)
    };
    v.clamp(0.0, 1.0)
}

fn std_sf(u: f64, z: f64) -> f64 {
    if z >= 0.0 {
        return 0.0;
    }
    let v = if u > 0.0 {
        let a = (u - z) * FRAC_1_SQRT_2;
        let b = u * FRAC_1_SQRT_2;
        let ln_cdf = 0.5 * z * (2.0 * u - z) + erfcx(a).expect("a > b > 0").ln()
            - erfcx(b).expect("b > 0").ln();
        -ln_cdf.exp_m1()
    } else {
        // P(z < Z <= 0) / P(Z <= 0) with Z ~ N(u, 1)
        let upper = erfc((z - u) * FRAC_1_SQRT_2);
        let lower = erfc(-u * FRAC_1_SQRT_2);
        (upper - lower) / erfc(u * FRAC_1_SQRT_2)
    };
    v.clamp(0.0, 1.0)
}

const FRAC_SQRT_PI_2: f64 = 0.886_226_925_452_758_013_649_083_741_671_e0;

fn std_quantile(u: f64, prob: f64) -> f64 {
    let b = u * FRAC_1_SQRT_2;
    let z = if u > 0.0 || prob <= 0.5 {
        // erfc((u - z)/sqrt 2) = prob * erfc(u / sqrt 2), solved in log space
        let x = inv_erfc_ln(prob.ln() + ln_erfc(b));
        if b > 0.0 {
            -SQRT_2 * polish_offset(b, x - b, prob.ln())
        } else {
            u - SQRT_2 * x
        }
    } else {
        // Upper tail for u <= 0: Q(z - u) = (1 - prob) P(Z <= 0) + Q(-u)
        let survival = 1.0 - prob;
        let target = survival * erfc(b) + erfc(-b);
        let x = inv_erfc(target).expect("target lies in (0, 2)");
        u + SQRT_2 * x
    };
    z.min(0.0)
}

/// Newton steps on `ln erfc(b + d) - ln erfc(b) = ln_p` for the offset `d`
/// itself; forming `x - b` from a solved `x` loses digits when `b` is large.
fn polish_offset(b: f64, mut d: f64, ln_p: f64) -> f64 {
    let eb = erfcx(b).expect("b > 0");
    for _ in 0..4 {
        d = d.max(0.0);
        let ex = erfcx(b + d).expect("b + d > 0");
        let h = (ex / eb).ln() - d * (2.0 * b + d) - ln_p;
        let step = h * ex * FRAC_SQRT_PI_2;
        d += step;
        if step.abs() <= 4.0 * f64::EPSILON * d.abs() {
            break;
        }
    }
    d.max(0.0)
}

fn std_mean(u: f64) -> f64 {
    if u >= MILLS_CF_SWITCH {
        -mills_tails(u).0
    } else {
        u - inverse_mills(u)
    }
}

fn std_var(u: f64) -> f64 {
    if u >= MILLS_CF_SWITCH {
        // 1 - r (r - u) with r = u + t1 and t1 (u + t2) = 1 reduces to t1 (t2 - t1)
        let (t1, t2) = mills_tails(u);
        t1 * (t2 - t1)
    } else {
        let r = inverse_mills(u);
        (1.0 + u * r - r * r).max(0.0)
    }
}
