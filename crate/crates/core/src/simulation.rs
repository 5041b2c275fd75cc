//! Sampling-distribution studies and tabulated estimator curves.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{Measurement, SignConstraint, TruncatedGaussianPosterior};
use crate::rng;

/// How often a single Gaussian result lands on the wrong side of zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub true_value: f64,
    pub sigma: f64,
    pub n_trials: usize,
    /// Fraction of results greater than zero.
    pub frac_positive: f64,
    /// Fraction whose interval `result +/- sigma` lies entirely above zero.
    pub frac_ci_all_positive: f64,
    pub seed: u64,
}

/// Draws `n` results from `N(true_value, sigma^2)` and counts how many are
/// positive, and how many have their one-sigma interval entirely positive.
///
/// A positive `true_value` is accepted (the counts are still meaningful) but
/// is outside the intended use.
pub fn coverage(true_value: f64, sigma: f64, n: usize, seed: u64) -> Result<CoverageReport> {
    if !true_value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "true value must be finite, got {true_value}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "number of trials must be at least 1".into(),
        ));
    }
    // 0 = non-positive, 1 = positive, 2 = whole interval positive
    let classes = rng::generate(n, seed, |r, out: &mut [u8]| {
        for slot in out {
            let z: f64 = StandardNormal.sample(r);
            let result = true_value + sigma * z;
            *slot = if result - sigma > 0.0 {
                2
            } else if result > 0.0 {
                1
            } else {
                0
            };
        }
    });
    let positive = classes.iter().filter(|&&c| c >= 1).count();
    let all_positive = classes.iter().filter(|&&c| c == 2).count();
    Ok(CoverageReport {
        true_value,
        sigma,
        n_trials: n,
        frac_positive: positive as f64 / n as f64,
        frac_ci_all_positive: all_positive as f64 / n as f64,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// Posterior mean with a one-standard-deviation band.
    MeanBand,
    /// Posterior median with first and third quartiles.
    MedianQuartiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub y1: f64,
    pub estimate: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// The unconstrained estimate, i.e. the measured value itself.
    pub orthodox: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub kind: CurveKind,
    pub rows: Vec<CurveRow>,
}

pub const DEFAULT_CURVE_FROM: f64 = -4.0;
pub const DEFAULT_CURVE_TO: f64 = 4.0;
pub const DEFAULT_CURVE_STEP: f64 = 0.05;

/// Number of points on `from, from + step, ...` up to `to` inclusive.
fn grid_len(from: f64, to: f64, step: f64) -> Result<usize> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Error::InvalidParameter(format!(
            "curve range needs from < to, got [{from}, {to}]"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "curve step must be positive, got {step}"
        )));
    }
    let span = (to - from) / step;
    // tolerate representation error in the step (0.05 is not exact)
    let n = (span + 1e-9).floor();
    if n > 1e8 {
        return Err(Error::InvalidParameter(format!(
            "curve grid too large: {n} points"
        )));
    }
    Ok(n as usize + 1)
}

/// Estimator curves over measured values `y1` with unit scale and a
/// non-positive constraint at zero.
pub fn estimator_curve(kind: CurveKind, from: f64, to: f64, step: f64) -> Result<CurveTable> {
    let n = grid_len(from, to, step)?;
    let rows = (0..n)
        .map(|i| {
            let y1 = from + i as f64 * step;
            let p = TruncatedGaussianPosterior::new(y1, 1.0, SignConstraint::non_positive())?;
            let bound = p.bound();
            let row = match kind {
                CurveKind::MeanBand => {
                    let (m, s) = (p.mean(), p.sd());
                    CurveRow {
                        y1,
                        estimate: m,
                        band_lo: m - s,
                        band_hi: (m + s).min(bound),
                        orthodox: y1,
                    }
                }
                CurveKind::MedianQuartiles => CurveRow {
                    y1,
                    estimate: p.median(),
                    band_lo: p.quantile(0.25)?,
                    band_hi: p.quantile(0.75)?,
                    orthodox: y1,
                },
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable { kind, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub y0: f64,
    pub pdf: f64,
    pub cdf: f64,
}

/// Posterior density and distribution function on `n` evenly spaced points
/// from `lo` to `hi` inclusive.
pub fn posterior_curve(
    m: Measurement,
    c: SignConstraint,
    grid: (f64, f64, usize),
) -> Result<Vec<DensityRow>> {
    let p = TruncatedGaussianPosterior::new(m.value, m.sigma, c)?;
    density_table(&p, grid)
}

/// Same as [`posterior_curve`] for an already-built posterior (for example a
/// fused campaign).
pub fn density_table(
    p: &TruncatedGaussianPosterior,
    grid: (f64, f64, usize),
) -> Result<Vec<DensityRow>> {
    let (lo, hi, n) = grid;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs lo < hi and at least 2 points, got {lo}:{hi}:{n}"
        )));
    }
    let h = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let y0 = if i == n - 1 { hi } else { lo + i as f64 * h };
            DensityRow {
                y0,
                pdf: p.pdf(y0),
                cdf: p.cdf(y0),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_far_inside_support() {
        let r = coverage(-10.0, 1.0, 100_000, 7).unwrap();
        assert!(r.frac_positive <= 1e-4);
        assert!(r.frac_ci_all_positive <= 1e-4);
        assert_eq!(r.n_trials, 100_000);
        assert_eq!(r.seed, 7);
    }

    #[test]
    fn coverage_one_sigma_below_zero() {
        // P(N(-1, 1) > 0) = Phi(-1)
        let r = coverage(-1.0, 1.0, 1_000_000, 11).unwrap();
        assert!((r.frac_positive - 0.158_655_253_9).abs() < 0.002);
        assert!(r.frac_ci_all_positive <= r.frac_positive);
    }

    #[test]
    fn coverage_is_deterministic_across_pools() {
        let a = coverage(0.0, 2.0, 50_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| coverage(0.0, 2.0, 50_000, 5).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, coverage(0.0, 2.0, 50_000, 6).unwrap());
    }

    #[test]
    fn coverage_rejects_bad_input() {
        assert!(coverage(0.0, 0.0, 10, 1).is_err());
        assert!(coverage(0.0, 1.0, 0, 1).is_err());
        assert!(coverage(f64::NAN, 1.0, 10, 1).is_err());
    }

    #[test]
    fn default_curve_grid() {
        let t = estimator_curve(CurveKind::MeanBand, -4.0, 4.0, 0.05).unwrap();
        assert_eq!(t.rows.len(), 161);
        let at_zero = t.rows.iter().find(|r| r.y1.abs() < 1e-12).unwrap();
        assert!((at_zero.estimate + 0.797_884_560_8).abs() < 1e-10);
        let first = t.rows[0];
        assert!((first.estimate + 4.0).abs() < 1e-3);
        assert!((first.band_hi - first.band_lo - 2.0).abs() < 0.01);
        assert!(t.rows.iter().all(|r| r.orthodox == r.y1));
    }

    #[test]
    fn median_curve_at_zero() {
        let t = estimator_curve(CurveKind::MedianQuartiles, -1.0, 1.0, 0.5).unwrap();
        assert_eq!(t.rows.len(), 5);
        assert!((t.rows[2].estimate + 0.674_489_750_2).abs() < 1e-9);
        for r in &t.rows {
            assert!(r.band_lo < r.estimate && r.estimate < r.band_hi && r.band_hi < 0.0);
        }
    }

    #[test]
    fn bad_curve_grids() {
        assert!(estimator_curve(CurveKind::MeanBand, 1.0, -1.0, 0.1).is_err());
        assert!(estimator_curve(CurveKind::MeanBand, -1.0, 1.0, 0.0).is_err());
        assert!(estimator_curve(CurveKind::MeanBand, -1.0, 1.0, f64::NAN).is_err());
        let m = Measurement::new(1.0, 1.0).unwrap();
        assert!(posterior_curve(m, SignConstraint::non_positive(), (0.0, -1.0, 10)).is_err());
        assert!(posterior_curve(m, SignConstraint::non_positive(), (-1.0, 0.0, 1)).is_err());
    }

    #[test]
    fn density_curve_shapes() {
        let m = Measurement::new(4.31, 3.76).unwrap();
        let rows = posterior_curve(m, SignConstraint::non_positive(), (-15.0, 0.0, 301)).unwrap();
        assert_eq!(rows.len(), 301);
        assert!(rows.windows(2).all(|w| w[1].pdf > w[0].pdf));
        assert!((rows[300].cdf - 1.0).abs() < 1e-10);
        assert_eq!(rows[300].y0, 0.0);
        let outside = posterior_curve(m, SignConstraint::non_positive(), (-1.0, 1.0, 3)).unwrap();
        assert_eq!(outside[2].pdf, 0.0);
    }
}
