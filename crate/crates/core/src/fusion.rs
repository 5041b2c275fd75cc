//! Inverse-variance weighted mean of repeated independent measurements.
//!
//! For Gaussian data the weighted mean and its standard deviation are
//! sufficient: the posterior built from them equals the normalised product
//! of the individual likelihoods restricted to the support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{Measurement, SignConstraint, TruncatedGaussianPosterior};

/// An ordered series of measurements of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub label: String,
    pub measurements: Vec<Measurement>,
}

impl Campaign {
    pub fn new(label: impl Into<String>, measurements: Vec<Measurement>) -> Result<Self> {
        let c = Campaign {
            label: label.into(),
            measurements,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.measurements.is_empty() {
            return Err(Error::EmptyCampaign);
        }
        self.measurements.iter().try_for_each(Measurement::validate)
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub ybar: f64,
    pub sigma_ybar: f64,
    pub n: usize,
    /// Weighted residual sum of squares. Reported only; weights are never
    /// rescaled by it.
    pub chi2: f64,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

pub fn weighted_mean(c: &Campaign) -> Result<FusionResult> {
    c.validate()?;
    let mut weights = CompensatedSum::default();
    let mut weighted = CompensatedSum::default();
    for m in &c.measurements {
        let w = 1.0 / (m.sigma * m.sigma);
        weights.add(w);
        weighted.add(w * m.value);
    }
    let var = 1.0 / weights.value();
    let ybar = weighted.value() * var;
    let mut chi2 = CompensatedSum::default();
    for m in &c.measurements {
        let r = (m.value - ybar) / m.sigma;
        chi2.add(r * r);
    }
    Ok(FusionResult {
        ybar,
        sigma_ybar: var.sqrt(),
        n: c.len(),
        chi2: chi2.value(),
    })
}

pub fn fuse_to_posterior(
    c: &Campaign,
    constraint: SignConstraint,
) -> Result<TruncatedGaussianPosterior> {
    let f = weighted_mean(c)?;
    TruncatedGaussianPosterior::new(f.ybar, f.sigma_ybar, constraint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::make_posterior;
    use crate::quadrature::{integrate_panels, Tolerance};
    use proptest::prelude::*;

    fn m(v: f64, s: f64) -> Measurement {
        Measurement::new(v, s).unwrap()
    }

    #[test]
    fn single_measurement_is_identity() {
        let c = Campaign::new("one", vec![m(-1.3, 0.7)]).unwrap();
        let f = weighted_mean(&c).unwrap();
        assert_eq!((f.ybar, f.sigma_ybar, f.n, f.chi2), (-1.3, 0.7, 1, 0.0));
        let p = fuse_to_posterior(&c, SignConstraint::non_positive()).unwrap();
        assert_eq!(
            p,
            make_posterior(m(-1.3, 0.7), SignConstraint::non_positive()).unwrap()
        );
    }

    #[test]
    fn duplicated_measurement() {
        let c = Campaign::new("two", vec![m(2.5, 3.0), m(2.5, 3.0)]).unwrap();
        let f = weighted_mean(&c).unwrap();
        assert!((f.ybar - 2.5).abs() < 1e-15);
        assert!((f.sigma_ybar - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.chi2, 0.0);
    }

    #[test]
    fn chi2_of_two_points() {
        let c = Campaign::new("", vec![m(-1.0, 1.0), m(1.0, 1.0)]).unwrap();
        let f = weighted_mean(&c).unwrap();
        assert_eq!(f.ybar, 0.0);
        assert!((f.chi2 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_invalid_campaigns() {
        assert_eq!(Campaign::new("", vec![]).unwrap_err(), Error::EmptyCampaign);
        let bad = Campaign {
            label: String::new(),
            measurements: vec![Measurement {
                value: 1.0,
                sigma: 0.0,
            }],
        };
        assert!(matches!(
            weighted_mean(&bad),
            Err(Error::InvalidMeasurement(_))
        ));
        let empty = Campaign {
            label: String::new(),
            measurements: vec![],
        };
        assert_eq!(weighted_mean(&empty).unwrap_err(), Error::EmptyCampaign);
    }

    #[test]
    fn pooled_posterior_matches_product_of_likelihoods() {
        let two = Campaign::new("", vec![m(-1.0, 1.0), m(-1.0, 1.0)]).unwrap();
        let one = Campaign::new("", vec![m(-1.0, 1.0 / 2f64.sqrt())]).unwrap();
        let a = fuse_to_posterior(&two, SignConstraint::non_positive()).unwrap();
        let b = fuse_to_posterior(&one, SignConstraint::non_positive()).unwrap();
        for i in 0..=200 {
            let y = -6.0 + 6.0 * i as f64 / 200.0;
            assert!((a.pdf(y) - b.pdf(y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn diffuse_measurement_is_negligible() {
        let base = Campaign::new("", vec![m(-2.0, 1.0), m(-3.0, 2.0)]).unwrap();
        let mut more = base.clone();
        more.measurements.push(m(50.0, 1e8));
        let a = weighted_mean(&base).unwrap();
        let b = weighted_mean(&more).unwrap();
        assert!(((a.ybar - b.ybar) / a.ybar).abs() <= 1e-10);
        assert!(((a.sigma_ybar - b.sigma_ybar) / a.sigma_ybar).abs() <= 1e-10);
        // a weight of 1e-16 is below the resolution of the summed weights
        assert!(b.sigma_ybar <= a.sigma_ybar);
    }

    fn campaign_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-10.0f64..10.0, 0.1f64..10.0), 1..40)
    }

    proptest! {
        #[test]
        fn permutation_invariance(rows in campaign_strategy(), seed in any::<u64>()) {
            let ms: Vec<_> = rows.iter().map(|&(v, s)| m(v, s)).collect();
            let mut shuffled = ms.clone();
            // deterministic Fisher-Yates driven by a simple LCG
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let a = weighted_mean(&Campaign::new("", ms).unwrap()).unwrap();
            let b = weighted_mean(&Campaign::new("", shuffled).unwrap()).unwrap();
            prop_assert!((a.ybar - b.ybar).abs() <= 1e-13 * a.ybar.abs().max(1.0));
            prop_assert!((a.sigma_ybar - b.sigma_ybar).abs() <= 1e-13 * a.sigma_ybar);
        }

        #[test]
        fn sigma_bounds(rows in campaign_strategy()) {
            let ms: Vec<_> = rows.iter().map(|&(v, s)| m(v, s)).collect();
            let min_sigma = ms.iter().map(|x| x.sigma).fold(f64::INFINITY, f64::min);
            let f = weighted_mean(&Campaign::new("", ms.clone()).unwrap()).unwrap();
            prop_assert!(f.sigma_ybar > 0.0 && f.sigma_ybar <= min_sigma);
            prop_assert!(f.chi2 >= 0.0);
            let mut more = ms;
            more.push(m(0.0, 5.0));
            let g = weighted_mean(&Campaign::new("", more).unwrap()).unwrap();
            prop_assert!(g.sigma_ybar < f.sigma_ybar);
        }

        #[test]
        fn sufficiency(rows in prop::collection::vec((-4.0f64..2.0, 0.5f64..3.0), 1..12)) {
            let ms: Vec<_> = rows.iter().map(|&(v, s)| m(v, s)).collect();
            let p = fuse_to_posterior(&Campaign::new("", ms.clone()).unwrap(), SignConstraint::non_positive()).unwrap();
            // Product of likelihoods evaluated term by term, normalised by
            // adaptive quadrature of that same product over the support.
            let ln_lik = |y: f64| -> f64 {
                ms.iter().map(|x| -0.5 * ((x.value - y) / x.sigma).powi(2) - x.sigma.ln()).sum()
            };
            let peak = ln_lik(p.mode());
            let lo = p.location().min(0.0) - 12.0 * p.scale();
            let product = |y: f64| (ln_lik(y) - peak).exp();
            let z = integrate_panels(product, lo, 0.0, p.scale(), Tolerance::default()).unwrap().value;
            let mut worst: f64 = 0.0;
            for i in 0..1001 {
                // lo + (-lo) can round to a hair above the bound
                let y = (lo + (-lo) * i as f64 / 1000.0).min(0.0);
                worst = worst.max((product(y) / z - p.pdf(y)).abs());
            }
            prop_assert!(worst <= 1e-12, "max deviation {}", worst);
        }
    }
}
