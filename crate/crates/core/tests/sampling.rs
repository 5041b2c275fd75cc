//! Monte Carlo cross-checks of the closed-form posterior.

use signbayes::oracle::{ks_distance, sample};
use signbayes::{SignConstraint, TruncatedGaussianPosterior};

const SEED: u64 = 42;
const N: usize = 1_000_000;

#[test]
fn draws_follow_the_closed_form_cdf() {
    for (loc, scale) in [(0.0, 1.0), (4.31, 3.76), (-2.9, 4.82)] {
        let p =
            TruncatedGaussianPosterior::new(loc, scale, SignConstraint::non_positive()).unwrap();
        let s = sample(&p, N, SEED).unwrap();
        let d = ks_distance(&s.draws, |y| p.cdf(y));
        // the 1% critical value at n = 1e6 is about 0.0016
        assert!(d <= 0.002, "({loc}, {scale}): KS distance {d}");

        let mean = s.draws.iter().sum::<f64>() / N as f64;
        let half_width = 5.0 * p.sd() / (N as f64).sqrt();
        assert!(
            (mean - p.mean()).abs() <= half_width,
            "({loc}, {scale}): sample mean {mean}"
        );
    }
}

#[test]
fn non_negative_draws() {
    let p = TruncatedGaussianPosterior::new(-1.0, 2.0, SignConstraint::non_negative()).unwrap();
    let s = sample(&p, 100_000, SEED).unwrap();
    assert!(s.draws.iter().all(|&y| y >= 0.0));
    assert!(ks_distance(&s.draws, |y| p.cdf(y)) <= 0.006);
}
