//! Distributional correctness of the samplers against analytic CDFs and
//! exact moments.

mod common;

use common::{gn_cdf, ks_distance, mean_var};
use nstat::{sample, std_normal_cdf, AlternativeSpec};

fn spec(s: &str) -> AlternativeSpec {
    s.parse().unwrap()
}

#[test]
fn gn_sampler_matches_analytic_cdf() {
    for s in [1.0, 1.5, 2.5, 3.0, 5.0, 10.0] {
        let draws = sample(&spec(&format!("gn{s}")), 100_000, 42).unwrap();
        let d = ks_distance(draws.sorted(), |x| gn_cdf(x, s));
        assert!(d < 0.005, "GN({s}): KS distance {d}");
    }
}

#[test]
fn gn_one_is_laplace() {
    let draws = sample(&spec("gn1"), 100_000, 7).unwrap();
    let laplace_cdf = |x: f64| {
        if x < 0.0 {
            0.5 * x.exp()
        } else {
            1.0 - 0.5 * (-x).exp()
        }
    };
    let d = ks_distance(draws.sorted(), laplace_cdf);
    assert!(d < 0.01, "GN(1) vs Laplace: KS {d}");
}

#[test]
fn gn_two_standardized_is_standard_normal() {
    let draws = sample(&spec("gn2/std"), 100_000, 8).unwrap();
    let d = ks_distance(draws.sorted(), std_normal_cdf);
    assert!(d < 0.005, "GN(2)/std vs N(0,1): KS {d}");
}

#[test]
fn logistic_standardized_moments_at_scale() {
    let draws = sample(&spec("logistic/std"), 1_000_000, 9).unwrap();
    let (mean, var) = mean_var(draws.values());
    assert!(mean.abs() < 0.005, "mean {mean}");
    assert!((var - 1.0).abs() < 0.01, "variance {var}");
}

#[test]
fn student_t_excess_kurtosis() {
    // t(10): excess kurtosis 6/(v-4) = 1
    let draws = sample(&spec("t10"), 1_000_000, 10).unwrap();
    let (mean, var) = mean_var(draws.values());
    let m4 = draws
        .values()
        .iter()
        .map(|&x| (x - mean).powi(4))
        .sum::<f64>()
        / draws.len() as f64;
    let excess = m4 / (var * var) - 3.0;
    assert!((excess - 1.0).abs() < 0.1, "excess kurtosis {excess}");
}

#[test]
fn cauchy_draws_are_heavy_but_finite() {
    let draws = sample(&spec("cauchy"), 100_000, 11).unwrap();
    let cauchy_cdf = |x: f64| 0.5 + x.atan() / std::f64::consts::PI;
    let d = ks_distance(draws.sorted(), cauchy_cdf);
    assert!(d < 0.005, "Cauchy: KS {d}");
}

#[test]
fn normal_sampler_matches_cdf() {
    let draws = sample(&spec("normal"), 200_000, 12).unwrap();
    let d = ks_distance(draws.sorted(), std_normal_cdf);
    assert!(d < 0.004, "normal: KS {d}");
}
