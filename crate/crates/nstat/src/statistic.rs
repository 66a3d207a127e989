//! The conditional-second-moment normality statistic and its variants.
//!
//! `N` scales the tail-minus-middle conditional variance gaps by the overall
//! sample variance, √n, and the normalizing constant; under normality it is
//! pivotal and asymptotically standard normal. `N1`/`N2` isolate the left
//! tail, `N3` compares any two conditioning sets against a fixed ratio.

use serde::{Deserialize, Serialize};

use crate::calibration::{NullCalibration, StatKind};
use crate::empirical::{conditional_variance, partition_206020, EstimatorConfig, Sample};
use crate::error::{Error, Result};
use crate::normal::{std_normal_cdf, std_normal_quantile};
use crate::truncated::{rho, Partition};

/// Test sidedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    TwoSided,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
            Side::TwoSided => write!(f, "two_sided"),
        }
    }
}

/// Where critical values came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSource {
    AsymptoticNormal,
    Calibrated { n: usize, reps: usize, seed: u64 },
}

/// Rejection region: reject when the statistic falls below `below` or above
/// `above`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionRegion {
    pub below: Option<f64>,
    pub above: Option<f64>,
}

impl RejectionRegion {
    #[inline]
    pub fn contains(&self, stat: f64) -> bool {
        self.below.is_some_and(|c| stat < c) || self.above.is_some_and(|c| stat > c)
    }
}

/// Outcome of a single hypothesis test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub side: Side,
    pub level: f64,
    pub critical_source: CriticalSource,
    pub region: RejectionRegion,
    pub p_value: f64,
    pub reject: bool,
}

/// How to obtain critical values for a test.
#[derive(Clone, Copy)]
pub enum CriticalValues<'a> {
    /// Standard-normal quantiles (the large-sample approximation).
    Asymptotic,
    /// Empirical null quantiles from a Monte Carlo calibration.
    Calibrated(&'a NullCalibration),
}

fn split_variances(s: &Sample, cfg: &EstimatorConfig) -> Result<(f64, f64, f64, f64)> {
    let (l, m, r) = partition_206020(s, cfg)?;
    let v_l = conditional_variance(s, &l, cfg)?;
    let v_m = conditional_variance(s, &m, cfg)?;
    let v_r = conditional_variance(s, &r, cfg)?;
    let v_all = conditional_variance(s, &Partition::full(), cfg)?;
    if v_all <= 0.0 {
        return Err(Error::DegenerateVariance {
            reason: "overall sample variance is zero".into(),
        });
    }
    Ok((v_l, v_m, v_r, v_all))
}

/// The two-tailed statistic
/// N = ((σ̂²_L - σ̂²_M)/σ̂² + (σ̂²_R - σ̂²_M)/σ̂²)·√n / ρ.
pub fn n_statistic(s: &Sample, cfg: &EstimatorConfig) -> Result<f64> {
    let (v_l, v_m, v_r, v_all) = split_variances(s, cfg)?;
    let n = s.len() as f64;
    Ok((v_l + v_r - 2.0 * v_m) / v_all * n.sqrt() / rho())
}

/// Left-tail statistic N₁ = √n·(σ̂²_L - σ̂²_M)/σ̂² (no normalizing constant).
pub fn n1_statistic(s: &Sample, cfg: &EstimatorConfig) -> Result<f64> {
    let (v_l, v_m, _, v_all) = split_variances(s, cfg)?;
    Ok((v_l - v_m) / v_all * (s.len() as f64).sqrt())
}

/// Left-tail statistic N₂ = √n·(σ̂²_L - σ̂²_M)/σ̂²_M.
pub fn n2_statistic(s: &Sample, cfg: &EstimatorConfig) -> Result<f64> {
    let (v_l, v_m, _, _) = split_variances(s, cfg)?;
    if v_m <= 0.0 {
        return Err(Error::DegenerateVariance {
            reason: "middle-block variance is zero".into(),
        });
    }
    Ok((v_l - v_m) / v_m * (s.len() as f64).sqrt())
}

/// Ratio statistic N₃ = √n·(σ̂²_A/σ̂²_B - λ) for arbitrary conditioning sets.
pub fn n3_statistic(
    s: &Sample,
    a: &Partition,
    b: &Partition,
    lambda: f64,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let v_a = conditional_variance(s, a, cfg)?;
    let v_b = conditional_variance(s, b, cfg)?;
    if v_b <= 0.0 {
        return Err(Error::DegenerateVariance {
            reason: "denominator conditioning set has zero variance".into(),
        });
    }
    Ok((v_a / v_b - lambda) * (s.len() as f64).sqrt())
}

pub(crate) fn asymptotic_region(side: Side, level: f64) -> Result<RejectionRegion> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance level must be in (0,1), got {level}"
        )));
    }
    Ok(match side {
        Side::Right => RejectionRegion {
            below: None,
            above: Some(std_normal_quantile(1.0 - level)?),
        },
        Side::Left => RejectionRegion {
            below: Some(std_normal_quantile(level)?),
            above: None,
        },
        Side::TwoSided => {
            let hi = std_normal_quantile(1.0 - level / 2.0)?;
            RejectionRegion {
                below: Some(-hi),
                above: Some(hi),
            }
        }
    })
}

pub(crate) fn asymptotic_p_value(side: Side, stat: f64) -> f64 {
    match side {
        Side::Right => 1.0 - std_normal_cdf(stat),
        Side::Left => std_normal_cdf(stat),
        Side::TwoSided => 2.0 * (1.0 - std_normal_cdf(stat.abs())),
    }
}

/// Runs the N normality test at the given level and sidedness.
///
/// A calibrated source must have been simulated at the sample's size and
/// under the same estimator configuration.
pub fn n_test(
    s: &Sample,
    side: Side,
    level: f64,
    critical: CriticalValues<'_>,
    cfg: &EstimatorConfig,
) -> Result<TestOutcome> {
    if let CriticalValues::Calibrated(cal) = critical {
        if cal.n() != s.len() {
            return Err(Error::MissingCalibration(format!(
                "table was calibrated at n={}, sample has n={}",
                cal.n(),
                s.len()
            )));
        }
        if cal.cfg() != *cfg {
            return Err(Error::MissingCalibration(
                "table was calibrated under a different estimator configuration".into(),
            ));
        }
    }
    let stat = n_statistic(s, cfg)?;
    let (region, p_value, source) = match critical {
        CriticalValues::Asymptotic => (
            asymptotic_region(side, level)?,
            asymptotic_p_value(side, stat),
            CriticalSource::AsymptoticNormal,
        ),
        CriticalValues::Calibrated(cal) => (
            cal.rejection_region(StatKind::N, side, level)?,
            cal.p_value(StatKind::N, side, stat)?,
            CriticalSource::Calibrated {
                n: cal.n(),
                reps: cal.reps(),
                seed: cal.seed(),
            },
        ),
    };
    Ok(TestOutcome {
        statistic: stat,
        side,
        level,
        critical_source: source,
        region,
        reject: region.contains(stat),
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: [f64; 20] = [
        -2.31, -1.44, -1.02, -0.81, -0.63, -0.41, -0.27, -0.15, -0.04, 0.08, 0.19, 0.29, 0.44,
        0.58, 0.74, 0.93, 1.18, 1.52, 2.07, 3.11,
    ];

    fn fixture() -> Sample {
        Sample::new(FIXTURE.to_vec()).unwrap()
    }

    // Frozen by independent evaluation of the defining formula.
    #[test]
    fn fixture_value_floor_convention() {
        let n = n_statistic(&fixture(), &EstimatorConfig::default()).unwrap();
        assert!((n - 0.5440910593002117).abs() < 1e-9, "N = {n}");
    }

    #[test]
    fn fixture_value_type7_convention() {
        let n = n_statistic(&fixture(), &EstimatorConfig::type7_rounded()).unwrap();
        assert!((n - 1.1639994934964013).abs() < 1e-9, "N = {n}");
    }

    #[test]
    fn pivotal_under_affine_maps() {
        let s = fixture();
        let mapped = Sample::new(s.values().iter().map(|&x| 5.0 * x + 3.0).collect()).unwrap();
        for cfg in [EstimatorConfig::default(), EstimatorConfig::type7_rounded()] {
            let a = n_statistic(&s, &cfg).unwrap();
            let b = n_statistic(&mapped, &cfg).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
            let a1 = n1_statistic(&s, &cfg).unwrap();
            let b1 = n1_statistic(&mapped, &cfg).unwrap();
            assert!((a1 - b1).abs() < 1e-9 * a1.abs().max(1.0));
            let a2 = n2_statistic(&s, &cfg).unwrap();
            let b2 = n2_statistic(&mapped, &cfg).unwrap();
            assert!((a2 - b2).abs() < 1e-9 * a2.abs().max(1.0));
        }
    }

    #[test]
    fn n3_identical_sets_with_unit_ratio_is_zero() {
        let s = fixture();
        let a = Partition::new(0.0, 0.4).unwrap();
        let v = n3_statistic(&s, &a, &a, 1.0, &EstimatorConfig::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn asymptotic_regions() {
        let r = asymptotic_region(Side::Right, 0.01).unwrap();
        assert!((r.above.unwrap() - 2.3263478740408408).abs() < 1e-9);
        assert!(r.below.is_none());
        let l = asymptotic_region(Side::Left, 0.05).unwrap();
        assert!((l.below.unwrap() + 1.6448536269514722).abs() < 1e-9);
        let t = asymptotic_region(Side::TwoSided, 0.05).unwrap();
        assert!((t.above.unwrap() - 1.959963984540054).abs() < 1e-9);
        assert_eq!(t.below.unwrap(), -t.above.unwrap());
    }

    #[test]
    fn asymptotic_test_outcome_is_consistent() {
        let s = fixture();
        let out = n_test(
            &s,
            Side::Right,
            0.05,
            CriticalValues::Asymptotic,
            &EstimatorConfig::default(),
        )
        .unwrap();
        assert_eq!(out.reject, out.region.contains(out.statistic));
        assert!(out.p_value > 0.0 && out.p_value < 1.0);
        assert_eq!(out.critical_source, CriticalSource::AsymptoticNormal);
        // two-sided p is twice the smaller tail
        let two = n_test(
            &s,
            Side::TwoSided,
            0.05,
            CriticalValues::Asymptotic,
            &EstimatorConfig::default(),
        )
        .unwrap();
        let right = asymptotic_p_value(Side::Right, out.statistic);
        let left = asymptotic_p_value(Side::Left, out.statistic);
        assert!((two.p_value - 2.0 * right.min(left)).abs() < 1e-12);
    }

    #[test]
    fn calibrated_source_must_match_sample_and_config() {
        use crate::calibration::NullCalibration;
        let cfg = EstimatorConfig::default();
        let null_stats: Vec<f64> = (0..10_000).map(|i| i as f64 / 2_500.0 - 2.0).collect();
        let cal = NullCalibration::from_sorted_stats(
            100,
            null_stats.len(),
            1,
            cfg,
            vec![(StatKind::N, null_stats)],
        );
        let wrong_len = Sample::new((0..50).map(|i| (i as f64).sin()).collect()).unwrap();
        assert!(matches!(
            n_test(&wrong_len, Side::Right, 0.05, CriticalValues::Calibrated(&cal), &cfg),
            Err(Error::MissingCalibration(_))
        ));
        let right_len = Sample::new((0..100).map(|i| (i as f64).sin()).collect()).unwrap();
        assert!(matches!(
            n_test(
                &right_len,
                Side::Right,
                0.05,
                CriticalValues::Calibrated(&cal),
                &EstimatorConfig::type7_rounded()
            ),
            Err(Error::MissingCalibration(_))
        ));
        let ok = n_test(
            &right_len,
            Side::Right,
            0.05,
            CriticalValues::Calibrated(&cal),
            &cfg,
        )
        .unwrap();
        assert!(matches!(ok.critical_source, CriticalSource::Calibrated { n: 100, .. }));
    }

    #[test]
    fn small_sample_propagates_error() {
        let s = Sample::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            n_statistic(&s, &EstimatorConfig::default()),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn constant_sample_degenerate() {
        let s = Sample::new(vec![1.0; 50]).unwrap();
        assert!(matches!(
            n_statistic(&s, &EstimatorConfig::default()),
            Err(Error::DegenerateVariance { .. })
        ));
    }
}
