//! Monte Carlo experiments: null calibration, power tables, unique-rejection
//! ratios, and the market-returns study.
//!
//! Every experiment is a pure function of its inputs and the seed. Each
//! replication draws from its own counter-based substream, per-replication
//! results are collected in replication order, and aggregation is a
//! sequential fold — so output is bit-identical regardless of worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{CalibrationSet, NullCalibration, StatKind};
use crate::dist::{draw_into, AlternativeSpec, Family};
use crate::empirical::{EstimatorConfig, Sample};
use crate::error::{Error, Result};
use crate::reference::{anderson_darling, jarque_bera, shapiro_wilk_with, sw_coefficients};
use crate::rng::{mix, substream};
use crate::statistic::{n_statistic, RejectionRegion, Side};

const DOMAIN_NULL: u64 = 0x4e55_4c4c;
const DOMAIN_POWER: u64 = 0x504f_5752;
const DOMAIN_UNIQUE: u64 = 0x554e_4951;

/// A test column in the studies: statistic plus rejection direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Jb,
    Ad,
    Sw,
    NTwo,
    NRight,
    NLeft,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::Jb,
        TestKind::Ad,
        TestKind::Sw,
        TestKind::NTwo,
        TestKind::NRight,
        TestKind::NLeft,
    ];

    /// The four-test comparison battery used in unique-rejection and market
    /// studies.
    pub const BATTERY: [TestKind; 4] = [TestKind::Jb, TestKind::Ad, TestKind::Sw, TestKind::NRight];

    pub fn stat(self) -> StatKind {
        match self {
            TestKind::Jb => StatKind::Jb,
            TestKind::Ad => StatKind::Ad,
            TestKind::Sw => StatKind::Sw,
            TestKind::NTwo | TestKind::NRight | TestKind::NLeft => StatKind::N,
        }
    }

    /// Rejection direction in the statistic's own null distribution. Large
    /// JB/AD values and small SW values witness non-normality.
    pub fn side(self) -> Side {
        match self {
            TestKind::Jb | TestKind::Ad | TestKind::NRight => Side::Right,
            TestKind::Sw | TestKind::NLeft => Side::Left,
            TestKind::NTwo => Side::TwoSided,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Jb => "jb",
            TestKind::Ad => "ad",
            TestKind::Sw => "sw",
            TestKind::NTwo => "n_two",
            TestKind::NRight => "n_right",
            TestKind::NLeft => "n_left",
        }
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "jb" => Ok(TestKind::Jb),
            "ad" => Ok(TestKind::Ad),
            "sw" => Ok(TestKind::Sw),
            "n_two" | "n2s" | "ntwo" => Ok(TestKind::NTwo),
            "n_right" | "nright" | "n" => Ok(TestKind::NRight),
            "n_left" | "nleft" => Ok(TestKind::NLeft),
            other => Err(Error::InvalidParameter(format!("unknown test `{other}`"))),
        }
    }
}

// Evaluates the requested statistics on one sample. Shapiro-Wilk
// coefficients are precomputed once per sample size.
struct Evaluator {
    cfg: EstimatorConfig,
    needs: [bool; 4],
    sw_coeffs: Option<Vec<f64>>,
}

/// Values indexed by `StatKind` order [N, JB, AD, SW]; unused slots NaN.
type StatValues = [f64; 4];

impl Evaluator {
    fn new(cfg: EstimatorConfig, stats: &[StatKind], n: usize) -> Result<Self> {
        let mut needs = [false; 4];
        for &s in stats {
            needs[s.to_index()] = true;
        }
        let sw_coeffs = if needs[StatKind::Sw.to_index()] {
            Some(sw_coefficients(n)?)
        } else {
            None
        };
        Ok(Evaluator {
            cfg,
            needs,
            sw_coeffs,
        })
    }

    fn eval(&self, s: &Sample) -> Result<StatValues> {
        let mut out = [f64::NAN; 4];
        if self.needs[0] {
            out[0] = n_statistic(s, &self.cfg)?;
        }
        if self.needs[1] {
            out[1] = jarque_bera(s)?;
        }
        if self.needs[2] {
            out[2] = anderson_darling(s)?;
        }
        if self.needs[3] {
            out[3] = shapiro_wilk_with(self.sw_coeffs.as_ref().expect("coefficients"), s)?;
        }
        Ok(out)
    }
}

// Simulates `reps` samples of the distribution and returns the requested statistic
// values, one row per replication, in replication order.
fn simulate_stats(
    spec: &AlternativeSpec,
    n: usize,
    reps: usize,
    seed: u64,
    domain: u64,
    stats: &[StatKind],
    cfg: &EstimatorConfig,
) -> Result<Vec<StatValues>> {
    let evaluator = Evaluator::new(*cfg, stats, n)?;
    (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0f64; n],
            |buf, rep| {
                let mut rng = substream(seed, domain, rep as u64);
                draw_into(spec, &mut rng, buf);
                let sample = Sample::new(buf.clone())?;
                evaluator.eval(&sample)
            },
        )
        .collect()
}

/// Simulates the null (standard normal) distribution of the requested
/// statistics and assembles the calibration table.
pub fn calibrate_null(
    n: usize,
    reps: usize,
    seed: u64,
    stats: &[StatKind],
    cfg: &EstimatorConfig,
) -> Result<NullCalibration> {
    if reps < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least 10000 replications, got {reps}"
        )));
    }
    let spec = AlternativeSpec::raw(Family::Normal)?;
    let domain = mix(DOMAIN_NULL, n as u64);
    let rows = simulate_stats(&spec, n, reps, seed, domain, stats, cfg)?;
    let mut sorted = Vec::with_capacity(stats.len());
    for &stat in stats {
        let mut column: Vec<f64> = rows.iter().map(|r| r[stat.to_index()]).collect();
        column.sort_by(f64::total_cmp);
        sorted.push((stat, column));
    }
    Ok(NullCalibration::from_sorted_stats(
        n, reps, seed, *cfg, sorted,
    ))
}

/// One cell of a power table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerRow {
    pub spec: AlternativeSpec,
    pub n: usize,
    pub test: TestKind,
    pub level: f64,
    pub reps: usize,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
}

fn mc_stderr(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

fn regions_for(
    cal: &NullCalibration,
    cfg: &EstimatorConfig,
    tests: &[TestKind],
    levels: &[f64],
) -> Result<Vec<(TestKind, f64, RejectionRegion)>> {
    if cal.cfg() != *cfg {
        return Err(Error::MissingCalibration(format!(
            "table for n={} was calibrated under a different estimator configuration",
            cal.n()
        )));
    }
    let mut out = Vec::with_capacity(tests.len() * levels.len());
    for &test in tests {
        for &level in levels {
            out.push((test, level, cal.rejection_region(test.stat(), test.side(), level)?));
        }
    }
    Ok(out)
}

fn stats_needed(tests: &[TestKind]) -> Vec<StatKind> {
    let mut kinds: Vec<StatKind> = tests.iter().map(|t| t.stat()).collect();
    kinds.sort();
    kinds.dedup();
    kinds
}

/// Rejection frequencies for each (spec, n, test, level) cell.
///
/// Every cell is seeded independently of the rest of the grid, so a
/// one-cell run reproduces the matching cell of a full-table run exactly.
#[allow(clippy::too_many_arguments)]
pub fn power_study(
    specs: &[AlternativeSpec],
    ns: &[usize],
    levels: &[f64],
    tests: &[TestKind],
    reps: usize,
    seed: u64,
    cals: &CalibrationSet,
    cfg: &EstimatorConfig,
) -> Result<Vec<PowerRow>> {
    let stats = stats_needed(tests);
    let mut out = Vec::new();
    for spec in specs {
        for &n in ns {
            let cal = cals.get(n)?;
            let regions = regions_for(cal, cfg, tests, levels)?;
            let domain = mix(DOMAIN_POWER ^ (n as u64), spec.fingerprint());
            let rows = simulate_stats(spec, n, reps, seed, domain, &stats, cfg)?;
            let mut counts = vec![0usize; regions.len()];
            for row in &rows {
                for (slot, (test, _, region)) in counts.iter_mut().zip(&regions) {
                    if region.contains(row[test.stat().to_index()]) {
                        *slot += 1;
                    }
                }
            }
            for ((test, level, _), count) in regions.iter().zip(counts) {
                let rate = count as f64 / reps as f64;
                out.push(PowerRow {
                    spec: *spec,
                    n,
                    test: *test,
                    level: *level,
                    reps,
                    rejection_rate: rate,
                    mc_stderr: mc_stderr(rate, reps),
                });
            }
        }
    }
    Ok(out)
}

/// One cell of the unique-rejection table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniqueRow {
    pub spec: AlternativeSpec,
    pub n: usize,
    pub test: TestKind,
    pub level: f64,
    pub reps: usize,
    /// Fraction of samples rejected by this test and no other.
    pub unique_rate: f64,
    /// Fraction of samples rejected by this test at all.
    pub rejection_rate: f64,
    pub mc_stderr: f64,
}

/// For each sample, runs the whole test battery and counts the samples
/// rejected by exactly one test, attributed to that test.
#[allow(clippy::too_many_arguments)]
pub fn unique_rejection_study(
    specs: &[AlternativeSpec],
    ns: &[usize],
    level: f64,
    tests: &[TestKind],
    reps: usize,
    seed: u64,
    cals: &CalibrationSet,
    cfg: &EstimatorConfig,
) -> Result<Vec<UniqueRow>> {
    let stats = stats_needed(tests);
    let mut out = Vec::new();
    for spec in specs {
        for &n in ns {
            let cal = cals.get(n)?;
            let regions = regions_for(cal, cfg, tests, &[level])?;
            let domain = mix(DOMAIN_UNIQUE ^ (n as u64), spec.fingerprint());
            let rows = simulate_stats(spec, n, reps, seed, domain, &stats, cfg)?;
            let mut unique = vec![0usize; tests.len()];
            let mut total = vec![0usize; tests.len()];
            for row in &rows {
                let mut rejected = 0usize;
                let mut who = 0usize;
                for (k, (test, _, region)) in regions.iter().enumerate() {
                    if region.contains(row[test.stat().to_index()]) {
                        total[k] += 1;
                        rejected += 1;
                        who = k;
                    }
                }
                if rejected == 1 {
                    unique[who] += 1;
                }
            }
            for (k, &test) in tests.iter().enumerate() {
                let u = unique[k] as f64 / reps as f64;
                out.push(UniqueRow {
                    spec: *spec,
                    n,
                    test,
                    level,
                    reps,
                    unique_rate: u,
                    rejection_rate: total[k] as f64 / reps as f64,
                    mc_stderr: mc_stderr(u, reps),
                });
            }
        }
    }
    Ok(out)
}

/// How to turn a price series into returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnKind {
    Log,
    Simple,
}

/// r_t = ln(p_t / p_{t-1}) or p_t / p_{t-1} - 1 from a positive price path.
pub fn log_returns(prices: &[f64], kind: ReturnKind) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 prices to form returns, got {}",
            prices.len()
        )));
    }
    for (index, &value) in prices.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositivePrice { index, value });
        }
    }
    Ok(prices
        .windows(2)
        .map(|w| match kind {
            ReturnKind::Log => (w[1] / w[0]).ln(),
            ReturnKind::Simple => w[1] / w[0] - 1.0,
        })
        .collect())
}

/// A named return series.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    pub id: String,
    pub values: Vec<f64>,
}

/// Per-test totals of the market study at one (n, level).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketTestStats {
    pub test: TestKind,
    /// Total rejection ratio: fraction of windows the test rejected.
    pub total_rejection: f64,
    /// Unique rejection ratio: fraction of windows only this test rejected.
    pub unique_rejection: f64,
}

/// One row of the market study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketStudyRow {
    pub n: usize,
    pub level: f64,
    pub windows: usize,
    /// Fraction of windows rejected by at least one test.
    pub rejects_any: f64,
    pub tests: Vec<MarketTestStats>,
}

/// A series too short to contribute a single window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedSeries {
    pub id: String,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnsStudyReport {
    pub rows: Vec<MarketStudyRow>,
    pub skipped: Vec<SkippedSeries>,
}

/// Splits every series into disjoint windows of length `n` (dropping the
/// tail remainder), runs the battery on each window with calibrated
/// thresholds, and aggregates total/unique rejection ratios per level.
pub fn returns_study(
    series: &[ReturnSeries],
    n: usize,
    levels: &[f64],
    tests: &[TestKind],
    cal: &NullCalibration,
    cfg: &EstimatorConfig,
) -> Result<ReturnsStudyReport> {
    if cal.n() != n {
        return Err(Error::MissingCalibration(format!(
            "calibration is for n={}, study needs n={n}",
            cal.n()
        )));
    }
    let stats = stats_needed(tests);
    let evaluator = Evaluator::new(*cfg, &stats, n)?;
    let mut skipped = Vec::new();
    let mut windows: Vec<&[f64]> = Vec::new();
    for s in series {
        if s.values.len() < n {
            skipped.push(SkippedSeries {
                id: s.id.clone(),
                len: s.values.len(),
            });
            continue;
        }
        windows.extend(s.values.chunks_exact(n));
    }
    if windows.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no series long enough for a window of {n}"
        )));
    }

    let values: Vec<StatValues> = windows
        .par_iter()
        .map(|w| {
            let sample = Sample::new(w.to_vec())?;
            evaluator.eval(&sample)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let regions = regions_for(cal, cfg, tests, &[level])?;
        let mut total = vec![0usize; tests.len()];
        let mut unique = vec![0usize; tests.len()];
        let mut any = 0usize;
        for row in &values {
            let mut rejected = 0usize;
            let mut who = 0usize;
            for (k, (test, _, region)) in regions.iter().enumerate() {
                if region.contains(row[test.stat().to_index()]) {
                    total[k] += 1;
                    rejected += 1;
                    who = k;
                }
            }
            if rejected > 0 {
                any += 1;
            }
            if rejected == 1 {
                unique[who] += 1;
            }
        }
        let w = windows.len() as f64;
        rows.push(MarketStudyRow {
            n,
            level,
            windows: windows.len(),
            rejects_any: any as f64 / w,
            tests: tests
                .iter()
                .enumerate()
                .map(|(k, &test)| MarketTestStats {
                    test,
                    total_rejection: total[k] as f64 / w,
                    unique_rejection: unique[k] as f64 / w,
                })
                .collect(),
        });
    }
    Ok(ReturnsStudyReport { rows, skipped })
}
