//! Order statistics and the conditional sample mean/variance estimators.
//!
//! Two block-membership conventions are supported:
//!
//! * `FloorIndex` — the formal definition: the block for [alpha, beta] holds
//!   order statistics with 1-based index in ([n·alpha]+1, …, [n·beta]).
//!   This is the convention the asymptotic theory is stated for.
//! * `Type7Quantile` — membership by comparison against type-7 interpolated
//!   quantiles, mirroring the reference statistical-package semantics: a
//!   block starting at 0 takes `x <= q_beta`, a block ending at 1 takes
//!   `x >= q_alpha`, and an interior block takes the open interval
//!   (q_alpha, q_beta). Boundary ties go to the tail blocks.
//!
//! The calibration tables in the published quantile comparisons come from
//! the second convention with unbiased (m-1) denominators and the rounded
//! 20/60/20 ratio; the defaults here follow the formal definition instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::qtilde;
use crate::truncated::Partition;

/// An immutable real-valued dataset with a cached ascending sort.
#[derive(Debug, Clone)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    /// Validates and stores the data; rejects empty input and non-finite
    /// entries. Ties sort stably.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { index, value });
            }
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Sample { values, sorted })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// Denominator of the conditional variance: block length m or m-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Denominator {
    BlockLen,
    BlockLenMinusOne,
}

/// Block-membership rule; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexMode {
    FloorIndex,
    Type7Quantile,
}

/// Which tail probability defines the three-way split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionRatio {
    ExactQTilde,
    Rounded20,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub denominator: Denominator,
    pub index_mode: IndexMode,
    pub ratio: PartitionRatio,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            denominator: Denominator::BlockLen,
            index_mode: IndexMode::FloorIndex,
            ratio: PartitionRatio::ExactQTilde,
        }
    }
}

impl EstimatorConfig {
    /// Interpolated-quantile convention: type-7 membership, unbiased (m-1)
    /// denominators, rounded 20/60/20 ratio. This is the convention behind
    /// the published null-quantile table and power studies.
    pub fn type7_rounded() -> Self {
        EstimatorConfig {
            denominator: Denominator::BlockLenMinusOne,
            index_mode: IndexMode::Type7Quantile,
            ratio: PartitionRatio::Rounded20,
        }
    }

    /// The split probability selected by `ratio`.
    pub fn split_ratio(&self) -> f64 {
        match self.ratio {
            PartitionRatio::ExactQTilde => qtilde().value,
            PartitionRatio::Rounded20 => 0.2,
        }
    }

    /// Stable fingerprint used to key persisted calibration tables.
    pub fn digest(&self) -> u64 {
        let d = match self.denominator {
            Denominator::BlockLen => 0u64,
            Denominator::BlockLenMinusOne => 1,
        };
        let m = match self.index_mode {
            IndexMode::FloorIndex => 0u64,
            IndexMode::Type7Quantile => 1,
        };
        let r = match self.ratio {
            PartitionRatio::ExactQTilde => 0u64,
            PartitionRatio::Rounded20 => 1,
        };
        d | (m << 8) | (r << 16)
    }
}

/// Type-7 interpolated quantile of sorted data.
fn type7_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

// Half-open index range of the block for `p` in the sorted sample.
fn block_range(sorted: &[f64], p: &Partition, cfg: &EstimatorConfig) -> (usize, usize) {
    let n = sorted.len();
    match cfg.index_mode {
        IndexMode::FloorIndex => {
            let lo = (n as f64 * p.alpha()).floor() as usize;
            let hi = (n as f64 * p.beta()).floor() as usize;
            (lo.min(n), hi.min(n))
        }
        IndexMode::Type7Quantile => {
            let lo = if p.alpha() <= 0.0 {
                0
            } else {
                let q = type7_quantile(sorted, p.alpha());
                if p.beta() >= 1.0 {
                    // block ending at 1 is closed below: x >= q
                    sorted.partition_point(|&x| x < q)
                } else {
                    // interior block is open below: x > q
                    sorted.partition_point(|&x| x <= q)
                }
            };
            let hi = if p.beta() >= 1.0 {
                n
            } else {
                let q = type7_quantile(sorted, p.beta());
                if p.alpha() <= 0.0 {
                    // block starting at 0 is closed above: x <= q
                    sorted.partition_point(|&x| x <= q)
                } else {
                    // interior block is open above: x < q
                    sorted.partition_point(|&x| x < q)
                }
            };
            (lo.min(n), hi.min(n))
        }
    }
}

fn block<'a>(s: &'a Sample, p: &Partition, cfg: &EstimatorConfig) -> Result<&'a [f64]> {
    let (lo, hi) = block_range(s.sorted(), p, cfg);
    if lo >= hi {
        return Err(Error::EmptyConditioningSet {
            alpha: p.alpha(),
            beta: p.beta(),
        });
    }
    Ok(&s.sorted()[lo..hi])
}

/// Mean of the order statistics selected by the partition.
pub fn conditional_mean(s: &Sample, p: &Partition, cfg: &EstimatorConfig) -> Result<f64> {
    let b = block(s, p, cfg)?;
    Ok(b.iter().sum::<f64>() / b.len() as f64)
}

/// Conditional sample variance over the selected order statistics.
pub fn conditional_variance(s: &Sample, p: &Partition, cfg: &EstimatorConfig) -> Result<f64> {
    let b = block(s, p, cfg)?;
    let m = b.len();
    if m == 1 && cfg.denominator == Denominator::BlockLenMinusOne {
        return Err(Error::DegenerateVariance {
            reason: format!(
                "block for [{}, {}] has a single observation; unbiased variance undefined",
                p.alpha(),
                p.beta()
            ),
        });
    }
    let mean = b.iter().sum::<f64>() / m as f64;
    let ss: f64 = b.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let denom = match cfg.denominator {
        Denominator::BlockLen => m as f64,
        Denominator::BlockLenMinusOne => (m - 1) as f64,
    };
    Ok(ss / denom)
}

/// Minimum sample size for the three-way split: below this some block holds
/// fewer than two points under the exact ratio and defaults.
pub const MIN_SPLIT_LEN: usize = 15;

/// The lower/middle/upper partitions of the 20-60-20 style split.
pub fn partition_206020(
    s: &Sample,
    cfg: &EstimatorConfig,
) -> Result<(Partition, Partition, Partition)> {
    if s.len() < MIN_SPLIT_LEN {
        return Err(Error::SampleTooSmall {
            needed: MIN_SPLIT_LEN,
            got: s.len(),
        });
    }
    let q = cfg.split_ratio();
    Ok((
        Partition::lower_block(q),
        Partition::middle_block(q),
        Partition::upper_block(q),
    ))
}
