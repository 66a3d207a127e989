//! Fat-tail normality testing from conditional second moments.
//!
//! A normal sample split at the ≈20/60/20 quantile ratio has equal
//! conditional variances in the two tails and the middle. The `N` statistic
//! measures the scaled gap between tail and middle conditional variances;
//! under normality it is pivotal and asymptotically standard normal, and its
//! sign separates fat-tailed from slim-tailed alternatives. This crate
//! provides:
//!
//! * exact analytic constants (the split ratio q̃, the normalizing constant
//!   ρ, the tail-dispersion ratio λ) and closed-form truncated-normal
//!   moments ([`truncated`], [`normal`]);
//! * the `N`, `N1`, `N2`, `N3` statistics and one/two-sided tests
//!   ([`statistic`]);
//! * Jarque-Bera, Anderson-Darling, and Shapiro-Wilk comparators
//!   ([`reference`]);
//! * seedable samplers for the alternative distributions ([`dist`]);
//! * a deterministic Monte Carlo harness for calibration, power,
//!   unique-rejection, and market-returns studies ([`harness`],
//!   [`calibration`]);
//! * a command-line front end (`nstat` binary, [`cli`]).

pub mod calibration;
pub mod cli;
pub mod dist;
pub mod empirical;
pub mod error;
pub mod harness;
pub mod io;
pub mod normal;
pub mod reference;
mod rng;
pub mod statistic;
pub mod truncated;

pub use calibration::{CalibrationSet, NullCalibration, StatKind, CALIBRATION_LEVELS};
pub use dist::{gn_density, sample, AlternativeSpec, Family};
pub use empirical::{
    conditional_mean, conditional_variance, partition_206020, Denominator, EstimatorConfig,
    IndexMode, PartitionRatio, Sample,
};
pub use error::{Error, Result};
pub use harness::{
    calibrate_null, log_returns, power_study, returns_study, unique_rejection_study,
    MarketStudyRow, PowerRow, ReturnKind, ReturnSeries, ReturnsStudyReport, TestKind, UniqueRow,
};
pub use normal::{qtilde, solve_qtilde, std_normal_cdf, std_normal_pdf, std_normal_quantile, QTilde};
pub use reference::{anderson_darling, jarque_bera, shapiro_wilk, RefTestKind};
pub use statistic::{
    n1_statistic, n2_statistic, n3_statistic, n_statistic, n_test, CriticalSource, CriticalValues,
    RejectionRegion, Side, TestOutcome,
};
pub use truncated::{lambda_tail, rho, tau_sq_std, trunc_moments, Partition, TruncatedMoments};
