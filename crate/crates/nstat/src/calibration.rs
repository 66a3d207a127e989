//! Empirical null distributions of the test statistics, persisted as
//! quantile-grid tables.
//!
//! A calibration stores, per statistic, a dense grid of empirical null
//! quantiles at equally spaced probabilities. Critical values and p-values
//! both interpolate the grid, so a table gives identical answers whether it
//! was just simulated or reloaded from disk.
//!
//! File layout (all integers and floats little-endian):
//!
//! ```text
//! magic     8 bytes  "NSTATCAL"
//! version   u32      currently 1
//! stat      u8       0 = N, 1 = JB, 2 = AD, 3 = SW
//! pad       3 bytes  zero
//! n         u64      sample size per replication
//! reps      u64      Monte Carlo replications
//! seed      u64      master seed
//! cfg       u64      estimator-config digest
//! grid_len  u64
//! grid      f64 × grid_len, ascending
//! ```

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::empirical::EstimatorConfig;
use crate::error::{Error, Result};
use crate::statistic::{RejectionRegion, Side};

/// Statistic identity within a calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    N,
    Jb,
    Ad,
    Sw,
}

impl StatKind {
    pub const ALL: [StatKind; 4] = [StatKind::N, StatKind::Jb, StatKind::Ad, StatKind::Sw];

    pub fn as_str(self) -> &'static str {
        match self {
            StatKind::N => "n",
            StatKind::Jb => "jb",
            StatKind::Ad => "ad",
            StatKind::Sw => "sw",
        }
    }

    fn to_code(self) -> u8 {
        match self {
            StatKind::N => 0,
            StatKind::Jb => 1,
            StatKind::Ad => 2,
            StatKind::Sw => 3,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(StatKind::N),
            1 => Some(StatKind::Jb),
            2 => Some(StatKind::Ad),
            3 => Some(StatKind::Sw),
            _ => None,
        }
    }

    /// Position in the [N, JB, AD, SW] value rows used by the harness.
    pub(crate) fn to_index(self) -> usize {
        match self {
            StatKind::N => 0,
            StatKind::Jb => 1,
            StatKind::Ad => 2,
            StatKind::Sw => 3,
        }
    }
}

impl std::fmt::Display for StatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Levels every calibration table is expected to serve.
pub const CALIBRATION_LEVELS: [f64; 3] = [0.01, 0.025, 0.05];

/// Number of grid points; spacing 1/16384 resolves tail levels to well
/// below the Monte Carlo noise of the runs that produce the tables.
pub const GRID_LEN: usize = 16385;

const MAGIC: &[u8; 8] = b"NSTATCAL";
const FORMAT_VERSION: u32 = 1;

/// Empirical null quantiles for one or more statistics at a fixed sample
/// size, replication count, seed, and estimator configuration.
#[derive(Debug, Clone)]
pub struct NullCalibration {
    n: usize,
    reps: usize,
    seed: u64,
    cfg: EstimatorConfig,
    grids: BTreeMap<StatKind, Vec<f64>>,
}

impl NullCalibration {
    /// Assembles a calibration from per-statistic sorted null samples.
    pub(crate) fn from_sorted_stats(
        n: usize,
        reps: usize,
        seed: u64,
        cfg: EstimatorConfig,
        sorted: Vec<(StatKind, Vec<f64>)>,
    ) -> Self {
        let mut grids = BTreeMap::new();
        for (stat, values) in sorted {
            grids.insert(stat, quantile_grid(&values));
        }
        NullCalibration {
            n,
            reps,
            seed,
            cfg,
            grids,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cfg(&self) -> EstimatorConfig {
        self.cfg
    }

    pub fn stats(&self) -> impl Iterator<Item = StatKind> + '_ {
        self.grids.keys().copied()
    }

    fn grid(&self, stat: StatKind) -> Result<&[f64]> {
        self.grids
            .get(&stat)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::MissingCalibration(format!(
                    "statistic `{stat}` not present in the table for n={}",
                    self.n
                ))
            })
    }

    /// Empirical null quantile at probability `p` by grid interpolation.
    pub fn quantile(&self, stat: StatKind, p: f64) -> Result<f64> {
        let grid = self.grid(stat)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let pos = p * (grid.len() - 1) as f64;
        let lo = pos.floor() as usize;
        if lo + 1 >= grid.len() {
            return Ok(grid[grid.len() - 1]);
        }
        let frac = pos - lo as f64;
        Ok(grid[lo] + frac * (grid[lo + 1] - grid[lo]))
    }

    fn check_level(&self, stat: StatKind, side: Side, level: f64) -> Result<()> {
        if CALIBRATION_LEVELS.iter().any(|l| (l - level).abs() < 1e-12) {
            Ok(())
        } else {
            Err(Error::MissingCalibration(format!(
                "no calibrated threshold for statistic `{stat}` at n={}, level={level}, side={side}; \
                 calibrated levels are {CALIBRATION_LEVELS:?}",
                self.n
            )))
        }
    }

    /// Calibrated rejection region for the statistic at (side, level).
    /// Two-sided regions put equal tail mass level/2 on each side.
    pub fn rejection_region(&self, stat: StatKind, side: Side, level: f64) -> Result<RejectionRegion> {
        self.check_level(stat, side, level)?;
        Ok(match side {
            Side::Right => RejectionRegion {
                below: None,
                above: Some(self.quantile(stat, 1.0 - level)?),
            },
            Side::Left => RejectionRegion {
                below: Some(self.quantile(stat, level)?),
                above: None,
            },
            Side::TwoSided => RejectionRegion {
                below: Some(self.quantile(stat, level / 2.0)?),
                above: Some(self.quantile(stat, 1.0 - level / 2.0)?),
            },
        })
    }

    // Empirical CDF position of `x` on the grid.
    fn ecdf(&self, stat: StatKind, x: f64) -> Result<f64> {
        let grid = self.grid(stat)?;
        let k = grid.len() - 1;
        if x < grid[0] {
            return Ok(0.0);
        }
        if x >= grid[k] {
            return Ok(1.0);
        }
        // first index with grid[j] > x; x lies in [grid[j-1], grid[j})
        let j = grid.partition_point(|&g| g <= x);
        let (lo, hi) = (grid[j - 1], grid[j]);
        let frac = if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
        Ok(((j - 1) as f64 + frac) / k as f64)
    }

    /// Finite-sample empirical p-value (r+1)/(R+1) from the stored grid.
    pub fn p_value(&self, stat: StatKind, side: Side, x: f64) -> Result<f64> {
        let f = self.ecdf(stat, x)?;
        let reps = self.reps as f64;
        let right = ((1.0 - f) * reps + 1.0) / (reps + 1.0);
        let left = (f * reps + 1.0) / (reps + 1.0);
        Ok(match side {
            Side::Right => right,
            Side::Left => left,
            Side::TwoSided => (2.0 * right.min(left)).min(1.0),
        })
    }

    fn file_name(&self, stat: StatKind) -> String {
        format!(
            "n{}_reps{}_seed{}_cfg{:06x}_{}.ncal",
            self.n,
            self.reps,
            self.seed,
            self.cfg.digest(),
            stat
        )
    }

    /// Writes one file per statistic into `dir`; returns the paths.
    pub fn save_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (&stat, grid) in &self.grids {
            let path = dir.join(self.file_name(stat));
            let mut out = Vec::with_capacity(8 + 4 + 4 + 8 * 5 + grid.len() * 8);
            out.extend_from_slice(MAGIC);
            out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
            out.push(stat.to_code());
            out.extend_from_slice(&[0u8; 3]);
            out.extend_from_slice(&(self.n as u64).to_le_bytes());
            out.extend_from_slice(&(self.reps as u64).to_le_bytes());
            out.extend_from_slice(&self.seed.to_le_bytes());
            out.extend_from_slice(&self.cfg.digest().to_le_bytes());
            out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
            for &v in grid {
                out.extend_from_slice(&v.to_le_bytes());
            }
            std::fs::write(&path, out)?;
            paths.push(path);
        }
        Ok(paths)
    }

    /// Loads every statistic table in `dir` that matches (n, cfg); if
    /// several (reps, seed) generations exist, prefers the largest reps.
    pub fn load_dir(dir: &Path, n: usize, cfg: EstimatorConfig) -> Result<NullCalibration> {
        let mut groups: BTreeMap<(usize, u64), BTreeMap<StatKind, Vec<f64>>> = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| {
            Error::MissingCalibration(format!("cannot read cache directory {}: {e}", dir.display()))
        })?;
        for entry in entries {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("ncal") {
                continue;
            }
            let (stat, file_n, reps, seed, digest, grid) = read_table(&path)?;
            if file_n == n && digest == cfg.digest() {
                groups.entry((reps, seed)).or_default().insert(stat, grid);
            }
        }
        let ((reps, seed), grids) = groups.into_iter().max_by_key(|&((reps, _), _)| reps).ok_or_else(|| {
            Error::MissingCalibration(format!(
                "no table for n={n} with config digest {:#x} in {}",
                cfg.digest(),
                dir.display()
            ))
        })?;
        Ok(NullCalibration {
            n,
            reps,
            seed,
            cfg,
            grids,
        })
    }
}

fn quantile_grid(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut grid = Vec::with_capacity(GRID_LEN);
    for i in 0..GRID_LEN {
        let p = i as f64 / (GRID_LEN - 1) as f64;
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        let v = if lo + 1 >= n {
            sorted[n - 1]
        } else {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        };
        grid.push(v);
    }
    grid
}

type TableParts = (StatKind, usize, usize, u64, u64, Vec<f64>);

fn read_table(path: &Path) -> Result<TableParts> {
    let mut file = std::fs::File::open(path)?;
    let mut header = [0u8; 8 + 4 + 4 + 8 * 5];
    file.read_exact(&mut header)
        .map_err(|_| Error::MalformedCalibrationFile(format!("{}: truncated header", path.display())))?;
    if &header[0..8] != MAGIC {
        return Err(Error::MalformedCalibrationFile(format!(
            "{}: bad magic",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::MalformedCalibrationFile(format!(
            "{}: unsupported format version {version}",
            path.display()
        )));
    }
    let stat = StatKind::from_code(header[12]).ok_or_else(|| {
        Error::MalformedCalibrationFile(format!("{}: unknown statistic code", path.display()))
    })?;
    let word = |i: usize| u64::from_le_bytes(header[16 + 8 * i..24 + 8 * i].try_into().unwrap());
    let (n, reps, seed, digest, grid_len) = (word(0), word(1), word(2), word(3), word(4));
    if !(2..=(1 << 24)).contains(&grid_len) {
        return Err(Error::MalformedCalibrationFile(format!(
            "{}: implausible grid length {grid_len}",
            path.display()
        )));
    }
    let mut raw = vec![0u8; grid_len as usize * 8];
    file.read_exact(&mut raw)
        .map_err(|_| Error::MalformedCalibrationFile(format!("{}: truncated grid", path.display())))?;
    let grid: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::MalformedCalibrationFile(format!(
            "{}: grid not ascending",
            path.display()
        )));
    }
    Ok((stat, n as usize, reps as usize, seed, digest, grid))
}

/// Calibrations for several sample sizes under one estimator configuration.
#[derive(Debug, Clone, Default)]
pub struct CalibrationSet {
    tables: BTreeMap<usize, NullCalibration>,
}

impl CalibrationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, cal: NullCalibration) {
        self.tables.insert(cal.n(), cal);
    }

    pub fn get(&self, n: usize) -> Result<&NullCalibration> {
        self.tables.get(&n).ok_or_else(|| {
            Error::MissingCalibration(format!("no calibration for sample size n={n}"))
        })
    }

    pub fn load_dir(dir: &Path, ns: &[usize], cfg: EstimatorConfig) -> Result<Self> {
        let mut set = Self::new();
        for &n in ns {
            set.insert(NullCalibration::load_dir(dir, n, cfg)?);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_calibration() -> NullCalibration {
        // null stats 0..=9999 scaled into a synthetic, known shape
        let vals: Vec<f64> = (0..10_000).map(|i| i as f64 / 9_999.0 * 6.0 - 3.0).collect();
        NullCalibration::from_sorted_stats(
            100,
            vals.len(),
            7,
            EstimatorConfig::default(),
            vec![(StatKind::N, vals)],
        )
    }

    #[test]
    fn quantiles_interpolate_uniformly() {
        let cal = toy_calibration();
        // the synthetic null is uniform on [-3, 3]
        assert!((cal.quantile(StatKind::N, 0.5).unwrap() - 0.0).abs() < 1e-9);
        assert!((cal.quantile(StatKind::N, 0.95).unwrap() - 2.7).abs() < 1e-3);
        assert!((cal.quantile(StatKind::N, 0.0).unwrap() + 3.0).abs() < 1e-12);
        assert!((cal.quantile(StatKind::N, 1.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn regions_and_monotonicity() {
        let cal = toy_calibration();
        let mut prev = f64::INFINITY;
        for level in CALIBRATION_LEVELS {
            let r = cal
                .rejection_region(StatKind::N, Side::Right, level)
                .unwrap();
            let c = r.above.unwrap();
            assert!(c < prev, "right threshold should fall as level rises");
            assert!(c > 0.0);
            prev = c;
        }
        let two = cal
            .rejection_region(StatKind::N, Side::TwoSided, 0.05)
            .unwrap();
        assert!(two.below.unwrap() < 0.0 && two.above.unwrap() > 0.0);
        // uncalibrated level refused
        assert!(matches!(
            cal.rejection_region(StatKind::N, Side::Right, 0.07),
            Err(Error::MissingCalibration(_))
        ));
        // absent statistic refused
        assert!(matches!(
            cal.rejection_region(StatKind::Jb, Side::Right, 0.05),
            Err(Error::MissingCalibration(_))
        ));
    }

    #[test]
    fn p_values_track_the_grid() {
        let cal = toy_calibration();
        let p = cal.p_value(StatKind::N, Side::Right, 2.7).unwrap();
        assert!((p - 0.05).abs() < 2e-3, "p = {p}");
        let p = cal.p_value(StatKind::N, Side::Left, -2.7).unwrap();
        assert!((p - 0.05).abs() < 2e-3);
        let p = cal.p_value(StatKind::N, Side::TwoSided, 2.7).unwrap();
        assert!((p - 0.1).abs() < 4e-3);
        // beyond the support the finite-sample floor applies
        let p = cal.p_value(StatKind::N, Side::Right, 99.0).unwrap();
        assert!((p - 1.0 / 10_001.0).abs() < 1e-12);
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let cal = toy_calibration();
        let dir = tempfile::tempdir().unwrap();
        let paths = cal.save_dir(dir.path()).unwrap();
        assert_eq!(paths.len(), 1);
        let loaded = NullCalibration::load_dir(dir.path(), 100, EstimatorConfig::default()).unwrap();
        assert_eq!(loaded.reps(), cal.reps());
        assert_eq!(loaded.seed(), cal.seed());
        for level in CALIBRATION_LEVELS {
            for side in [Side::Left, Side::Right, Side::TwoSided] {
                let a = cal.rejection_region(StatKind::N, side, level).unwrap();
                let b = loaded.rejection_region(StatKind::N, side, level).unwrap();
                assert_eq!(a, b);
            }
        }
        // different config digest is not picked up
        assert!(NullCalibration::load_dir(
            dir.path(),
            100,
            EstimatorConfig::type7_rounded()
        )
        .is_err());
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ncal");
        std::fs::write(&path, b"NOTMAGIC________").unwrap();
        assert!(matches!(
            read_table(&path),
            Err(Error::MalformedCalibrationFile(_))
        ));
    }
}
