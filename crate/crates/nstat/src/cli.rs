//! Command-line front end: tests on data files, calibration, Monte Carlo
//! studies, and the analytic constants.
//!
//! Exit codes: 0 success, 1 internal error, 2 user/input error.
//!
//! The command-line defaults use the interpolated-quantile convention
//! (type-7 membership, m-1 denominators, rounded 20/60/20): that is the
//! convention behind the published calibration table and power studies, so
//! default runs reproduce them. The library defaults instead follow the
//! formal floor-index definitions; pass `--quantile-mode floor
//! --denominator m --ratio qtilde` to get those here.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibration::{CalibrationSet, NullCalibration, StatKind, CALIBRATION_LEVELS};
use crate::dist::AlternativeSpec;
use crate::empirical::{Denominator, EstimatorConfig, IndexMode, PartitionRatio, Sample};
use crate::error::{Error, Result};
use crate::harness::{
    calibrate_null, log_returns, power_study, returns_study, unique_rejection_study, PowerRow,
    ReturnKind, TestKind, UniqueRow,
};
use crate::io::{
    read_series, read_values, write_market_csv, write_power_csv, write_unique_csv, ColumnSelector,
};
use crate::normal::{qtilde, std_normal_quantile};
use crate::reference::{
    anderson_darling, anderson_darling_p_value, jarque_bera, jarque_bera_p_value, shapiro_wilk,
    shapiro_wilk_p_value,
};
use crate::statistic::{n1_statistic, n2_statistic, n_statistic, Side};
use crate::truncated::{lambda_tail, rho, trunc_moments, Partition};

#[derive(Debug, Parser)]
#[command(
    name = "nstat",
    version,
    about = "Fat-tail normality testing from conditional second moments"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DenominatorArg {
    /// Block length m.
    M,
    /// Unbiased m-1.
    #[value(name = "m-1")]
    MMinus1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuantileModeArg {
    /// Floor-index order-statistic ranges (the formal definition).
    Floor,
    /// Type-7 interpolated quantile membership (statistical-package style).
    Type7,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RatioArg {
    /// Exact solved ratio q~ = 0.19809.
    Qtilde,
    /// Rounded 20/60/20.
    #[value(name = "0.2")]
    Rounded,
}

/// Estimator-convention flags shared by all commands.
#[derive(Debug, Args)]
struct ConventionArgs {
    /// Conditional-variance denominator.
    #[arg(long, value_enum, default_value = "m-1")]
    denominator: DenominatorArg,
    /// Block membership rule.
    #[arg(long, value_enum, default_value = "type7")]
    quantile_mode: QuantileModeArg,
    /// Tail probability of the three-way split.
    #[arg(long, value_enum, default_value = "0.2")]
    ratio: RatioArg,
}

impl ConventionArgs {
    fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            denominator: match self.denominator {
                DenominatorArg::M => Denominator::BlockLen,
                DenominatorArg::MMinus1 => Denominator::BlockLenMinusOne,
            },
            index_mode: match self.quantile_mode {
                QuantileModeArg::Floor => IndexMode::FloorIndex,
                QuantileModeArg::Type7 => IndexMode::Type7Quantile,
            },
            ratio: match self.ratio {
                RatioArg::Qtilde => PartitionRatio::ExactQTilde,
                RatioArg::Rounded => PartitionRatio::Rounded20,
            },
        }
    }

    fn describe(&self) -> String {
        format!(
            "{}/{}/{}",
            match self.quantile_mode {
                QuantileModeArg::Floor => "floor",
                QuantileModeArg::Type7 => "type7",
            },
            match self.ratio {
                RatioArg::Qtilde => "qtilde",
                RatioArg::Rounded => "0.2",
            },
            match self.denominator {
                DenominatorArg::M => "m",
                DenominatorArg::MMinus1 => "m-1",
            }
        )
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the analytic constants and block moments.
    Constants {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run all normality tests on a sample file.
    Test {
        /// Input file: one value per line, or CSV (see --column).
        file: PathBuf,
        /// Significance levels.
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        level: Vec<f64>,
        /// Sidedness of the N test.
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        /// Value column: zero-based index or header name.
        #[arg(long)]
        column: Option<ColumnSelector>,
        /// Calibration cache directory; falls back to asymptotic criticals.
        #[arg(long, default_value = "calibration-cache")]
        cache_dir: PathBuf,
        #[command(flatten)]
        convention: ConventionArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Simulate null distributions and persist calibration tables.
    Calibrate {
        /// Sample sizes to calibrate.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Statistics to calibrate.
        #[arg(long, value_delimiter = ',', default_value = "n,jb,ad,sw")]
        stats: Vec<String>,
        #[arg(long, default_value = "calibration-cache")]
        cache_dir: PathBuf,
        #[command(flatten)]
        convention: ConventionArgs,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Rejection-frequency study against alternative distributions.
    Power {
        /// Alternatives, e.g. logistic, t5, gn2.5 (optionally /std).
        #[arg(long, value_delimiter = ',', required = true)]
        spec: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        level: Vec<f64>,
        /// Test columns.
        #[arg(long, value_delimiter = ',', default_value = "jb,ad,sw,n-two,n-right")]
        tests: Vec<String>,
        #[arg(long, default_value_t = 200_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "calibration-cache")]
        cache_dir: PathBuf,
        /// Write <out>.csv and <out>.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        convention: ConventionArgs,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Unique-rejection study: samples rejected by exactly one test.
    Unique {
        #[arg(long, value_delimiter = ',', required = true)]
        spec: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, value_delimiter = ',', default_value = "jb,ad,sw,n-right")]
        tests: Vec<String>,
        #[arg(long, default_value_t = 200_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "calibration-cache")]
        cache_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        convention: ConventionArgs,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Total/unique rejection ratios over windowed return series.
    Returns {
        /// One series per file.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Window lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.025,0.05")]
        level: Vec<f64>,
        /// Whether the files hold returns already or prices to difference.
        #[arg(long, value_enum, default_value = "returns")]
        input: InputKind,
        /// Price-to-return transform when --input prices.
        #[arg(long, value_enum, default_value = "log")]
        return_kind: ReturnKindArg,
        #[arg(long)]
        column: Option<ColumnSelector>,
        #[arg(long, value_delimiter = ',', default_value = "jb,ad,sw,n-right")]
        tests: Vec<String>,
        #[arg(long, default_value = "calibration-cache")]
        cache_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        convention: ConventionArgs,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Right,
    Left,
    #[value(name = "two-sided")]
    TwoSided,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Right => Side::Right,
            SideArg::Left => Side::Left,
            SideArg::TwoSided => Side::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputKind {
    Returns,
    Prices,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReturnKindArg {
    Log,
    Simple,
}

fn init_jobs(jobs: Option<usize>) {
    if let Some(j) = jobs {
        // ignore failure when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
}

fn parse_specs(raw: &[String]) -> Result<Vec<AlternativeSpec>> {
    raw.iter().map(|s| s.parse()).collect()
}

fn parse_tests(raw: &[String]) -> Result<Vec<TestKind>> {
    raw.iter().map(|s| s.parse()).collect()
}

fn parse_stats(raw: &[String]) -> Result<Vec<StatKind>> {
    raw.iter()
        .map(|s| match s.trim().to_ascii_lowercase().as_str() {
            "n" => Ok(StatKind::N),
            "jb" => Ok(StatKind::Jb),
            "ad" => Ok(StatKind::Ad),
            "sw" => Ok(StatKind::Sw),
            other => Err(Error::InvalidParameter(format!(
                "unknown statistic `{other}`"
            ))),
        })
        .collect()
}

/// Entry point used by the binary.
pub fn run() -> Result<()> {
    dispatch(Cli::parse())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Constants { format } => cmd_constants(format),
        Command::Test {
            file,
            level,
            side,
            column,
            cache_dir,
            convention,
            format,
        } => cmd_test(&file, &level, side.into(), column, &cache_dir, &convention, format),
        Command::Calibrate {
            n,
            reps,
            seed,
            stats,
            cache_dir,
            convention,
            jobs,
            format,
        } => {
            init_jobs(jobs);
            cmd_calibrate(&n, reps, seed, &parse_stats(&stats)?, &cache_dir, &convention, format)
        }
        Command::Power {
            spec,
            n,
            level,
            tests,
            reps,
            seed,
            cache_dir,
            out,
            convention,
            jobs,
            format,
        } => {
            init_jobs(jobs);
            cmd_power(
                &parse_specs(&spec)?,
                &n,
                &level,
                &parse_tests(&tests)?,
                reps,
                seed,
                &cache_dir,
                out.as_deref(),
                &convention,
                format,
            )
        }
        Command::Unique {
            spec,
            n,
            level,
            tests,
            reps,
            seed,
            cache_dir,
            out,
            convention,
            jobs,
            format,
        } => {
            init_jobs(jobs);
            cmd_unique(
                &parse_specs(&spec)?,
                &n,
                level,
                &parse_tests(&tests)?,
                reps,
                seed,
                &cache_dir,
                out.as_deref(),
                &convention,
                format,
            )
        }
        Command::Returns {
            files,
            n,
            level,
            input,
            return_kind,
            column,
            tests,
            cache_dir,
            out,
            convention,
            jobs,
            format,
        } => {
            init_jobs(jobs);
            cmd_returns(
                &files,
                &n,
                &level,
                input,
                return_kind,
                column,
                &parse_tests(&tests)?,
                &cache_dir,
                out.as_deref(),
                &convention,
                format,
            )
        }
    }
}

#[derive(Serialize)]
struct BlockMoments {
    mu_tilde: f64,
    sigma2_tilde: f64,
    kappa_tilde: f64,
}

#[derive(Serialize)]
struct ConstantsReport {
    q_tilde: f64,
    q_tilde_root: f64,
    rho: f64,
    lambda: f64,
    lower: BlockMoments,
    middle: BlockMoments,
    upper: BlockMoments,
}

fn constants_report() -> ConstantsReport {
    let q = qtilde();
    let block = |p: Partition| {
        let m = trunc_moments(&p);
        BlockMoments {
            mu_tilde: m.mu_tilde,
            sigma2_tilde: m.sigma2_tilde,
            kappa_tilde: m.kappa_tilde,
        }
    };
    ConstantsReport {
        q_tilde: q.value,
        q_tilde_root: q.root,
        rho: rho(),
        lambda: lambda_tail(),
        lower: block(Partition::new(0.0, q.value).unwrap()),
        middle: block(Partition::new(q.value, 1.0 - q.value).unwrap()),
        upper: block(Partition::new(1.0 - q.value, 1.0).unwrap()),
    }
}

fn cmd_constants(format: Format) -> Result<()> {
    let r = constants_report();
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&r).expect("serialize")),
        Format::Csv => {
            println!("name,value");
            println!("q_tilde,{:.17}", r.q_tilde);
            println!("q_tilde_root,{:.17}", r.q_tilde_root);
            println!("rho,{:.17}", r.rho);
            println!("lambda,{:.17}", r.lambda);
            for (name, b) in [("lower", &r.lower), ("middle", &r.middle), ("upper", &r.upper)] {
                println!("{name}_mu_tilde,{:.17}", b.mu_tilde);
                println!("{name}_sigma2_tilde,{:.17}", b.sigma2_tilde);
                println!("{name}_kappa_tilde,{:.17}", b.kappa_tilde);
            }
        }
        Format::Text => {
            println!(
                "q_tilde = {:.5}  (= {:.17}, root {:.17})",
                r.q_tilde, r.q_tilde, r.q_tilde_root
            );
            println!("rho     = {:.4}   (= {:.17})", r.rho, r.rho);
            println!("lambda  = {:.5}  (= {:.17})", r.lambda, r.lambda);
            println!();
            println!("block     mu_tilde               sigma2_tilde           kappa_tilde");
            for (name, b) in [("lower", &r.lower), ("middle", &r.middle), ("upper", &r.upper)] {
                println!(
                    "{name:<8} {:>22.17} {:>22.17} {:>21.17}",
                    b.mu_tilde, b.sigma2_tilde, b.kappa_tilde
                );
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Decision {
    test: String,
    side: Side,
    level: f64,
    threshold_below: Option<f64>,
    threshold_above: Option<f64>,
    p_value: Option<f64>,
    reject: bool,
}

#[derive(Serialize)]
struct TestReport {
    file: String,
    n: usize,
    convention: String,
    critical_source: String,
    n_stat: f64,
    n1_stat: f64,
    n2_stat: f64,
    jb_stat: f64,
    ad_stat: f64,
    sw_stat: f64,
    decisions: Vec<Decision>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_test(
    file: &std::path::Path,
    levels: &[f64],
    side: Side,
    column: Option<ColumnSelector>,
    cache_dir: &std::path::Path,
    convention: &ConventionArgs,
    format: Format,
) -> Result<()> {
    let values = read_values(file, &column.unwrap_or_default())?;
    let sample = Sample::new(values)?;
    let cfg = convention.config();
    let n = sample.len();

    let calibration = NullCalibration::load_dir(cache_dir, n, cfg).ok();
    let source = match &calibration {
        Some(c) => format!("calibrated (n={}, reps={}, seed={})", c.n(), c.reps(), c.seed()),
        None => "asymptotic".to_string(),
    };

    let n_stat = n_statistic(&sample, &cfg)?;
    let n1 = n1_statistic(&sample, &cfg)?;
    let n2 = n2_statistic(&sample, &cfg)?;
    let jb = jarque_bera(&sample)?;
    let ad = anderson_darling(&sample)?;
    let sw = shapiro_wilk(&sample)?;

    let mut decisions = Vec::new();
    for &level in levels {
        match &calibration {
            Some(cal) => {
                for (name, stat, kind, side) in [
                    ("N", n_stat, StatKind::N, side),
                    ("JB", jb, StatKind::Jb, Side::Right),
                    ("AD", ad, StatKind::Ad, Side::Right),
                    ("SW", sw, StatKind::Sw, Side::Left),
                ] {
                    let region = cal.rejection_region(kind, side, level)?;
                    decisions.push(Decision {
                        test: name.to_string(),
                        side,
                        level,
                        threshold_below: region.below,
                        threshold_above: region.above,
                        p_value: Some(cal.p_value(kind, side, stat)?),
                        reject: region.contains(stat),
                    });
                }
            }
            None => {
                let n_region = crate::statistic::asymptotic_region(side, level)?;
                decisions.push(Decision {
                    test: "N".into(),
                    side,
                    level,
                    threshold_below: n_region.below,
                    threshold_above: n_region.above,
                    p_value: Some(crate::statistic::asymptotic_p_value(side, n_stat)),
                    reject: n_region.contains(n_stat),
                });
                let jb_p = jarque_bera_p_value(jb);
                decisions.push(Decision {
                    test: "JB".into(),
                    side: Side::Right,
                    level,
                    threshold_below: None,
                    threshold_above: Some(-2.0 * level.ln()),
                    p_value: Some(jb_p),
                    reject: jb_p < level,
                });
                let ad_p = anderson_darling_p_value(ad, n);
                decisions.push(Decision {
                    test: "AD".into(),
                    side: Side::Right,
                    level,
                    threshold_below: None,
                    threshold_above: None,
                    p_value: Some(ad_p),
                    reject: ad_p < level,
                });
                let sw_p = shapiro_wilk_p_value(&sample)?;
                decisions.push(Decision {
                    test: "SW".into(),
                    side: Side::Left,
                    level,
                    threshold_below: None,
                    threshold_above: None,
                    p_value: Some(sw_p),
                    reject: sw_p < level,
                });
            }
        }
    }

    let report = TestReport {
        file: file.display().to_string(),
        n,
        convention: convention.describe(),
        critical_source: source,
        n_stat,
        n1_stat: n1,
        n2_stat: n2,
        jb_stat: jb,
        ad_stat: ad,
        sw_stat: sw,
        decisions,
    };

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("serialize")),
        Format::Csv => {
            println!("test,side,level,reject,p_value");
            for d in &report.decisions {
                println!(
                    "{},{},{},{},{}",
                    d.test,
                    d.side,
                    d.level,
                    d.reject,
                    d.p_value.map_or(String::new(), |p| p.to_string())
                );
            }
        }
        Format::Text => {
            println!("file: {} ({} observations)", report.file, report.n);
            println!(
                "convention: {}   critical source: {}",
                report.convention, report.critical_source
            );
            println!();
            println!(
                "N = {:+.4}   N1 = {:+.4}   N2 = {:+.4}",
                report.n_stat, report.n1_stat, report.n2_stat
            );
            println!(
                "JB = {:.4}   AD = {:.4}   SW = {:.5}",
                report.jb_stat, report.ad_stat, report.sw_stat
            );
            println!();
            for d in &report.decisions {
                let verdict = if d.reject { "REJECT normality" } else { "fail to reject" };
                let p = d.p_value.map_or(String::new(), |p| format!("  p = {p:.4}"));
                println!(
                    "level {:>5.2}%  {:<15} {}{}",
                    d.level * 100.0,
                    format!("{} ({}):", d.test, d.side),
                    verdict,
                    p
                );
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CalibrationRow {
    stat: String,
    level: f64,
    side: Side,
    threshold: f64,
    asymptotic: Option<f64>,
}

#[derive(Serialize)]
struct CalibrationReport {
    n: usize,
    reps: usize,
    seed: u64,
    convention: String,
    files: Vec<String>,
    rows: Vec<CalibrationRow>,
}

fn cmd_calibrate(
    ns: &[usize],
    reps: usize,
    seed: u64,
    stats: &[StatKind],
    cache_dir: &std::path::Path,
    convention: &ConventionArgs,
    format: Format,
) -> Result<()> {
    let cfg = convention.config();
    let mut reports = Vec::new();
    for &n in ns {
        let cal = calibrate_null(n, reps, seed, stats, &cfg)?;
        let files = cal
            .save_dir(cache_dir)?
            .into_iter()
            .map(|p| p.display().to_string())
            .collect();
        let mut rows = Vec::new();
        for &stat in stats {
            let side = match stat {
                StatKind::Sw => Side::Left,
                _ => Side::Right,
            };
            for level in CALIBRATION_LEVELS {
                let region = cal.rejection_region(stat, side, level)?;
                let threshold = region.above.or(region.below).expect("one-sided region");
                let asymptotic = match stat {
                    StatKind::N => Some(std_normal_quantile(match side {
                        Side::Right => 1.0 - level,
                        _ => level,
                    })?),
                    StatKind::Jb => Some(-2.0 * level.ln()),
                    _ => None,
                };
                rows.push(CalibrationRow {
                    stat: stat.to_string(),
                    level,
                    side,
                    threshold,
                    asymptotic,
                });
            }
        }
        reports.push(CalibrationReport {
            n,
            reps,
            seed,
            convention: convention.describe(),
            files,
            rows,
        });
    }

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("serialize")),
        Format::Csv => {
            println!("n,stat,level,side,threshold,asymptotic");
            for r in &reports {
                for row in &r.rows {
                    println!(
                        "{},{},{},{},{},{}",
                        r.n,
                        row.stat,
                        row.level,
                        row.side,
                        row.threshold,
                        row.asymptotic.map_or(String::new(), |a| a.to_string())
                    );
                }
            }
        }
        Format::Text => {
            for r in &reports {
                println!(
                    "calibration n={} reps={} seed={} convention={} -> {} file(s)",
                    r.n,
                    r.reps,
                    r.seed,
                    r.convention,
                    r.files.len()
                );
                println!("  stat  level   side       calibrated   asymptotic");
                for row in &r.rows {
                    let asym = row
                        .asymptotic
                        .map_or("        -".to_string(), |a| format!("{a:>9.3}"));
                    println!(
                        "  {:<4} {:>5.2}%  {:<9} {:>11.3}    {}",
                        row.stat,
                        row.level * 100.0,
                        row.side.to_string(),
                        row.threshold,
                        asym
                    );
                }
            }
        }
    }
    Ok(())
}

fn load_calibrations(
    cache_dir: &std::path::Path,
    ns: &[usize],
    cfg: EstimatorConfig,
) -> Result<CalibrationSet> {
    CalibrationSet::load_dir(cache_dir, ns, cfg).map_err(|e| {
        Error::MissingCalibration(format!(
            "{e}; run `nstat calibrate --n {} --cache-dir {}` first (matching convention flags)",
            ns.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
            cache_dir.display()
        ))
    })
}

fn write_outputs<T: Serialize>(
    out: Option<&std::path::Path>,
    rows: &T,
    csv: impl FnOnce(std::fs::File) -> Result<()>,
) -> Result<()> {
    if let Some(prefix) = out {
        let json_path = prefix.with_extension("json");
        let csv_path = prefix.with_extension("csv");
        serde_json::to_writer_pretty(std::fs::File::create(&json_path)?, rows)
            .map_err(|e| Error::Parse(format!("json write: {e}")))?;
        csv(std::fs::File::create(&csv_path)?)?;
        eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_power(
    specs: &[AlternativeSpec],
    ns: &[usize],
    levels: &[f64],
    tests: &[TestKind],
    reps: usize,
    seed: u64,
    cache_dir: &std::path::Path,
    out: Option<&std::path::Path>,
    convention: &ConventionArgs,
    format: Format,
) -> Result<()> {
    let cfg = convention.config();
    let cals = load_calibrations(cache_dir, ns, cfg)?;
    let rows = power_study(specs, ns, levels, tests, reps, seed, &cals, &cfg)?;
    write_outputs(out, &rows, |f| write_power_csv(f, &rows))?;

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serialize")),
        Format::Csv => write_power_csv(std::io::stdout().lock(), &rows)?,
        Format::Text => {
            for &level in levels {
                println!(
                    "rejection rate at level {:.2}% (reps {reps}, seed {seed}, convention {}; * = best in row)",
                    level * 100.0,
                    convention.describe()
                );
                print!("{:<14} {:>5}", "distribution", "n");
                for t in tests {
                    print!(" {:>9}", t.to_string());
                }
                println!();
                for spec in specs {
                    for &n in ns {
                        let cells: Vec<&PowerRow> = rows
                            .iter()
                            .filter(|r| {
                                r.spec == *spec && r.n == n && (r.level - level).abs() < 1e-12
                            })
                            .collect();
                        let best = cells
                            .iter()
                            .map(|r| r.rejection_rate)
                            .fold(f64::NEG_INFINITY, f64::max);
                        print!("{:<14} {:>5}", spec.to_string(), n);
                        for t in tests {
                            let cell = cells.iter().find(|r| r.test == *t).expect("cell");
                            let mark = if cell.rejection_rate == best { "*" } else { " " };
                            print!(" {mark}{:>7.1}%", cell.rejection_rate * 100.0);
                        }
                        println!();
                    }
                }
                println!();
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_unique(
    specs: &[AlternativeSpec],
    ns: &[usize],
    level: f64,
    tests: &[TestKind],
    reps: usize,
    seed: u64,
    cache_dir: &std::path::Path,
    out: Option<&std::path::Path>,
    convention: &ConventionArgs,
    format: Format,
) -> Result<()> {
    let cfg = convention.config();
    let cals = load_calibrations(cache_dir, ns, cfg)?;
    let rows = unique_rejection_study(specs, ns, level, tests, reps, seed, &cals, &cfg)?;
    write_outputs(out, &rows, |f| write_unique_csv(f, &rows))?;

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serialize")),
        Format::Csv => write_unique_csv(std::io::stdout().lock(), &rows)?,
        Format::Text => {
            println!(
                "unique rejections at level {:.2}% (reps {reps}, seed {seed}; * = best in row)",
                level * 100.0
            );
            print!("{:<14} {:>5}", "distribution", "n");
            for t in tests {
                print!(" {:>9}", t.to_string());
            }
            println!();
            for spec in specs {
                for &n in ns {
                    let cells: Vec<&UniqueRow> = rows
                        .iter()
                        .filter(|r| r.spec == *spec && r.n == n)
                        .collect();
                    let best = cells
                        .iter()
                        .map(|r| r.unique_rate)
                        .fold(f64::NEG_INFINITY, f64::max);
                    print!("{:<14} {:>5}", spec.to_string(), n);
                    for t in tests {
                        let cell = cells.iter().find(|r| r.test == *t).expect("cell");
                        let mark = if cell.unique_rate == best { "*" } else { " " };
                        print!(" {mark}{:>7.1}%", cell.unique_rate * 100.0);
                    }
                    println!();
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_returns(
    files: &[PathBuf],
    ns: &[usize],
    levels: &[f64],
    input: InputKind,
    return_kind: ReturnKindArg,
    column: Option<ColumnSelector>,
    tests: &[TestKind],
    cache_dir: &std::path::Path,
    out: Option<&std::path::Path>,
    convention: &ConventionArgs,
    format: Format,
) -> Result<()> {
    let cfg = convention.config();
    let selector = column.unwrap_or_default();
    let mut series = Vec::with_capacity(files.len());
    for f in files {
        let mut s = read_series(f, &selector)?;
        if matches!(input, InputKind::Prices) {
            let kind = match return_kind {
                ReturnKindArg::Log => ReturnKind::Log,
                ReturnKindArg::Simple => ReturnKind::Simple,
            };
            s.values = log_returns(&s.values, kind)?;
        }
        series.push(s);
    }

    let cals = load_calibrations(cache_dir, ns, cfg)?;
    let mut all_rows = Vec::new();
    let mut skipped = Vec::new();
    for &n in ns {
        let report = returns_study(&series, n, levels, tests, cals.get(n)?, &cfg)?;
        all_rows.extend(report.rows);
        skipped.extend(report.skipped);
    }
    skipped.sort_by(|a, b| a.id.cmp(&b.id));
    skipped.dedup_by(|a, b| a.id == b.id && a.len == b.len);
    for s in &skipped {
        eprintln!(
            "warning: series `{}` ({} observations) shorter than a window; skipped",
            s.id, s.len
        );
    }

    write_outputs(out, &all_rows, |f| write_market_csv(f, &all_rows))?;

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&all_rows).expect("serialize")),
        Format::Csv => write_market_csv(std::io::stdout().lock(), &all_rows)?,
        Format::Text => {
            for row in &all_rows {
                println!(
                    "n={} level={:.2}% windows={} rejects_any={:.1}%",
                    row.n,
                    row.level * 100.0,
                    row.windows,
                    row.rejects_any * 100.0
                );
                let best_t = row
                    .tests
                    .iter()
                    .map(|t| t.total_rejection)
                    .fold(f64::NEG_INFINITY, f64::max);
                let best_u = row
                    .tests
                    .iter()
                    .map(|t| t.unique_rejection)
                    .fold(f64::NEG_INFINITY, f64::max);
                print!("  T ");
                for t in &row.tests {
                    let mark = if t.total_rejection == best_t { "*" } else { " " };
                    print!(" {:>7}:{mark}{:>5.1}%", t.test.to_string(), t.total_rejection * 100.0);
                }
                println!();
                print!("  U ");
                for t in &row.tests {
                    let mark = if t.unique_rejection == best_u { "*" } else { " " };
                    print!(" {:>7}:{mark}{:>5.1}%", t.test.to_string(), t.unique_rejection * 100.0);
                }
                println!();
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn convention_defaults_reproduce_tables() {
        let cli = Cli::try_parse_from(["nstat", "calibrate", "--n", "50"]).unwrap();
        match cli.command {
            Command::Calibrate {
                convention,
                reps,
                seed,
                ..
            } => {
                assert_eq!(convention.config(), EstimatorConfig::type7_rounded());
                assert_eq!(reps, 1_000_000);
                assert_eq!(seed, 1);
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn floor_flags_give_library_defaults() {
        let cli = Cli::try_parse_from([
            "nstat",
            "calibrate",
            "--n",
            "50",
            "--denominator",
            "m",
            "--quantile-mode",
            "floor",
            "--ratio",
            "qtilde",
        ])
        .unwrap();
        match cli.command {
            Command::Calibrate { convention, .. } => {
                assert_eq!(convention.config(), EstimatorConfig::default());
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn spec_lists_parse() {
        let specs = parse_specs(&["logistic".into(), "t5".into(), "gn2.5".into()]).unwrap();
        assert_eq!(specs.len(), 3);
        assert!(parse_specs(&["bogus".into()]).is_err());
        let tests = parse_tests(&["jb".into(), "n-right".into()]).unwrap();
        assert_eq!(tests, vec![TestKind::Jb, TestKind::NRight]);
    }
}
