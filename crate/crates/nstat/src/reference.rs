//! Benchmark normality statistics: Jarque-Bera, Anderson-Darling, and
//! Shapiro-Wilk.
//!
//! Power and market studies always use Monte-Carlo-calibrated critical
//! values for these statistics; the asymptotic p-value helpers here exist
//! for single-sample reporting where no calibration table is on hand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{quantile_approx, std_normal_cdf, std_normal_quantile};

/// Benchmark test identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefTestKind {
    Jb,
    Ad,
    Sw,
}

impl RefTestKind {
    pub fn evaluate(self, s: &crate::empirical::Sample) -> Result<f64> {
        match self {
            RefTestKind::Jb => jarque_bera(s),
            RefTestKind::Ad => anderson_darling(s),
            RefTestKind::Sw => shapiro_wilk(s),
        }
    }
}

impl std::fmt::Display for RefTestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RefTestKind::Jb => write!(f, "JB"),
            RefTestKind::Ad => write!(f, "AD"),
            RefTestKind::Sw => write!(f, "SW"),
        }
    }
}

const MIN_REF_LEN: usize = 8;

/// Jarque-Bera statistic n/6·(S² + (K-3)²/4) with 1/n moment normalizers.
pub fn jarque_bera(s: &crate::empirical::Sample) -> Result<f64> {
    let n = s.len();
    if n < MIN_REF_LEN {
        return Err(Error::SampleTooSmall {
            needed: MIN_REF_LEN,
            got: n,
        });
    }
    let nf = n as f64;
    let data = s.values();
    let mean = data.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return Err(Error::DegenerateVariance {
            reason: "constant sample".into(),
        });
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    Ok(nf / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0)))
}

/// Survival function of χ² with two degrees of freedom (the JB large-sample
/// null): P(X > x) = exp(-x/2).
pub fn jarque_bera_p_value(stat: f64) -> f64 {
    (-0.5 * stat).exp()
}

/// Anderson-Darling A² for composite normality: standardize by the sample
/// mean and (unbiased) standard deviation, then
/// A² = -n - (1/n)·Σ (2i-1)(ln Φ(z_(i)) + ln(1 - Φ(z_(n+1-i)))).
pub fn anderson_darling(s: &crate::empirical::Sample) -> Result<f64> {
    let n = s.len();
    if n < MIN_REF_LEN {
        return Err(Error::SampleTooSmall {
            needed: MIN_REF_LEN,
            got: n,
        });
    }
    let nf = n as f64;
    let sorted = s.sorted();
    let mean = sorted.iter().sum::<f64>() / nf;
    let ss: f64 = sorted.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    if sd <= 0.0 {
        return Err(Error::DegenerateVariance {
            reason: "constant sample".into(),
        });
    }

    // Probabilities are clamped away from 0 so the logs stay finite.
    const FLOOR: f64 = 1e-300;
    let mut log_cdf = Vec::with_capacity(n);
    let mut log_sf = Vec::with_capacity(n);
    for &x in sorted {
        let z = (x - mean) / sd;
        log_cdf.push(std_normal_cdf(z).max(FLOOR).ln());
        log_sf.push(std_normal_cdf(-z).max(FLOOR).ln());
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += (2 * i + 1) as f64 * (log_cdf[i] + log_sf[n - 1 - i]);
    }
    Ok(-nf - acc / nf)
}

/// Small-sample adjusted statistic A*² = A²(1 + 0.75/n + 2.25/n²) and its
/// p-value approximation for the parameters-estimated case.
pub fn anderson_darling_p_value(a2: f64, n: usize) -> f64 {
    let nf = n as f64;
    let z = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if z >= 0.6 {
        (1.2937 - 5.709 * z + 0.0186 * z * z).exp()
    } else if z > 0.34 {
        (0.9177 - 4.279 * z - 1.38 * z * z).exp()
    } else if z > 0.2 {
        1.0 - (-8.318 + 42.796 * z - 59.938 * z * z).exp()
    } else {
        1.0 - (-13.436 + 101.14 * z - 223.73 * z * z).exp()
    };
    p.clamp(0.0, 1.0)
}

/// Supported Shapiro-Wilk range; the coefficient approximation is validated
/// up to 5000 observations.
pub const SW_MAX_LEN: usize = 5000;

fn poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = coeffs[coeffs.len() - 1];
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc * x + c;
    }
    acc
}

/// Normal-scores coefficient half-vector a[1..=n/2] (1-based; index 0
/// unused), normalized with the polynomial corrections for the two largest
/// coefficients.
pub fn sw_coefficients(n: usize) -> Result<Vec<f64>> {
    if n < MIN_REF_LEN {
        return Err(Error::SampleTooSmall {
            needed: MIN_REF_LEN,
            got: n,
        });
    }
    if n > SW_MAX_LEN {
        return Err(Error::SampleTooLarge {
            max: SW_MAX_LEN,
            got: n,
        });
    }
    let nn2 = n / 2;
    let nf = n as f64;
    let an25 = nf + 0.25;
    let mut a = vec![0.0; nn2 + 1];
    let mut summ2 = 0.0;
    for (i, slot) in a.iter_mut().enumerate().skip(1) {
        let m = std_normal_quantile((i as f64 - 0.375) / an25)?;
        *slot = m;
        summ2 += m * m;
    }
    summ2 *= 2.0;
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / nf.sqrt();

    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];

    let a1 = poly(&C1, rsn) - a[1] / ssumm2;
    let a2 = -a[2] / ssumm2 + poly(&C2, rsn);
    let fac = ((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2])
        / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
        .sqrt();
    a[1] = a1;
    a[2] = a2;
    for slot in a.iter_mut().skip(3) {
        *slot /= -fac;
    }
    Ok(a)
}

/// W statistic given precomputed coefficients for the sample size.
pub fn shapiro_wilk_with(a: &[f64], s: &crate::empirical::Sample) -> Result<f64> {
    Ok(sw_statistic(a, s)?.0)
}

// Returns (W, 1 - W); the complement is carried separately because the
// p-value transform needs ln(1 - W) without cancellation.
fn sw_statistic(a: &[f64], s: &crate::empirical::Sample) -> Result<(f64, f64)> {
    let n = s.len();
    let sorted = s.sorted();
    if sorted[n - 1] - sorted[0] <= 0.0 {
        return Err(Error::DegenerateVariance {
            reason: "constant sample".into(),
        });
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let mut ssa = 0.0;
    let mut ssx = 0.0;
    let mut sax = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let j = n - 1 - i;
        // antisymmetric full coefficient vector from the stored half
        let c = if i == j {
            0.0
        } else {
            let idx = i.min(j) + 1;
            if i > j {
                a[idx]
            } else {
                -a[idx]
            }
        };
        let dx = x - mean;
        ssa += c * c;
        ssx += dx * dx;
        sax += c * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    Ok(((1.0 - w1).clamp(0.0, 1.0), w1))
}

/// Shapiro-Wilk W via the published coefficient approximation.
pub fn shapiro_wilk(s: &crate::empirical::Sample) -> Result<f64> {
    let a = sw_coefficients(s.len())?;
    shapiro_wilk_with(&a, s)
}

/// P-value for W via the published log-normal transformation of 1 - W.
pub fn shapiro_wilk_p_value(s: &crate::empirical::Sample) -> Result<f64> {
    let a = sw_coefficients(s.len())?;
    let (_, w1) = sw_statistic(&a, s)?;
    let n = s.len();
    let nf = n as f64;
    if w1 <= 0.0 {
        return Ok(1.0);
    }
    let y = w1.ln();

    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -0.0006714];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let (y_std, m, sd) = if n <= 11 {
        let gamma = poly(&G, nf);
        if y >= gamma {
            return Ok(1e-99);
        }
        (-(gamma - y).ln(), poly(&C3, nf), poly(&C4, nf).exp())
    } else {
        let xx = nf.ln();
        (y, poly(&C5, xx), poly(&C6, xx).exp())
    };
    // upper tail of the transformed statistic
    Ok(std_normal_cdf(-(y_std - m) / sd).clamp(0.0, 1.0))
}

/// Standard-normal quantiles at the plotting positions (i - 0.5)/n; a
/// near-perfectly normal sample used in tests and demos.
pub fn normal_scores(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let p = (i as f64 - 0.5) / n as f64;
            // interior by construction
            quantile_approx(p)
        })
        .collect()
}
