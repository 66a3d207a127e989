//! Closed-form standardized conditional moments of the normal on quantile
//! intervals, the asymptotic variance of the conditional variance estimator,
//! and the normalizing constants derived from them.
//!
//! Conventions: an interval boundary at probability 0 or 1 sits at ∓∞, where
//! every `x^k·φ(x)` product vanishes. Those terms are dropped structurally
//! rather than evaluated, so no infinities enter the arithmetic.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::normal::{qtilde, std_normal_pdf, std_normal_quantile};

/// A quantile interval [alpha, beta] defining a conditioning set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    alpha: f64,
    beta: f64,
}

impl Partition {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && 0.0 <= alpha && alpha < beta && beta <= 1.0)
        {
            return Err(Error::InvalidPartition { alpha, beta });
        }
        Ok(Partition { alpha, beta })
    }

    /// The untruncated interval [0, 1].
    pub fn full() -> Self {
        Partition {
            alpha: 0.0,
            beta: 1.0,
        }
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Mirror image [1-beta, 1-alpha].
    pub fn reflected(&self) -> Self {
        Partition {
            alpha: 1.0 - self.beta,
            beta: 1.0 - self.alpha,
        }
    }

    /// Lower / middle / upper blocks of the three-way split at ratio `q`.
    pub(crate) fn lower_block(q: f64) -> Self {
        Partition { alpha: 0.0, beta: q }
    }

    pub(crate) fn middle_block(q: f64) -> Self {
        Partition {
            alpha: q,
            beta: 1.0 - q,
        }
    }

    pub(crate) fn upper_block(q: f64) -> Self {
        Partition {
            alpha: 1.0 - q,
            beta: 1.0,
        }
    }
}

/// Standardized conditional moments on a partition.
///
/// `m2..m4` are central moments about the parent mean (zero); `mu_tilde` and
/// `sigma2_tilde` are the conditional mean and variance; `kappa_tilde` the
/// conditional kurtosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoments {
    pub mu_tilde: f64,
    pub sigma2_tilde: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub kappa_tilde: f64,
}

// Boundary of a partition: the quantile and the density there. Infinite
// boundaries carry (0, 0) so that x^k * pdf terms vanish by construction.
#[derive(Clone, Copy)]
struct Edge {
    x: f64,
    pdf: f64,
}

fn lower_edge(alpha: f64) -> Edge {
    if alpha <= 0.0 {
        Edge { x: 0.0, pdf: 0.0 }
    } else {
        let x = std_normal_quantile(alpha).expect("interior bound in (0,1)");
        Edge {
            x,
            pdf: std_normal_pdf(x),
        }
    }
}

fn upper_edge(beta: f64) -> Edge {
    if beta >= 1.0 {
        Edge { x: 0.0, pdf: 0.0 }
    } else {
        let x = std_normal_quantile(beta).expect("interior bound in (0,1)");
        Edge {
            x,
            pdf: std_normal_pdf(x),
        }
    }
}

/// Closed-form standardized conditional moments on `p`.
pub fn trunc_moments(p: &Partition) -> TruncatedMoments {
    let a = lower_edge(p.alpha);
    let b = upper_edge(p.beta);
    let d = p.beta - p.alpha;

    let m2 = 1.0 + (a.x * a.pdf - b.x * b.pdf) / d;
    let m3 = (a.x * a.x * a.pdf - b.x * b.x * b.pdf) / d + 2.0 * (a.pdf - b.pdf) / d;
    let m4 =
        3.0 + (a.x.powi(3) * a.pdf - b.x.powi(3) * b.pdf) / d + 3.0 * (a.x * a.pdf - b.x * b.pdf) / d;
    let mu_tilde = (a.pdf - b.pdf) / d;
    let sigma2_tilde = m2 - mu_tilde * mu_tilde;
    let kappa_tilde = (m4 - 3.0 * mu_tilde.powi(4) + 6.0 * mu_tilde * mu_tilde * m2
        - 4.0 * mu_tilde * m3)
        / (sigma2_tilde * sigma2_tilde);

    TruncatedMoments {
        mu_tilde,
        sigma2_tilde,
        m2,
        m3,
        m4,
        kappa_tilde,
    }
}

/// Asymptotic variance of √n(σ̂²_A - σ²_A) in standardized units (τ²_A/σ⁴).
///
/// Boundary products at probability 0 or 1 are dropped structurally.
pub fn tau_sq_std(p: &Partition) -> f64 {
    let m = trunc_moments(p);
    let d = p.beta - p.alpha;
    let mut t = d * m.sigma2_tilde * m.sigma2_tilde * (m.kappa_tilde - 1.0);

    let ga = if p.alpha > 0.0 {
        let xa = std_normal_quantile(p.alpha).expect("interior bound");
        let g = (xa - m.mu_tilde).powi(2) - m.sigma2_tilde;
        t += p.alpha * (1.0 - p.alpha) * g * g;
        Some(g)
    } else {
        None
    };
    let gb = if p.beta < 1.0 {
        let xb = std_normal_quantile(p.beta).expect("interior bound");
        let g = (xb - m.mu_tilde).powi(2) - m.sigma2_tilde;
        t += p.beta * (1.0 - p.beta) * g * g;
        Some(g)
    } else {
        None
    };
    if let (Some(ga), Some(gb)) = (ga, gb) {
        t -= 2.0 * p.alpha * (1.0 - p.beta) * ga * gb;
    }
    t / (d * d)
}

fn compute_rho() -> f64 {
    let q = qtilde();
    let qv = q.value;
    let xq = q.root;

    let lower = trunc_moments(&Partition::lower_block(qv));
    let middle = trunc_moments(&Partition::middle_block(qv));
    let upper = trunc_moments(&Partition::upper_block(qv));

    let t_l = tau_sq_std(&Partition::lower_block(qv));
    let t_m = tau_sq_std(&Partition::middle_block(qv));
    let t_r = tau_sq_std(&Partition::upper_block(qv));

    let g_ll = (xq - lower.mu_tilde).powi(2) - lower.sigma2_tilde;
    let g_ml_plus = (xq + middle.mu_tilde).powi(2) - middle.sigma2_tilde;
    let g_ml_minus = (xq - middle.mu_tilde).powi(2) - middle.sigma2_tilde;
    let g_rr = (xq + upper.mu_tilde).powi(2) - upper.sigma2_tilde;

    let c1 = qv * qv * g_ll * g_ml_plus - qv * (1.0 - qv) * g_ml_minus * g_ll;
    let c2 = qv * qv * g_rr * g_ml_minus - qv * (1.0 - qv) * g_ml_plus * g_rr;
    let c3 = -qv * qv * g_rr * g_ll;

    (t_l + 4.0 * t_m + t_r - 4.0 * (c1 + c2) / (qv * (1.0 - 2.0 * qv)) + 2.0 * c3 / (qv * qv))
        .sqrt()
}

/// Normalizing constant for the two-tailed conditional-variance statistic,
/// computed once from the closed form. Approximately 1.7885.
pub fn rho() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(compute_rho)
}

/// Ratio of lower-tail dispersion to overall dispersion at the rounded 20%
/// split; equals the standardized conditional variance on [0, 0.2].
pub fn lambda_tail() -> f64 {
    let x = std_normal_quantile(0.2).expect("0.2 in (0,1)");
    let pdf = std_normal_pdf(x);
    1.0 - x * pdf / 0.2 - pdf * pdf / (0.2 * 0.2)
}
