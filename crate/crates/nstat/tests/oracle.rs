//! Quadrature and bisection oracles against the closed-form implementations.

mod common;

use common::{bisect_normal_quantile, integrate_piecewise, quad_moments, NORMAL_SUPPORT};
use nstat::{
    lambda_tail, qtilde, rho, std_normal_cdf, std_normal_pdf, std_normal_quantile, tau_sq_std,
    trunc_moments, Partition,
};

// Deterministic partition grid: corners plus a mixed pseudo-random sweep.
fn partition_grid() -> Vec<(f64, f64)> {
    let mut grid = vec![
        (0.0, 1.0),
        (0.0, 0.2),
        (0.2, 0.8),
        (0.8, 1.0),
        (0.0, 0.05),
        (0.95, 1.0),
        (0.001, 0.999),
    ];
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / 9_007_199_254_740_992.0
    };
    while grid.len() < 50 {
        let a = next() * 0.95;
        let b = a + 0.02 + next() * (1.0 - a - 0.02);
        if b <= 1.0 {
            grid.push((a, b));
        }
    }
    grid
}

#[test]
fn closed_form_moments_match_quadrature_on_grid() {
    for (a, b) in partition_grid() {
        let p = Partition::new(a, b).unwrap();
        let closed = trunc_moments(&p);
        let quad = quad_moments(a, b);
        let ctx = format!("[{a:.6}, {b:.6}]");
        assert!((closed.mu_tilde - quad.mu).abs() < 1e-9, "mu {ctx}");
        assert!((closed.sigma2_tilde - quad.sigma2).abs() < 1e-9, "sigma2 {ctx}");
        assert!((closed.m2 - quad.m2).abs() < 1e-9, "m2 {ctx}");
        assert!((closed.m3 - quad.m3).abs() < 1e-9, "m3 {ctx}");
        assert!((closed.m4 - quad.m4).abs() < 1e-9, "m4 {ctx}");
        // kappa is a ratio by sigma2^2: quadrature roundoff (~1e-12 in the
        // central moments) amplifies on narrow partitions where sigma2 is
        // tiny, so its bound carries the amplification factor.
        let kappa_tol = 1e-11 + 5e-12 / (closed.sigma2_tilde * closed.sigma2_tilde);
        assert!(
            (closed.kappa_tilde - quad.kappa).abs() < kappa_tol,
            "kappa {ctx}: {} vs {}",
            closed.kappa_tilde,
            quad.kappa
        );
    }
}

#[test]
fn lambda_matches_quadrature() {
    let quad = quad_moments(0.0, 0.2);
    assert!((lambda_tail() - quad.sigma2).abs() < 1e-9);
}

// Influence function of the conditional-variance estimator, evaluated by
// piecewise quadrature. Fully independent of the closed-form tau².
fn psi_variance(alpha: f64, beta: f64) -> f64 {
    let q = quad_moments(alpha, beta);
    let (mu, s2) = (q.mu, q.sigma2);
    let xa = if alpha > 0.0 {
        bisect_normal_quantile(alpha)
    } else {
        -NORMAL_SUPPORT
    };
    let xb = if beta < 1.0 {
        bisect_normal_quantile(beta)
    } else {
        NORMAL_SUPPORT
    };
    let ga = if alpha > 0.0 {
        (xa - mu).powi(2) - s2
    } else {
        0.0
    };
    let gb = if beta < 1.0 {
        (xb - mu).powi(2) - s2
    } else {
        0.0
    };
    let psi = move |z: f64| {
        let mut v = 0.0;
        if z > xa && z <= xb {
            v += (z - mu).powi(2) - s2;
        }
        v += (if z <= xa { 1.0 } else { 0.0 } - alpha) * ga;
        v += (beta - if z <= xb { 1.0 } else { 0.0 }) * gb;
        v
    };
    // psi is piecewise smooth with breaks at the block bounds
    let squared = move |z: f64| psi(z) * psi(z) * std_normal_pdf(z);
    let mut total = 0.0;
    let mut lo = -NORMAL_SUPPORT;
    for cut in [xa, xb, NORMAL_SUPPORT] {
        if cut > lo {
            total += integrate_piecewise(squared, lo, cut, 1e-13);
            lo = cut;
        }
    }
    total
}

#[test]
fn tau_sq_matches_influence_function_quadrature() {
    for (a, b) in [
        (qtilde().value, 1.0 - qtilde().value),
        (0.0, qtilde().value),
        (0.2, 0.8),
        (0.1, 0.6),
        (0.0, 1.0),
    ] {
        let p = Partition::new(a, b).unwrap();
        let closed = tau_sq_std(&p);
        let quad = psi_variance(a, b) / ((b - a) * (b - a));
        assert!(
            (closed - quad).abs() < 1e-8 * closed.max(1.0),
            "tau2[{a}, {b}]: closed {closed} vs quadrature {quad}"
        );
    }
}

#[test]
fn rho_matches_influence_function_quadrature() {
    let q = qtilde().value;
    let blocks = [(0.0, q), (q, 1.0 - q), (1.0 - q, 1.0)];
    let weights = [1.0 / q, -2.0 / (1.0 - 2.0 * q), 1.0 / q];

    // build the combined influence function sampled pointwise
    let parts: Vec<(f64, f64, f64, f64, f64, f64)> = blocks
        .iter()
        .map(|&(a, b)| {
            let m = quad_moments(a, b);
            let xa = if a > 0.0 { bisect_normal_quantile(a) } else { -NORMAL_SUPPORT };
            let xb = if b < 1.0 { bisect_normal_quantile(b) } else { NORMAL_SUPPORT };
            let ga = if a > 0.0 { (xa - m.mu).powi(2) - m.sigma2 } else { 0.0 };
            let gb = if b < 1.0 { (xb - m.mu).powi(2) - m.sigma2 } else { 0.0 };
            (m.mu, m.sigma2, xa, xb, ga, gb)
        })
        .collect();

    let combo = |z: f64| {
        let mut total = 0.0;
        for (k, &(a, b)) in blocks.iter().enumerate() {
            let (mu, s2, xa, xb, ga, gb) = parts[k];
            let mut v = 0.0;
            if z > xa && z <= xb {
                v += (z - mu).powi(2) - s2;
            }
            if a > 0.0 {
                v += (if z <= xa { 1.0 } else { 0.0 } - a) * ga;
            }
            if b < 1.0 {
                v += (b - if z <= xb { 1.0 } else { 0.0 }) * gb;
            }
            total += weights[k] * v;
        }
        total
    };

    let mut var = 0.0;
    let mut lo = -NORMAL_SUPPORT;
    let xq = qtilde().root;
    for cut in [xq, -xq, NORMAL_SUPPORT] {
        var += integrate_piecewise(move |z| combo(z) * combo(z) * std_normal_pdf(z), lo, cut, 1e-13);
        lo = cut;
    }
    let rho_quad = var.sqrt();
    assert!(
        (rho() - rho_quad).abs() < 1e-9,
        "rho closed {} vs quadrature {}",
        rho(),
        rho_quad
    );
}

#[test]
fn quantile_matches_bisection_oracle() {
    for p in [0.001, 0.01, 0.2, 0.19809, 0.5, 0.7, 0.975, 0.999] {
        let fast = std_normal_quantile(p).unwrap();
        let slow = bisect_normal_quantile(p);
        assert!((fast - slow).abs() < 5e-12, "p={p}: {fast} vs {slow}");
    }
}

#[test]
fn cdf_matches_density_quadrature() {
    for x in [-2.5, -1.0, 0.3, 1.345, 1.959964] {
        let direct = std_normal_cdf(x);
        let quad = integrate_piecewise(std_normal_pdf, -NORMAL_SUPPORT, x, 1e-14);
        assert!((direct - quad).abs() < 1e-11, "Phi({x}): {direct} vs {quad}");
    }
    assert!((std_normal_cdf(1.959964) - 0.975).abs() < 1e-8);
}
