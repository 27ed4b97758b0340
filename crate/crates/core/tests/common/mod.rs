//! Independent two-mode formulas and S³ quadrature shared by the test targets.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};

/// Unit vector on S³ in the `(x̂_1, x̂_2, x̂_3, x̂_4)` layout with
/// `û_1 ∝ cos φ e^{iθ1}` and `û_2 ∝ sin φ e^{iθ2}`.
pub fn s3_point(phi: f64, t1: f64, t2: f64) -> Vec<f64> {
    vec![
        phi.cos() * t1.cos(),
        phi.sin() * t2.cos(),
        -phi.cos() * t1.sin(),
        -phi.sin() * t2.sin(),
    ]
}

/// `H2` of the two-mode state written out by hand.
pub fn h2_angles(phi: f64, energy: f64) -> f64 {
    energy * (phi.cos().powi(2) + 4.0 * phi.sin().powi(2))
}

/// `H3` of the two-mode state, `2π R2 R1² cos(2θ1 - θ2)`.
pub fn h3_angles(phi: f64, t1: f64, t2: f64, energy: f64) -> f64 {
    let r = (energy / TAU).sqrt();
    TAU * r.powi(3) * phi.sin() * phi.cos().powi(2) * (2.0 * t1 - t2).cos()
}

/// `-βH` for `K = 2`.
pub fn log_f_angles(phi: f64, t1: f64, t2: f64, energy: f64, beta_prime: f64, ratio: f64) -> f64 {
    let h2 = h2_angles(phi, energy);
    let h3 = h3_angles(phi, t1, t2, energy);
    -beta_prime / (energy * 4.0) * (h2 - ratio * h3)
}

/// Projected anisotropic Gaussian density on S³ (unnormalized, log), for
/// per-mode precisions `1 + α β' k² / 8`.
pub fn log_g_angles(phi: f64, alpha: f64, beta_prime: f64) -> f64 {
    let c = alpha * beta_prime / 8.0;
    let t = phi.cos().powi(2) + 4.0 * phi.sin().powi(2);
    -2.0 * (1.0 + c * t).ln()
}

/// Expectations of `tests` under the density `exp(log_w)` with respect to the
/// uniform measure on S³, whose element is `cos φ sin φ dφ dθ1 dθ2`.
///
/// Composite Simpson in `φ ∈ [0, π/2]` (`n_phi` even), trapezoid (exact for
/// trigonometric polynomials) in both periodic angles.
pub fn s3_expectations(
    n_phi: usize,
    n_theta: usize,
    log_w: &dyn Fn(f64, f64, f64) -> f64,
    tests: &[&dyn Fn(f64, f64, f64) -> f64],
) -> Vec<f64> {
    assert!(n_phi.is_multiple_of(2));
    let hp = FRAC_PI_2 / n_phi as f64;
    let ht = TAU / n_theta as f64;
    let thetas: Vec<f64> = (0..n_theta).map(|j| j as f64 * ht).collect();

    let mut shift = f64::NEG_INFINITY;
    for i in 0..=n_phi {
        let phi = i as f64 * hp;
        for &t1 in &thetas {
            for &t2 in &thetas {
                shift = shift.max(log_w(phi, t1, t2));
            }
        }
    }

    let mut norm = 0.0;
    let mut sums = vec![0.0; tests.len()];
    for i in 0..=n_phi {
        let phi = i as f64 * hp;
        let simpson = if i == 0 || i == n_phi {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let jac = phi.cos() * phi.sin();
        if jac == 0.0 {
            continue;
        }
        for &t1 in &thetas {
            for &t2 in &thetas {
                let w = simpson * jac * (log_w(phi, t1, t2) - shift).exp();
                norm += w;
                for (s, f) in sums.iter_mut().zip(tests) {
                    *s += w * f(phi, t1, t2);
                }
            }
        }
    }
    sums.iter().map(|s| s / norm).collect()
}

/// Sample mean and its standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

