//! Quadratic and cubic Hamiltonian components of truncated KdV.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{ModelParams, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianValue {
    pub h2: f64,
    pub h3: f64,
    /// `β H_K` in the reduced parametrization.
    pub beta_h: f64,
}

impl HamiltonianValue {
    pub fn evaluate(p: &ModelParams, s: &Spectrum) -> Self {
        let h2 = h2(s);
        let h3 = h3(s);
        Self {
            h2,
            h3,
            beta_h: combine(p, h2, h3),
        }
    }
}

pub(crate) fn h2_modes(modes: &[Complex64]) -> f64 {
    let sum: f64 = modes
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let k = (i + 1) as f64;
            k * k * u.norm_sqr()
        })
        .sum();
    2.0 * PI * sum
}

pub(crate) fn h3_modes(modes: &[Complex64]) -> f64 {
    // modes[i] holds û_{i+1}; the inner loop runs k = 1..n-1 in order.
    let mut total = 0.0;
    for n in 2..=modes.len() {
        let mut conv = Complex64::new(0.0, 0.0);
        for k in 1..n {
            conv += modes[k - 1] * modes[n - k - 1];
        }
        total += (modes[n - 1].conj() * conv).re;
    }
    2.0 * PI * total
}

/// Dispersive component `H2 = 2π Σ k² |û_k|²`.
pub fn h2(s: &Spectrum) -> f64 {
    h2_modes(&s.modes)
}

/// Cubic component `H3 = (1/6) ∫ u³ dξ` via the `O(K²)` resonant-triad sum
/// `2π Σ_n Re(û_n* Σ_{k<n} û_k û_{n-k})`.
pub fn h3(s: &Spectrum) -> f64 {
    h3_modes(&s.modes)
}

pub(crate) fn combine(p: &ModelParams, h2: f64, h3: f64) -> f64 {
    let k = p.cutoff as f64;
    p.beta_prime / (p.energy * k * k) * (h2 - p.nonlin_ratio * h3)
}

/// `β H_K = β' / (E0 K²) · (H2 - (C3/C2) H3)`.
pub fn beta_hamiltonian(p: &ModelParams, s: &Spectrum) -> f64 {
    combine(p, h2(s), h3(s))
}

/// Two-mode state `û_1 = R1 e^{iθ1}`, `û_2 = R2 e^{iθ2}` with
/// `(R1, R2) = sqrt(E0/2π) (cos φ, sin φ)`.
pub fn two_mode_spectrum(theta1: f64, theta2: f64, phi: f64, energy: f64) -> Spectrum {
    let (r1, r2) = two_mode_radii(phi, energy);
    Spectrum::new(vec![
        Complex64::from_polar(r1, theta1),
        Complex64::from_polar(r2, theta2),
    ])
}

fn two_mode_radii(phi: f64, energy: f64) -> (f64, f64) {
    let r = (energy / (2.0 * PI)).sqrt();
    (r * phi.cos(), r * phi.sin())
}

/// Closed form of `H2` for `K = 2`: `2π (R1² + 4 R2²)`.
pub fn h2_exact_2mode(_theta1: f64, _theta2: f64, phi: f64, energy: f64) -> f64 {
    let (r1, r2) = two_mode_radii(phi, energy);
    2.0 * PI * (r1 * r1 + 4.0 * r2 * r2)
}

/// Closed form of `H3` for `K = 2`: `2π R2 R1² cos(2θ1 - θ2)`.
pub fn h3_exact_2mode(theta1: f64, theta2: f64, phi: f64, energy: f64) -> f64 {
    let (r1, r2) = two_mode_radii(phi, energy);
    2.0 * PI * r2 * r1 * r1 * (2.0 * theta1 - theta2).cos()
}
