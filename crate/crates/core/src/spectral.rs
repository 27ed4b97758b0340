//! Spectral state of a truncated wave field.
//!
//! A microstate is a unit vector `x̂ ∈ S^{2K-1}`. The first `K` coordinates
//! carry the real parts and the last `K` the (negated) imaginary parts of the
//! Fourier modes `û_1..û_K`, scaled so that every point on the sphere has the
//! same energy `E0`. Negative modes are the complex conjugates and are never
//! stored; `û_0 = 0` (zero momentum).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm deviation accepted without touching the input.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Norm deviation that is silently re-normalized on construction.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// The four control parameters of the target measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cutoff wavenumber `K`.
    pub cutoff: usize,
    /// Total energy `E0`.
    pub energy: f64,
    /// Normalized inverse temperature `β' = E0 C2 K² β`.
    pub beta_prime: f64,
    /// Nonlinearity-to-dispersion ratio `C3/C2`.
    pub nonlin_ratio: f64,
}

impl ModelParams {
    pub fn new(cutoff: usize, energy: f64, beta_prime: f64, nonlin_ratio: f64) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParams("cutoff K must be at least 1".into()));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidParams(format!("energy must be > 0, got {energy}")));
        }
        if !(beta_prime >= 0.0 && beta_prime.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "beta_prime must be >= 0, got {beta_prime}"
            )));
        }
        if !(nonlin_ratio >= 0.0 && nonlin_ratio.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "nonlin_ratio must be >= 0, got {nonlin_ratio}"
            )));
        }
        Ok(Self {
            cutoff,
            energy,
            beta_prime,
            nonlin_ratio,
        })
    }

    /// Reference standard deviation of the surface displacement, `sqrt(E0/π)`.
    pub fn sigma_ref(&self) -> f64 {
        (self.energy / PI).sqrt()
    }
}

/// A point on the unit hypersphere `S^{2K-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wraps a vector that should already be unit-norm.
    ///
    /// Inputs within [`RENORMALIZE_TOL`] of unit norm are re-normalized;
    /// anything further off is rejected.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = euclidean_norm(&coords);
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidState {
                norm,
                len: coords.len(),
            });
        }
        let dev = (norm - 1.0).abs();
        if dev <= UNIT_NORM_TOL {
            return Ok(Self { coords });
        }
        if dev <= RENORMALIZE_TOL {
            return Ok(Self {
                coords: coords.iter().map(|c| c / norm).collect(),
            });
        }
        Err(Error::InvalidState {
            norm,
            len: coords.len(),
        })
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// The cutoff `K`, i.e. half the ambient dimension.
    pub fn cutoff(&self) -> usize {
        self.coords.len() / 2
    }

    /// Per-mode weights `x̂_k² + x̂_{K+k}²`, `k = 1..K`.
    pub fn mode_weights(&self) -> Vec<f64> {
        let k = self.cutoff();
        (0..k)
            .map(|i| self.coords[i] * self.coords[i] + self.coords[k + i] * self.coords[k + i])
            .collect()
    }
}

/// Fourier modes `û_1..û_K` of a real, zero-mean wave field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub modes: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(modes: Vec<Complex64>) -> Self {
        Self { modes }
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self {
            modes: vec![Complex64::new(0.0, 0.0); cutoff],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.modes.len()
    }

    /// Mode `k` (1-based).
    pub fn mode(&self, k: usize) -> Complex64 {
        self.modes[k - 1]
    }

    /// Cosine and sine amplitudes `(a_k, b_k)` with `a_k = 2 Re û_k`, `b_k = -2 Im û_k`.
    pub fn real_amplitudes(&self) -> (Vec<f64>, Vec<f64>) {
        self.modes
            .iter()
            .map(|u| (2.0 * u.re, -2.0 * u.im))
            .unzip()
    }

    /// Energy `2π Σ |û_k|²`.
    pub fn energy(&self) -> f64 {
        energy(self)
    }
}

impl std::ops::Neg for Spectrum {
    type Output = Spectrum;

    fn neg(self) -> Spectrum {
        Spectrum {
            modes: self.modes.into_iter().map(|u| -u).collect(),
        }
    }
}

/// Surface displacement sampled on a uniform periodic grid over `[-π, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
}

impl WaveField {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Largest displacement and the grid location where it occurs.
    pub fn max(&self) -> (f64, f64) {
        self.xi
            .iter()
            .zip(&self.u)
            .fold((f64::NEG_INFINITY, f64::NAN), |best, (&x, &u)| {
                if u > best.0 {
                    (u, x)
                } else {
                    best
                }
            })
    }

    pub fn mean(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }
}

pub(crate) fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Writes `û_k = sqrt(E0/2π) (x̂_k - i x̂_{K+k})` into `out`.
pub(crate) fn fill_modes(coords: &[f64], energy: f64, out: &mut [Complex64]) {
    let k = out.len();
    let scale = (energy / (2.0 * PI)).sqrt();
    for (i, m) in out.iter_mut().enumerate() {
        *m = Complex64::new(scale * coords[i], -scale * coords[k + i]);
    }
}

/// Maps a sphere point to the spectrum of the microstate it represents.
pub fn sphere_to_spectrum(x: &SpherePoint, energy: f64) -> Spectrum {
    let mut modes = vec![Complex64::new(0.0, 0.0); x.cutoff()];
    fill_modes(x.coords(), energy, &mut modes);
    Spectrum { modes }
}

/// Inverse of [`sphere_to_spectrum`]; fails unless `energy(s) == energy`.
pub fn spectrum_to_sphere(s: &Spectrum, energy: f64) -> Result<SpherePoint> {
    let k = s.cutoff();
    let scale = (2.0 * PI / energy).sqrt();
    let mut coords = vec![0.0; 2 * k];
    for (i, u) in s.modes.iter().enumerate() {
        coords[i] = scale * u.re;
        coords[k + i] = -scale * u.im;
    }
    SpherePoint::new(coords)
}

/// `2π Σ_{k=1}^{K} |û_k|²`.
pub fn energy(s: &Spectrum) -> f64 {
    2.0 * PI * s.modes.iter().map(|u| u.norm_sqr()).sum::<f64>()
}

/// Uniform grid `ξ_j = -π + 2πj/n`, `j = 0..n-1`.
pub fn uniform_grid(n_grid: usize) -> Vec<f64> {
    let h = 2.0 * PI / n_grid as f64;
    (0..n_grid).map(|j| -PI + h * j as f64).collect()
}

/// Reconstructs `u(ξ) = Σ a_k cos(kξ) + b_k sin(kξ)` on `n_grid` points.
pub fn spectrum_to_field(s: &Spectrum, n_grid: usize) -> Result<WaveField> {
    let k = s.cutoff();
    if n_grid < 2 * k || n_grid == 0 {
        return Err(Error::Resolution {
            n_grid,
            modes: k,
            required: (2 * k).max(1),
        });
    }
    let xi = uniform_grid(n_grid);
    let (a, b) = s.real_amplitudes();
    let u = xi
        .iter()
        .map(|&x| {
            a.iter()
                .zip(&b)
                .enumerate()
                .map(|(i, (ak, bk))| {
                    let (sin, cos) = ((i + 1) as f64 * x).sin_cos();
                    ak * cos + bk * sin
                })
                .sum()
        })
        .collect();
    Ok(WaveField { xi, u })
}

/// Normalizes `x` onto the unit sphere.
pub fn project_to_sphere(x: &[f64]) -> Result<SpherePoint> {
    let norm = euclidean_norm(x);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate);
    }
    if x.is_empty() || !x.len().is_multiple_of(2) {
        return Err(Error::InvalidState { norm, len: x.len() });
    }
    Ok(SpherePoint {
        coords: x.iter().map(|v| v / norm).collect(),
    })
}

/// Zero-mean Dirichlet kernel peaked at `ξ = 0`: constant real spectrum
/// `û_k = sqrt(E0 / 2πK)`. As a sphere point it does not depend on `E0`.
pub fn dirichlet_kernel(cutoff: usize) -> SpherePoint {
    let c = 1.0 / (cutoff as f64).sqrt();
    let mut coords = vec![0.0; 2 * cutoff];
    coords[..cutoff].fill(c);
    SpherePoint { coords }
}

/// Closed-form peak of the Dirichlet kernel, `Σ a_k = sqrt(2 E0 K / π)`.
///
/// This is the largest displacement any field with `K` modes and energy
/// `E0` can reach.
pub fn dirichlet_peak(cutoff: usize, energy: f64) -> f64 {
    (2.0 * energy * cutoff as f64 / PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_axis_maps_to_unit_first_mode() {
        let mut coords = vec![0.0; 8];
        coords[0] = 1.0;
        let s = sphere_to_spectrum(&SpherePoint::new(coords).unwrap(), 2.0 * PI);
        assert!((s.mode(1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.modes[1..].iter().all(|u| u.norm() == 0.0));
    }

    #[test]
    fn last_axis_maps_to_negative_imaginary_top_mode() {
        let mut coords = vec![0.0; 8];
        coords[7] = 1.0;
        let s = sphere_to_spectrum(&SpherePoint::new(coords).unwrap(), 2.0 * PI);
        assert!((s.mode(4) - c(0.0, -1.0)).norm() < 1e-15);
        assert!(s.modes[..3].iter().all(|u| u.norm() == 0.0));
    }

    #[test]
    fn energy_of_simple_spectra() {
        let mut s = Spectrum::zeros(5);
        assert_eq!(energy(&s), 0.0);
        s.modes[0] = c(1.0, 0.0);
        assert!((energy(&s) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn pure_cosine_on_four_points() {
        let s = Spectrum::new(vec![c(0.5, 0.0)]);
        let f = spectrum_to_field(&s, 4).unwrap();
        let expected_xi = [-PI, -PI / 2.0, 0.0, PI / 2.0];
        let expected_u = [-1.0, 0.0, 1.0, 0.0];
        for j in 0..4 {
            assert!((f.xi[j] - expected_xi[j]).abs() < 1e-15);
            assert!((f.u[j] - expected_u[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_spectrum_gives_flat_field() {
        let f = spectrum_to_field(&Spectrum::zeros(6), 12).unwrap();
        assert!(f.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let err = spectrum_to_field(&Spectrum::zeros(6), 11).unwrap_err();
        assert!(matches!(err, Error::Resolution { required: 12, .. }));
    }

    #[test]
    fn projection_examples() {
        let p = project_to_sphere(&[3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.coords(), &[0.6, 0.8, 0.0, 0.0]);
        let again = project_to_sphere(p.coords()).unwrap();
        assert_eq!(again.coords(), p.coords());
        assert!(matches!(
            project_to_sphere(&[0.0; 4]),
            Err(Error::Degenerate)
        ));
    }

    #[test]
    fn dirichlet_kernel_coordinates() {
        assert_eq!(dirichlet_kernel(1).coords(), &[1.0, 0.0]);
        let d = dirichlet_kernel(16);
        assert!(d.coords()[..16].iter().all(|&v| v == 0.25));
        assert!(d.coords()[16..].iter().all(|&v| v == 0.0));
        for k in [1, 3, 16, 33] {
            let s = sphere_to_spectrum(&dirichlet_kernel(k), 1.0);
            assert!((energy(&s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dirichlet_peak_matches_grid_maximum() {
        // Direct summation of a_k at ξ = 0 on a fine grid.
        for k in [16usize, 32] {
            let s = sphere_to_spectrum(&dirichlet_kernel(k), 1.0);
            let f = spectrum_to_field(&s, 64 * k).unwrap();
            let (grid_max, at) = f.max();
            assert!(at.abs() < 1e-12);
            assert!((grid_max - dirichlet_peak(k, 1.0)).abs() < 1e-12);
        }
        assert!((dirichlet_peak(16, 1.0) - 3.191538243211461).abs() < 1e-12);
        assert!((dirichlet_peak(32, 1.0) - 4.513516668382884).abs() < 1e-12);
    }

    #[test]
    fn sphere_point_validation() {
        assert!(SpherePoint::new(vec![1.0, 0.0, 0.0]).is_err());
        assert!(SpherePoint::new(vec![1.1, 0.0]).is_err());
        let near = SpherePoint::new(vec![1.0 + 5e-10, 0.0]).unwrap();
        assert_eq!(near.coords()[0], 1.0);
    }

    #[test]
    fn spectrum_sphere_round_trip() {
        let x = project_to_sphere(&[0.3, -1.2, 0.7, 0.1, 2.0, -0.4]).unwrap();
        let s = sphere_to_spectrum(&x, 3.5);
        let back = spectrum_to_sphere(&s, 3.5).unwrap();
        for (a, b) in back.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
