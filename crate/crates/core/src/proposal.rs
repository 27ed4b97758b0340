//! Anisotropic Gaussian proposal.
//!
//! Candidates are drawn from a centered Gaussian on `R^{2K}` whose variance
//! for both the cosine and sine slot of mode `k` is
//! `σ_k² = 1 / (1 + α* β' k² / K³)`, then projected onto the sphere. The
//! self-consistency constant `α*` is the root of [`alpha_residual`]. All
//! densities are handled in log space and only up to additive constants.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{combine, h2_modes, h3_modes};
use crate::root::bracketed_root;
use crate::spectral::{fill_modes, euclidean_norm, ModelParams, SpherePoint};

/// Residual tolerance for `α*`.
pub const ALPHA_TOL: f64 = 1e-12;

/// `F(α) = 1 - (α/K) Σ_{k=1}^{K} 1 / (1 + α β' k² / K³)`.
pub fn alpha_residual(alpha: f64, cutoff: usize, beta_prime: f64) -> f64 {
    let k3 = (cutoff as f64).powi(3);
    let sum: f64 = (1..=cutoff)
        .map(|k| {
            let k = k as f64;
            1.0 / (1.0 + alpha * beta_prime * k * k / k3)
        })
        .sum();
    1.0 - alpha / cutoff as f64 * sum
}

/// `lim_{α→∞} F(α) = 1 - K² Σ_{k=1}^{K} k⁻² / β'`.
///
/// Non-negative for small `K` or very large `β'` (e.g. `K = 2`, `β' ≥ 5`),
/// where [`solve_alpha_star`] has no root to find.
pub fn alpha_residual_limit(cutoff: usize, beta_prime: f64) -> f64 {
    if beta_prime == 0.0 {
        return 1.0;
    }
    let k = cutoff as f64;
    let zeta: f64 = (1..=cutoff).map(|j| 1.0 / (j * j) as f64).sum();
    1.0 - k * k * zeta / beta_prime
}

/// Root `α*` of [`alpha_residual`].
///
/// `F` decreases strictly from `F(0) = 1` towards [`alpha_residual_limit`],
/// so a root exists only when that limit is negative. It is bracketed by
/// doubling from `α = 1` until `F < 0`.
pub fn solve_alpha_star(cutoff: usize, beta_prime: f64) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::InvalidParams("cutoff K must be at least 1".into()));
    }
    if !(beta_prime >= 0.0 && beta_prime.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "beta_prime must be >= 0, got {beta_prime}"
        )));
    }
    if beta_prime == 0.0 {
        return Ok(1.0);
    }
    if alpha_residual_limit(cutoff, beta_prime) >= 0.0 {
        return Err(Error::Bracket { upper: f64::INFINITY });
    }
    let f = |a: f64| alpha_residual(a, cutoff, beta_prime);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) >= 0.0 {
        if f(hi) == 0.0 {
            return Ok(hi);
        }
        lo = hi;
        hi *= 2.0;
        if hi > 2f64.powi(64) {
            return Err(Error::Bracket { upper: hi });
        }
    }
    let r = bracketed_root(f, lo, hi, ALPHA_TOL, 500);
    if r.value.abs() > ALPHA_TOL {
        return Err(Error::Bracket { upper: hi });
    }
    Ok(r.root)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalParams {
    pub alpha_star: f64,
    /// `σ_1..σ_K`.
    pub sigmas: Vec<f64>,
    pub cutoff: usize,
    pub beta_prime: f64,
}

impl ProposalParams {
    pub fn new(cutoff: usize, beta_prime: f64) -> Result<Self> {
        let alpha_star = solve_alpha_star(cutoff, beta_prime)?;
        Ok(Self::with_alpha(cutoff, beta_prime, alpha_star))
    }

    pub fn for_model(p: &ModelParams) -> Result<Self> {
        Self::new(p.cutoff, p.beta_prime)
    }

    /// Builds the proposal for an explicit `α` (not necessarily the root).
    pub fn with_alpha(cutoff: usize, beta_prime: f64, alpha: f64) -> Self {
        let k3 = (cutoff as f64).powi(3);
        let sigmas = (1..=cutoff)
            .map(|k| {
                let k = k as f64;
                (1.0 / (1.0 + alpha * beta_prime * k * k / k3)).sqrt()
            })
            .collect();
        Self {
            alpha_star: alpha,
            sigmas,
            cutoff,
            beta_prime,
        }
    }

    /// `α* β' / K³`, the coefficient in front of `Σ k² (x̂_k² + x̂_{K+k}²)`.
    pub fn spectral_coefficient(&self) -> f64 {
        self.alpha_star * self.beta_prime / (self.cutoff as f64).powi(3)
    }

    /// Draws an unprojected Gaussian vector into `out` (length `2K`).
    pub fn draw_gaussian<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let k = self.cutoff;
        for (i, sigma) in self.sigmas.iter().enumerate() {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            out[i] = sigma * a;
            out[k + i] = sigma * b;
        }
    }
}

/// `Σ_{k=1}^{K} k² (x_k² + x_{K+k}²)`.
pub(crate) fn weighted_mode_sum(coords: &[f64]) -> f64 {
    let k = coords.len() / 2;
    (0..k)
        .map(|i| {
            let w = ((i + 1) * (i + 1)) as f64;
            w * (coords[i] * coords[i] + coords[k + i] * coords[k + i])
        })
        .sum()
}

/// Draws one point from the projected anisotropic Gaussian.
pub fn sample_proposal<R: Rng + ?Sized>(pp: &ProposalParams, rng: &mut R) -> SpherePoint {
    let mut buf = vec![0.0; 2 * pp.cutoff];
    loop {
        pp.draw_gaussian(rng, &mut buf);
        let norm = euclidean_norm(&buf);
        if norm > 0.0 {
            buf.iter_mut().for_each(|v| *v /= norm);
            return SpherePoint::from_unit_unchecked(buf);
        }
    }
}

/// `log g(x̂)` up to an additive constant:
/// `-K log(1 + (α* β'/K³) Σ k² (x̂_k² + x̂_{K+k}²))`.
pub fn log_g(x: &SpherePoint, pp: &ProposalParams) -> f64 {
    -(pp.cutoff as f64) * (pp.spectral_coefficient() * weighted_mode_sum(x.coords())).ln_1p()
}

/// `log(f/g)` up to an additive constant.
pub fn log_ratio_f_over_g(x: &SpherePoint, p: &ModelParams, pp: &ProposalParams) -> f64 {
    RatioEvaluator::new(*p, Some(pp)).log_ratio(x.coords())
}

/// Reusable evaluator of the log acceptance ratio on unit vectors.
///
/// With a proposal this is `log f - log g`; without one (the spectrally
/// uniform proposal) it is just `log f = -β H_K`.
#[derive(Debug, Clone)]
pub(crate) struct RatioEvaluator {
    params: ModelParams,
    coefficient: Option<f64>,
    modes: Vec<Complex64>,
}

impl RatioEvaluator {
    pub(crate) fn new(params: ModelParams, proposal: Option<&ProposalParams>) -> Self {
        Self {
            params,
            coefficient: proposal.map(ProposalParams::spectral_coefficient),
            modes: vec![Complex64::new(0.0, 0.0); params.cutoff],
        }
    }

    /// Log ratio at a unit vector.
    pub(crate) fn log_ratio(&mut self, unit: &[f64]) -> f64 {
        let neg_beta_h = -self.beta_h(unit);
        match self.coefficient {
            Some(c) => {
                let k = self.params.cutoff as f64;
                neg_beta_h + k * (c * weighted_mode_sum(unit)).ln_1p()
            }
            None => neg_beta_h,
        }
    }

    fn beta_h(&mut self, unit: &[f64]) -> f64 {
        fill_modes(unit, self.params.energy, &mut self.modes);
        let h2 = h2_modes(&self.modes);
        let h3 = if self.params.nonlin_ratio == 0.0 {
            0.0
        } else {
            h3_modes(&self.modes)
        };
        combine(&self.params, h2, h3)
    }
}
