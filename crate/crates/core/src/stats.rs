//! Ensemble post-processing: displacement moments, histograms, mean power
//! spectra and extreme-event extraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rejection::SampleBatch;
use crate::spectral::{dirichlet_peak, sphere_to_spectrum, spectrum_to_field, ModelParams, SpherePoint, WaveField};

pub const DEFAULT_BINS: usize = 81;

/// How the ensemble skewness is aggregated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkewnessConvention {
    /// Moments of all grid values of all fields pooled together.
    #[default]
    Pooled,
    /// Mean of the per-field skewness.
    PerField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Self {
        let w = (hi - lo) / bins as f64;
        Self {
            edges: (0..=bins).map(|i| lo + w * i as f64).collect(),
            counts: vec![0; bins],
        }
    }

    pub fn add(&mut self, v: f64) {
        let bins = self.counts.len();
        let lo = self.edges[0];
        let hi = self.edges[bins];
        let idx = ((v - lo) / (hi - lo) * bins as f64).floor();
        let idx = if idx.is_nan() { 0 } else { (idx.max(0.0) as usize).min(bins - 1) };
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub convention: SkewnessConvention,
    pub histogram: Histogram,
    /// Ensemble average of `|û_k|²`, `k = 1..K`.
    pub mean_power: Vec<f64>,
    pub n_samples: usize,
    pub n_grid: usize,
    /// `sqrt(E0/π)`.
    pub sigma_ref: f64,
    pub four_sigma: f64,
}

/// Central-moment summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        Self {
            mean,
            m2: m2 / n,
            m3: m3 / n,
            m4: m4 / n,
        }
    }

    /// Population skewness `m3 / m2^{3/2}`.
    pub fn skewness(&self) -> f64 {
        self.m3 / self.m2.powf(1.5)
    }

    /// `m4 / m2² - 3`.
    pub fn excess_kurtosis(&self) -> f64 {
        self.m4 / (self.m2 * self.m2) - 3.0
    }
}

pub fn skewness(values: &[f64]) -> f64 {
    Moments::of(values).skewness()
}

pub fn excess_kurtosis(values: &[f64]) -> f64 {
    Moments::of(values).excess_kurtosis()
}

/// Wave field of one sampled sphere point.
pub fn field_of(x: &SpherePoint, p: &ModelParams, n_grid: usize) -> Result<WaveField> {
    spectrum_to_field(&sphere_to_spectrum(x, p.energy), n_grid)
}

/// Pooled statistics of a batch (see [`ensemble_stats_of`]).
pub fn ensemble_stats(batch: &SampleBatch, p: &ModelParams, n_grid: usize, bins: usize) -> Result<EnsembleStats> {
    ensemble_stats_of(&batch.accepted, p, n_grid, bins, SkewnessConvention::Pooled)
}

/// Displacement statistics over all grid values of all fields.
///
/// The histogram spans `±(u_cap + 0.5)` with `u_cap` the Dirichlet-kernel
/// peak, so no displacement can fall outside it.
pub fn ensemble_stats_of(
    samples: &[SpherePoint],
    p: &ModelParams,
    n_grid: usize,
    bins: usize,
    convention: SkewnessConvention,
) -> Result<EnsembleStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ensemble statistics need at least 2 samples, got {}",
            samples.len()
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidParams("bins must be at least 1".into()));
    }
    let half_width = dirichlet_peak(p.cutoff, p.energy) + 0.5;
    let mut histogram = Histogram::uniform(-half_width, half_width, bins);
    let mut mean_power = vec![0.0; p.cutoff];
    let mut pooled = Vec::with_capacity(samples.len() * n_grid);
    let mut per_field_skew = Vec::new();

    for x in samples {
        let s = sphere_to_spectrum(x, p.energy);
        for (acc, u) in mean_power.iter_mut().zip(&s.modes) {
            *acc += u.norm_sqr();
        }
        let field = spectrum_to_field(&s, n_grid)?;
        for &u in &field.u {
            histogram.add(u);
        }
        if convention == SkewnessConvention::PerField {
            let m = Moments::of(&field.u);
            if m.m2 > 0.0 {
                per_field_skew.push(m.skewness());
            }
        }
        pooled.extend_from_slice(&field.u);
    }
    let n = samples.len() as f64;
    mean_power.iter_mut().for_each(|v| *v /= n);

    let moments = Moments::of(&pooled);
    let skewness = match convention {
        SkewnessConvention::Pooled => moments.skewness(),
        SkewnessConvention::PerField => per_field_skew.iter().sum::<f64>() / per_field_skew.len() as f64,
    };
    let sigma_ref = p.sigma_ref();
    Ok(EnsembleStats {
        skewness,
        excess_kurtosis: moments.excess_kurtosis(),
        convention,
        histogram,
        mean_power,
        n_samples: samples.len(),
        n_grid,
        sigma_ref,
        four_sigma: 4.0 * sigma_ref,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeEvent {
    pub field: WaveField,
    pub sample_index: usize,
    pub max_u: f64,
    /// Grid location of the maximum.
    pub xi_at_max: f64,
    /// `4 sqrt(E0/π)`.
    pub threshold: f64,
    pub exceeds_4sigma: bool,
    /// `100 (max_u / threshold - 1)`.
    pub exceedance_pct: f64,
    /// Largest displacement any field can reach (Dirichlet-kernel peak).
    pub cap: f64,
}

/// The accepted field with the largest grid displacement.
pub fn extreme_event(batch: &SampleBatch, p: &ModelParams, n_grid: usize) -> Result<ExtremeEvent> {
    extreme_event_of(&batch.accepted, p, n_grid)
}

pub fn extreme_event_of(samples: &[SpherePoint], p: &ModelParams, n_grid: usize) -> Result<ExtremeEvent> {
    let mut best: Option<(usize, WaveField, f64, f64)> = None;
    for (i, x) in samples.iter().enumerate() {
        let field = field_of(x, p, n_grid)?;
        let (m, at) = field.max();
        if best.as_ref().is_none_or(|b| m > b.2) {
            best = Some((i, field, m, at));
        }
    }
    let (sample_index, field, max_u, xi_at_max) =
        best.ok_or_else(|| Error::InsufficientData("no accepted samples".into()))?;
    let threshold = 4.0 * p.sigma_ref();
    Ok(ExtremeEvent {
        field,
        sample_index,
        max_u,
        xi_at_max,
        threshold,
        exceeds_4sigma: max_u > threshold,
        exceedance_pct: 100.0 * (max_u / threshold - 1.0),
        cap: dirichlet_peak(p.cutoff, p.energy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{project_to_sphere, spectrum_to_sphere, Spectrum};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn cosine_point(cutoff: usize, energy: f64) -> SpherePoint {
        let mut s = Spectrum::zeros(cutoff);
        s.modes[0] = Complex64::new((energy / (2.0 * PI)).sqrt(), 0.0);
        spectrum_to_sphere(&s, energy).unwrap()
    }

    #[test]
    fn symmetric_fields_have_zero_skewness() {
        let p = ModelParams::new(4, 1.0, 0.0, 0.0).unwrap();
        let samples = vec![cosine_point(4, 1.0); 3];
        let st = ensemble_stats_of(&samples, &p, 8, 11, SkewnessConvention::Pooled).unwrap();
        assert!(st.skewness.abs() < 1e-14);
        assert_eq!(st.histogram.total(), 3 * 8);
        assert!((st.mean_power[0] - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(st.mean_power[1..].iter().all(|&v| v == 0.0));
        assert!((st.four_sigma - 4.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reference_threshold_for_unit_energy() {
        let p = ModelParams::new(16, 1.0, 0.0, 0.0).unwrap();
        assert!((4.0 * p.sigma_ref() - 2.256758334191025).abs() < 1e-12);
    }

    #[test]
    fn skewness_translation_and_odd_scaling() {
        let v: Vec<f64> = (0..200).map(|i| ((i * i) % 17) as f64 * 0.3 - 1.0).collect();
        let s = skewness(&v);
        let shifted: Vec<f64> = v.iter().map(|x| x + 4.2).collect();
        assert!((skewness(&shifted) - s).abs() < 1e-12);
        for c in [2.5, -0.7] {
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            assert!((skewness(&scaled) - c.signum() * s).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples() {
        let p = ModelParams::new(4, 1.0, 0.0, 0.0).unwrap();
        let one = vec![cosine_point(4, 1.0)];
        assert!(matches!(
            ensemble_stats_of(&one, &p, 8, 11, SkewnessConvention::Pooled),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(extreme_event_of(&[], &p, 8), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn single_small_field_extreme() {
        let p = ModelParams::new(4, 1.0, 0.0, 0.0).unwrap();
        let x = project_to_sphere(&[1.0, 0.01, 0.0, 0.0, 0.0, 0.0, 0.02, 0.0]).unwrap();
        let ev = extreme_event_of(std::slice::from_ref(&x), &p, 8).unwrap();
        assert_eq!(ev.sample_index, 0);
        assert!(!ev.exceeds_4sigma);
        assert!(ev.max_u <= ev.cap);
        assert_eq!(ev.field, field_of(&x, &p, 8).unwrap());
    }

    #[test]
    fn extreme_picks_largest_peak() {
        let p = ModelParams::new(4, 1.0, 0.0, 0.0).unwrap();
        let samples = vec![cosine_point(4, 1.0), crate::spectral::dirichlet_kernel(4), cosine_point(4, 1.0)];
        let ev = extreme_event_of(&samples, &p, 8).unwrap();
        assert_eq!(ev.sample_index, 1);
        assert!((ev.max_u - ev.cap).abs() < 1e-12);
        assert_eq!(ev.xi_at_max, 0.0);
    }

    #[test]
    fn per_field_convention_on_identical_fields() {
        let p = ModelParams::new(4, 1.0, 0.0, 0.0).unwrap();
        let d = crate::spectral::dirichlet_kernel(4);
        let samples = vec![d.clone(), d];
        let pooled = ensemble_stats_of(&samples, &p, 8, 11, SkewnessConvention::Pooled).unwrap();
        let per = ensemble_stats_of(&samples, &p, 8, 11, SkewnessConvention::PerField).unwrap();
        assert!((pooled.skewness - per.skewness).abs() < 1e-12);
        assert!(pooled.skewness > 0.0);
    }
}
