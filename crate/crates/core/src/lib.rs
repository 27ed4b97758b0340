//! Exact sampling of the truncated KdV Gibbs measure.
//!
//! Wave fields with `K` Fourier modes and fixed energy `E0` are points on the
//! sphere `S^{2K-1}`. The target density is `f ∝ exp(-β H_K)`. Candidates are
//! proposed from a projected anisotropic Gaussian whose per-mode variances
//! already account for the dispersive part of the Hamiltonian, and accepted
//! with probability `f / (M g)`. The rejection constant `M` is found once by
//! Nelder-Mead, after which workers sample independently.
//!
//! ```
//! use tkdv_core::{find_rejection_constant, run_sampler, Mode, ModelParams, ProposalParams, Stop};
//!
//! let params = ModelParams::new(16, 1.0, 20.0, 0.0).unwrap();
//! let proposal = ProposalParams::for_model(&params).unwrap();
//! let setup = find_rejection_constant(&params, &proposal, Mode::Improved).unwrap();
//! let batch = run_sampler(&setup, Stop::accepts(10), 7).unwrap();
//! assert_eq!(batch.n_accepted, 10);
//! ```

pub mod error;
pub mod hamiltonian;
pub mod nelder_mead;
pub mod proposal;
pub mod rejection;
pub mod root;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use hamiltonian::{
    beta_hamiltonian, h2, h2_exact_2mode, h3, h3_exact_2mode, two_mode_spectrum, HamiltonianValue,
};
pub use proposal::{
    alpha_residual, alpha_residual_limit, log_g, log_ratio_f_over_g, sample_proposal, solve_alpha_star, ProposalParams,
};
pub use rejection::{
    find_rejection_constant, find_rejection_constant_with, measure_improvement,
    refine_rejection_constant, run_improvement, run_parallel, run_sampler, run_with_refinement, worker_rng,
    Improvement, ImprovementBudget, ImprovementRun, Mode, OptimizerConfig, RejectionSetup, SampleBatch, Stop,
};
pub use spectral::{
    dirichlet_kernel, dirichlet_peak, energy, project_to_sphere, sphere_to_spectrum,
    spectrum_to_field, spectrum_to_sphere, uniform_grid, ModelParams, SpherePoint, Spectrum,
    WaveField,
};
pub use stats::{ensemble_stats, extreme_event, EnsembleStats, ExtremeEvent, Histogram, SkewnessConvention};
