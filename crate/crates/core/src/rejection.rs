//! Rejection constant and the (serial or parallel) rejection loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::proposal::{ProposalParams, RatioEvaluator};
use crate::spectral::{dirichlet_kernel, euclidean_norm, project_to_sphere, ModelParams, SpherePoint};

/// Tolerance above `log M` before a proposal counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Which proposal feeds the rejection loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Projected anisotropic Gaussian.
    Improved,
    /// Spectrally uniform measure (projected standard Gaussian).
    Naive,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Improved => f.write_str("improved"),
            Mode::Naive => f.write_str("naive"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub simplex: NelderMeadOptions,
    /// Iteration cap per Nelder-Mead run is `iterations_per_mode · K`.
    pub iterations_per_mode: usize,
    /// Upper bound on fresh-simplex restarts from the incumbent best point.
    /// Restarting stops early once a converged run no longer improves.
    pub restarts: usize,
    /// Added to the optimized `log M`.
    pub safety_margin: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            simplex: NelderMeadOptions::default(),
            iterations_per_mode: 200,
            restarts: 20,
            safety_margin: 1e-12,
        }
    }
}

/// Everything the rejection loop needs, computed once and shared by workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectionSetup {
    pub params: ModelParams,
    pub proposal: ProposalParams,
    pub log_m: f64,
    pub argmax: SpherePoint,
    pub mode: Mode,
    /// Total Nelder-Mead iterations spent.
    pub iterations: usize,
}

impl RejectionSetup {
    fn evaluator(&self) -> RatioEvaluator {
        match self.mode {
            Mode::Improved => RatioEvaluator::new(self.params, Some(&self.proposal)),
            Mode::Naive => RatioEvaluator::new(self.params, None),
        }
    }

    /// Gaussian the candidates are drawn from before projection.
    pub fn sampling_distribution(&self) -> ProposalParams {
        match self.mode {
            Mode::Improved => self.proposal.clone(),
            Mode::Naive => ProposalParams::with_alpha(self.params.cutoff, 0.0, 1.0),
        }
    }

    /// Log acceptance ratio (before subtracting `log M`) at a sphere point.
    pub fn log_ratio(&self, x: &SpherePoint) -> f64 {
        self.evaluator().log_ratio(x.coords())
    }

    /// Acceptance probability `exp(log ratio - log M)`.
    pub fn acceptance_probability(&self, x: &SpherePoint) -> f64 {
        (self.log_ratio(x) - self.log_m).exp()
    }
}

/// Maximizes the log acceptance ratio over the sphere with the default
/// optimizer configuration.
pub fn find_rejection_constant(p: &ModelParams, pp: &ProposalParams, mode: Mode) -> Result<RejectionSetup> {
    find_rejection_constant_with(p, pp, mode, &OptimizerConfig::default(), None)
}

/// Maximizes the log acceptance ratio, seeding the simplex at `start` or at
/// the Dirichlet kernel.
///
/// The search runs over unconstrained `R^{2K}` with the projection inside
/// the objective.
pub fn find_rejection_constant_with(
    p: &ModelParams,
    pp: &ProposalParams,
    mode: Mode,
    cfg: &OptimizerConfig,
    start: Option<&SpherePoint>,
) -> Result<RejectionSetup> {
    if pp.cutoff != p.cutoff || pp.beta_prime != p.beta_prime {
        return Err(Error::InvalidParams(
            "proposal was built for different model parameters".into(),
        ));
    }
    let start = start.cloned().unwrap_or_else(|| dirichlet_kernel(p.cutoff));
    if start.cutoff() != p.cutoff {
        return Err(Error::InvalidParams("start point has the wrong dimension".into()));
    }
    let mut setup = RejectionSetup {
        params: *p,
        proposal: pp.clone(),
        log_m: 0.0,
        argmax: start,
        mode,
        iterations: 0,
    };
    // f ≡ g (improved) and f ≡ const (naive): the ratio is identically 1.
    if p.beta_prime == 0.0 {
        return Ok(setup);
    }

    let mut evaluator = setup.evaluator();
    let mut unit = vec![0.0; 2 * p.cutoff];
    let mut objective = |x: &[f64]| -> f64 {
        let norm = euclidean_norm(x);
        if norm == 0.0 || !norm.is_finite() {
            return f64::INFINITY;
        }
        for (u, v) in unit.iter_mut().zip(x) {
            *u = v / norm;
        }
        -evaluator.log_ratio(&unit)
    };

    let opts = NelderMeadOptions {
        max_iter: cfg.iterations_per_mode * p.cutoff,
        ..cfg.simplex
    };
    let mut x = setup.argmax.coords().to_vec();
    let mut best_value = objective(&x);
    let mut converged = false;
    for run in 0..=cfg.restarts {
        let r = nelder_mead::minimize(&mut objective, &x, &opts);
        setup.iterations += r.iterations;
        converged = r.converged;
        let gain = best_value - r.value;
        if r.value <= best_value {
            best_value = r.value;
            // Back onto the sphere so the fresh simplex has unit-scale steps.
            x = project_to_sphere(&r.x)?.into_coords();
        }
        if run >= 1 && converged && gain <= cfg.simplex.f_tol {
            break;
        }
    }
    if !converged {
        return Err(Error::Optimization {
            iterations: setup.iterations,
            best_value: -best_value,
            best_point: x,
        });
    }

    let argmax = project_to_sphere(&x)?;
    setup.log_m = setup.log_ratio(&argmax) + cfg.safety_margin;
    setup.argmax = argmax;
    Ok(setup)
}

/// Re-optimizes from a point that beat the current constant and keeps the
/// larger of the two maxima.
pub fn refine_rejection_constant(setup: &RejectionSetup, from: &SpherePoint) -> Result<RejectionSetup> {
    let cfg = OptimizerConfig::default();
    let refined = match find_rejection_constant_with(&setup.params, &setup.proposal, setup.mode, &cfg, Some(from)) {
        Ok(s) => s,
        Err(Error::Optimization { best_point, iterations, .. }) => {
            // Accept an unconverged polish: it can only raise the constant.
            let argmax = project_to_sphere(&best_point)?;
            let mut s = setup.clone();
            s.log_m = s.log_ratio(&argmax) + cfg.safety_margin;
            s.argmax = argmax;
            s.iterations = iterations;
            s
        }
        Err(e) => return Err(e),
    };
    let from_value = setup.log_ratio(from) + cfg.safety_margin;
    let mut out = if refined.log_m >= setup.log_m { refined } else { setup.clone() };
    if from_value > out.log_m {
        out.log_m = from_value;
        out.argmax = from.clone();
    }
    out.iterations += setup.iterations;
    Ok(out)
}

/// When to stop a rejection loop; whichever limit is hit first wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stop {
    pub target_accepts: Option<u64>,
    pub max_proposals: Option<u64>,
}

impl Stop {
    pub fn accepts(n: u64) -> Self {
        Self { target_accepts: Some(n), max_proposals: None }
    }

    pub fn proposals(n: u64) -> Self {
        Self { target_accepts: None, max_proposals: Some(n) }
    }

    pub fn either(accepts: u64, proposals: u64) -> Self {
        Self { target_accepts: Some(accepts), max_proposals: Some(proposals) }
    }

    fn validate(&self) -> Result<()> {
        if self.target_accepts.is_none() && self.max_proposals.is_none() {
            return Err(Error::InvalidParams(
                "a stop condition needs an accept target or a proposal budget".into(),
            ));
        }
        Ok(())
    }

    /// Share of this stop condition given to `worker` out of `workers`.
    pub fn split(&self, worker: usize, workers: usize) -> Stop {
        let share = |total: u64| {
            let w = workers as u64;
            total / w + u64::from((worker as u64) < total % w)
        };
        Stop {
            target_accepts: self.target_accepts.map(share),
            max_proposals: self.max_proposals.map(share),
        }
    }

    fn done(&self, accepted: u64, proposed: u64) -> bool {
        self.target_accepts.is_some_and(|t| accepted >= t)
            || self.max_proposals.is_some_and(|m| proposed >= m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub accepted: Vec<SpherePoint>,
    pub n_proposed: u64,
    pub n_accepted: u64,
    pub acceptance_rate: f64,
    pub seed: u64,
    /// Stream of the first contributing worker.
    pub worker_id: u64,
    /// Number of merged worker streams.
    pub workers: usize,
}

impl SampleBatch {
    fn new(accepted: Vec<SpherePoint>, n_proposed: u64, seed: u64, worker_id: u64) -> Self {
        let n_accepted = accepted.len() as u64;
        Self {
            accepted,
            n_proposed,
            n_accepted,
            acceptance_rate: rate(n_accepted, n_proposed),
            seed,
            worker_id,
            workers: 1,
        }
    }

    /// Concatenates batches in the given order; counts are order-independent.
    pub fn merge(batches: Vec<SampleBatch>) -> Result<SampleBatch> {
        let mut iter = batches.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::InsufficientData("no batches to merge".into()))?;
        for b in iter {
            out.accepted.extend(b.accepted);
            out.n_proposed += b.n_proposed;
            out.n_accepted += b.n_accepted;
            out.workers += b.workers;
            out.worker_id = out.worker_id.min(b.worker_id);
        }
        out.acceptance_rate = rate(out.n_accepted, out.n_proposed);
        Ok(out)
    }
}

fn rate(accepted: u64, proposed: u64) -> f64 {
    if proposed == 0 {
        0.0
    } else {
        accepted as f64 / proposed as f64
    }
}

/// Random stream for `worker_id`: ChaCha8 keyed by `seed`, stream = worker id.
pub fn worker_rng(seed: u64, worker_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker_id);
    rng
}

fn run_worker(setup: &RejectionSetup, stop: Stop, seed: u64, worker_id: u64) -> Result<SampleBatch> {
    let mut rng = worker_rng(seed, worker_id);
    let gaussian = setup.sampling_distribution();
    let mut evaluator = setup.evaluator();
    let dim = 2 * setup.params.cutoff;
    let mut raw = vec![0.0; dim];
    let mut unit = vec![0.0; dim];
    let mut accepted = Vec::new();
    let mut proposed = 0u64;

    while !stop.done(accepted.len() as u64, proposed) {
        gaussian.draw_gaussian(&mut rng, &mut raw);
        let norm = euclidean_norm(&raw);
        if norm == 0.0 {
            continue;
        }
        for (u, r) in unit.iter_mut().zip(&raw) {
            *u = r / norm;
        }
        proposed += 1;
        let log_ratio = evaluator.log_ratio(&unit);
        if log_ratio > setup.log_m + VIOLATION_TOL {
            return Err(Error::ConstantViolation {
                log_ratio,
                log_m: setup.log_m,
                point: unit,
            });
        }
        let u: f64 = rng.random();
        if u < (log_ratio - setup.log_m).exp() {
            accepted.push(SpherePoint::from_unit_unchecked(unit.clone()));
        }
    }
    Ok(SampleBatch::new(accepted, proposed, seed, worker_id))
}

/// Single-stream rejection loop (worker 0 of `seed`).
pub fn run_sampler(setup: &RejectionSetup, stop: Stop, seed: u64) -> Result<SampleBatch> {
    stop.validate()?;
    run_worker(setup, stop, seed, 0)
}

/// Runs `workers` independent loops on a dedicated thread pool and merges
/// them in worker order. With one worker this is exactly [`run_sampler`].
pub fn run_parallel(setup: &RejectionSetup, stop: Stop, seed: u64, workers: usize) -> Result<SampleBatch> {
    stop.validate()?;
    if workers == 0 {
        return Err(Error::InvalidParams("workers must be at least 1".into()));
    }
    if workers == 1 {
        return run_worker(setup, stop, seed, 0);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let batches: Vec<Result<SampleBatch>> = pool.install(|| {
        (0..workers)
            .into_par_iter()
            .map(|w| run_worker(setup, stop.split(w, workers), seed, w as u64))
            .collect()
    });
    let batches = batches.into_iter().collect::<Result<Vec<_>>>()?;
    SampleBatch::merge(batches)
}

/// Like [`run_parallel`], but on a constant violation re-optimizes from the
/// offending point and restarts the whole run with the new constant, up to
/// `max_refinements` times. Samples drawn under the old constant are
/// discarded.
pub fn run_with_refinement(
    setup: &RejectionSetup,
    stop: Stop,
    seed: u64,
    workers: usize,
    max_refinements: usize,
) -> Result<(RejectionSetup, SampleBatch)> {
    let mut setup = setup.clone();
    let mut refinements = 0;
    loop {
        match run_parallel(&setup, stop, seed, workers) {
            Ok(batch) => return Ok((setup, batch)),
            Err(Error::ConstantViolation { point, log_ratio, log_m }) => {
                if refinements == max_refinements {
                    return Err(Error::ConstantViolation { point, log_ratio, log_m });
                }
                refinements += 1;
                let from = SpherePoint::new(point)?;
                setup = refine_rejection_constant(&setup, &from)?;
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovementBudget {
    pub improved: Stop,
    pub naive: Stop,
    /// Naive accepts below this mark the factor as censored.
    pub min_naive_accepts: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub improved_rate: f64,
    pub naive_rate: f64,
    pub improved_accepts: u64,
    pub improved_proposals: u64,
    pub naive_accepts: u64,
    pub naive_proposals: u64,
    /// `improved_rate / naive_rate`.
    pub factor: f64,
    /// Too few naive accepts; with zero accepts the naive rate is replaced
    /// by its 95% upper bound `3/n` and `factor` is a lower bound.
    pub censored: bool,
    pub improved_log_m: f64,
    pub naive_log_m: f64,
}

/// Seed offset separating the naive stream family from the improved one.
const NAIVE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Ratio of improved to naive acceptance rates under identical parameters.
pub fn measure_improvement(p: &ModelParams, budget: &ImprovementBudget, seed: u64) -> Result<Improvement> {
    Ok(run_improvement(p, budget, seed)?.improvement)
}

/// Full record of an improvement measurement, including the improved
/// ensemble (useful for skewness) and both rejection setups.
#[derive(Debug, Clone)]
pub struct ImprovementRun {
    pub improvement: Improvement,
    pub improved_setup: RejectionSetup,
    pub naive_setup: RejectionSetup,
    pub improved_batch: SampleBatch,
}

pub fn run_improvement(p: &ModelParams, budget: &ImprovementBudget, seed: u64) -> Result<ImprovementRun> {
    let pp = ProposalParams::for_model(p)?;
    let improved = find_rejection_constant(p, &pp, Mode::Improved)?;
    let naive = find_rejection_constant(p, &pp, Mode::Naive)?;
    let (improved_setup, ib) = run_with_refinement(&improved, budget.improved, seed, budget.workers, 3)?;
    let (naive_setup, nb) = run_with_refinement(
        &naive,
        budget.naive,
        seed.wrapping_add(NAIVE_SEED_OFFSET),
        budget.workers,
        3,
    )?;
    let censored = nb.n_accepted < budget.min_naive_accepts;
    let naive_rate = if nb.n_accepted == 0 {
        3.0 / nb.n_proposed.max(1) as f64
    } else {
        nb.acceptance_rate
    };
    let improvement = Improvement {
        improved_rate: ib.acceptance_rate,
        naive_rate,
        improved_accepts: ib.n_accepted,
        improved_proposals: ib.n_proposed,
        naive_accepts: nb.n_accepted,
        naive_proposals: nb.n_proposed,
        factor: ib.acceptance_rate / naive_rate,
        censored,
        improved_log_m: improved_setup.log_m,
        naive_log_m: naive_setup.log_m,
    };
    Ok(ImprovementRun {
        improvement,
        improved_setup,
        naive_setup,
        improved_batch: ib,
    })
}
