use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use tkdv_core::rejection::run_improvement;
use tkdv_core::stats::{ensemble_stats_of, extreme_event_of};
use tkdv_core::{
    find_rejection_constant, h2, h2_exact_2mode, h3, h3_exact_2mode, run_parallel, run_with_refinement,
    two_mode_spectrum, worker_rng, Error, ImprovementBudget, Mode, ModelParams, ProposalParams, RejectionSetup,
    SampleBatch, SkewnessConvention, Stop,
};

use crate::output::{self, fmt_f64, SCHEMA_VERSION};
use crate::{BenchArgs, CliError, ExtremeArgs, Format, ModelArgs, ProposalKind, RunArgs, SampleArgs, SkewArg, SpeedupArgs, ValidateArgs};

/// Two-mode validation threshold on the absolute error.
pub const VALIDATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub schema_version: u32,
    pub command: &'static str,
    pub params: ModelParams,
    pub proposal: Mode,
    pub alpha_star: f64,
    pub log_m: f64,
    pub optimizer_iterations: usize,
    pub n_proposed: u64,
    pub n_accepted: u64,
    pub acceptance_rate: f64,
    pub seed: u64,
    pub workers: usize,
    pub n_grid: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Violation {
    schema_version: u32,
    log_ratio: f64,
    log_m: f64,
    point: Vec<f64>,
}

fn model(a: &ModelArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(a.cutoff, a.energy, a.beta_prime, a.nonlin_ratio)?)
}

fn proposal_of(params: &ModelParams, alpha: Option<f64>) -> Result<ProposalParams, CliError> {
    match alpha {
        Some(a) if a > 0.0 && a.is_finite() => Ok(ProposalParams::with_alpha(params.cutoff, params.beta_prime, a)),
        Some(a) => Err(CliError::Usage(format!("--alpha must be positive and finite, got {a}"))),
        None => Ok(ProposalParams::for_model(params)?),
    }
}

fn stop_of(run: &RunArgs, default_samples: Option<u64>) -> Result<Stop, CliError> {
    let stop = Stop {
        target_accepts: run.samples.or(default_samples),
        max_proposals: run.max_proposals,
    };
    if stop.target_accepts.is_none() && stop.max_proposals.is_none() {
        return Err(CliError::Usage("give --samples and/or --max-proposals".into()));
    }
    if run.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Ok(stop)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Precomputes the setup and runs the sampler; a constant violation is
/// dumped to `violation.json` before being reported.
fn sample_ensemble(
    params: &ModelParams,
    alpha: Option<f64>,
    mode: Mode,
    run: &RunArgs,
    stop: Stop,
) -> Result<(RejectionSetup, SampleBatch, f64), CliError> {
    let start = Instant::now();
    let pp = proposal_of(params, alpha)?;
    let setup = find_rejection_constant(params, &pp, mode)?;
    match run_with_refinement(&setup, stop, run.seed, run.workers, run.max_refinements) {
        Ok((setup, batch)) => Ok((setup, batch, start.elapsed().as_secs_f64())),
        Err(Error::ConstantViolation { log_ratio, log_m, point }) => {
            ensure_dir(&run.output)?;
            output::write_json(
                &run.output.join("violation.json"),
                &Violation { schema_version: SCHEMA_VERSION, log_ratio, log_m, point: point.clone() },
            )?;
            Err(Error::ConstantViolation { log_ratio, log_m, point }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn metadata(
    command: &'static str,
    setup: &RejectionSetup,
    batch: &SampleBatch,
    run: &RunArgs,
    n_grid: usize,
    wall_time_s: f64,
) -> RunMetadata {
    RunMetadata {
        schema_version: SCHEMA_VERSION,
        command,
        params: setup.params,
        proposal: setup.mode,
        alpha_star: setup.proposal.alpha_star,
        log_m: setup.log_m,
        optimizer_iterations: setup.iterations,
        n_proposed: batch.n_proposed,
        n_accepted: batch.n_accepted,
        acceptance_rate: batch.acceptance_rate,
        seed: run.seed,
        workers: run.workers,
        n_grid,
        wall_time_s,
    }
}

#[derive(Debug, Clone, Serialize)]
struct StatsFile<'a> {
    schema_version: u32,
    #[serde(flatten)]
    stats: &'a tkdv_core::EnsembleStats,
}

#[derive(Debug, Clone)]
pub struct SampleReport {
    pub metadata: RunMetadata,
    pub stats: tkdv_core::EnsembleStats,
    pub files: Vec<PathBuf>,
}

pub fn cmd_sample(args: &SampleArgs) -> Result<SampleReport, CliError> {
    let params = model(&args.model)?;
    let stop = stop_of(&args.run, None)?;
    let n_grid = args.run.n_grid.unwrap_or(2 * params.cutoff);
    if n_grid < 2 * params.cutoff {
        return Err(Error::Resolution { n_grid, modes: params.cutoff, required: 2 * params.cutoff }.into());
    }
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let mode = match args.proposal {
        ProposalKind::Improved => Mode::Improved,
        ProposalKind::Naive => Mode::Naive,
    };
    let convention = match args.skewness {
        SkewArg::Pooled => SkewnessConvention::Pooled,
        SkewArg::PerField => SkewnessConvention::PerField,
    };

    let (setup, batch, wall) = sample_ensemble(&params, args.model.alpha, mode, &args.run, stop)?;
    let out = &args.run.output;
    ensure_dir(out)?;
    let meta = metadata("sample", &setup, &batch, &args.run, n_grid, wall);
    let mut files = vec![out.join("metadata.json")];
    output::write_json(&files[0], &meta)?;

    let stats = ensemble_stats_of(&batch.accepted, &params, n_grid, args.bins, convention)?;
    let stats_path = out.join("stats.json");
    output::write_json(&stats_path, &StatsFile { schema_version: SCHEMA_VERSION, stats: &stats })?;
    files.push(stats_path);

    match args.run.format {
        Format::Csv => {
            let h = out.join("histogram.csv");
            output::write_histogram_csv(&h, &stats.histogram)?;
            let p = out.join("power_spectrum.csv");
            output::write_power_csv(&p, &stats.mean_power)?;
            files.extend([h, p]);
            if args.dump_spectra {
                let s = out.join("spectra.csv");
                output::write_spectra_csv(&s, &batch.accepted, params.energy)?;
                files.push(s);
            }
        }
        Format::Json => {
            let h = out.join("histogram.json");
            output::write_json(&h, &stats.histogram)?;
            let p = out.join("power_spectrum.json");
            output::write_json(&p, &stats.mean_power)?;
            files.extend([h, p]);
            if args.dump_spectra {
                let s = out.join("spectra.json");
                let spectra: Vec<_> = batch
                    .accepted
                    .iter()
                    .map(|x| tkdv_core::sphere_to_spectrum(x, params.energy))
                    .collect();
                output::write_json(&s, &spectra)?;
                files.push(s);
            }
        }
    }
    eprintln!(
        "accepted {} of {} proposals (rate {:.4e}), skewness {:.4}",
        batch.n_accepted, batch.n_proposed, batch.acceptance_rate, stats.skewness
    );
    Ok(SampleReport { metadata: meta, stats, files })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub beta_prime: f64,
    pub nonlin_ratio: f64,
    pub skewness: f64,
    pub improved_rate: f64,
    pub naive_rate: f64,
    pub improvement: f64,
    pub censored: bool,
    pub improved_accepts: u64,
    pub improved_proposals: u64,
    pub naive_accepts: u64,
    pub naive_proposals: u64,
}

pub const BENCH_HEADER: [&str; 11] = [
    "beta_prime",
    "nonlin_ratio",
    "skewness",
    "improved_rate",
    "naive_rate",
    "improvement",
    "censored",
    "improved_accepts",
    "improved_proposals",
    "naive_accepts",
    "naive_proposals",
];

pub fn parse_row(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("row {s:?} is not BETA:RATIO"));
    let (b, r) = s.trim().split_once(':').ok_or_else(bad)?;
    Ok((b.trim().parse().map_err(|_| bad())?, r.trim().parse().map_err(|_| bad())?))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let grid = args.rows.iter().map(|r| parse_row(r)).collect::<Result<Vec<_>, _>>()?;
    if args.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let budget = ImprovementBudget {
        improved: Stop {
            target_accepts: args.improved_samples,
            max_proposals: Some(args.improved_proposals),
        },
        naive: Stop::proposals(args.naive_proposals),
        min_naive_accepts: args.min_naive_accepts,
        workers: args.workers,
    };
    let mut rows = Vec::with_capacity(grid.len());
    for (beta_prime, nonlin_ratio) in grid {
        let params = ModelParams::new(args.cutoff, args.energy, beta_prime, nonlin_ratio)?;
        let run = run_improvement(&params, &budget, args.seed)?;
        let skewness = if run.improved_batch.accepted.len() >= 2 {
            let n_grid = 2 * params.cutoff;
            ensemble_stats_of(&run.improved_batch.accepted, &params, n_grid, 1, SkewnessConvention::Pooled)?.skewness
        } else {
            f64::NAN
        };
        let imp = run.improvement;
        let row = BenchRow {
            beta_prime,
            nonlin_ratio,
            skewness,
            improved_rate: imp.improved_rate,
            naive_rate: imp.naive_rate,
            improvement: imp.factor,
            censored: imp.censored,
            improved_accepts: imp.improved_accepts,
            improved_proposals: imp.improved_proposals,
            naive_accepts: imp.naive_accepts,
            naive_proposals: imp.naive_proposals,
        };
        eprintln!(
            "beta'={} C3/C2={}: skew {:.3} improved {:.3e} naive {:.3e} factor {:.3e}{}",
            beta_prime,
            nonlin_ratio,
            skewness,
            row.improved_rate,
            row.naive_rate,
            row.improvement,
            if row.censored { "*" } else { "" }
        );
        rows.push(row);
    }
    ensure_dir(&args.output)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.beta_prime),
                fmt_f64(r.nonlin_ratio),
                fmt_f64(r.skewness),
                fmt_f64(r.improved_rate),
                fmt_f64(r.naive_rate),
                fmt_f64(r.improvement),
                r.censored.to_string(),
                r.improved_accepts.to_string(),
                r.improved_proposals.to_string(),
                r.naive_accepts.to_string(),
                r.naive_proposals.to_string(),
            ]
        })
        .collect();
    output::write_table_csv(&args.output.join("bench.csv"), &BENCH_HEADER, &table)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedupRow {
    pub workers: usize,
    pub proposals: u64,
    pub wall_time_s: f64,
    /// Throughput relative to one worker.
    pub speedup: f64,
}

/// Proposal throughput of `run_parallel` at several worker counts, each
/// worker doing the same fixed amount of work.
pub fn measure_speedup(
    setup: &RejectionSetup,
    workers: &[usize],
    proposals_per_worker: u64,
    seed: u64,
) -> Result<Vec<SpeedupRow>, CliError> {
    let timed = |w: usize| -> Result<(u64, f64), CliError> {
        let total = proposals_per_worker * w as u64;
        let t = Instant::now();
        let batch = run_parallel(setup, Stop::proposals(total), seed, w)?;
        Ok((batch.n_proposed, t.elapsed().as_secs_f64()))
    };
    let (base_n, base_t) = timed(1)?;
    let base_throughput = base_n as f64 / base_t;
    let mut rows = Vec::new();
    for &w in workers {
        if w == 0 {
            return Err(CliError::Usage("worker counts must be at least 1".into()));
        }
        let (n, t) = if w == 1 { (base_n, base_t) } else { timed(w)? };
        rows.push(SpeedupRow {
            workers: w,
            proposals: n,
            wall_time_s: t,
            speedup: (n as f64 / t) / base_throughput,
        });
    }
    Ok(rows)
}

pub fn cmd_speedup(args: &SpeedupArgs) -> Result<Vec<SpeedupRow>, CliError> {
    let params = ModelParams::new(args.cutoff, args.energy, args.beta_prime, args.nonlin_ratio)?;
    let pp = ProposalParams::for_model(&params)?;
    let setup = find_rejection_constant(&params, &pp, Mode::Improved)?;
    let rows = measure_speedup(&setup, &args.workers, args.proposals_per_worker, args.seed)?;
    for r in &rows {
        eprintln!("workers {:>3}: {:.3} s, speedup {:.2}", r.workers, r.wall_time_s, r.speedup);
    }
    ensure_dir(&args.output)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.workers.to_string(), r.proposals.to_string(), fmt_f64(r.wall_time_s), fmt_f64(r.speedup)])
        .collect();
    output::write_table_csv(
        &args.output.join("speedup.csv"),
        &["workers", "proposals", "wall_time_s", "speedup"],
        &table,
    )?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub trials: usize,
    pub seed: u64,
    pub max_abs_err_h2: f64,
    pub max_abs_err_h3: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Two-mode check of the general `H2`/`H3` evaluation against the closed forms
/// over uniformly random angle triples.
pub fn two_mode_validation(trials: usize, seed: u64, energy: f64) -> ValidationReport {
    let mut rng = worker_rng(seed, 0);
    let (mut e2, mut e3) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let (t1, t2, phi) = (TAU * rng.random::<f64>(), TAU * rng.random::<f64>(), TAU * rng.random::<f64>());
        let s = two_mode_spectrum(t1, t2, phi, energy);
        e2 = e2.max((h2(&s) - h2_exact_2mode(t1, t2, phi, energy)).abs());
        e3 = e3.max((h3(&s) - h3_exact_2mode(t1, t2, phi, energy)).abs());
    }
    ValidationReport {
        schema_version: SCHEMA_VERSION,
        trials,
        seed,
        max_abs_err_h2: e2,
        max_abs_err_h3: e3,
        tolerance: VALIDATION_TOL,
        pass: e2 <= VALIDATION_TOL && e3 <= VALIDATION_TOL,
    }
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<ValidationReport, CliError> {
    if args.energy.is_nan() || args.energy <= 0.0 {
        return Err(CliError::Usage("--energy must be > 0".into()));
    }
    let report = two_mode_validation(args.trials, args.seed, args.energy);
    println!("{}", serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?);
    if !report.pass {
        return Err(CliError::Numerical(format!(
            "two-mode validation failed: max errors {:e} (H2), {:e} (H3)",
            report.max_abs_err_h2, report.max_abs_err_h3
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremeReport {
    pub schema_version: u32,
    pub run: RunMetadata,
    pub sample_index: usize,
    pub max_u: f64,
    pub xi_at_max: f64,
    pub threshold_4sigma: f64,
    pub exceeds_4sigma: bool,
    pub exceedance_pct: f64,
    pub cap: f64,
    pub fraction_of_cap: f64,
}

pub const DEFAULT_EXTREME_SAMPLES: u64 = 500;

pub fn cmd_extreme(args: &ExtremeArgs) -> Result<ExtremeReport, CliError> {
    let params = model(&args.model)?;
    let stop = stop_of(&args.run, Some(DEFAULT_EXTREME_SAMPLES))?;
    let n_grid = args.run.n_grid.unwrap_or(2 * params.cutoff);
    let (setup, batch, wall) = sample_ensemble(&params, args.model.alpha, Mode::Improved, &args.run, stop)?;
    let event = extreme_event_of(&batch.accepted, &params, n_grid)?;
    let report = ExtremeReport {
        schema_version: SCHEMA_VERSION,
        run: metadata("extreme", &setup, &batch, &args.run, n_grid, wall),
        sample_index: event.sample_index,
        max_u: event.max_u,
        xi_at_max: event.xi_at_max,
        threshold_4sigma: event.threshold,
        exceeds_4sigma: event.exceeds_4sigma,
        exceedance_pct: event.exceedance_pct,
        cap: event.cap,
        fraction_of_cap: event.max_u / event.cap,
    };
    let out = &args.run.output;
    ensure_dir(out)?;
    match args.run.format {
        Format::Csv => output::write_field_csv(&out.join("extreme_field.csv"), &event.field)?,
        Format::Json => output::write_json(&out.join("extreme_field.json"), &event.field)?,
    }
    output::write_json(&out.join("extreme.json"), &report)?;
    eprintln!(
        "max displacement {:.4} at xi = {:.4} ({:+.1}% vs 4 sigma = {:.4}; cap {:.4})",
        event.max_u, event.xi_at_max, event.exceedance_pct, event.threshold, event.cap
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_parsing() {
        assert_eq!(parse_row("20:60").unwrap(), (20.0, 60.0));
        assert_eq!(parse_row(" 40 : 0.5").unwrap(), (40.0, 0.5));
        assert!(matches!(parse_row("20"), Err(CliError::Usage(_))));
        assert!(matches!(parse_row("a:1"), Err(CliError::Usage(_))));
    }

    #[test]
    fn validation_passes() {
        let r = two_mode_validation(500, 3, 1.0);
        assert!(r.pass, "{r:?}");
    }
}
