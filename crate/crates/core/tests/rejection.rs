mod common;

use std::f64::consts::{FRAC_PI_2, TAU};

use tkdv_core::{
    find_rejection_constant, project_to_sphere, run_parallel, run_sampler, run_with_refinement, sample_proposal,
    worker_rng, Error, Mode, ModelParams, ProposalParams, RejectionSetup, Stop,
};

fn setup(k: usize, beta: f64, ratio: f64, alpha: Option<f64>, mode: Mode) -> RejectionSetup {
    let p = ModelParams::new(k, 1.0, beta, ratio).unwrap();
    let pp = match alpha {
        Some(a) => ProposalParams::with_alpha(k, beta, a),
        None => ProposalParams::for_model(&p).unwrap(),
    };
    find_rejection_constant(&p, &pp, mode).unwrap()
}

/// Maximum of the two-mode log ratio on a dense grid. For `K = 2` the ratio
/// depends on `(θ1, θ2)` only through `ψ = 2θ1 - θ2`, so a 1000 × 1000 grid in
/// `(φ, ψ)` covers the sphere with 10⁶ points.
fn grid_max(beta: f64, ratio: f64, alpha: f64, mode: Mode) -> f64 {
    let n = 1000;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let phi = FRAC_PI_2 * i as f64 / n as f64;
        for j in 0..n {
            let psi = TAU * j as f64 / n as f64;
            let log_f = common::log_f_angles(phi, psi, psi, 1.0, beta, ratio);
            let v = match mode {
                Mode::Improved => log_f - common::log_g_angles(phi, alpha, beta),
                Mode::Naive => log_f,
            };
            best = best.max(v);
        }
    }
    best
}

#[test]
fn two_mode_constant_matches_grid_search() {
    // log_f_angles(φ, ψ, ψ) evaluates cos(2ψ - ψ) = cos ψ.
    let cases = [
        (4.0, 0.0, None, Mode::Improved),
        (4.0, 60.0, None, Mode::Improved),
        (20.0, 0.0, Some(1.0), Mode::Improved),
        (20.0, 60.0, Some(1.0), Mode::Improved),
        (20.0, 60.0, Some(1.0), Mode::Naive),
    ];
    for (beta, ratio, alpha, mode) in cases {
        let s = setup(2, beta, ratio, alpha, mode);
        let oracle = grid_max(beta, ratio, s.proposal.alpha_star, mode);
        assert!(s.log_m >= oracle - 1e-9, "beta={beta} C={ratio} {mode}: {} < {oracle}", s.log_m);
        assert!((s.log_m - oracle).abs() < 1e-3, "beta={beta} C={ratio} {mode}: {} vs {oracle}", s.log_m);
    }
}

#[test]
fn sampler_is_deterministic() {
    let s = setup(8, 20.0, 30.0, None, Mode::Improved);
    let a = run_sampler(&s, Stop::either(200, 100_000), 42).unwrap();
    let b = run_sampler(&s, Stop::either(200, 100_000), 42).unwrap();
    assert_eq!(a.n_proposed, b.n_proposed);
    assert_eq!(a.accepted, b.accepted);
    let c = run_sampler(&s, Stop::either(200, 100_000), 43).unwrap();
    assert_ne!(a.accepted, c.accepted);
}

#[test]
fn one_worker_equals_the_serial_loop() {
    let s = setup(16, 40.0, 0.0, None, Mode::Improved);
    for stop in [Stop::accepts(300), Stop::proposals(1000)] {
        let serial = run_sampler(&s, stop, 9).unwrap();
        let parallel = run_parallel(&s, stop, 9, 1).unwrap();
        assert_eq!(serial.accepted, parallel.accepted);
        assert_eq!(serial.n_proposed, parallel.n_proposed);
    }
}

#[test]
fn worker_counts_add_up() {
    let s = setup(16, 20.0, 0.0, None, Mode::Improved);
    let batch = run_parallel(&s, Stop::proposals(10_001), 3, 8).unwrap();
    assert_eq!(batch.n_proposed, 10_001);
    assert_eq!(batch.n_accepted, batch.accepted.len() as u64);
    assert_eq!(batch.workers, 8);
    assert!((batch.acceptance_rate - batch.n_accepted as f64 / 10_001.0).abs() < 1e-15);

    let accepts = run_parallel(&s, Stop::accepts(1001), 3, 8).unwrap();
    assert_eq!(accepts.n_accepted, 1001);
    // Same seed and worker count, same merged output.
    let again = run_parallel(&s, Stop::accepts(1001), 3, 8).unwrap();
    assert_eq!(accepts.accepted, again.accepted);
}

#[test]
fn worker_streams_differ() {
    use rand::Rng;
    let draw = |worker| {
        let mut r = worker_rng(1, worker);
        (0..4).map(|_| r.random()).collect::<Vec<u64>>()
    };
    assert_eq!(draw(0), draw(0));
    assert_ne!(draw(0), draw(1));
}

#[test]
fn constant_bounds_every_proposal() {
    for (beta, ratio) in [(20.0, 0.0), (40.0, 60.0)] {
        for mode in [Mode::Improved, Mode::Naive] {
            let s = setup(16, beta, ratio, None, mode);
            let g = s.sampling_distribution();
            let mut rng = worker_rng(17, 0);
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..100_000 {
                let x = sample_proposal(&g, &mut rng);
                worst = worst.max(s.log_ratio(&x));
            }
            assert!(worst <= s.log_m + 1e-9, "beta={beta} C={ratio} {mode}: {worst} > {}", s.log_m);
        }
    }
}

#[test]
fn understated_constant_is_refined() {
    let mut s = setup(8, 20.0, 0.0, None, Mode::Improved);
    let honest = s.log_m;
    s.log_m -= 0.05;
    match run_sampler(&s, Stop::proposals(200_000), 1) {
        Err(Error::ConstantViolation { log_ratio, log_m, point }) => {
            assert!(log_ratio > log_m);
            assert!(project_to_sphere(&point).is_ok());
        }
        other => panic!("expected a violation, got {other:?}"),
    }
    let (fixed, batch) = run_with_refinement(&s, Stop::proposals(200_000), 1, 1, 3).unwrap();
    assert!(fixed.log_m >= honest - 1e-9);
    assert_eq!(batch.n_proposed, 200_000);
}

#[test]
fn zero_beta_accepts_everything_in_both_modes() {
    for mode in [Mode::Improved, Mode::Naive] {
        let s = setup(16, 0.0, 60.0, None, mode);
        assert_eq!(s.log_m, 0.0);
        let batch = run_sampler(&s, Stop::proposals(5000), 2).unwrap();
        assert_eq!(batch.n_accepted, 5000);
    }
}
