use exec_kernel::closed_form;
use exec_kernel::grid::{uniform_grid, GridTrajectory};
use exec_kernel::model::{DriftSpec, ExecutionProblem, KernelSpec, MarketParams};
use exec_kernel::montecarlo::{
    analytic_moments, analytic_moments_with, simulate, simulate_with, SimulationSetup,
};
use exec_kernel::oracle::solve_grid_kernel;

fn market(sigma: f64) -> MarketParams {
    MarketParams::new(1.0, sigma, 1.0, 1.0).unwrap()
}

fn problem(sigma: f64, drift: DriftSpec, kernel: KernelSpec) -> ExecutionProblem {
    ExecutionProblem::new(1.0, 0.0, 1.0, market(sigma), drift, kernel, 1.0).unwrap()
}

fn optimum(p: &ExecutionProblem, n: usize) -> GridTrajectory {
    closed_form::solve(p)
        .unwrap()
        .sample(&uniform_grid(p.horizon, n))
        .unwrap()
}

#[test]
fn mean_lands_within_three_standard_errors_in_repeated_experiments() {
    let p = problem(
        0.3,
        DriftSpec::ExpDecay {
            alpha0: 0.2,
            gamma: 2.0,
        },
        KernelSpec::DiracDelta,
    );
    let traj = optimum(&p, 100);
    let expected = analytic_moments(&traj, &p).unwrap().expected_pnl;
    let hits = (0..100u64)
        .filter(|&seed| {
            let s = simulate(&p, &traj, 10_000, seed, 0.01).unwrap();
            (s.mean_pnl - expected).abs() <= 3.0 * s.std_error_mean
        })
        .count();
    assert!(hits >= 99, "{hits}/100 experiments within 3 SE");
}

#[test]
fn variance_matches_for_static_and_linear_holdings() {
    let p = problem(0.3, DriftSpec::Zero, KernelSpec::DiracDelta);
    let times = uniform_grid(1.0, 200);
    let setup = SimulationSetup::from(&p);
    for traj in [
        GridTrajectory::from_fn(times.clone(), |_| 1.0).unwrap(),
        GridTrajectory::from_fn(times.clone(), |t| 1.0 - t).unwrap(),
    ] {
        let want = analytic_moments_with(&setup, &traj).unwrap().pnl_variance;
        let s = simulate_with(&setup, &traj, 100_000, 11, 0.005).unwrap();
        assert!(
            (s.var_pnl / want - 1.0).abs() < 0.05,
            "{} vs {want}",
            s.var_pnl
        );
        assert_eq!(s.std_error_mean, (s.var_pnl / s.n_paths as f64).sqrt());
    }
}

#[test]
fn block_trades_are_charged_in_simulation() {
    let p = problem(
        0.3,
        DriftSpec::ExpDecay {
            alpha0: 0.1,
            gamma: 0.0,
        },
        KernelSpec::Exponential { beta: 2.0 },
    );
    let traj = optimum(&p, 200);
    assert!(traj.jumps().start > 0.1);
    let m = analytic_moments(&traj, &p).unwrap();
    let s = simulate(&p, &traj, 50_000, 3, 0.005).unwrap();
    assert!((s.mean_pnl - m.expected_pnl).abs() <= 3.0 * s.std_error_mean);
    assert!((s.var_pnl / m.pnl_variance - 1.0).abs() < 0.05);

    let silent = SimulationSetup::new(1.0, 0.0, p.eta_tilde, p.drift, p.kernel).unwrap();
    let s = simulate_with(&silent, &traj, 4, 3, 0.005).unwrap();
    assert!((s.mean_pnl - m.expected_pnl).abs() < 1e-6 * m.expected_pnl.abs().max(1.0));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let p = problem(
        0.3,
        DriftSpec::ExpDecay {
            alpha0: 0.2,
            gamma: 1.0,
        },
        KernelSpec::Exponential { beta: 3.0 },
    );
    let traj = solve_grid_kernel(&p, 100).unwrap().trajectory;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&p, &traj, 5_000, 99, 0.01).unwrap())
    };
    let (one, many) = (run(1), run(6));
    assert_eq!(one.mean_pnl.to_bits(), many.mean_pnl.to_bits());
    assert_eq!(one.var_pnl.to_bits(), many.var_pnl.to_bits());
    assert_ne!(
        run(1).mean_pnl,
        simulate(&p, &traj, 5_000, 100, 0.01).unwrap().mean_pnl
    );
}

#[test]
fn halving_dt_moves_the_mean_by_less_than_one_standard_error() {
    let drift = DriftSpec::ExpDecay {
        alpha0: 0.3,
        gamma: 2.0,
    };
    let p = problem(0.3, drift, KernelSpec::DiracDelta);
    let traj = optimum(&p, 400);
    let (coarse, fine) = (0.005, 0.0025);
    let noisy_coarse = simulate(&p, &traj, 100_000, 42, coarse).unwrap();
    let noisy_fine = simulate(&p, &traj, 100_000, 42, fine).unwrap();

    // Discretization bias alone: identical paths with the noise switched off.
    let silent = SimulationSetup::new(1.0, 0.0, p.eta_tilde, drift, p.kernel).unwrap();
    let bias = simulate_with(&silent, &traj, 1, 0, fine).unwrap().mean_pnl
        - simulate_with(&silent, &traj, 1, 0, coarse)
            .unwrap()
            .mean_pnl;
    let se = noisy_coarse.std_error_mean.min(noisy_fine.std_error_mean);
    assert!(bias.abs() < se, "bias {bias} vs SE {se}");

    // Same seed: both runs start from the same draws, so their gap is mostly bias.
    let gap = noisy_fine.mean_pnl - noisy_coarse.mean_pnl;
    assert!(gap.abs() < se, "gap {gap} vs SE {se}");
}

#[test]
fn simulation_rejects_bad_inputs() {
    let p = problem(0.3, DriftSpec::Zero, KernelSpec::DiracDelta);
    let traj = optimum(&p, 10);
    assert!(simulate(&p, &traj, 0, 1, 0.1).is_err());
    assert!(simulate(&p, &traj, 10, 1, 0.0).is_err());
    assert!(simulate(&p, &traj, 10, 1, -0.1).is_err());
    assert!(simulate(&p, &traj, 10, 1, 0.3).is_err());
}
