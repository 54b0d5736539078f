use exec_kernel::closed_form::{self, solve_delta_kernel};
use exec_kernel::grid::{uniform_grid, GridTrajectory, Jumps};
use exec_kernel::impact::execution_cost;
use exec_kernel::model::{DriftSpec, ExecutionProblem, KernelSpec};
use exec_kernel::objective::evaluate;
use proptest::prelude::*;

fn problem(
    x0: f64,
    x_t: f64,
    lambda: f64,
    drift: DriftSpec,
    kernel: KernelSpec,
) -> ExecutionProblem {
    ExecutionProblem::normalized(x0, x_t, 1.0, lambda, drift, kernel).unwrap()
}

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::DiracDelta),
        (0.1f64..20.0).prop_map(|beta| KernelSpec::Exponential { beta }),
    ]
}

/// Endpoint-pinned path from `x0` to `x_t` with random interior wiggles.
fn wiggly(x0: f64, x_t: f64, coeffs: &[f64], n: usize) -> GridTrajectory {
    GridTrajectory::from_fn(uniform_grid(1.0, n), |t| {
        let bumps: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * ((m + 1) as f64 * std::f64::consts::PI * t).sin())
            .sum();
        x0 + (x_t - x0) * t + bumps
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decomposition_and_risk_sign(
        x0 in -3.0f64..3.0,
        x_t in -3.0f64..3.0,
        coeffs in prop::collection::vec(-2.0f64..2.0, 0..5),
        lambda in 0.0f64..50.0,
        alpha0 in -1.0f64..1.0,
        kernel in kernel_strategy(),
    ) {
        let drift = DriftSpec::ExpDecay { alpha0, gamma: 1.5 };
        let p = problem(x0, x_t, lambda, drift, kernel);
        let r = evaluate(&wiggly(x0, x_t, &coeffs, 64), &p).unwrap();
        prop_assert!(r.risk_penalty >= 0.0);
        let scale = r.alpha_gain.abs() + r.impact_cost.abs() + r.risk_penalty.abs();
        prop_assert!((r.total - (r.alpha_gain - r.impact_cost - r.risk_penalty)).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn one_signed_trading_costs(
        x0 in 0.1f64..5.0,
        power in 0.5f64..3.0,
        kernel in kernel_strategy(),
        jump0 in 0.0f64..0.5,
        jump_t in 0.0f64..0.5,
    ) {
        let times = uniform_grid(1.0, 80);
        let holdings: Vec<f64> = times
            .iter()
            .map(|&t| x0 * (1.0 - jump0) - (x0 * (1.0 - jump0 - jump_t)) * t.powf(power))
            .collect();
        // Block trades have infinite cost under memoryless impact.
        let jumps = match kernel {
            KernelSpec::DiracDelta => Jumps::default(),
            _ => Jumps { start: x0 * jump0, end: x0 * jump_t },
        };
        let traj = GridTrajectory::new(times, holdings, jumps).unwrap();
        let cost = execution_cost(&traj, &kernel, 1.0).unwrap();
        prop_assert!(cost >= 0.0);
    }

    #[test]
    fn optimum_beats_the_straight_line(
        x0 in -5.0f64..5.0,
        x_t in -5.0f64..5.0,
        lambda in 0.05f64..30.0,
    ) {
        prop_assume!((x0 - x_t).abs() > 1e-3);
        let p = problem(x0, x_t, lambda, DriftSpec::Zero, KernelSpec::DiracDelta);
        let times = uniform_grid(1.0, 2000);
        let optimum = solve_delta_kernel(&p).unwrap().sample(&times).unwrap();
        let line = GridTrajectory::from_fn(times, |t| x0 + (x_t - x0) * t).unwrap();
        prop_assert!(evaluate(&optimum, &p).unwrap().total > evaluate(&line, &p).unwrap().total);
    }
}

#[test]
fn straight_line_reference_values() {
    let line = |n| GridTrajectory::from_fn(uniform_grid(1.0, n), |t| 1.0 - t).unwrap();
    let p = problem(1.0, 0.0, 0.0, DriftSpec::Zero, KernelSpec::DiracDelta);
    let r = evaluate(&line(1000), &p).unwrap();
    assert!((r.impact_cost - 1.0).abs() < 1e-12);
    assert!((r.total + 1.0).abs() < 1e-12);

    // Trapezoid error on (1-t)^2 is h^2/6, so refine and extrapolate.
    let p = problem(1.0, 0.0, 3.0, DriftSpec::Zero, KernelSpec::DiracDelta);
    let coarse = evaluate(&line(500), &p).unwrap();
    let fine = evaluate(&line(1000), &p).unwrap();
    assert!((coarse.risk_penalty - 1.0 - 3.0 / (6.0 * 500f64.powi(2))).abs() < 1e-12);
    let extrapolated = (4.0 * fine.total - coarse.total) / 3.0;
    assert!((extrapolated + 2.0).abs() < 1e-12);
}

#[test]
fn zero_path_is_worth_nothing() {
    let p = problem(
        0.0,
        0.0,
        2.0,
        DriftSpec::ExpDecay {
            alpha0: 0.4,
            gamma: 1.0,
        },
        KernelSpec::Exponential { beta: 3.0 },
    );
    let r = evaluate(
        &GridTrajectory::from_fn(uniform_grid(1.0, 10), |_| 0.0).unwrap(),
        &p,
    )
    .unwrap();
    assert_eq!(
        (r.alpha_gain, r.impact_cost, r.risk_penalty, r.total),
        (0.0, 0.0, 0.0, 0.0)
    );
}

#[test]
fn quadrature_converges_at_second_order() {
    let drift = DriftSpec::ExpDecay {
        alpha0: 0.5,
        gamma: 2.0,
    };
    for kernel in [
        KernelSpec::DiracDelta,
        KernelSpec::Exponential { beta: 3.0 },
    ] {
        let p = problem(1.0, 0.2, 2.0, drift, kernel);
        let f = |t: f64| 1.0 - 0.8 * t + 0.3 * (std::f64::consts::PI * t).sin() * (1.0 + t);
        let totals: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| {
                evaluate(
                    &GridTrajectory::from_fn(uniform_grid(1.0, n), f).unwrap(),
                    &p,
                )
                .unwrap()
                .total
            })
            .collect();
        let diffs: Vec<f64> = totals.windows(2).map(|w| w[1] - w[0]).collect();
        for pair in diffs.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((ratio - 4.0).abs() < 0.1, "{kernel:?}: ratio {ratio}");
        }
    }
}

#[test]
fn ramp_cost_matches_the_causal_integral_and_its_block_limit() {
    // Constant rate 1/w over [0, w]: cost = (w - (1 - e^{-beta w})/beta) / w^2.
    let beta = 2.5;
    let kernel = KernelSpec::Exponential { beta };
    let mut previous = f64::INFINITY;
    for w in [0.1, 0.01, 0.001, 1e-4] {
        let mut times = vec![0.0, w];
        times.extend((1..=10).map(|i| w + (1.0 - w) * i as f64 / 10.0));
        let holdings: Vec<f64> = times
            .iter()
            .map(|&t| if t == 0.0 { 1.0 } else { 0.0 })
            .collect();
        let traj = GridTrajectory::new(times, holdings, Jumps::default()).unwrap();
        let cost = execution_cost(&traj, &kernel, 1.0).unwrap();
        let exact = (w - (-(-beta * w).exp_m1()) / beta) / (w * w);
        assert!(
            (cost - exact).abs() < 1e-9 * exact,
            "w={w}: {cost} vs {exact}"
        );
        let gap = (cost - beta / 2.0).abs();
        assert!(gap < previous);
        previous = gap;
    }
    assert!(previous < 1e-3);

    let block = GridTrajectory::new(
        uniform_grid(1.0, 10),
        vec![0.0; 11],
        Jumps {
            start: 1.0,
            end: 0.0,
        },
    )
    .unwrap();
    assert!((execution_cost(&block, &kernel, 1.0).unwrap() - beta / 2.0).abs() < 1e-15);
}

#[test]
fn kernel_optimum_beats_the_straight_line() {
    let p = problem(
        1.0,
        0.0,
        1.0,
        DriftSpec::Zero,
        KernelSpec::Exponential { beta: 2.0 },
    );
    let times = uniform_grid(1.0, 2000);
    let optimum = closed_form::solve(&p).unwrap().sample(&times).unwrap();
    let line = GridTrajectory::from_fn(times, |t| 1.0 - t).unwrap();
    assert!(evaluate(&optimum, &p).unwrap().total > evaluate(&line, &p).unwrap().total);
}
