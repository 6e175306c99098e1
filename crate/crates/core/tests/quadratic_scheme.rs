use greedy_qn::broyden::{relative_op_error, UpdateRule};
use greedy_qn::data::{generate_quadratic, generate_start, SyntheticSpec};
use greedy_qn::linalg::symmetric_eigenvalues;
use greedy_qn::objectives::{Objective, QuadraticProblem};
use greedy_qn::operator::{factorize, DenseSymmetric};
use greedy_qn::solvers::{
    classical_qn, lambda_f, solve_general, solve_quadratic, DirectionStrategy, GeneralScheme, Outcome, RunOptions,
    SolverConfig, Termination, TraceFlags,
};

fn instance(n: usize, seed: u64) -> QuadraticProblem {
    generate_quadratic(&SyntheticSpec::new(n, n, 0.1, seed).unwrap()).unwrap()
}

fn greedy(rule: UpdateRule) -> SolverConfig {
    SolverConfig::new(rule, DirectionStrategy::GreedyCoordinate)
        .with_termination(Termination::GradientNorm { epsilon: 1e-12 })
        .with_max_iter(200)
}

#[test]
fn scaled_identity_is_solved_in_one_step() {
    let p = QuadraticProblem::new(DenseSymmetric::scaled_identity(4, 3.0), vec![1.0, -2.0, 0.5, 4.0]).unwrap();
    let r = solve_quadratic(&p, &[0.0; 4], &greedy(UpdateRule::Sr1)).unwrap();
    assert_eq!(r.trace.outcome, Outcome::Converged(1));
    assert!(lambda_f(&p, &r.x, 500).unwrap() <= 1e-15);
}

#[test]
fn diagonal_hessian_is_identified_within_n_steps() {
    let p = QuadraticProblem::new(DenseSymmetric::from_diagonal(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0; 3]).unwrap();
    let mut scheme = GeneralScheme::new(&p, &[0.0; 3], greedy(UpdateRule::Sr1)).unwrap();
    let mut found = relative_op_error(scheme.approximation().g(), p.a()).unwrap() <= 1e-10;
    for _ in 0..3 {
        scheme.step().unwrap();
        found |= relative_op_error(scheme.approximation().g(), p.a()).unwrap() <= 1e-10;
    }
    assert!(found);
}

#[test]
fn residual_is_half_squared_local_norm() {
    let p = instance(12, 5);
    let f_star = p.optimal_value().unwrap();
    for s in 0..10 {
        let x = generate_start(12, s).iter().map(|v| v * 40.0).collect::<Vec<_>>();
        let lam = lambda_f(&p, &x, 500).unwrap();
        let gap = p.value(&x).unwrap() - f_star;
        assert!((gap - 0.5 * lam * lam).abs() <= 1e-12 * gap.max(1.0));
    }
}

#[test]
fn sandwich_holds_along_the_run() {
    for seed in 0..6 {
        let p = instance(10, seed);
        let ratio = p.lipschitz() / p.mu();
        let factor = factorize(p.a()).unwrap();
        for rule in [UpdateRule::Sr1, UpdateRule::Bfgs, UpdateRule::Dfp] {
            let mut scheme = GeneralScheme::new(&p, &generate_start(10, seed), greedy(rule)).unwrap();
            for _ in 0..25 {
                let eig = symmetric_eigenvalues(&factor.congruence(scheme.approximation().g()).unwrap());
                assert!(eig[0] >= 1.0 - 1e-9, "{rule:?}: {}", eig[0]);
                assert!(*eig.last().unwrap() <= ratio + 1e-9);
                scheme.step().unwrap();
            }
        }
    }
}

#[test]
fn local_norm_decays_linearly() {
    let p = instance(8, 2);
    let config = greedy(UpdateRule::Bfgs).with_trace(TraceFlags {
        lambda_f: true,
        ..TraceFlags::NONE
    });
    let r = solve_quadratic(&p, &generate_start(8, 2), &config).unwrap();
    assert!(r.trace.outcome.is_converged());
    let rate = 1.0 - p.mu() / p.lipschitz();
    let lam0 = r.trace.records[0].lambda_f.unwrap();
    for rec in &r.trace.records {
        assert!(rec.lambda_f.unwrap() <= rate.powi(rec.k as i32) * lam0 * (1.0 + 1e-9));
    }
}

#[test]
fn general_scheme_matches_quadratic_scheme() {
    let p = instance(9, 4);
    let config = greedy(UpdateRule::FixedTau(0.4));
    let a = solve_quadratic(&p, &generate_start(9, 4), &config).unwrap();
    let b = solve_general(&p, &generate_start(9, 4), &config).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.x, b.x);
    assert!(solve_quadratic(&p, &a.x, &config.clone().with_correction(1.0)).is_err());
}

#[test]
fn classical_secant_equation_uses_exact_action() {
    // y = A·s on a quadratic, so every accepted SR1 update leaves G·s = A·s.
    let p = instance(6, 9);
    let run = |max_iter| {
        let options = RunOptions {
            max_iter,
            termination: Termination::GradientNorm { epsilon: 1e-300 },
            ..Default::default()
        };
        classical_qn(&p, &generate_start(6, 9), UpdateRule::Sr1, p.lipschitz(), &options).unwrap()
    };
    let (before, after) = (run(2), run(3));
    assert_eq!(after.trace.records.len(), 4);
    let s: Vec<f64> = after.x.iter().zip(&before.x).map(|(a, b)| a - b).collect();
    let gs = after.approximation.unwrap().apply(&s).unwrap();
    let as_ = p.a().apply(&s).unwrap();
    let scale = as_.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (u, v) in gs.iter().zip(&as_) {
        assert!((u - v).abs() <= 1e-9 * scale);
    }
}

#[test]
fn runs_are_bit_identical() {
    let p = instance(10, 1);
    let config = SolverConfig::new(UpdateRule::Sr1, DirectionStrategy::RandomSphere { seed: 3 })
        .with_termination(Termination::GradientNorm { epsilon: 1e-10 })
        .with_max_iter(300)
        .with_trace(TraceFlags::ALL);
    let a = solve_quadratic(&p, &generate_start(10, 1), &config).unwrap();
    let b = solve_quadratic(&p, &generate_start(10, 1), &config).unwrap();
    assert!(a.trace.outcome.is_converged());
    assert_eq!(a.trace, b.trace);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.x), bits(&b.x));
}

#[test]
fn budget_exhaustion_is_reported() {
    let p = instance(10, 7);
    let r = solve_quadratic(&p, &generate_start(10, 7), &greedy(UpdateRule::Dfp).with_max_iter(2)).unwrap();
    assert_eq!(r.trace.outcome, Outcome::MaxIterReached);
    assert_eq!(r.trace.records.len(), 3);
}
