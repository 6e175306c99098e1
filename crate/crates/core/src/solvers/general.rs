use crate::broyden::{broyd_update, greedy_direction, UpdateOutcome, UpdatePair};
use crate::data::RngStream;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot};
use crate::objectives::{Objective, QuadraticProblem};
use crate::operator::SpdState;

use super::{check_finite_point, DirectionStrategy, Recorder, SolveResult, SolverConfig};

/// What one call to [`GeneralScheme::step`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// `‖x_{k+1} − x_k‖_{x_k}`
    pub r: f64,
    /// Factor applied to `G` before the update (1 without correction).
    pub correction: f64,
    pub direction_index: Option<usize>,
    pub outcome: UpdateOutcome,
}

/// Greedy or randomized quasi-Newton iteration, one step at a time.
pub struct GeneralScheme<'a, O: Objective + ?Sized> {
    oracle: &'a O,
    config: SolverConfig,
    x: Vec<f64>,
    f: f64,
    grad: Vec<f64>,
    state: SpdState,
    directions: Option<RngStream>,
    k: usize,
}

impl<'a, O: Objective + ?Sized> GeneralScheme<'a, O> {
    /// Starts at `x0` with `G₀ = L·I`.
    pub fn new(oracle: &'a O, x0: &[f64], config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let n = oracle.dim();
        check_dim(n, x0.len())?;
        let directions = match config.strategy {
            DirectionStrategy::GreedyCoordinate => None,
            DirectionStrategy::RandomSphere { seed } => Some(RngStream::new(seed, "directions")),
            DirectionStrategy::ClassicalSecant => {
                return Err(Error::InvalidArgument(
                    "classical secant directions are handled by classical_qn".into(),
                ))
            }
        };
        let lipschitz = oracle.lipschitz();
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::NonPositiveScale(lipschitz));
        }
        let state = SpdState::scaled_identity(n, lipschitz)?;
        let f = oracle.value(x0)?;
        let grad = oracle.gradient(x0)?;
        Ok(Self {
            oracle,
            config,
            x: x0.to_vec(),
            f,
            grad,
            state,
            directions,
            k: 0,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn value(&self) -> f64 {
        self.f
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn approximation(&self) -> &SpdState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Moves to `x_{k+1}` and updates `G_k` to `G_{k+1}`.
    pub fn step(&mut self) -> Result<StepReport> {
        let n = self.x.len();
        let d = self.state.solve(&self.grad)?;
        let mut x_next = self.x.clone();
        axpy(-1.0, &d, &mut x_next);

        let hd = self.oracle.hessian_vec(&self.x, &d)?;
        let r = dot(&hd, &d).max(0.0).sqrt();
        if !r.is_finite() {
            return Err(Error::NonFiniteResult);
        }

        let f_next = self.oracle.value(&x_next)?;
        let grad_next = self.oracle.gradient(&x_next)?;
        check_finite_point(f_next, &grad_next)?;

        let mut correction = 1.0;
        if self.config.correction {
            let m = self.config.self_concordance.unwrap_or(0.0);
            correction = 1.0 + m * r;
            if correction != 1.0 {
                self.state.rescale(correction)?;
            }
        }

        let (pair, direction_index) = match self.directions.as_mut() {
            None => {
                let diag_a = self.oracle.hessian_diag(&x_next)?;
                let i = greedy_direction(self.state.diag(), &diag_a)?;
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let au = self.oracle.hessian_vec(&x_next, &e)?;
                (UpdatePair::coordinate(&self.state, i, au)?, Some(i))
            }
            Some(rng) => {
                let u = rng.unit_sphere(n);
                let au = self.oracle.hessian_vec(&x_next, &u)?;
                (UpdatePair::new(&self.state, u, au)?, None)
            }
        };
        let outcome = broyd_update(&mut self.state, &pair, self.config.rule, self.config.degeneracy_tol)?;

        self.x = x_next;
        self.f = f_next;
        self.grad = grad_next;
        self.k += 1;
        Ok(StepReport {
            r,
            correction,
            direction_index,
            outcome,
        })
    }
}

/// Runs the greedy or randomized scheme until the termination test holds.
///
/// Configuration and dimension errors are returned as `Err`; failures during
/// the iteration end the run with `Outcome::NumericalFailure`.
pub fn solve_general<O: Objective + ?Sized>(oracle: &O, x0: &[f64], config: &SolverConfig) -> Result<SolveResult> {
    let mut scheme = GeneralScheme::new(oracle, x0, config.clone())?;
    let options = &config.run;
    let m_const = config.self_concordance.or(oracle.self_concordance());
    let mut rec = Recorder::new(oracle, options, m_const, scheme.value());

    if let Err(e) = check_finite_point(scheme.value(), scheme.gradient()) {
        rec.fail(e);
    } else {
        loop {
            let k = scheme.iteration();
            if rec.record(k, scheme.x(), scheme.value(), scheme.gradient(), Some(scheme.approximation().g())) {
                break;
            }
            if k >= options.max_iter {
                break;
            }
            match scheme.step() {
                Ok(report) => {
                    let last = rec.last_mut();
                    last.r_k = Some(report.r);
                    last.direction_index = report.direction_index;
                }
                Err(e) => {
                    rec.fail(e);
                    break;
                }
            }
        }
    }

    Ok(SolveResult {
        x: scheme.x().to_vec(),
        trace: rec.finish(),
        approximation: Some(scheme.approximation().g().clone()),
    })
}

/// The general scheme on a quadratic, where no correction is needed.
pub fn solve_quadratic(problem: &QuadraticProblem, x0: &[f64], config: &SolverConfig) -> Result<SolveResult> {
    if config.correction {
        return Err(Error::InvalidArgument(
            "the quadratic scheme runs without correction".into(),
        ));
    }
    solve_general(problem, x0, config)
}
