//! Quasi-Newton schemes, baselines, and per-iteration run traces.
//!
//! Every solver starts from `G₀ = L·I` and takes unit steps
//! `x₊ = x − G⁻¹∇f(x)`. There is no line search: a run started outside the
//! region of local convergence may diverge, which is reported through
//! [`Outcome::NumericalFailure`] together with the partial trace.

mod baselines;
mod general;

pub use baselines::{classical_qn, gradient_method};
pub use general::{solve_general, solve_quadratic, GeneralScheme, StepReport};

use crate::broyden::{relative_op_error, sigma, UpdateRule, DEFAULT_DEGENERACY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::objectives::{Objective, DEFAULT_HESSIAN_CAP};
use crate::operator::{factorize, DenseSymmetric};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionStrategy {
    /// Coordinate maximizing `⟨Ge_i,e_i⟩ / ⟨∇²f e_i,e_i⟩`.
    GreedyCoordinate,
    /// Uniform on the unit sphere, from the `"directions"` stream of `seed`.
    RandomSphere { seed: u64 },
    /// Step direction with the gradient difference in place of `∇²f·s`.
    ClassicalSecant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// `f(x_k) − f* ≤ ε (f(x₀) − f*)`
    FunctionResidual { epsilon: f64, f_star: f64 },
    /// `‖∇f(x_k)‖ ≤ ε`
    GradientNorm { epsilon: f64 },
}

impl Termination {
    fn epsilon(&self) -> f64 {
        match *self {
            Self::FunctionResidual { epsilon, .. } | Self::GradientNorm { epsilon } => epsilon,
        }
    }
}

/// Which O(n³) diagnostics to record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceFlags {
    pub lambda_f: bool,
    pub sigma: bool,
    pub op_error: bool,
}

impl TraceFlags {
    pub const NONE: Self = Self {
        lambda_f: false,
        sigma: false,
        op_error: false,
    };
    pub const ALL: Self = Self {
        lambda_f: true,
        sigma: true,
        op_error: true,
    };

    fn any(&self) -> bool {
        self.lambda_f || self.sigma || self.op_error
    }
}

/// When the traced diagnostics are evaluated.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum DiagnosticSchedule {
    #[default]
    EveryIteration,
    /// At `k = 0` and at the first iterate meeting each relative residual
    /// threshold (function-residual termination only).
    ResidualThresholds(Vec<f64>),
}

/// Options shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub max_iter: usize,
    pub termination: Termination,
    pub trace: TraceFlags,
    /// Largest dimension for which diagnostics are computed.
    pub diag_cap: usize,
    pub schedule: DiagnosticSchedule,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            termination: Termination::GradientNorm { epsilon: 1e-10 },
            trace: TraceFlags::NONE,
            diag_cap: DEFAULT_HESSIAN_CAP,
            schedule: DiagnosticSchedule::EveryIteration,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        let eps = self.termination.epsilon();
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
        }
        Ok(())
    }
}

/// Assembly of a quasi-Newton method.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rule: UpdateRule,
    pub strategy: DirectionStrategy,
    /// Inflate `G` by `1 + M r_k` before each update.
    pub correction: bool,
    pub self_concordance: Option<f64>,
    pub degeneracy_tol: f64,
    pub run: RunOptions,
}

impl SolverConfig {
    pub fn new(rule: UpdateRule, strategy: DirectionStrategy) -> Self {
        Self {
            rule,
            strategy,
            correction: false,
            self_concordance: None,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            run: RunOptions::default(),
        }
    }

    /// Enables the correction strategy with constant `m`.
    pub fn with_correction(mut self, m: f64) -> Self {
        self.correction = true;
        self.self_concordance = Some(m);
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.run.max_iter = max_iter;
        self
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.run.termination = termination;
        self
    }

    pub fn with_trace(mut self, trace: TraceFlags) -> Self {
        self.run.trace = trace;
        self
    }

    pub fn with_diag_cap(mut self, cap: usize) -> Self {
        self.run.diag_cap = cap;
        self
    }

    pub fn with_schedule(mut self, schedule: DiagnosticSchedule) -> Self {
        self.run.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        if let UpdateRule::FixedTau(t) = self.rule {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidTau(t));
            }
        }
        if self.correction {
            match self.self_concordance {
                Some(m) if m >= 0.0 && m.is_finite() => {}
                Some(m) => return Err(Error::InvalidArgument(format!("M must be non-negative, got {m}"))),
                None => return Err(Error::InvalidArgument("correction requires M".into())),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f_value: f64,
    pub grad_norm: f64,
    /// `‖x_{k+1} − x_k‖_{x_k}` of the step leaving this iterate.
    pub r_k: Option<f64>,
    /// Coordinate updated after the step leaving this iterate.
    pub direction_index: Option<usize>,
    pub lambda_f: Option<f64>,
    /// `σ_{∇²f(x_k)}(G_k)`
    pub sigma: Option<f64>,
    /// Relative operator error of `G_k` against `∇²f(x_k)`.
    pub op_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Converged(usize),
    MaxIterReached,
    NumericalFailure(String),
}

impl Outcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, Self::Converged(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub outcome: Outcome,
    /// `M·λ_f(x₀)` when both are available.
    pub initial_m_lambda: Option<f64>,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub trace: RunTrace,
    /// Final Hessian approximation (quasi-Newton methods only).
    pub approximation: Option<DenseSymmetric>,
}

/// `λ_f(x) = ⟨∇f(x), ∇²f(x)⁻¹∇f(x)⟩^{1/2}`. O(n³).
pub fn lambda_f<O: Objective + ?Sized>(oracle: &O, x: &[f64], diag_cap: usize) -> Result<f64> {
    let n = oracle.dim();
    if n > diag_cap {
        return Err(Error::DimensionTooLarge { n, cap: diag_cap });
    }
    let h = oracle.full_hessian(x)?;
    let g = oracle.gradient(x)?;
    local_norm(&h, &g)
}

fn local_norm(h: &DenseSymmetric, g: &[f64]) -> Result<f64> {
    let sol = factorize(h)?.solve(g)?;
    Ok(dot(g, &sol).max(0.0).sqrt())
}

/// Builds the record stream and decides termination.
struct Recorder<'a, O: Objective + ?Sized> {
    oracle: &'a O,
    options: &'a RunOptions,
    m_const: Option<f64>,
    f0: f64,
    pending_thresholds: Vec<f64>,
    trace: RunTrace,
}

impl<'a, O: Objective + ?Sized> Recorder<'a, O> {
    fn new(oracle: &'a O, options: &'a RunOptions, m_const: Option<f64>, f0: f64) -> Self {
        let pending_thresholds = match &options.schedule {
            DiagnosticSchedule::ResidualThresholds(t) => {
                let mut t = t.clone();
                t.sort_by(|a, b| b.total_cmp(a));
                t
            }
            DiagnosticSchedule::EveryIteration => Vec::new(),
        };
        Self {
            oracle,
            options,
            m_const,
            f0,
            pending_thresholds,
            trace: RunTrace {
                records: Vec::new(),
                outcome: Outcome::MaxIterReached,
                initial_m_lambda: None,
            },
        }
    }

    fn relative_residual(&self, f: f64) -> Option<f64> {
        match self.options.termination {
            Termination::FunctionResidual { f_star, .. } => Some((f - f_star) / (self.f0 - f_star)),
            Termination::GradientNorm { .. } => None,
        }
    }

    fn diagnostics_due(&mut self, k: usize, f: f64) -> bool {
        let flags = self.options.trace;
        if !flags.any() || self.oracle.dim() > self.options.diag_cap {
            return false;
        }
        match (&self.options.schedule, self.relative_residual(f)) {
            (DiagnosticSchedule::EveryIteration, _) | (_, None) => true,
            (DiagnosticSchedule::ResidualThresholds(_), Some(rel)) => {
                let mut due = k == 0;
                while self.pending_thresholds.first().is_some_and(|t| rel <= *t) {
                    self.pending_thresholds.remove(0);
                    due = true;
                }
                due
            }
        }
    }

    /// Appends the record of `x_k`; returns true when the run has converged.
    fn record(&mut self, k: usize, x: &[f64], f: f64, grad: &[f64], g: Option<&DenseSymmetric>) -> bool {
        let mut rec = IterationRecord {
            k,
            f_value: f,
            grad_norm: norm(grad),
            r_k: None,
            direction_index: None,
            lambda_f: None,
            sigma: None,
            op_error: None,
        };
        if self.diagnostics_due(k, f) {
            let flags = self.options.trace;
            if let Ok(h) = self.oracle.full_hessian(x) {
                if flags.lambda_f {
                    rec.lambda_f = local_norm(&h, grad).ok();
                }
                if let Some(g) = g {
                    if flags.sigma {
                        rec.sigma = sigma(&h, g).ok();
                    }
                    if flags.op_error {
                        rec.op_error = relative_op_error(g, &h).ok();
                    }
                }
            }
        }
        if k == 0 {
            self.trace.initial_m_lambda = match (self.m_const, rec.lambda_f) {
                (Some(m), Some(l)) => Some(m * l),
                _ => None,
            };
        }
        let converged = match self.options.termination {
            Termination::FunctionResidual { epsilon, f_star } => f - f_star <= epsilon * (self.f0 - f_star),
            Termination::GradientNorm { epsilon } => rec.grad_norm <= epsilon,
        };
        self.trace.records.push(rec);
        if converged {
            self.trace.outcome = Outcome::Converged(k);
        }
        converged
    }

    fn last_mut(&mut self) -> &mut IterationRecord {
        self.trace.records.last_mut().expect("recorded before stepping")
    }

    fn fail(&mut self, reason: impl std::fmt::Display) {
        self.trace.outcome = Outcome::NumericalFailure(reason.to_string());
    }

    fn finish(self) -> RunTrace {
        self.trace
    }
}

fn check_finite_point(f: f64, grad: &[f64]) -> Result<()> {
    if f.is_finite() && grad.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteResult)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticProblem;

    #[test]
    fn lambda_f_quadratic_identity() {
        let b = vec![1.0, -2.0, 0.5];
        let p = QuadraticProblem::new(DenseSymmetric::identity(3), b.clone()).unwrap();
        let x = [0.3, 0.1, -0.7];
        let oracle = norm(&crate::linalg::sub(&x, &b));
        assert!((lambda_f(&p, &x, 500).unwrap() - oracle).abs() <= 1e-15);
        assert_eq!(lambda_f(&p, &b, 500).unwrap(), 0.0);
        assert!(matches!(lambda_f(&p, &x, 2), Err(Error::DimensionTooLarge { n: 3, cap: 2 })));
    }

    #[test]
    fn config_validation() {
        let c = SolverConfig::new(UpdateRule::Sr1, DirectionStrategy::GreedyCoordinate);
        assert!(c.validate().is_ok());
        let mut bad = c.clone();
        bad.correction = true;
        assert!(bad.validate().is_err());
        assert!(c.clone().with_max_iter(0).validate().is_err());
        assert!(c
            .clone()
            .with_termination(Termination::GradientNorm { epsilon: 0.0 })
            .validate()
            .is_err());
        assert!(c.with_correction(2.0).validate().is_ok());
    }
}
