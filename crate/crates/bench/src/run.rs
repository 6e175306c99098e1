use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use greedy_qn::broyden::UpdateRule;
use greedy_qn::data::{
    generate_logsumexp, generate_quadratic, generate_start, read_libsvm, ParseOptions, SyntheticSpec,
};
use greedy_qn::objectives::{LogSumExpProblem, LogisticProblem, Objective, QuadraticProblem, DEFAULT_HESSIAN_CAP};
use greedy_qn::solvers::{
    classical_qn, gradient_method, solve_general, DiagnosticSchedule, DirectionStrategy, Outcome, RunOptions, RunTrace,
    SolveResult, SolverConfig, Termination, TraceFlags,
};

use crate::plan::{ExperimentPlan, MethodKind, MethodSpec, PlanError, ProblemSpec};
use crate::table::{emit_table, Cell, ResultTable};

#[derive(Debug, Clone)]
pub enum Problem {
    LogSumExp(LogSumExpProblem),
    Logistic(LogisticProblem),
    Quadratic(QuadraticProblem),
}

impl Problem {
    pub fn objective(&self) -> &dyn Objective {
        match self {
            Self::LogSumExp(p) => p,
            Self::Logistic(p) => p,
            Self::Quadratic(p) => p,
        }
    }
}

/// A materialized problem with its start point and optimal value.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: Problem,
    pub x0: Vec<f64>,
    pub f_star: f64,
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.problem.objective().dim()
    }
}

fn core_invalid(e: greedy_qn::Error) -> PlanError {
    PlanError::Invalid(e.to_string())
}

/// Shifts `center` by the seeded start offset of radius `1/n`.
fn start_around(center: &[f64], seed: u64) -> Vec<f64> {
    let offset = generate_start(center.len(), seed);
    center.iter().zip(&offset).map(|(c, o)| c + o).collect()
}

pub fn build_instance(plan: &ExperimentPlan) -> Result<Instance, PlanError> {
    plan.validate()?;
    match &plan.problem {
        ProblemSpec::LogSumExp { n, m, gamma } => {
            let spec = SyntheticSpec::new(*n, *m, *gamma, plan.seed).map_err(core_invalid)?;
            let p = generate_logsumexp(&spec).map_err(core_invalid)?;
            let f_star = p.value(&vec![0.0; *n]).map_err(core_invalid)?;
            Ok(Instance {
                x0: generate_start(*n, plan.seed),
                f_star,
                problem: Problem::LogSumExp(p),
            })
        }
        ProblemSpec::Quadratic { n, m, gamma } => {
            let spec = SyntheticSpec::new(*n, *m, *gamma, plan.seed).map_err(core_invalid)?;
            let p = generate_quadratic(&spec).map_err(core_invalid)?;
            let x_star = p.minimizer().map_err(core_invalid)?;
            Ok(Instance {
                x0: start_around(&x_star, plan.seed),
                f_star: p.optimal_value().map_err(core_invalid)?,
                problem: Problem::Quadratic(p),
            })
        }
        ProblemSpec::Logistic {
            path,
            gamma,
            label_map,
            n_override,
        } => {
            let options = ParseOptions {
                label_map: label_map.clone(),
                n_override: *n_override,
            };
            let data = read_libsvm(path, &options).map_err(|source| PlanError::Dataset {
                path: path.clone(),
                source,
            })?;
            if data.rows() == 0 || data.cols == 0 {
                return Err(PlanError::Invalid(format!("{} holds no data", path.display())));
            }
            let p = data.to_logistic(*gamma).map_err(core_invalid)?;
            let (f_star, x_star) = reference_solution(&p, path, *gamma)?;
            Ok(Instance {
                x0: start_around(&x_star, plan.seed),
                f_star,
                problem: Problem::Logistic(p),
            })
        }
    }
}

fn reference_path(dataset: &Path) -> PathBuf {
    let mut name = dataset.as_os_str().to_owned();
    name.push(".ref");
    PathBuf::from(name)
}

fn reference_header(p: &LogisticProblem, gamma: f64) -> String {
    format!("gamma={gamma:e} n={} m={}", p.dim(), p.m())
}

fn read_reference(path: &Path, header: &str, n: usize) -> Option<(f64, Vec<f64>)> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()? != header {
        return None;
    }
    let f_star = lines.next()?.trim().parse().ok()?;
    let x: Vec<f64> = lines
        .next()?
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .ok()?;
    (x.len() == n).then_some((f_star, x))
}

/// `f*` and `x*` for a logistic problem, cached beside the dataset.
///
/// The reference is classical SR1 from the origin, run to a gradient norm of
/// `1e-13` or `50n` iterations.
pub fn reference_solution(p: &LogisticProblem, dataset: &Path, gamma: f64) -> Result<(f64, Vec<f64>), PlanError> {
    let cache = reference_path(dataset);
    let header = reference_header(p, gamma);
    if let Some(found) = read_reference(&cache, &header, p.dim()) {
        return Ok(found);
    }
    let n = p.dim();
    let options = RunOptions {
        max_iter: 50 * n,
        termination: Termination::GradientNorm { epsilon: 1e-13 },
        ..Default::default()
    };
    let r = classical_qn(p, &vec![0.0; n], UpdateRule::Sr1, p.lipschitz(), &options).map_err(core_invalid)?;
    let f_star = p.value(&r.x).map_err(core_invalid)?;
    if !f_star.is_finite() {
        return Err(PlanError::Invalid("reference solve diverged".into()));
    }
    let mut text = format!("{header}\n{f_star:e}\n");
    let xs: Vec<String> = r.x.iter().map(|v| format!("{v:e}")).collect();
    text.push_str(&xs.join(" "));
    text.push('\n');
    // The cache is an optimization; a read-only dataset directory is fine.
    let _ = fs::write(&cache, text);
    Ok((f_star, r.x))
}

/// One method's trajectory.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub name: String,
    pub result: SolveResult,
    pub wall_time: Duration,
}

impl MethodRun {
    pub fn trace(&self) -> &RunTrace {
        &self.result.trace
    }

    /// Index of the first record meeting `f − f* ≤ ε (f₀ − f*)`.
    pub fn first_reaching(&self, epsilon: f64, f_star: f64) -> Option<usize> {
        let records = &self.result.trace.records;
        let f0 = records.first()?.f_value;
        records.iter().position(|r| r.f_value - f_star <= epsilon * (f0 - f_star))
    }

    fn unreached(&self) -> Cell {
        match self.result.trace.outcome {
            Outcome::NumericalFailure(_) => Cell::Failed,
            _ => Cell::Missing,
        }
    }
}

/// Every method of a plan, run once to the tightest ε.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub instance: Instance,
    pub runs: Vec<MethodRun>,
}

fn run_method(
    inst: &Instance,
    method: &MethodSpec,
    plan: &ExperimentPlan,
    flags: TraceFlags,
    schedule: DiagnosticSchedule,
) -> Result<MethodRun, PlanError> {
    let oracle = inst.problem.objective();
    let n = oracle.dim();
    let options = RunOptions {
        max_iter: plan.budget_factor.saturating_mul(n),
        termination: Termination::FunctionResidual {
            epsilon: *plan.epsilons.last().expect("validated"),
            f_star: inst.f_star,
        },
        trace: flags,
        diag_cap: DEFAULT_HESSIAN_CAP,
        schedule,
    };
    let general = |rule: UpdateRule, strategy: DirectionStrategy| {
        let mut config = SolverConfig::new(rule, strategy);
        if plan.uses_correction() {
            if let Some(m) = oracle.self_concordance() {
                config = config.with_correction(m);
            }
        }
        config.run = options.clone();
        solve_general(oracle, &inst.x0, &config)
    };
    let start = Instant::now();
    let result = match method.kind {
        MethodKind::Gradient => gradient_method(oracle, &inst.x0, oracle.lipschitz(), &options),
        MethodKind::Classical(rule) => classical_qn(oracle, &inst.x0, rule, oracle.lipschitz(), &options),
        MethodKind::Greedy(rule) => general(rule, DirectionStrategy::GreedyCoordinate),
        MethodKind::Random(rule) => general(rule, DirectionStrategy::RandomSphere { seed: plan.seed }),
    }
    .map_err(core_invalid)?;
    Ok(MethodRun {
        name: method.name.clone(),
        result,
        wall_time: start.elapsed(),
    })
}

fn run_all(
    inst: Instance,
    plan: &ExperimentPlan,
    flags: TraceFlags,
    schedule: DiagnosticSchedule,
) -> Result<Experiment, PlanError> {
    let runs = std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .methods
            .iter()
            .map(|m| {
                let (inst, schedule) = (&inst, schedule.clone());
                scope.spawn(move || run_method(inst, m, plan, flags, schedule))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(Experiment { instance: inst, runs })
}

fn trace_flags(plan: &ExperimentPlan, n: usize) -> TraceFlags {
    if plan.trace && n <= DEFAULT_HESSIAN_CAP {
        TraceFlags::ALL
    } else {
        TraceFlags::NONE
    }
}

/// Runs every method and tabulates iteration counts per ε.
pub fn run_plan(plan: &ExperimentPlan) -> Result<(ResultTable, Experiment), PlanError> {
    let inst = build_instance(plan)?;
    let flags = trace_flags(plan, inst.dim());
    let exp = run_all(inst, plan, flags, DiagnosticSchedule::EveryIteration)?;
    let f_star = exp.instance.f_star;
    let cells = plan
        .epsilons
        .iter()
        .map(|&eps| {
            exp.runs
                .iter()
                .map(|run| run.first_reaching(eps, f_star).map_or_else(|| run.unreached(), Cell::Count))
                .collect()
        })
        .collect();
    let table = ResultTable {
        title: format!("Iterations to reach f - f* <= eps (f0 - f*); {}, seed {}", plan.problem, plan.seed),
        epsilons: plan.epsilons.clone(),
        methods: exp.runs.iter().map(|r| r.name.clone()).collect(),
        cells,
    };
    Ok((table, exp))
}

/// Tabulates the relative Hessian approximation error at the first iterate
/// reaching each ε.
pub fn run_hessian_error_plan(plan: &ExperimentPlan) -> Result<(ResultTable, Experiment), PlanError> {
    if let Some(m) = plan.methods.iter().find(|m| !m.has_approximation()) {
        return Err(PlanError::Invalid(format!("{} keeps no Hessian approximation", m.name)));
    }
    let inst = build_instance(plan)?;
    let n = inst.dim();
    if n > DEFAULT_HESSIAN_CAP {
        return Err(PlanError::Invalid(format!(
            "Hessian errors need n <= {DEFAULT_HESSIAN_CAP}, got {n}"
        )));
    }
    let mut flags = trace_flags(plan, n);
    flags.op_error = true;
    let schedule = if plan.trace {
        DiagnosticSchedule::EveryIteration
    } else {
        DiagnosticSchedule::ResidualThresholds(plan.epsilons.clone())
    };
    let exp = run_all(inst, plan, flags, schedule)?;
    let f_star = exp.instance.f_star;
    let cells = plan
        .epsilons
        .iter()
        .map(|&eps| {
            exp.runs
                .iter()
                .map(|run| match run.first_reaching(eps, f_star) {
                    Some(k) => run.trace().records[k].op_error.map_or(Cell::Failed, Cell::Value),
                    None => run.unreached(),
                })
                .collect()
        })
        .collect();
    let table = ResultTable {
        title: format!("Relative Hessian approximation error at termination; {}, seed {}", plan.problem, plan.seed),
        epsilons: plan.epsilons.clone(),
        methods: exp.runs.iter().map(|r| r.name.clone()).collect(),
        cells,
    };
    Ok((table, exp))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// CSV with columns `k,f,grad_norm,r_k,dir_index,lambda_f,sigma,op_error`.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("k,f,grad_norm,r_k,dir_index,lambda_f,sigma,op_error\n");
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{},{},{},{},{}",
            r.k,
            r.f_value,
            r.grad_norm,
            opt(r.r_k),
            r.direction_index.map(|i| i.to_string()).unwrap_or_default(),
            opt(r.lambda_f),
            opt(r.sigma),
            opt(r.op_error),
        );
    }
    out
}

fn write(path: PathBuf, text: &str) -> Result<(), PlanError> {
    fs::write(&path, text).map_err(|source| PlanError::Output { path, source })
}

/// Writes `<stem>.<ext>` per format, per-method traces when requested, and
/// wall-times to `timing.txt`.
pub fn write_outputs(plan: &ExperimentPlan, stem: &str, table: &ResultTable, exp: &Experiment) -> Result<(), PlanError> {
    let Some(dir) = &plan.output else {
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|source| PlanError::Output {
        path: dir.clone(),
        source,
    })?;
    for format in &plan.formats {
        write(dir.join(format!("{stem}.{}", format.extension())), &emit_table(table, *format))?;
    }
    if plan.trace {
        for run in &exp.runs {
            write(dir.join(format!("trace_{}.csv", run.name)), &trace_csv(run.trace()))?;
        }
    }
    let mut timing = String::new();
    for run in &exp.runs {
        let _ = writeln!(timing, "{} {:.3}s {:?}", run.name, run.wall_time.as_secs_f64(), run.trace().outcome);
    }
    write(dir.join("timing.txt"), &timing)
}
