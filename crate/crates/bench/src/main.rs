use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use greedy_qn_bench::{emit_table, run_hessian_error_plan, run_plan, write_outputs, PlanError, Settings};

/// Reproduce iteration-count and Hessian-error tables for quasi-Newton methods.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// `key = value` file; flags given here override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// logsumexp | logistic | quadratic
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// LIBSVM file (logistic)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Label substitutions such as `2:-1`
    #[arg(long)]
    label_remap: Option<String>,
    /// Comma-separated, e.g. GM,SR1,GrSR1,RaBFGS
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated, strictly decreasing
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration budget is this times n
    #[arg(long)]
    budget_factor: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, md, or both comma-separated
    #[arg(long)]
    format: Option<String>,
    /// Write per-method trace CSVs with diagnostics
    #[arg(long)]
    trace: bool,
    /// Tabulate Hessian approximation errors instead of iteration counts
    #[arg(long)]
    hessian_error: bool,
}

impl Cli {
    fn settings(&self) -> Result<Settings, PlanError> {
        let mut settings = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| PlanError::Invalid(format!("config {}: {e}", path.display())))?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let pairs: [(&str, Option<String>); 12] = [
            ("problem", self.problem.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("m", self.m.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("dataset", self.dataset.as_ref().map(|p| p.display().to_string())),
            ("label-remap", self.label_remap.clone()),
            ("methods", self.methods.clone()),
            ("epsilons", self.epsilons.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("budget-factor", self.budget_factor.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, &v)?;
            }
        }
        if self.trace {
            flags.set("trace", "true")?;
        }
        settings.merge(flags);
        Ok(settings)
    }
}

fn run(cli: &Cli) -> Result<(), PlanError> {
    let plan = cli.settings()?.into_plan()?;
    let (table, exp, stem) = if cli.hessian_error {
        let (t, e) = run_hessian_error_plan(&plan)?;
        (t, e, "hessian_error")
    } else {
        let (t, e) = run_plan(&plan)?;
        (t, e, "counts")
    };
    write_outputs(&plan, stem, &table, &exp)?;
    print!("{}", emit_table(&table, plan.formats[0]));
    for run in &exp.runs {
        eprintln!("{} {:.3}s {:?}", run.name, run.wall_time.as_secs_f64(), run.trace().outcome);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
