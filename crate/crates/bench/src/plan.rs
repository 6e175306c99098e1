//! Experiment plans and the flat `key = value` config grammar.
//!
//! ```text
//! # comment
//! problem = logsumexp        # logsumexp | logistic | quadratic
//! n = 50
//! m = 50
//! gamma = 1
//! methods = GM,SR1,GrSR1
//! epsilons = 1e-1,1e-3,1e-5
//! seed = 7
//! budget-factor = 1000
//! out = results
//! format = csv,md
//! trace = true
//! ```
//!
//! Keys are the long CLI flag names; values on the command line override the
//! file. Logistic plans also take `dataset`, `label-remap` and an optional `n`
//! overriding the feature dimension.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use greedy_qn::broyden::UpdateRule;
use greedy_qn::data::LabelMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid plan: {0}")]
    Invalid(String),
    #[error("dataset {path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: greedy_qn::Error,
    },
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PlanError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 2,
            Self::Dataset { .. } | Self::Output { .. } => 3,
        }
    }
}

fn invalid(msg: impl Into<String>) -> PlanError {
    PlanError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// Seeded synthetic log-sum-exp with minimizer at the origin.
    LogSumExp { n: usize, m: usize, gamma: f64 },
    Logistic {
        path: PathBuf,
        gamma: f64,
        label_map: LabelMap,
        n_override: Option<usize>,
    },
    /// Seeded `A = Σ c_j c_jᵀ + γI`.
    Quadratic { n: usize, m: usize, gamma: f64 },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::LogSumExp { .. } => "logsumexp",
            Self::Logistic { .. } => "logistic",
            Self::Quadratic { .. } => "quadratic",
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LogSumExp { n, m, gamma } => write!(f, "logsumexp n={n} m={m} gamma={gamma}"),
            Self::Quadratic { n, m, gamma } => write!(f, "quadratic n={n} m={m} gamma={gamma}"),
            Self::Logistic { path, gamma, .. } => {
                let name = path.file_name().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                write!(f, "logistic {name} gamma={gamma}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodKind {
    Gradient,
    Classical(UpdateRule),
    Greedy(UpdateRule),
    Random(UpdateRule),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
}

impl MethodSpec {
    /// `GM`, `DFP`, `BFGS`, `SR1`, and the `Gr`/`Ra` prefixed variants.
    pub fn parse(name: &str) -> Result<Self, PlanError> {
        let name = name.trim();
        let rule = |s: &str| match s {
            "DFP" => Some(UpdateRule::Dfp),
            "BFGS" => Some(UpdateRule::Bfgs),
            "SR1" => Some(UpdateRule::Sr1),
            _ => None,
        };
        let kind = if name == "GM" {
            MethodKind::Gradient
        } else if let Some(r) = name.strip_prefix("Gr").and_then(rule) {
            MethodKind::Greedy(r)
        } else if let Some(r) = name.strip_prefix("Ra").and_then(rule) {
            MethodKind::Random(r)
        } else if let Some(r) = rule(name) {
            MethodKind::Classical(r)
        } else {
            return Err(invalid(format!("unknown method `{name}`")));
        };
        Ok(Self {
            name: name.to_owned(),
            kind,
        })
    }

    pub fn has_approximation(&self) -> bool {
        self.kind != MethodKind::Gradient
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Markdown,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, PlanError> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "md" | "markdown" => Ok(Self::Markdown),
            other => Err(invalid(format!("unknown format `{other}`"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Markdown => "md",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub problem: ProblemSpec,
    pub methods: Vec<MethodSpec>,
    pub epsilons: Vec<f64>,
    pub budget_factor: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub trace: bool,
}

pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 1e-3, 1e-5, 1e-7, 1e-9];
pub const DEFAULT_METHODS: [&str; 7] = ["GM", "DFP", "BFGS", "SR1", "GrDFP", "GrBFGS", "GrSR1"];

impl ExperimentPlan {
    pub fn new(problem: ProblemSpec, methods: &[&str], epsilons: &[f64], seed: u64) -> Result<Self, PlanError> {
        let plan = Self {
            problem,
            methods: methods.iter().map(|m| MethodSpec::parse(m)).collect::<Result<_, _>>()?,
            epsilons: epsilons.to_vec(),
            budget_factor: 1000,
            seed,
            output: None,
            formats: vec![Format::Csv],
            trace: false,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.methods.is_empty() {
            return Err(invalid("no methods"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|o| o.name == m.name) {
                return Err(invalid(format!("method `{}` listed twice", m.name)));
            }
        }
        if self.epsilons.is_empty() {
            return Err(invalid("no epsilons"));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("epsilons must be positive"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("epsilons must be strictly decreasing"));
        }
        if self.budget_factor < 1 {
            return Err(invalid("budget factor must be at least 1"));
        }
        if self.formats.is_empty() {
            return Err(invalid("no output format"));
        }
        match &self.problem {
            ProblemSpec::LogSumExp { n, m, gamma } | ProblemSpec::Quadratic { n, m, gamma } => {
                if *n < 2 || *m < 1 {
                    return Err(invalid("synthetic problems need n >= 2 and m >= 1"));
                }
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(invalid("gamma must be positive"));
                }
            }
            ProblemSpec::Logistic { gamma, .. } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(invalid("gamma must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Whether the greedy and random methods apply the correction strategy.
    ///
    /// Only log-sum-exp has a known self-concordance constant; quadratics need
    /// none and logistic runs follow the uncorrected protocol.
    pub fn uses_correction(&self) -> bool {
        matches!(self.problem, ProblemSpec::LogSumExp { .. })
    }
}

/// Raw `key = value` settings, from a config file and/or CLI flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

const KEYS: [&str; 13] = [
    "problem",
    "n",
    "m",
    "gamma",
    "dataset",
    "label-remap",
    "methods",
    "epsilons",
    "seed",
    "budget-factor",
    "out",
    "format",
    "trace",
];

impl Settings {
    pub fn parse(text: &str) -> Result<Self, PlanError> {
        let mut s = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key = value", i + 1)))?;
            s.set(key.trim(), value.trim())
                .map_err(|e| invalid(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PlanError> {
        if !KEYS.contains(&key) {
            return Err(invalid(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_owned(), value.to_owned());
        Ok(())
    }

    /// Entries of `other` take precedence.
    pub fn merge(&mut self, other: Settings) {
        self.values.extend(other.values);
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, PlanError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| invalid(format!("`{key}` has invalid value `{v}`"))))
            .transpose()
    }

    fn list(&self, key: &str) -> Option<Vec<&str>> {
        self.get(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
    }

    pub fn into_plan(self) -> Result<ExperimentPlan, PlanError> {
        let n: Option<usize> = self.parsed("n")?;
        let m: Option<usize> = self.parsed("m")?;
        let gamma: f64 = self.parsed("gamma")?.unwrap_or(1.0);
        let problem = match self.get("problem").unwrap_or("logsumexp") {
            "logsumexp" => {
                let n = n.unwrap_or(50);
                ProblemSpec::LogSumExp { n, m: m.unwrap_or(n), gamma }
            }
            "quadratic" => {
                let n = n.unwrap_or(20);
                ProblemSpec::Quadratic { n, m: m.unwrap_or(n), gamma }
            }
            "logistic" => ProblemSpec::Logistic {
                path: self
                    .get("dataset")
                    .map(PathBuf::from)
                    .ok_or_else(|| invalid("logistic problems need a dataset"))?,
                gamma,
                label_map: LabelMap::parse(self.get("label-remap").unwrap_or(""))
                    .map_err(|e| invalid(e.to_string()))?,
                n_override: n,
            },
            other => return Err(invalid(format!("unknown problem `{other}`"))),
        };
        let methods = self
            .list("methods")
            .unwrap_or_else(|| DEFAULT_METHODS.to_vec())
            .into_iter()
            .map(MethodSpec::parse)
            .collect::<Result<Vec<_>, _>>()?;
        let epsilons = match self.list("epsilons") {
            Some(items) => items
                .into_iter()
                .map(|e| e.parse::<f64>().map_err(|_| invalid(format!("epsilon `{e}` is not a number"))))
                .collect::<Result<Vec<_>, _>>()?,
            None => DEFAULT_EPSILONS.to_vec(),
        };
        let formats = match self.list("format") {
            Some(items) => {
                let mut f = items.into_iter().map(Format::parse).collect::<Result<Vec<_>, _>>()?;
                f.sort();
                f.dedup();
                f
            }
            None => vec![Format::Csv],
        };
        let plan = ExperimentPlan {
            problem,
            methods,
            epsilons,
            budget_factor: self.parsed("budget-factor")?.unwrap_or(1000),
            seed: self.parsed("seed")?.unwrap_or(0),
            output: self.get("out").map(PathBuf::from),
            formats,
            trace: self.parsed("trace")?.unwrap_or(false),
        };
        plan.validate()?;
        Ok(plan)
    }
}
