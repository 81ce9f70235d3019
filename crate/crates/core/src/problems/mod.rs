//! Benchmark problems and the budgeted evaluator every optimizer goes through.

pub mod feature_model;
pub mod goals;
pub mod spl;
pub mod synthetic;
pub mod tabular;

use std::path::Path;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::objective::{Direction, EvaluatedSolution, ObjectiveVector};
use crate::space::{DecisionSpace, Solution};

pub use feature_model::{count_violations, parse_feature_model, FeatureModel, Product};
pub use goals::{goal_metrics, ConfusionCounts, GoalMetrics};
pub use spl::{mobile_phone_problem, FeatureAttributes, ProductAttributes, SplProblem};
pub use synthetic::{Dtlz2, Sphere, Zdt, ZdtVariant};
pub use tabular::{load_tabular, TabularSpace};

/// A fitness function over a decision space. `evaluate` must be deterministic.
pub trait Problem: Send + Sync {
    fn name(&self) -> String;

    fn space(&self) -> &DecisionSpace;

    fn directions(&self) -> &[Direction];

    fn num_objectives(&self) -> usize {
        self.directions().len()
    }

    /// Uncounted evaluation. Optimizers go through [`Evaluator`] instead.
    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector>;

    /// The finite candidate pool, for problems defined over one.
    fn pool(&self) -> Option<&[Solution]> {
        None
    }

    /// Samples of the analytic Pareto front in canonical form, when known.
    fn true_front(&self, _points: usize) -> Option<Vec<Vec<f64>>> {
        None
    }

    /// `builtin` or `file`.
    fn source(&self) -> &'static str {
        "builtin"
    }
}

/// Budget-counted evaluation for one run. Assigns 1-based eval indices.
pub struct Evaluator<'p> {
    problem: &'p dyn Problem,
    budget: Budget,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p dyn Problem, max_evals: usize) -> Result<Self> {
        Ok(Self {
            problem,
            budget: Budget::new(max_evals)?,
        })
    }

    pub fn problem(&self) -> &'p dyn Problem {
        self.problem
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn used(&self) -> usize {
        self.budget.used()
    }

    pub fn remaining(&self) -> usize {
        self.budget.remaining()
    }

    pub fn is_exhausted(&self) -> bool {
        self.budget.is_exhausted()
    }

    /// Validates `solution`, claims one evaluation and evaluates it.
    pub fn evaluate(&mut self, solution: Solution) -> Result<EvaluatedSolution> {
        self.problem.space().validate(&solution)?;
        self.budget.try_consume()?;
        let objectives = self.problem.evaluate(&solution)?;
        Ok(EvaluatedSolution {
            solution,
            objectives,
            eval_index: self.budget.used(),
        })
    }
}

/// A catalog entry for listing.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInfo {
    pub name: String,
    pub decisions: String,
    pub num_objectives: String,
    pub source: String,
}

impl ProblemInfo {
    pub fn of(problem: &dyn Problem) -> Self {
        let mut decisions = problem.space().describe();
        if let Some(pool) = problem.pool() {
            decisions.push_str(&format!(" ({} rows)", pool.len()));
        }
        Self {
            name: problem.name(),
            decisions,
            num_objectives: problem.num_objectives().to_string(),
            source: problem.source().to_string(),
        }
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["zdt1", "zdt3", "dtlz2", "sphere", "spl:mobile_phone"];

/// The catalog shown on a fresh install, including file-backed templates.
pub fn catalog() -> Vec<ProblemInfo> {
    let mut out: Vec<ProblemInfo> = BUILTIN_NAMES
        .iter()
        .map(|n| {
            ProblemInfo::of(
                builtin(n, None, None)
                    .expect("builtin problems construct")
                    .as_ref(),
            )
        })
        .collect();
    out.push(ProblemInfo {
        name: "spl:<model>".into(),
        decisions: "Nx boolean".into(),
        num_objectives: "5".into(),
        source: "file".into(),
    });
    out.push(ProblemInfo {
        name: "tabular:<file>".into(),
        decisions: "from CSV header".into(),
        num_objectives: "m".into(),
        source: "file".into(),
    });
    out
}

/// Built-in problems by name with optional size overrides (`n` decisions,
/// `m` objectives). Defaults: zdt1/zdt3 n=30; dtlz2 n=12, m=3; sphere n=5, m=2.
pub fn builtin(name: &str, n: Option<usize>, m: Option<usize>) -> Result<Box<dyn Problem>> {
    Ok(match name {
        "zdt1" => Box::new(Zdt::new(ZdtVariant::One, n.unwrap_or(30))?),
        "zdt3" => Box::new(Zdt::new(ZdtVariant::Three, n.unwrap_or(30))?),
        "dtlz2" => Box::new(Dtlz2::new(n.unwrap_or(12), m.unwrap_or(3))?),
        "sphere" => Box::new(Sphere::new(n.unwrap_or(5), m.unwrap_or(2))?),
        "spl:mobile_phone" => Box::new(spl::mobile_phone_problem()?),
        _ => {
            return Err(Error::Unknown {
                what: "problem",
                name: name.to_string(),
            })
        }
    })
}

/// SPL problem from a model file and an attribute CSV.
pub fn spl_from_files(model: &Path, attrs: &Path) -> Result<SplProblem> {
    let text = std::fs::read_to_string(model).map_err(|e| Error::io(model, e))?;
    let fm = parse_feature_model(&text)?;
    let attributes = ProductAttributes::read_file(&fm, attrs)?;
    let name = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    SplProblem::new(format!("spl:{name}"), fm, attributes)
}
