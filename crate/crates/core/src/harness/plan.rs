//! Experiment plans: problems x algorithms x repeats, read from TOML.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flash::{flash, Acquisition, FlashParams};
use crate::indicators::Indicator;
use crate::optimizers::{
    differential_evolution, ga_multiobjective, random_search, simulated_annealing, DeParams,
    GaParams, RandomParams, RunResult, SaParams, Selection,
};
use crate::problems::{builtin, load_tabular, mobile_phone_problem, spl_from_files, Problem};
use crate::sway::{sway, Distance, Representatives, SwayParams};

pub const RECOMMENDED_REPEATS: usize = 30;

fn default_repeats() -> usize {
    RECOMMENDED_REPEATS
}

fn default_indicators() -> Vec<Indicator> {
    vec![Indicator::Igd, Indicator::Hv, Indicator::Spread]
}

/// One problem block, `[problems.<name>]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Zdt1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Zdt3 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Dtlz2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Sphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    /// A feature model file plus attribute CSV; without them, the built-in
    /// mobile phone model.
    Spl {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        attributes: Option<PathBuf>,
    },
    Tabular {
        path: PathBuf,
        objectives: usize,
    },
}

impl ProblemSpec {
    /// Builds the problem; relative paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Box<dyn Problem>> {
        let at = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        match self {
            ProblemSpec::Zdt1 { n } => builtin("zdt1", *n, None),
            ProblemSpec::Zdt3 { n } => builtin("zdt3", *n, None),
            ProblemSpec::Dtlz2 { n, m } => builtin("dtlz2", *n, *m),
            ProblemSpec::Sphere { n, m } => builtin("sphere", *n, *m),
            ProblemSpec::Spl {
                model: None,
                attributes: None,
            } => Ok(Box::new(mobile_phone_problem()?)),
            ProblemSpec::Spl {
                model: Some(m),
                attributes: Some(a),
            } => Ok(Box::new(spl_from_files(&at(m), &at(a))?)),
            ProblemSpec::Spl { .. } => Err(Error::Plan(
                "spl problems need both `model` and `attributes`, or neither".into(),
            )),
            ProblemSpec::Tabular { path, objectives } => {
                Ok(Box::new(load_tabular(at(path), *objectives)?))
            }
        }
    }
}

/// One algorithm block, `[algorithms.<name>]`. Unset fields take the
/// algorithm's defaults. `objective` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        without_replacement: Option<bool>,
    },
    Sa {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        neighbor_scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        objective: Option<usize>,
    },
    De {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        np: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cr: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        objective: Option<usize>,
    },
    Ga {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pop_size: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        selection: Option<Selection>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        crossover_prob: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mutation_prob: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sbx_eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pm_eta: Option<f64>,
    },
    Sway {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_size: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        enough: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distance: Option<Distance>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        representatives: Option<Representatives>,
    },
    Flash {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init_samples: Option<usize>,
        /// `dominance_count` (default) or `single_objective_min`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        acquisition: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        objective: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_leaf: Option<usize>,
    },
}

fn objective_index(objective: Option<usize>) -> Result<usize> {
    match objective {
        None => Ok(0),
        Some(0) => Err(Error::Plan(
            "`objective` is 1-based; 0 is not an objective".into(),
        )),
        Some(k) => Ok(k - 1),
    }
}

impl AlgorithmSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AlgorithmSpec::Random { .. } => "random",
            AlgorithmSpec::Sa { .. } => "sa",
            AlgorithmSpec::De { .. } => "de",
            AlgorithmSpec::Ga { .. } => "ga",
            AlgorithmSpec::Sway { .. } => "sway",
            AlgorithmSpec::Flash { .. } => "flash",
        }
    }

    /// Checks settings that do not depend on the problem.
    pub fn check(&self) -> Result<()> {
        match self {
            AlgorithmSpec::Sa { objective, .. } | AlgorithmSpec::De { objective, .. } => {
                objective_index(*objective).map(drop)
            }
            AlgorithmSpec::Ga {
                pop_size: Some(p), ..
            } if *p < 4 || p % 2 != 0 => Err(Error::Plan(format!(
                "pop_size must be even and at least 4, got {p}"
            ))),
            AlgorithmSpec::Flash {
                acquisition,
                objective,
                ..
            } => self
                .acquisition(acquisition.as_deref(), *objective, None)
                .map(drop),
            _ => Ok(()),
        }
    }

    fn acquisition(
        &self,
        name: Option<&str>,
        objective: Option<usize>,
        epsilon: Option<f64>,
    ) -> Result<Acquisition> {
        match name.unwrap_or("dominance_count") {
            "dominance_count" => Ok(Acquisition::DominanceCount),
            "single_objective_min" => Ok(Acquisition::SingleObjectiveMin {
                objective: objective_index(objective)?,
                epsilon: epsilon.unwrap_or(0.05),
            }),
            other => Err(Error::Unknown {
                what: "acquisition",
                name: other.to_string(),
            }),
        }
    }

    /// Runs this algorithm once.
    pub fn run(&self, problem: &dyn Problem, budget: usize, seed: u64) -> Result<RunResult> {
        match self {
            AlgorithmSpec::Random {
                without_replacement,
            } => random_search(
                problem,
                budget,
                &RandomParams {
                    without_replacement: without_replacement.unwrap_or(false),
                },
                seed,
            ),
            AlgorithmSpec::Sa {
                t0,
                alpha,
                neighbor_scale,
                objective,
            } => {
                let d = SaParams::default();
                let params = SaParams {
                    t0: t0.unwrap_or(d.t0),
                    alpha: alpha.unwrap_or(d.alpha),
                    neighbor_scale: neighbor_scale.unwrap_or(d.neighbor_scale),
                };
                simulated_annealing(problem, budget, &params, seed, objective_index(*objective)?)
            }
            AlgorithmSpec::De {
                np,
                f,
                cr,
                objective,
            } => {
                let d = DeParams::default();
                let params = DeParams {
                    np: *np,
                    f: f.unwrap_or(d.f),
                    cr: cr.unwrap_or(d.cr),
                };
                differential_evolution(problem, budget, &params, seed, objective_index(*objective)?)
            }
            AlgorithmSpec::Ga {
                pop_size,
                selection,
                crossover_prob,
                mutation_prob,
                sbx_eta,
                pm_eta,
            } => {
                let d = GaParams::default();
                let params = GaParams {
                    pop_size: pop_size.unwrap_or(d.pop_size),
                    selection: selection.unwrap_or(d.selection),
                    crossover_prob: crossover_prob.unwrap_or(d.crossover_prob),
                    mutation_prob: mutation_prob.or(d.mutation_prob),
                    sbx_eta: sbx_eta.unwrap_or(d.sbx_eta),
                    pm_eta: pm_eta.unwrap_or(d.pm_eta),
                };
                ga_multiobjective(problem, budget, &params, seed)
            }
            AlgorithmSpec::Sway {
                initial_size,
                enough,
                distance,
                representatives,
            } => {
                let d = SwayParams::default();
                let params = SwayParams {
                    initial_size: initial_size.unwrap_or(d.initial_size),
                    enough: *enough,
                    distance: *distance,
                    representatives: representatives.unwrap_or(d.representatives),
                };
                sway(problem, &params, budget, seed)
            }
            AlgorithmSpec::Flash {
                init_samples,
                acquisition,
                objective,
                epsilon,
                min_leaf,
            } => {
                let d = FlashParams::default();
                let params = FlashParams {
                    init_samples: init_samples.unwrap_or(d.init_samples),
                    budget,
                    acquisition: self.acquisition(acquisition.as_deref(), *objective, *epsilon)?,
                    min_leaf: min_leaf.unwrap_or(d.min_leaf),
                    // plans already run in parallel across runs
                    exec: crate::Exec::Sequential,
                };
                flash(problem, &params, seed)
            }
        }
    }
}

/// A full experiment. Problems and algorithms keep their file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Evaluations per run.
    pub budget: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_indicators")]
    pub indicators: Vec<Indicator>,
    /// Monte Carlo samples for hypervolume with four or more objectives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hv_samples: Option<usize>,
    pub problems: IndexMap<String, ProblemSpec>,
    pub algorithms: IndexMap<String, AlgorithmSpec>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// One scheduled run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSpec {
    pub problem: String,
    pub algorithm: String,
    pub repeat: usize,
    pub seed: u64,
}

/// 1-based line of the first line that starts with `needle`, if any.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.lines()
        .position(|l| l.trim_start().starts_with(needle))
        .map(|i| i + 1)
}

impl ExperimentPlan {
    /// Parses and validates a plan. Messages carry the line of the offending
    /// table where it can be found.
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut plan: ExperimentPlan =
            toml::from_str(text).map_err(|e| Error::Plan(e.to_string().trim_end().to_string()))?;
        plan.base_dir = base_dir.into();
        plan.validate().map_err(|(table, e)| {
            let msg = match e {
                Error::Plan(m) => m,
                other => other.to_string(),
            };
            match table.as_deref().and_then(|t| line_of(text, t)) {
                Some(line) => Error::Plan(format!("line {line}: {msg}")),
                None => Error::Plan(msg),
            }
        })?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| match e {
            Error::Plan(m) => Error::Plan(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> std::result::Result<(), (Option<String>, Error)> {
        let top = |m: &str| (Some("budget".to_string()), Error::Plan(m.to_string()));
        if self.budget == 0 {
            return Err(top("budget must be at least 1"));
        }
        if self.repeats == 0 {
            return Err((
                Some("repeats".into()),
                Error::Plan("repeats must be at least 1".into()),
            ));
        }
        if self.indicators.is_empty() {
            return Err((
                Some("indicators".into()),
                Error::Plan("indicators must not be empty".into()),
            ));
        }
        if self.problems.is_empty() || self.algorithms.is_empty() {
            return Err(top("a plan needs at least one problem and one algorithm"));
        }
        if self.hv_samples == Some(0) {
            return Err((
                Some("hv_samples".into()),
                Error::Plan("hv_samples must be positive".into()),
            ));
        }
        for (name, spec) in &self.algorithms {
            spec.check()
                .map_err(|e| (Some(format!("[algorithms.{name}]")), e))?;
        }
        for (name, spec) in &self.problems {
            if let ProblemSpec::Tabular { objectives: 0, .. } = spec {
                return Err((
                    Some(format!("[problems.{name}]")),
                    Error::Plan("objectives must be at least 1".into()),
                ));
            }
        }
        self.runs()
            .map(drop)
            .map_err(|e| (Some("base_seed".into()), e))
    }

    /// Every run in plan order (problem, then algorithm, then repeat) with
    /// seed `base_seed + i`.
    pub fn runs(&self) -> Result<Vec<RunSpec>> {
        let mut out =
            Vec::with_capacity(self.problems.len() * self.algorithms.len() * self.repeats);
        let mut seen = HashSet::new();
        for p in self.problems.keys() {
            for a in self.algorithms.keys() {
                for repeat in 0..self.repeats {
                    let seed = self.base_seed.wrapping_add(out.len() as u64);
                    if !seen.insert(seed) {
                        return Err(Error::Plan(format!("seed {seed} would be used twice")));
                    }
                    out.push(RunSpec {
                        problem: p.clone(),
                        algorithm: a.clone(),
                        repeat,
                        seed,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Warnings to stamp on every report.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.repeats < RECOMMENDED_REPEATS {
            w.push(format!(
                "only {} repeats per algorithm; at least {RECOMMENDED_REPEATS} are recommended",
                self.repeats
            ));
        }
        w
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plans serialize")
    }
}

/// A single `[algorithms.<name>]` block in plan syntax.
pub fn algorithm_block(name: &str, spec: &AlgorithmSpec) -> String {
    #[derive(Serialize)]
    struct Wrap<'a> {
        algorithms: IndexMap<&'a str, &'a AlgorithmSpec>,
    }
    let mut algorithms = IndexMap::new();
    algorithms.insert(name, spec);
    toml::to_string(&Wrap { algorithms }).expect("algorithm blocks serialize")
}

/// Parses a file holding only `[algorithms.*]` blocks.
pub fn parse_algorithm_blocks(text: &str) -> Result<IndexMap<String, AlgorithmSpec>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Wrap {
        algorithms: IndexMap<String, AlgorithmSpec>,
    }
    let w: Wrap =
        toml::from_str(text).map_err(|e| Error::Plan(e.to_string().trim_end().to_string()))?;
    for spec in w.algorithms.values() {
        spec.check()?;
    }
    Ok(w.algorithms)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = r#"
budget = 500
repeats = 3
base_seed = 40
indicators = ["igd", "hv"]

[problems.zdt1]
type = "zdt1"
n = 6

[problems.phone]
type = "spl"

[algorithms.rand]
type = "random"

[algorithms.ga]
type = "ga"
pop_size = 20
selection = "binary_dom"
"#;

    #[test]
    fn parses_in_file_order() {
        let p = ExperimentPlan::parse(PLAN, ".").unwrap();
        assert_eq!(p.problems.keys().collect::<Vec<_>>(), ["zdt1", "phone"]);
        assert_eq!(p.algorithms.keys().collect::<Vec<_>>(), ["rand", "ga"]);
        assert_eq!(p.problems["zdt1"], ProblemSpec::Zdt1 { n: Some(6) });
        assert_eq!(p.indicators, vec![Indicator::Igd, Indicator::Hv]);
        assert_eq!(p.warnings().len(), 1);
    }

    #[test]
    fn seeds_are_distinct_and_sequential() {
        let p = ExperimentPlan::parse(PLAN, ".").unwrap();
        let runs = p.runs().unwrap();
        assert_eq!(runs.len(), 2 * 2 * 3);
        assert!(runs
            .iter()
            .enumerate()
            .all(|(i, r)| r.seed == 40 + i as u64));
        assert_eq!(
            (
                runs[4].problem.as_str(),
                runs[4].algorithm.as_str(),
                runs[4].repeat
            ),
            ("zdt1", "ga", 1)
        );
    }

    #[test]
    fn round_trips() {
        let p = ExperimentPlan::parse(PLAN, ".").unwrap();
        assert_eq!(ExperimentPlan::parse(&p.to_toml(), ".").unwrap(), p);
        let block = algorithm_block("ga", &p.algorithms["ga"]);
        let back = parse_algorithm_blocks(&block).unwrap();
        assert_eq!(back["ga"], p.algorithms["ga"]);
    }

    #[test]
    fn errors_point_at_lines() {
        let bad = PLAN.replace("pop_size = 20", "pop_size = 7");
        let e = ExperimentPlan::parse(&bad, ".").unwrap_err().to_string();
        assert!(e.contains("line 17"), "{e}");
        let unknown = PLAN.replace("n = 6", "n = 6\nwidth = 3");
        let e = ExperimentPlan::parse(&unknown, ".")
            .unwrap_err()
            .to_string();
        assert!(e.contains("width") && e.contains("line"), "{e}");
        let typo = PLAN.replace("type = \"random\"", "type = \"randm\"");
        assert!(ExperimentPlan::parse(&typo, ".").is_err());
        assert!(ExperimentPlan::parse("budget = 0\n[problems]\n[algorithms]\n", ".").is_err());
        let wrapped = PLAN.replace("base_seed = 40", &format!("base_seed = {}", i64::MAX));
        assert!(ExperimentPlan::parse(&wrapped, ".").is_ok());
    }

    #[test]
    fn specs_run() {
        let p = ExperimentPlan::parse(PLAN, ".").unwrap();
        let zdt = p.problems["zdt1"].build(Path::new(".")).unwrap();
        for spec in p.algorithms.values() {
            let r = spec.run(zdt.as_ref(), 100, 1).unwrap();
            assert_eq!(r.evals_used, 100);
        }
    }
}
