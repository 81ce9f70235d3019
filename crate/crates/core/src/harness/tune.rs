//! Parameter tuning: differential evolution over an algorithm's tunable
//! parameters, scoring each setting by the median indicator of a few runs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::indicators::{build_reference_front, Front, Indicator, DEFAULT_HV_SAMPLES};
use crate::objective::{Direction, ObjectiveVector};
use crate::optimizers::{differential_evolution_seeded, DeParams};
use crate::problems::Problem;
use crate::space::{Decision, DecisionSpace, Solution};

use super::experiment::Scorer;
use super::plan::{algorithm_block, AlgorithmSpec};
use super::stats::median;

/// Points sampled from a known true front for scoring.
const TRUE_FRONT_POINTS: usize = 500;

/// Algorithms with a declared tunable parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneTarget {
    Ga,
    De,
    Sa,
    Flash,
}

impl FromStr for TuneTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ga" => Ok(TuneTarget::Ga),
            "de" => Ok(TuneTarget::De),
            "sa" => Ok(TuneTarget::Sa),
            "flash" => Ok(TuneTarget::Flash),
            _ => Err(Error::Unknown {
                what: "tuning target",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for TuneTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuneTarget::Ga => "ga",
            TuneTarget::De => "de",
            TuneTarget::Sa => "sa",
            TuneTarget::Flash => "flash",
        })
    }
}

impl TuneTarget {
    pub const ALL: [TuneTarget; 4] = [
        TuneTarget::Ga,
        TuneTarget::De,
        TuneTarget::Sa,
        TuneTarget::Flash,
    ];

    /// The tunable parameters as a decision space.
    pub fn space(self, inner_budget: usize) -> Result<DecisionSpace> {
        let d = match self {
            TuneTarget::Ga => vec![
                Decision::integer("pop_size", 10, 200),
                Decision::continuous("crossover_prob", 0.0, 1.0),
                Decision::continuous("mutation_prob", 0.0, 1.0),
            ],
            TuneTarget::De => vec![
                Decision::continuous("f", 0.1, 2.0),
                Decision::continuous("cr", 0.0, 1.0),
            ],
            TuneTarget::Sa => vec![
                Decision::continuous("t0", 0.01, 10.0),
                Decision::continuous("alpha", 0.8, 0.999),
                Decision::continuous("neighbor_scale", 0.01, 0.5),
            ],
            TuneTarget::Flash => {
                let hi = (inner_budget.saturating_sub(1)).max(3) as i64;
                vec![
                    Decision::integer("init_samples", 2, hi),
                    Decision::integer("min_leaf", 1, 10),
                ]
            }
        };
        DecisionSpace::new(d)
    }

    /// The algorithm's defaults as a point of [`TuneTarget::space`].
    pub fn defaults(self, problem: &dyn Problem, inner_budget: usize) -> Vec<f64> {
        match self {
            TuneTarget::Ga => vec![100.0, 0.9, 1.0 / problem.space().len() as f64],
            TuneTarget::De => vec![0.75, 0.3],
            TuneTarget::Sa => vec![1.0, 0.99, 0.1],
            TuneTarget::Flash => vec![20f64.min(inner_budget.saturating_sub(1) as f64), 4.0],
        }
    }

    /// Algorithm block for a point of the space. GA population sizes are
    /// rounded up to even and capped by the budget.
    pub fn spec(self, x: &[f64], inner_budget: usize) -> AlgorithmSpec {
        match self {
            TuneTarget::Ga => {
                let cap = (inner_budget - inner_budget % 2).max(4);
                let p = (x[0].round() as usize).clamp(4, cap);
                AlgorithmSpec::Ga {
                    pop_size: Some((p + p % 2).min(cap)),
                    selection: None,
                    crossover_prob: Some(x[1]),
                    mutation_prob: Some(x[2]),
                    sbx_eta: None,
                    pm_eta: None,
                }
            }
            TuneTarget::De => AlgorithmSpec::De {
                np: None,
                f: Some(x[0]),
                cr: Some(x[1]),
                objective: None,
            },
            TuneTarget::Sa => AlgorithmSpec::Sa {
                t0: Some(x[0]),
                alpha: Some(x[1]),
                neighbor_scale: Some(x[2]),
                objective: None,
            },
            TuneTarget::Flash => AlgorithmSpec::Flash {
                init_samples: Some(x[0].round() as usize),
                acquisition: None,
                objective: None,
                epsilon: None,
                min_leaf: Some(x[1].round() as usize),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOptions {
    /// Parameter settings the tuner may try.
    pub meta_budget: usize,
    /// Evaluations per inner run.
    pub inner_budget: usize,
    /// Inner runs per setting; their seeds are shared by every setting.
    pub inner_repeats: usize,
    pub indicator: Indicator,
    pub seed: u64,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            meta_budget: 40,
            inner_budget: 2000,
            inner_repeats: 3,
            indicator: Indicator::Igd,
            seed: 0,
        }
    }
}

impl TuneOptions {
    /// Seeds of the inner runs.
    pub fn inner_seeds(&self) -> Vec<u64> {
        (1..=self.inner_repeats as u64)
            .map(|i| self.seed.wrapping_add(i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub target: String,
    pub spec: AlgorithmSpec,
    /// Median indicator value of the best setting on the inner seeds.
    pub score: f64,
    pub default_score: f64,
    pub indicator: Indicator,
    pub meta_evals: usize,
}

impl TuneResult {
    /// The tuned setting as a `[algorithms.<name>]` block, preceded by comments.
    pub fn to_block(&self, name: &str, problem: &str) -> String {
        format!(
            "# tuned {} on {problem}: median {} {} (defaults {}) after {} settings\n{}",
            self.target,
            self.indicator,
            self.score,
            self.default_score,
            self.meta_evals,
            algorithm_block(name, &self.spec)
        )
    }
}

/// Scores settings of one algorithm on one problem.
pub struct Objective<'p> {
    problem: &'p dyn Problem,
    scorer: Scorer,
    opts: TuneOptions,
}

impl<'p> Objective<'p> {
    /// Uses the problem's true front when known; otherwise the union of the
    /// baseline setting's and random search's fronts on the inner seeds.
    pub fn new(
        problem: &'p dyn Problem,
        baseline: &AlgorithmSpec,
        opts: TuneOptions,
    ) -> Result<Self> {
        let reference = match problem.true_front(TRUE_FRONT_POINTS) {
            Some(points) => Front::new(points)?,
            None => {
                let mut fronts = Vec::new();
                let random = AlgorithmSpec::Random {
                    without_replacement: None,
                };
                for spec in [baseline, &random] {
                    for &s in &opts.inner_seeds() {
                        if let Ok(r) = spec.run(problem, opts.inner_budget, s) {
                            fronts.push(Front::new(r.front())?);
                        }
                    }
                }
                build_reference_front(&fronts)?
            }
        };
        Ok(Self {
            problem,
            scorer: Scorer::new(&reference)?,
            opts,
        })
    }

    /// Median indicator over the inner seeds, oriented so lower is better.
    pub fn score(&self, spec: &AlgorithmSpec) -> Result<f64> {
        let sign = if self.opts.indicator.higher_is_better() {
            -1.0
        } else {
            1.0
        };
        let mut values = Vec::with_capacity(self.opts.inner_repeats);
        for s in self.opts.inner_seeds() {
            let r = spec.run(self.problem, self.opts.inner_budget, s)?;
            let v = self
                .scorer
                .score(&r.front(), &[self.opts.indicator], DEFAULT_HV_SAMPLES, s)?;
            let value = v
                .first()
                .map(|p| p.1)
                .ok_or_else(|| Error::param("indicator undefined for this front"))?;
            values.push(sign * value);
        }
        median(&values)
    }
}

type SpecFn<'a> = dyn Fn(&[f64]) -> AlgorithmSpec + Sync + 'a;

struct MetaProblem<'a, 'p> {
    objective: &'a Objective<'p>,
    to_spec: &'a SpecFn<'a>,
    space: DecisionSpace,
    directions: [Direction; 1],
}

impl Problem for MetaProblem<'_, '_> {
    fn name(&self) -> String {
        "tune".into()
    }

    fn space(&self) -> &DecisionSpace {
        &self.space
    }

    fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// Settings whose runs fail score as the worst finite value.
    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector> {
        let s = self
            .objective
            .score(&(self.to_spec)(&solution.to_f64()))
            .unwrap_or(f64::MAX);
        ObjectiveVector::minimize(vec![s])
    }
}

/// Tunes `target` on `problem` over its declared parameter space.
pub fn tune(target: TuneTarget, problem: &dyn Problem, opts: &TuneOptions) -> Result<TuneResult> {
    let space = target.space(opts.inner_budget)?;
    let defaults = target.defaults(problem, opts.inner_budget);
    let budget = opts.inner_budget;
    tune_space(
        &target.to_string(),
        space,
        &defaults,
        &|x| target.spec(x, budget),
        problem,
        opts,
    )
}

/// Tunes an arbitrary parameter space; `to_spec` maps a point to the
/// algorithm block it stands for. The first member of the DE population is
/// `defaults`, so the result never scores worse than the defaults on the
/// inner seeds.
pub fn tune_space(
    target: &str,
    space: DecisionSpace,
    defaults: &[f64],
    to_spec: &SpecFn<'_>,
    problem: &dyn Problem,
    opts: &TuneOptions,
) -> Result<TuneResult> {
    if opts.inner_repeats < 3 {
        return Err(Error::param("tuning needs at least 3 inner repeats"));
    }
    let de = DeParams::default();
    let np = de.resolve_np(space.len(), opts.meta_budget);
    if opts.meta_budget < np {
        return Err(Error::param(format!(
            "meta budget {} is below the tuner's population of {np} settings",
            opts.meta_budget
        )));
    }
    let baseline = to_spec(defaults);
    let objective = Objective::new(problem, &baseline, *opts)?;
    let meta = MetaProblem {
        objective: &objective,
        to_spec,
        space,
        directions: [Direction::Minimize],
    };
    let r = differential_evolution_seeded(
        &meta,
        opts.meta_budget,
        &de,
        opts.seed,
        0,
        &[defaults.to_vec()],
    )?;
    let best = &r.archive.members()[0];
    let sign = if opts.indicator.higher_is_better() {
        -1.0
    } else {
        1.0
    };
    let default_score = objective.score(&baseline)?;
    Ok(TuneResult {
        target: target.to_string(),
        spec: to_spec(&best.solution.to_f64()),
        score: sign * best.objectives.canonical()[0],
        default_score: sign * default_score,
        indicator: opts.indicator,
        meta_evals: r.evals_used,
    })
}
