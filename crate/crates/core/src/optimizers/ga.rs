use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::objective::EvaluatedSolution;
use crate::pareto::{
    dominates_values, epsilon_unchecked, indicator_fitnesses, nondominated_indices,
    normalize_front, ParetoArchive, DEFAULT_KAPPA,
};
use crate::problems::{Evaluator, Problem};
use crate::rng::SeededRng;
use crate::Exec;

use super::variation::{crossover, mutate};
use super::{config, RunResult, Snapshot, TraceBuf};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Pareto dominance decides tournaments; incomparable pairs are a coin flip.
    BinaryDom,
    /// Higher indicator fitness wins.
    #[default]
    IndicatorDom,
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::BinaryDom => "binary_dom",
            Selection::IndicatorDom => "indicator_dom",
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary_dom" | "binary" | "bdom" => Ok(Selection::BinaryDom),
            "indicator_dom" | "indicator" | "idom" => Ok(Selection::IndicatorDom),
            _ => Err(Error::Unknown {
                what: "selection",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub pop_size: usize,
    pub selection: Selection,
    pub crossover_prob: f64,
    /// Per-decision mutation rate; `None` means `1 / dims`.
    pub mutation_prob: Option<f64>,
    pub sbx_eta: f64,
    pub pm_eta: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            pop_size: 100,
            selection: Selection::IndicatorDom,
            crossover_prob: 0.9,
            mutation_prob: None,
            sbx_eta: 20.0,
            pm_eta: 20.0,
        }
    }
}

impl GaParams {
    fn validate(&self, budget: usize) -> Result<()> {
        if self.pop_size < 4 || !self.pop_size.is_multiple_of(2) {
            return Err(Error::param(format!(
                "GA pop_size must be even and at least 4, got {}",
                self.pop_size
            )));
        }
        if self.pop_size > budget {
            return Err(Error::param(format!(
                "GA pop_size {} exceeds the budget of {budget} evaluations",
                self.pop_size
            )));
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.crossover_prob) || !self.mutation_prob.is_none_or(unit) {
            return Err(Error::param("GA probabilities must be in [0, 1]"));
        }
        if !(self.sbx_eta >= 0.0 && self.pm_eta >= 0.0) {
            return Err(Error::param("GA distribution indices must be non-negative"));
        }
        Ok(())
    }
}

/// Generational elitist GA. The returned archive holds every non-dominated
/// evaluation seen during the run, and the trace one archive snapshot per
/// generation.
pub fn ga_multiobjective(
    problem: &dyn Problem,
    budget: usize,
    params: &GaParams,
    seed: u64,
) -> Result<RunResult> {
    params.validate(budget)?;
    if problem.num_objectives() < 2 {
        return Err(Error::param(
            "the multi-objective GA needs at least two objectives",
        ));
    }
    let space = problem.space();
    let rate = params.mutation_prob.unwrap_or(1.0 / space.len() as f64);
    let mut rng = SeededRng::new(seed);
    let mut eval = Evaluator::new(problem, budget)?;
    let mut archive = ParetoArchive::new();
    let mut trace = TraceBuf::default();

    let mut pop = Vec::with_capacity(params.pop_size);
    for _ in 0..params.pop_size {
        let e = eval.evaluate(space.sample(&mut rng))?;
        archive.insert(e.clone());
        pop.push(e);
    }
    trace.record(eval.used(), Snapshot::Archive(archive.points()));

    while !eval.is_exhausted() {
        let fitness = match params.selection {
            Selection::IndicatorDom => normalized_fitness(&pop)?,
            Selection::BinaryDom => Vec::new(),
        };
        let want = params.pop_size.min(eval.remaining());
        let mut offspring = Vec::with_capacity(want);
        while offspring.len() < want {
            let a = tournament(&pop, &fitness, params.selection, &mut rng);
            let b = tournament(&pop, &fitness, params.selection, &mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < params.crossover_prob {
                crossover(
                    space,
                    &pop[a].solution,
                    &pop[b].solution,
                    params.sbx_eta,
                    &mut rng,
                )
            } else {
                (pop[a].solution.clone(), pop[b].solution.clone())
            };
            mutate(space, &mut c1, rate, params.pm_eta, &mut rng);
            mutate(space, &mut c2, rate, params.pm_eta, &mut rng);
            for child in [c1, c2] {
                if offspring.len() < want {
                    let e = eval.evaluate(child)?;
                    archive.insert(e.clone());
                    offspring.push(e);
                }
            }
        }
        pop.extend(offspring);
        pop = survivors(pop, params.pop_size, &mut rng)?;
        trace.record(eval.used(), Snapshot::Archive(archive.points()));
    }

    Ok(RunResult {
        archive,
        evals_used: eval.used(),
        trace: trace.into_entries(),
        config: config([
            ("algorithm", "ga".into()),
            ("budget", budget.to_string()),
            ("pop_size", params.pop_size.to_string()),
            ("selection", params.selection.to_string()),
            ("crossover_prob", params.crossover_prob.to_string()),
            ("mutation_prob", rate.to_string()),
            ("sbx_eta", params.sbx_eta.to_string()),
            ("pm_eta", params.pm_eta.to_string()),
        ]),
        seed,
        truncated: false,
    })
}

fn normalized_fitness(pop: &[EvaluatedSolution]) -> Result<Vec<f64>> {
    let norm = normalize_front(pop, None)?;
    indicator_fitnesses(&norm, DEFAULT_KAPPA)
}

/// Binary tournament over two uniformly drawn members; returns the winner's index.
pub(crate) fn tournament<R: Rng + ?Sized>(
    pop: &[EvaluatedSolution],
    fitness: &[f64],
    selection: Selection,
    rng: &mut R,
) -> usize {
    let i = rng.random_range(0..pop.len());
    let j = rng.random_range(0..pop.len());
    let coin = rng.random_bool(0.5);
    match selection {
        Selection::BinaryDom => {
            let (u, v) = (pop[i].objectives.canonical(), pop[j].objectives.canonical());
            if dominates_values(u, v) {
                i
            } else if dominates_values(v, u) {
                j
            } else if coin {
                i
            } else {
                j
            }
        }
        Selection::IndicatorDom => match fitness[i].total_cmp(&fitness[j]) {
            std::cmp::Ordering::Greater => i,
            std::cmp::Ordering::Less => j,
            std::cmp::Ordering::Equal if coin => i,
            std::cmp::Ordering::Equal => j,
        },
    }
}

/// Keeps the non-dominated members first. When they alone exceed `size`, the
/// member with the lowest indicator fitness is removed one at a time with
/// fitness updated after each removal; otherwise the rest is filled by
/// indicator fitness over the whole set. Ties go to a random draw.
fn survivors<R: Rng + ?Sized>(
    combined: Vec<EvaluatedSolution>,
    size: usize,
    rng: &mut R,
) -> Result<Vec<EvaluatedSolution>> {
    if combined.len() <= size {
        return Ok(combined);
    }
    let norm = normalize_front(&combined, None)?;
    let nd = nondominated_indices(&combined, Exec::Sequential)?;
    let tiebreak: Vec<u64> = (0..combined.len()).map(|_| rng.random()).collect();
    let keep: Vec<usize> = if nd.len() >= size {
        let mut alive = nd;
        let sub: Vec<&Vec<f64>> = alive.iter().map(|&i| &norm[i]).collect();
        let mut fit = indicator_fitnesses(&sub, DEFAULT_KAPPA)?;
        while alive.len() > size {
            let worst = (0..alive.len())
                .min_by(|&a, &b| {
                    fit[a]
                        .total_cmp(&fit[b])
                        .then(tiebreak[alive[a]].cmp(&tiebreak[alive[b]]))
                })
                .expect("non-empty");
            let gone = alive.remove(worst);
            fit.remove(worst);
            for (k, &i) in alive.iter().enumerate() {
                fit[k] += (-epsilon_unchecked(&norm[gone], &norm[i]) / DEFAULT_KAPPA).exp();
            }
        }
        alive
    } else {
        let fit = indicator_fitnesses(&norm, DEFAULT_KAPPA)?;
        let mut in_front = vec![false; combined.len()];
        for &i in &nd {
            in_front[i] = true;
        }
        let mut rest: Vec<usize> = (0..combined.len()).filter(|&i| !in_front[i]).collect();
        rest.sort_by(|&a, &b| {
            fit[b]
                .total_cmp(&fit[a])
                .then(tiebreak[a].cmp(&tiebreak[b]))
        });
        let mut keep = nd;
        keep.extend(rest.into_iter().take(size - keep.len()));
        keep.sort_unstable();
        keep
    };
    let mut slots: Vec<Option<EvaluatedSolution>> = combined.into_iter().map(Some).collect();
    Ok(keep
        .into_iter()
        .map(|i| slots[i].take().expect("distinct indices"))
        .collect())
}
