use rand::Rng;

use crate::error::{Error, Result};
use crate::objective::EvaluatedSolution;
use crate::problems::{Evaluator, Problem};
use crate::rng::SeededRng;
use crate::space::DecisionKind;

use super::{check_objective, config, single_archive, RunResult, Snapshot, TraceBuf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParams {
    /// Population size; `None` resolves to `min(10 * dims, budget / 10)`, at least 4.
    pub np: Option<usize>,
    pub f: f64,
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            np: None,
            f: 0.75,
            cr: 0.3,
        }
    }
}

impl DeParams {
    pub fn resolve_np(&self, dims: usize, budget: usize) -> usize {
        self.np
            .unwrap_or_else(|| (10 * dims).min(budget / 10).max(4))
    }
}

/// DE/rand/1/bin on one objective. Integer decisions are rounded and clamped,
/// out-of-range continuous coordinates clamped. Runs until the budget is spent.
pub fn differential_evolution(
    problem: &dyn Problem,
    budget: usize,
    params: &DeParams,
    seed: u64,
    objective_index: usize,
) -> Result<RunResult> {
    differential_evolution_seeded(problem, budget, params, seed, objective_index, &[])
}

/// As [`differential_evolution`], with some initial members given as real
/// vectors (one entry per decision).
pub(crate) fn differential_evolution_seeded(
    problem: &dyn Problem,
    budget: usize,
    params: &DeParams,
    seed: u64,
    objective_index: usize,
    initial: &[Vec<f64>],
) -> Result<RunResult> {
    check_objective(objective_index, problem.num_objectives())?;
    let space = problem.space();
    if let Some(d) = space.decisions().iter().find(|d| {
        !matches!(
            d.kind,
            DecisionKind::Continuous { .. } | DecisionKind::Integer { .. }
        )
    }) {
        return Err(Error::param(format!(
            "differential evolution needs continuous or integer decisions; `{}` is {}",
            d.name,
            d.kind.label()
        )));
    }
    if !(params.f > 0.0 && params.f <= 2.0) && params.f != 0.0 {
        return Err(Error::param("DE f must be in (0, 2]"));
    }
    if !(0.0..=1.0).contains(&params.cr) {
        return Err(Error::param("DE cr must be in [0, 1]"));
    }
    let dims = space.len();
    let np = params.resolve_np(dims, budget);
    if np < 4 {
        return Err(Error::param("DE population must be at least 4"));
    }
    if np > budget {
        return Err(Error::param(format!(
            "DE population {np} exceeds the budget of {budget} evaluations"
        )));
    }

    let mut rng = SeededRng::new(seed);
    let mut eval = Evaluator::new(problem, budget)?;
    let mut trace = TraceBuf::default();
    let value = |e: &EvaluatedSolution| e.objectives.canonical()[objective_index];

    let mut pop: Vec<EvaluatedSolution> = Vec::with_capacity(np);
    for i in 0..np {
        let s = match initial.get(i) {
            Some(x) => space.repair(x),
            None => space.sample(&mut rng),
        };
        pop.push(eval.evaluate(s)?);
    }
    let mut best = pop
        .iter()
        .min_by(|a, b| value(a).total_cmp(&value(b)))
        .cloned()
        .expect("population is non-empty");
    trace.record(
        eval.used(),
        Snapshot::Best(best.objectives.canonical().to_vec()),
    );

    let mut xs: Vec<Vec<f64>> = pop.iter().map(|e| space.encode(&e.solution)).collect();
    'outer: loop {
        for i in 0..np {
            if eval.is_exhausted() {
                break 'outer;
            }
            let (a, b, c) = distinct_three(np, i, &mut rng);
            let jrand = rng.random_range(0..dims);
            let trial: Vec<f64> = (0..dims)
                .map(|j| {
                    if j == jrand || rng.random::<f64>() < params.cr {
                        xs[a][j] + params.f * (xs[b][j] - xs[c][j])
                    } else {
                        xs[i][j]
                    }
                })
                .collect();
            let candidate = space.repair(&trial);
            let e = eval.evaluate(candidate)?;
            if value(&e) <= value(&pop[i]) {
                if value(&e) < value(&best) {
                    best = e.clone();
                    trace.record(
                        e.eval_index,
                        Snapshot::Best(e.objectives.canonical().to_vec()),
                    );
                }
                xs[i] = space.encode(&e.solution);
                pop[i] = e;
            }
        }
    }

    Ok(RunResult {
        archive: single_archive(Some(best)),
        evals_used: eval.used(),
        trace: trace.into_entries(),
        config: config([
            ("algorithm", "de".into()),
            ("budget", budget.to_string()),
            ("np", np.to_string()),
            ("f", params.f.to_string()),
            ("cr", params.cr.to_string()),
            ("objective", objective_index.to_string()),
        ]),
        seed,
        truncated: false,
    })
}

fn distinct_three<R: Rng + ?Sized>(n: usize, exclude: usize, rng: &mut R) -> (usize, usize, usize) {
    let mut pick = |taken: &[usize]| loop {
        let k = rng.random_range(0..n);
        if k != exclude && !taken.contains(&k) {
            return k;
        }
    };
    let a = pick(&[]);
    let b = pick(&[a]);
    let c = pick(&[a, b]);
    (a, b, c)
}
