use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::pareto::ParetoArchive;
use crate::problems::{Evaluator, Problem};
use crate::rng::SeededRng;

use super::{config, RunResult, Snapshot, TraceBuf};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RandomParams {
    /// For problems with a finite pool: never draw the same candidate twice.
    /// The run then stops after exhausting the pool.
    pub without_replacement: bool,
}

/// Uniform random sampling; returns the non-dominated set of everything
/// evaluated. Problems with a candidate pool are sampled from the pool.
pub fn random_search(
    problem: &dyn Problem,
    budget: usize,
    params: &RandomParams,
    seed: u64,
) -> Result<RunResult> {
    let mut rng = SeededRng::new(seed);
    let mut eval = Evaluator::new(problem, budget)?;
    let mut archive = ParetoArchive::new();
    let mut trace = TraceBuf::default();
    let every = (budget / 20).max(1);

    let mut order: Vec<usize> = Vec::new();
    if let (Some(pool), true) = (problem.pool(), params.without_replacement) {
        order = (0..pool.len()).collect();
        order.shuffle(&mut rng);
        order.truncate(budget);
    }

    let mut k = 0;
    while !eval.is_exhausted() {
        let candidate = match problem.pool() {
            Some(pool) if params.without_replacement => match order.get(k) {
                Some(&i) => pool[i].clone(),
                None => break,
            },
            Some(pool) => pool[rng.random_range(0..pool.len())].clone(),
            None => problem.space().sample(&mut rng),
        };
        k += 1;
        let e = eval.evaluate(candidate)?;
        let idx = e.eval_index;
        archive.insert(e);
        if idx % every == 0 || eval.is_exhausted() {
            trace.record(idx, Snapshot::Archive(archive.points()));
        }
    }
    let used = eval.used();
    if trace.entries.last().is_none_or(|t| t.eval_index < used) && used > 0 {
        trace.record(used, Snapshot::Archive(archive.points()));
    }
    Ok(RunResult {
        archive,
        evals_used: used,
        trace: trace.into_entries(),
        config: config([
            ("algorithm", "random".into()),
            ("budget", budget.to_string()),
            (
                "without_replacement",
                params.without_replacement.to_string(),
            ),
        ]),
        seed,
        truncated: false,
    })
}
