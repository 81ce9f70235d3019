use rand::Rng;

use crate::error::{Error, Result};
use crate::objective::EvaluatedSolution;
use crate::problems::{Evaluator, Problem};
use crate::rng::SeededRng;

use super::variation::neighbor;
use super::{check_objective, config, single_archive, RunResult, Snapshot, TraceBuf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaParams {
    /// Initial temperature, in units of the observed objective range.
    pub t0: f64,
    /// Geometric cooling factor per step.
    pub alpha: f64,
    /// Neighbour step as a fraction of each decision's range.
    pub neighbor_scale: f64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            t0: 1.0,
            alpha: 0.99,
            neighbor_scale: 0.1,
        }
    }
}

impl SaParams {
    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::param("SA t0 must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("SA alpha must be in (0, 1)"));
        }
        if !(self.neighbor_scale > 0.0 && self.neighbor_scale.is_finite()) {
            return Err(Error::param("SA neighbor_scale must be positive"));
        }
        Ok(())
    }
}

/// Probability of accepting a move that changes the objective by `delta` at
/// temperature `t`: 1 for improvements, `exp(-delta / t)` otherwise.
pub fn acceptance_probability(delta: f64, t: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else if t <= 0.0 {
        0.0
    } else {
        (-delta / t).exp()
    }
}

/// Simulated annealing on one objective with geometric cooling. Deltas are
/// divided by the range of objective values seen so far, so `t0` is scale-free.
pub fn simulated_annealing(
    problem: &dyn Problem,
    budget: usize,
    params: &SaParams,
    seed: u64,
    objective_index: usize,
) -> Result<RunResult> {
    params.validate()?;
    check_objective(objective_index, problem.num_objectives())?;
    let mut rng = SeededRng::new(seed);
    let mut eval = Evaluator::new(problem, budget)?;
    let mut trace = TraceBuf::default();
    let value = |e: &EvaluatedSolution| e.objectives.canonical()[objective_index];

    let mut current = eval.evaluate(problem.space().sample(&mut rng))?;
    let mut best = current.clone();
    let (mut lo, mut hi) = (value(&current), value(&current));
    trace.record(
        best.eval_index,
        Snapshot::Best(best.objectives.canonical().to_vec()),
    );
    let mut t = params.t0;

    while !eval.is_exhausted() {
        let candidate = neighbor(
            problem.space(),
            &current.solution,
            params.neighbor_scale,
            &mut rng,
        );
        let next = eval.evaluate(candidate)?;
        let v = value(&next);
        lo = lo.min(v);
        hi = hi.max(v);
        let range = if hi > lo { hi - lo } else { 1.0 };
        let delta = (v - value(&current)) / range;
        if value(&next) < value(&best) {
            best = next.clone();
            trace.record(
                best.eval_index,
                Snapshot::Best(best.objectives.canonical().to_vec()),
            );
        }
        let p = acceptance_probability(delta, t);
        if p >= 1.0 || rng.random::<f64>() < p {
            current = next;
        }
        t *= params.alpha;
    }

    Ok(RunResult {
        archive: single_archive(Some(best)),
        evals_used: eval.used(),
        trace: trace.into_entries(),
        config: config([
            ("algorithm", "sa".into()),
            ("budget", budget.to_string()),
            ("t0", params.t0.to_string()),
            ("alpha", params.alpha.to_string()),
            ("neighbor_scale", params.neighbor_scale.to_string()),
            ("objective", objective_index.to_string()),
        ]),
        seed,
        truncated: false,
    })
}
