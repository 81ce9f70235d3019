//! FLASH: sequential model-based search over a finite candidate pool with
//! one regression tree per objective.

mod tree;

pub use tree::{Node, RegressionTree, Test, TreeParams};

use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::optimizers::{RunResult, Snapshot};
use crate::pareto::{dominates_values, ParetoArchive};
use crate::problems::{Evaluator, Problem};
use crate::rng::SeededRng;
use crate::space::{DecisionKind, DecisionSpace, Solution, Value};

/// Largest space enumerated when a problem has no explicit pool.
pub const MAX_ENUMERATED: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Acquisition {
    /// Candidate whose predicted vector dominates the most other predictions.
    DominanceCount,
    /// Lowest prediction on one objective, or with probability `epsilon` a uniform pick.
    SingleObjectiveMin { objective: usize, epsilon: f64 },
}

impl fmt::Display for Acquisition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Acquisition::DominanceCount => f.write_str("dominance_count"),
            Acquisition::SingleObjectiveMin { objective, epsilon } => {
                write!(f, "single_objective_min(o{},eps={epsilon})", objective + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlashParams {
    pub init_samples: usize,
    pub budget: usize,
    pub acquisition: Acquisition,
    pub min_leaf: usize,
    /// Fitting and scoring fan-out; results do not depend on it.
    pub exec: Exec,
}

impl Default for FlashParams {
    fn default() -> Self {
        Self {
            init_samples: 20,
            budget: 50,
            acquisition: Acquisition::DominanceCount,
            min_leaf: 4,
            exec: Exec::default(),
        }
    }
}

/// Every solution of a space without continuous decisions, if there are at
/// most `limit` of them.
pub fn enumerate_space(space: &DecisionSpace, limit: usize) -> Option<Vec<Solution>> {
    let mut axes: Vec<Vec<Value>> = Vec::with_capacity(space.len());
    let mut total: usize = 1;
    for d in space.decisions() {
        let axis: Vec<Value> = match &d.kind {
            DecisionKind::Continuous { .. } => return None,
            DecisionKind::Boolean => vec![Value::Bool(false), Value::Bool(true)],
            DecisionKind::Integer { lo, hi } => {
                if (hi - lo) as u64 >= limit as u64 {
                    return None;
                }
                (*lo..=*hi).map(Value::Int).collect()
            }
            DecisionKind::Categorical { levels } => (0..levels.len()).map(Value::Level).collect(),
        };
        total = total.checked_mul(axis.len()).filter(|&t| t <= limit)?;
        axes.push(axis);
    }
    let mut out = Vec::with_capacity(total);
    for mut k in 0..total {
        let mut values = Vec::with_capacity(axes.len());
        for axis in axes.iter().rev() {
            values.push(axis[k % axis.len()]);
            k /= axis.len();
        }
        values.reverse();
        out.push(Solution::new(values));
    }
    Some(out)
}

/// Runs FLASH on the problem's pool, or on the enumerated space when the
/// space is small and discrete.
pub fn flash(problem: &dyn Problem, params: &FlashParams, seed: u64) -> Result<RunResult> {
    let enumerated;
    let pool: &[Solution] = match problem.pool() {
        Some(p) => p,
        None => {
            enumerated =
                enumerate_space(problem.space(), MAX_ENUMERATED).ok_or(Error::NoCandidatePool)?;
            &enumerated
        }
    };
    let m = problem.num_objectives();
    if pool.len() < params.init_samples {
        return Err(Error::param(format!(
            "pool of {} candidates is smaller than init_samples {}",
            pool.len(),
            params.init_samples
        )));
    }
    if params.init_samples == 0 || params.init_samples >= params.budget {
        return Err(Error::param("FLASH needs 0 < init_samples < budget"));
    }
    if params.budget > pool.len() {
        return Err(Error::param(format!(
            "FLASH budget {} exceeds the pool of {} candidates",
            params.budget,
            pool.len()
        )));
    }
    if params.min_leaf == 0 {
        return Err(Error::param("min_leaf must be at least 1"));
    }
    if let Acquisition::SingleObjectiveMin { objective, epsilon } = params.acquisition {
        crate::optimizers::check_objective(objective, m)?;
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::param("acquisition epsilon must be in [0, 1]"));
        }
    }

    let space = problem.space();
    let categorical: Vec<bool> = space
        .decisions()
        .iter()
        .map(|d| matches!(d.kind, DecisionKind::Categorical { .. }))
        .collect();
    let rows: Vec<Vec<f64>> = pool.iter().map(|s| space.encode(s)).collect();
    let mut rng = SeededRng::new(seed);
    let mut eval = Evaluator::new(problem, params.budget)?;
    let mut archive = ParetoArchive::new();
    let mut trace = crate::optimizers::TraceBuf::default();

    let mut seen = Seen {
        open: vec![true; pool.len()],
        evaluated: Vec::new(),
        targets: Vec::new(),
    };
    for i in index::sample(&mut rng, pool.len(), params.init_samples) {
        seen.take(pool, i, &mut eval, &mut archive)?;
    }
    trace.record(eval.used(), Snapshot::Archive(archive.points()));

    let tree_params = TreeParams {
        min_leaf: params.min_leaf,
        max_depth: None,
    };
    while !eval.is_exhausted() {
        let train: Vec<Vec<f64>> = seen.evaluated.iter().map(|&i| rows[i].clone()).collect();
        let trees = params.exec.map_range(m, |j| {
            let y: Vec<f64> = seen.targets.iter().map(|t| t[j]).collect();
            RegressionTree::fit_mixed(&train, &y, &categorical, tree_params)
        });
        let trees = trees.into_iter().collect::<Result<Vec<_>>>()?;
        let candidates: Vec<usize> = (0..pool.len()).filter(|&i| seen.open[i]).collect();
        let predicted: Vec<Vec<f64>> = params.exec.map_slice(&candidates, |&i| {
            trees
                .iter()
                .map(|t| t.predict_unchecked(&rows[i]))
                .collect()
        });
        let pick = candidates[acquire(&predicted, params.acquisition, params.exec, &mut rng)];
        seen.take(pool, pick, &mut eval, &mut archive)?;
        trace.record(eval.used(), Snapshot::Archive(archive.points()));
    }

    Ok(RunResult {
        archive,
        evals_used: eval.used(),
        trace: trace.into_entries(),
        config: crate::optimizers::config([
            ("algorithm", "flash".into()),
            ("budget", params.budget.to_string()),
            ("init_samples", params.init_samples.to_string()),
            ("acquisition", params.acquisition.to_string()),
            ("min_leaf", params.min_leaf.to_string()),
            ("pool", pool.len().to_string()),
        ]),
        seed,
        truncated: false,
    })
}

/// Evaluated rows and their canonical objectives; `open` marks the rest of the pool.
struct Seen {
    open: Vec<bool>,
    evaluated: Vec<usize>,
    targets: Vec<Vec<f64>>,
}

impl Seen {
    fn take(
        &mut self,
        pool: &[Solution],
        i: usize,
        eval: &mut Evaluator,
        archive: &mut ParetoArchive,
    ) -> Result<()> {
        let e = eval.evaluate(pool[i].clone())?;
        self.open[i] = false;
        self.evaluated.push(i);
        self.targets.push(e.objectives.canonical().to_vec());
        archive.insert(e);
        Ok(())
    }
}

/// Index into `predicted` of the next candidate. Ties go to a random draw.
fn acquire<R: Rng + ?Sized>(
    predicted: &[Vec<f64>],
    acquisition: Acquisition,
    exec: Exec,
    rng: &mut R,
) -> usize {
    let scores: Vec<f64> = match acquisition {
        Acquisition::DominanceCount => exec.map_slice(predicted, |p| {
            predicted.iter().filter(|q| dominates_values(p, q)).count() as f64
        }),
        Acquisition::SingleObjectiveMin { objective, epsilon } => {
            if rng.random::<f64>() < epsilon {
                return rng.random_range(0..predicted.len());
            }
            predicted.iter().map(|p| -p[objective]).collect()
        }
    };
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    ties[rng.random_range(0..ties.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::nondominated_indices;
    use crate::problems::{builtin, TabularSpace};

    fn table(rows: usize, seed: u64) -> TabularSpace {
        // objective is a step function of a and b plus a small effect of c
        let mut rng = SeededRng::new(seed);
        let mut csv = String::from("a,b,c,o1,o2\n");
        for i in 0..rows {
            let (a, b, c) = (i % 10, (i / 10) % 10, (i / 100) + 10 * (i % 3));
            let o1 =
                if a >= 7 { 1.0 } else { 10.0 } + if b < 3 { 0.0 } else { 5.0 } + c as f64 * 0.01;
            let o2: f64 = rng.random_range(0.0..1.0);
            csv.push_str(&format!("{a},{b},{c},{o1},{o2}\n"));
        }
        TabularSpace::read(csv.as_bytes(), 2, "steps").unwrap()
    }

    #[test]
    fn whole_pool_budget_recovers_pareto_set() {
        let t = table(200, 1);
        let rows: Vec<Vec<f64>> = t.rows().map(|(_, o)| o.canonical().to_vec()).collect();
        let mut truth: Vec<Vec<f64>> = nondominated_indices(&rows, Exec::Sequential)
            .unwrap()
            .into_iter()
            .map(|i| rows[i].clone())
            .collect();
        truth.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for acquisition in [
            Acquisition::DominanceCount,
            Acquisition::SingleObjectiveMin {
                objective: 0,
                epsilon: 0.05,
            },
        ] {
            let params = FlashParams {
                budget: 200,
                acquisition,
                ..FlashParams::default()
            };
            let r = flash(&t, &params, 4).unwrap();
            let mut got = r.front();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got, truth);
            assert_eq!(r.evals_used, 200);
        }
    }

    #[test]
    fn one_evaluation_per_step_and_modes_agree() {
        let t = table(300, 2);
        let params = FlashParams {
            budget: 40,
            ..FlashParams::default()
        };
        let par = flash(&t, &params, 9).unwrap();
        let seq = flash(
            &t,
            &FlashParams {
                exec: Exec::Sequential,
                ..params
            },
            9,
        )
        .unwrap();
        assert_eq!(par, seq);
        let idx: Vec<usize> = par.trace.iter().map(|e| e.eval_index).collect();
        assert_eq!(idx, (20..=40).collect::<Vec<_>>());
    }

    #[test]
    fn finds_the_learnable_optimum() {
        let t = table(400, 3);
        let params = FlashParams {
            budget: 45,
            acquisition: Acquisition::SingleObjectiveMin {
                objective: 0,
                epsilon: 0.05,
            },
            ..FlashParams::default()
        };
        let hits = (0..30u64)
            .filter(|&s| {
                let r = flash(&t, &params, s).unwrap();
                r.archive
                    .members()
                    .iter()
                    .any(|m| m.objectives.canonical()[0] < 1.1)
            })
            .count();
        assert!(hits >= 28, "{hits}/30");
    }

    #[test]
    fn parameter_errors() {
        let t = table(100, 4);
        assert!(flash(
            &t,
            &FlashParams {
                budget: 101,
                ..FlashParams::default()
            },
            0
        )
        .is_err());
        assert!(flash(
            &t,
            &FlashParams {
                init_samples: 50,
                budget: 50,
                ..FlashParams::default()
            },
            0
        )
        .is_err());
        assert!(flash(
            &t,
            &FlashParams {
                init_samples: 101,
                budget: 102,
                ..FlashParams::default()
            },
            0
        )
        .is_err());
        let zdt = builtin("zdt1", None, None).unwrap();
        assert!(matches!(
            flash(zdt.as_ref(), &FlashParams::default(), 0),
            Err(Error::NoCandidatePool)
        ));
    }

    #[test]
    fn small_discrete_spaces_are_enumerated() {
        let spl = builtin("spl:mobile_phone", None, None).unwrap();
        let all = enumerate_space(spl.space(), MAX_ENUMERATED).unwrap();
        assert_eq!(all.len(), 1 << spl.space().len());
        let r = flash(
            spl.as_ref(),
            &FlashParams {
                budget: 60,
                ..FlashParams::default()
            },
            1,
        )
        .unwrap();
        assert_eq!(r.evals_used, 60);
        assert!(r.archive.is_mutually_nondominated());
    }
}
