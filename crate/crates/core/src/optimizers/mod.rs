//! Baseline and classic metaheuristics.

mod de;
mod ga;
mod random;
mod sa;
pub(crate) mod variation;

use std::collections::BTreeMap;

pub(crate) use de::differential_evolution_seeded;
pub use de::{differential_evolution, DeParams};
pub use ga::{ga_multiobjective, GaParams, Selection};
pub use random::{random_search, RandomParams};
pub use sa::{acceptance_probability, simulated_annealing, SaParams};

use crate::error::{Error, Result};
use crate::objective::EvaluatedSolution;
use crate::pareto::ParetoArchive;

/// What the trace records at a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    /// Best-so-far canonical objective vector (single-objective optimizers).
    Best(Vec<f64>),
    /// Canonical points of the archive at that moment.
    Archive(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub eval_index: usize,
    pub snapshot: Snapshot,
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub archive: ParetoArchive,
    pub evals_used: usize,
    /// Checkpoints with strictly increasing eval indices.
    pub trace: Vec<TraceEntry>,
    /// Every parameter the run used, defaults resolved.
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    /// Stopped early because the budget ran out mid-procedure.
    pub truncated: bool,
}

impl RunResult {
    pub fn front(&self) -> Vec<Vec<f64>> {
        self.archive.points()
    }
}

#[derive(Debug, Default)]
pub(crate) struct TraceBuf {
    entries: Vec<TraceEntry>,
}

impl TraceBuf {
    pub(crate) fn record(&mut self, eval_index: usize, snapshot: Snapshot) {
        if self
            .entries
            .last()
            .is_none_or(|e| e.eval_index < eval_index)
        {
            self.entries.push(TraceEntry {
                eval_index,
                snapshot,
            });
        } else if let Some(last) = self.entries.last_mut() {
            last.snapshot = snapshot;
        }
    }

    pub(crate) fn into_entries(self) -> Vec<TraceEntry> {
        self.entries
    }
}

pub(crate) fn check_objective(index: usize, m: usize) -> Result<()> {
    if index >= m {
        return Err(Error::param(format!(
            "objective index {index} out of range for {m} objectives"
        )));
    }
    Ok(())
}

/// Single-objective best as a one-member archive.
pub(crate) fn single_archive(best: Option<EvaluatedSolution>) -> ParetoArchive {
    let mut a = ParetoArchive::new();
    if let Some(b) = best {
        a.insert(b);
    }
    a
}

pub(crate) fn config<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
