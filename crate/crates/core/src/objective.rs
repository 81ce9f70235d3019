//! Objective vectors in canonical (all-minimize) form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Objective values stored with maximize entries negated, so that smaller is
/// always better internally.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector {
    canonical: Vec<f64>,
    directions: Vec<Direction>,
}

impl ObjectiveVector {
    /// Builds from raw (as-measured) values. Non-finite values are rejected.
    pub fn new(raw: Vec<f64>, directions: Vec<Direction>) -> Result<Self> {
        if raw.len() != directions.len() {
            return Err(Error::ArityMismatch {
                expected: directions.len(),
                found: raw.len(),
            });
        }
        if raw.is_empty() {
            return Err(Error::Empty("objective vector"));
        }
        let canonical = raw
            .into_iter()
            .zip(&directions)
            .enumerate()
            .map(|(index, (value, dir))| {
                if !value.is_finite() {
                    return Err(Error::NonFiniteObjective { index, value });
                }
                Ok(match dir {
                    Direction::Minimize => value,
                    Direction::Maximize => -value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            canonical,
            directions,
        })
    }

    pub fn minimize(values: Vec<f64>) -> Result<Self> {
        let dirs = vec![Direction::Minimize; values.len()];
        Self::new(values, dirs)
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    /// Values in minimization form.
    pub fn canonical(&self) -> &[f64] {
        &self.canonical
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// The `i`-th value as originally measured.
    pub fn raw(&self, i: usize) -> f64 {
        match self.directions[i] {
            Direction::Minimize => self.canonical[i],
            Direction::Maximize => -self.canonical[i],
        }
    }

    pub fn raw_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.raw(i)).collect()
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.canonical
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedSolution {
    pub solution: Solution,
    pub objectives: ObjectiveVector,
    /// 1-based position in the run's evaluation order.
    pub eval_index: usize,
}

impl AsRef<[f64]> for EvaluatedSolution {
    fn as_ref(&self) -> &[f64] {
        self.objectives.canonical()
    }
}
