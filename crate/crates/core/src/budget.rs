use crate::error::{Error, Result};

/// Evaluation budget of one run. `used` never exceeds `max_evals`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    max_evals: usize,
    used: usize,
}

impl Budget {
    pub fn new(max_evals: usize) -> Result<Self> {
        if max_evals == 0 {
            return Err(Error::param("budget must be at least one evaluation"));
        }
        Ok(Self { max_evals, used: 0 })
    }

    pub fn max_evals(&self) -> usize {
        self.max_evals
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.max_evals - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.max_evals
    }

    /// Claims one evaluation; fails without side effects when none remain.
    pub fn try_consume(&mut self) -> Result<()> {
        if self.is_exhausted() {
            return Err(Error::BudgetExhausted {
                max: self.max_evals,
            });
        }
        self.used += 1;
        Ok(())
    }
}
