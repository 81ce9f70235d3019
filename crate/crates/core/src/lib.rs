//! Toolkit for data-driven search-based software engineering.
//!
//! * [`pareto`], [`space`], [`objective`], [`budget`], [`rng`]: the shared data
//!   model (canonical minimization, dominance, seeded randomness, budgets).
//! * [`indicators`]: GD, IGD, spread, hypervolume, additive approximation.
//! * [`problems`]: ZDT/DTLZ debugging problems, feature-model product lines,
//!   tabular configuration spaces and confusion-matrix goal metrics.
//! * [`optimizers`]: random search, simulated annealing, differential
//!   evolution and a multi-objective GA with binary or indicator domination.
//! * [`sway`] and [`flash`]: the sampling and surrogate-model optimizers.
//! * [`harness`]: experiment plans, Scott-Knott ranking, reports and tuning.

pub mod budget;
pub mod error;
pub mod exec;
pub mod flash;
pub mod harness;
pub mod indicators;
pub mod io;
pub mod objective;
pub mod optimizers;
pub mod pareto;
pub mod problems;
pub mod rng;
pub mod space;
pub mod sway;

pub use budget::Budget;
pub use error::{Error, Result};
pub use exec::Exec;
pub use indicators::{Front, Indicator};
pub use objective::{Direction, EvaluatedSolution, ObjectiveVector};
pub use pareto::{dominates, nondominated_filter, ParetoArchive};
pub use problems::{Evaluator, Problem};
pub use rng::SeededRng;
pub use space::{Decision, DecisionKind, DecisionSpace, Solution, Value};
