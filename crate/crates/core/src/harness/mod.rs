//! Experiment plans, runs, statistics and reports.

pub mod experiment;
pub mod plan;
pub mod report;
pub mod stats;
pub mod tune;
