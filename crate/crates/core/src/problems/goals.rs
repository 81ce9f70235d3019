//! Goal functions over a defect predictor's confusion matrix.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Confusion counts (`a` true negatives, `b` false negatives, `c` false
/// positives, `d` true positives) with the lines of code in each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionCounts {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub loc_a: f64,
    pub loc_b: f64,
    pub loc_c: f64,
    pub loc_d: f64,
}

impl ConfusionCounts {
    pub fn new(a: u64, b: u64, c: u64, d: u64, loc: [f64; 4]) -> Result<Self> {
        if loc.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::param(
                "lines of code must be finite and non-negative",
            ));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            loc_a: loc[0],
            loc_b: loc[1],
            loc_c: loc[2],
            loc_d: loc[3],
        })
    }
}

/// Each metric is `None` when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalMetrics {
    pub pd: Option<f64>,
    pub pf: Option<f64>,
    pub prec: Option<f64>,
    pub acc: Option<f64>,
    pub support: Option<f64>,
    pub effort: Option<f64>,
    pub reward: Option<f64>,
}

impl GoalMetrics {
    pub fn as_map(&self) -> BTreeMap<&'static str, Option<f64>> {
        BTreeMap::from([
            ("pd", self.pd),
            ("pf", self.pf),
            ("prec", self.prec),
            ("acc", self.acc),
            ("support", self.support),
            ("effort", self.effort),
            ("reward", self.reward),
        ])
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

pub fn goal_metrics(c: &ConfusionCounts) -> GoalMetrics {
    let (a, b, cc, d) = (c.a as f64, c.b as f64, c.c as f64, c.d as f64);
    let n = a + b + cc + d;
    if n == 0.0 {
        return GoalMetrics {
            pd: None,
            pf: None,
            prec: None,
            acc: None,
            support: None,
            effort: None,
            reward: None,
        };
    }
    let pd = ratio(d, b + d);
    let effort = ratio(c.loc_c + c.loc_d, c.loc_a + c.loc_b + c.loc_c + c.loc_d);
    let reward = match (pd, effort) {
        (Some(p), Some(e)) => ratio(p, e),
        _ => None,
    };
    GoalMetrics {
        pd,
        pf: ratio(cc, a + cc),
        prec: ratio(d, d + cc),
        acc: ratio(a + d, n),
        support: ratio(cc + d, n),
        effort,
        reward,
    }
}
