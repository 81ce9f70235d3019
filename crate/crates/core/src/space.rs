//! Decision spaces and the solutions that live in them.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionKind {
    Continuous { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
    Boolean,
    Categorical { levels: Vec<String> },
}

impl DecisionKind {
    pub fn label(&self) -> &'static str {
        match self {
            DecisionKind::Continuous { .. } => "continuous",
            DecisionKind::Integer { .. } => "integer",
            DecisionKind::Boolean => "boolean",
            DecisionKind::Categorical { .. } => "categorical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub name: String,
    #[serde(flatten)]
    pub kind: DecisionKind,
}

impl Decision {
    pub fn new(name: impl Into<String>, kind: DecisionKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn continuous(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self::new(name, DecisionKind::Continuous { lo, hi })
    }

    pub fn integer(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        Self::new(name, DecisionKind::Integer { lo, hi })
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Self::new(name, DecisionKind::Boolean)
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        Self::new(
            name,
            DecisionKind::Categorical {
                levels: levels.into_iter().map(Into::into).collect(),
            },
        )
    }

    /// Whether `value` lies in this decision's domain.
    pub fn admits(&self, value: &Value) -> bool {
        match (&self.kind, value) {
            (DecisionKind::Continuous { lo, hi }, Value::Real(v)) => {
                v.is_finite() && *lo <= *v && *v <= *hi
            }
            (DecisionKind::Integer { lo, hi }, Value::Int(v)) => lo <= v && v <= hi,
            (DecisionKind::Boolean, Value::Bool(_)) => true,
            (DecisionKind::Categorical { levels }, Value::Level(i)) => *i < levels.len(),
            _ => false,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match &self.kind {
            DecisionKind::Continuous { lo, hi } => Value::Real(rng.random_range(*lo..=*hi)),
            DecisionKind::Integer { lo, hi } => Value::Int(rng.random_range(*lo..=*hi)),
            DecisionKind::Boolean => Value::Bool(rng.random_bool(0.5)),
            DecisionKind::Categorical { levels } => Value::Level(rng.random_range(0..levels.len())),
        }
    }

    /// Numeric encoding of a value. Categorical levels encode as their index.
    pub fn encode(&self, value: &Value) -> f64 {
        value.as_f64()
    }

    /// Encoding scaled to [0, 1] by the decision's bounds.
    pub fn encode_unit(&self, value: &Value) -> f64 {
        match (&self.kind, value) {
            (DecisionKind::Continuous { lo, hi }, Value::Real(v)) => (v - lo) / (hi - lo),
            (DecisionKind::Integer { lo, hi }, Value::Int(v)) => (v - lo) as f64 / (hi - lo) as f64,
            (DecisionKind::Boolean, Value::Bool(b)) => f64::from(u8::from(*b)),
            (DecisionKind::Categorical { levels }, Value::Level(i)) => {
                *i as f64 / (levels.len() - 1) as f64
            }
            _ => value.as_f64(),
        }
    }

    /// Maps an unconstrained real onto the nearest admissible value
    /// (clamp for continuous, round-and-clamp for integers and levels).
    pub fn repair(&self, x: f64) -> Value {
        match &self.kind {
            DecisionKind::Continuous { lo, hi } => Value::Real(x.clamp(*lo, *hi)),
            DecisionKind::Integer { lo, hi } => Value::Int((x.round() as i64).clamp(*lo, *hi)),
            DecisionKind::Boolean => Value::Bool(x >= 0.5),
            DecisionKind::Categorical { levels } => {
                Value::Level((x.round().max(0.0) as usize).min(levels.len() - 1))
            }
        }
    }

    /// Numeric (lo, hi) of the encoding.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.kind {
            DecisionKind::Continuous { lo, hi } => (*lo, *hi),
            DecisionKind::Integer { lo, hi } => (*lo as f64, *hi as f64),
            DecisionKind::Boolean => (0.0, 1.0),
            DecisionKind::Categorical { levels } => (0.0, (levels.len() - 1) as f64),
        }
    }
}

/// One decision value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Int(i64),
    Bool(bool),
    /// Index into a categorical decision's level list.
    Level(usize),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Real(v) => v,
            Value::Int(v) => v as f64,
            Value::Bool(b) => f64::from(u8::from(b)),
            Value::Level(i) => i as f64,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    /// Bit-exact hashable key.
    pub fn key(&self) -> (u8, u64) {
        match *self {
            Value::Real(v) => (0, v.to_bits()),
            Value::Int(v) => (1, v as u64),
            Value::Bool(b) => (2, u64::from(b)),
            Value::Level(i) => (3, i as u64),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Level(i) => write!(f, "#{i}"),
        }
    }
}

/// A point in a [`DecisionSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub values: Vec<Value>,
}

impl Solution {
    pub fn new(values: Vec<Value>) -> Self {
        Self { values }
    }

    pub fn reals(values: impl IntoIterator<Item = f64>) -> Self {
        Self::new(values.into_iter().map(Value::Real).collect())
    }

    pub fn bits(values: impl IntoIterator<Item = bool>) -> Self {
        Self::new(values.into_iter().map(Value::Bool).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn key(&self) -> Vec<(u8, u64)> {
        self.values.iter().map(Value::key).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Value::as_f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSpace {
    decisions: Vec<Decision>,
}

impl DecisionSpace {
    pub fn new(decisions: Vec<Decision>) -> Result<Self> {
        if decisions.is_empty() {
            return Err(Error::InvalidSpace(
                "at least one decision is required".into(),
            ));
        }
        let mut names = HashSet::new();
        for d in &decisions {
            if !names.insert(d.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate decision name `{}`",
                    d.name
                )));
            }
            match &d.kind {
                DecisionKind::Continuous { lo, hi } => {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::InvalidSpace(format!(
                            "`{}`: need finite lo < hi",
                            d.name
                        )));
                    }
                }
                DecisionKind::Integer { lo, hi } => {
                    if lo >= hi {
                        return Err(Error::InvalidSpace(format!("`{}`: need lo < hi", d.name)));
                    }
                }
                DecisionKind::Boolean => {}
                DecisionKind::Categorical { levels } => {
                    let distinct: HashSet<_> = levels.iter().collect();
                    if levels.len() < 2 || distinct.len() != levels.len() {
                        return Err(Error::InvalidSpace(format!(
                            "`{}`: categorical needs at least two distinct levels",
                            d.name
                        )));
                    }
                }
            }
        }
        Ok(Self { decisions })
    }

    /// `[lo, hi]^n` with decisions named `x1..xn`.
    pub fn unit_box(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            (1..=n)
                .map(|i| Decision::continuous(format!("x{i}"), lo, hi))
                .collect(),
        )
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn all_boolean(&self) -> bool {
        self.decisions
            .iter()
            .all(|d| d.kind == DecisionKind::Boolean)
    }

    pub fn all_numeric(&self) -> bool {
        self.decisions.iter().all(|d| {
            matches!(
                d.kind,
                DecisionKind::Continuous { .. } | DecisionKind::Integer { .. }
            )
        })
    }

    pub fn validate(&self, solution: &Solution) -> Result<()> {
        if solution.len() != self.len() {
            return Err(Error::InvalidSolution(format!(
                "arity {} but the space has {} decisions",
                solution.len(),
                self.len()
            )));
        }
        for (d, v) in self.decisions.iter().zip(&solution.values) {
            if !d.admits(v) {
                return Err(Error::InvalidSolution(format!(
                    "`{}` does not admit {v}",
                    d.name
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Solution {
        Solution::new(self.decisions.iter().map(|d| d.sample(rng)).collect())
    }

    pub fn encode(&self, solution: &Solution) -> Vec<f64> {
        self.decisions
            .iter()
            .zip(&solution.values)
            .map(|(d, v)| d.encode(v))
            .collect()
    }

    pub fn encode_unit(&self, solution: &Solution) -> Vec<f64> {
        self.decisions
            .iter()
            .zip(&solution.values)
            .map(|(d, v)| d.encode_unit(v))
            .collect()
    }

    /// Repairs a real vector (one entry per decision) into a valid solution.
    pub fn repair(&self, xs: &[f64]) -> Solution {
        Solution::new(
            self.decisions
                .iter()
                .zip(xs)
                .map(|(d, &x)| d.repair(x))
                .collect(),
        )
    }

    /// Short human summary of the decision kinds, e.g. `30x continuous`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<(String, usize)> = Vec::new();
        for d in &self.decisions {
            let label = d.kind.label().to_string();
            match parts.last_mut() {
                Some((l, n)) if *l == label => *n += 1,
                _ => parts.push((label, 1)),
            }
        }
        parts
            .into_iter()
            .map(|(l, n)| format!("{n}x {l}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}
