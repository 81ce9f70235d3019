//! Pre-measured configuration spaces loaded from CSV.
//!
//! Header `d1,...,dk,o1,...,om`; the last `m` columns are objectives
//! (minimized). A decision column whose cells all parse as numbers is numeric
//! (integer when every value is integral); any other column is categorical
//! with levels in order of first appearance.

use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::objective::{Direction, ObjectiveVector};
use crate::space::{Decision, DecisionKind, DecisionSpace, Solution, Value};

use super::Problem;

type Key = Vec<(u8, u64)>;

#[derive(Debug, Clone)]
pub struct TabularSpace {
    name: String,
    space: DecisionSpace,
    directions: Vec<Direction>,
    pool: Vec<Solution>,
    objectives: Vec<ObjectiveVector>,
    lookup: HashMap<Key, usize>,
}

impl TabularSpace {
    pub fn read<R: Read>(reader: R, num_objectives: usize, name: &str) -> Result<Self> {
        let bad = |row: usize, message: String| Error::Data {
            path: name.to_string(),
            row,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if num_objectives == 0 || header.len() <= num_objectives {
            return Err(bad(
                1,
                format!("need at least one decision and {num_objectives} objective columns"),
            ));
        }
        let k = header.len() - num_objectives;
        let mut cells: Vec<Vec<String>> = Vec::new();
        let mut objectives = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(bad(
                    row,
                    format!(
                        "ragged row: {} cells, header has {}",
                        rec.len(),
                        header.len()
                    ),
                ));
            }
            let obj = (k..header.len())
                .map(|c| {
                    rec[c]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            bad(
                                row,
                                format!("objective cell `{}` is not a finite number", &rec[c]),
                            )
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            objectives.push(ObjectiveVector::minimize(obj)?);
            cells.push((0..k).map(|c| rec[c].to_string()).collect());
        }
        if cells.is_empty() {
            return Err(Error::Empty("tabular space"));
        }

        let mut decisions = Vec::with_capacity(k);
        let mut columns: Vec<Vec<Value>> = Vec::with_capacity(k);
        for c in 0..k {
            let raw: Vec<&str> = cells.iter().map(|r| r[c].as_str()).collect();
            let (decision, values) = infer_column(&header[c], &raw).map_err(|m| bad(1, m))?;
            decisions.push(decision);
            columns.push(values);
        }
        let space = DecisionSpace::new(decisions)?;
        let pool: Vec<Solution> = (0..cells.len())
            .map(|r| Solution::new(columns.iter().map(|col| col[r]).collect()))
            .collect();
        let mut lookup = HashMap::with_capacity(pool.len());
        for (r, s) in pool.iter().enumerate() {
            if lookup.insert(s.key(), r).is_some() {
                return Err(bad(r + 2, "duplicate decision row".into()));
            }
        }
        Ok(Self {
            name: format!("tabular:{name}"),
            space,
            directions: vec![Direction::Minimize; num_objectives],
            pool,
            objectives,
            lookup,
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Solution, &ObjectiveVector)> {
        self.pool.iter().zip(&self.objectives)
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    /// Stored objectives for an exact decision match.
    pub fn lookup(&self, solution: &Solution) -> Result<&ObjectiveVector> {
        self.lookup
            .get(&solution.key())
            .map(|&r| &self.objectives[r])
            .ok_or(Error::NotInMeasuredSpace)
    }
}

fn infer_column(name: &str, raw: &[&str]) -> std::result::Result<(Decision, Vec<Value>), String> {
    let numeric: Option<Vec<f64>> = raw
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    if let Some(nums) = numeric {
        let lo = nums.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = nums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            return Err(format!("decision column `{name}` is constant"));
        }
        let integral = nums.iter().all(|v| v.fract() == 0.0 && v.abs() < 9.0e15);
        return Ok(if integral {
            (
                Decision::new(
                    name,
                    DecisionKind::Integer {
                        lo: lo as i64,
                        hi: hi as i64,
                    },
                ),
                nums.iter().map(|&v| Value::Int(v as i64)).collect(),
            )
        } else {
            (
                Decision::new(name, DecisionKind::Continuous { lo, hi }),
                nums.into_iter().map(Value::Real).collect(),
            )
        });
    }
    let mut levels: Vec<String> = Vec::new();
    let values = raw
        .iter()
        .map(|s| {
            let i = levels.iter().position(|l| l == s).unwrap_or_else(|| {
                levels.push(s.to_string());
                levels.len() - 1
            });
            Value::Level(i)
        })
        .collect();
    if levels.len() < 2 {
        return Err(format!("decision column `{name}` is constant"));
    }
    Ok((
        Decision::new(name, DecisionKind::Categorical { levels }),
        values,
    ))
}

/// Loads a tabular space; `num_objectives` trailing columns are objectives.
pub fn load_tabular(path: impl AsRef<Path>, num_objectives: usize) -> Result<TabularSpace> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let mut t = TabularSpace::read(file, num_objectives, &path.display().to_string())?;
    t.name = format!("tabular:{name}");
    Ok(t)
}

impl Problem for TabularSpace {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn space(&self) -> &DecisionSpace {
        &self.space
    }

    fn directions(&self) -> &[Direction] {
        &self.directions
    }

    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector> {
        self.lookup(solution).cloned()
    }

    fn pool(&self) -> Option<&[Solution]> {
        Some(&self.pool)
    }

    fn source(&self) -> &'static str {
        "file"
    }
}
