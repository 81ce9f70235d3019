//! Executing a plan and scoring every run against the union reference front.

use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::indicators::{
    additive_approximation, build_reference_front, default_reference, generational_distance,
    hypervolume, inverted_generational_distance, spread_with_extremes, Front, HvOptions, Indicator,
    DEFAULT_HV_SAMPLES,
};
use crate::problems::Problem;

use super::plan::{ExperimentPlan, RunSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub exec: Exec,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Record wall-clock times. Off by default so outputs are byte-stable.
    pub timing: bool,
}

/// Outcome of one successful run. `front` holds canonical (all-minimize)
/// objective vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub repeat: usize,
    pub evals_used: usize,
    pub truncated: bool,
    pub front: Vec<Vec<f64>>,
    pub wall_ms: u64,
    /// Requested indicators in plan order; an indicator that is undefined for
    /// this front (spread of a single point) is absent.
    pub values: Vec<(Indicator, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFailure {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub repeat: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    /// Per problem: the non-dominated union of all run fronts (canonical).
    pub references: IndexMap<String, Front>,
    pub warnings: Vec<String>,
}

/// One line of the records CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub repeat: usize,
    pub evals_used: usize,
    pub indicator: Indicator,
    pub value: f64,
    pub wall_ms: u64,
}

impl Experiment {
    pub fn rows(&self) -> Vec<RecordRow> {
        self.records
            .iter()
            .flat_map(|r| {
                r.values.iter().map(move |&(indicator, value)| RecordRow {
                    problem: r.problem.clone(),
                    algorithm: r.algorithm.clone(),
                    seed: r.seed,
                    repeat: r.repeat,
                    evals_used: r.evals_used,
                    indicator,
                    value,
                    wall_ms: r.wall_ms,
                })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct ManifestRun<'a> {
    problem: &'a str,
    algorithm: &'a str,
    repeat: usize,
    seed: u64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    evals_used: Option<usize>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    succeeded: usize,
    failed: usize,
    warnings: &'a [String],
    plan: &'a ExperimentPlan,
    runs: Vec<ManifestRun<'a>>,
}

impl Experiment {
    /// TOML manifest: the plan as run, then every scheduled run with its seed
    /// and outcome, in schedule order.
    pub fn manifest(&self, plan: &ExperimentPlan) -> Result<String> {
        let key = |p: &str, a: &str, r: usize| (p.to_string(), a.to_string(), r);
        let ok: std::collections::HashMap<_, _> = self
            .records
            .iter()
            .map(|r| (key(&r.problem, &r.algorithm, r.repeat), r))
            .collect();
        let failed: std::collections::HashMap<_, _> = self
            .failures
            .iter()
            .map(|f| (key(&f.problem, &f.algorithm, f.repeat), f))
            .collect();
        let specs = plan.runs()?;
        let runs = specs
            .iter()
            .map(|s| {
                let k = key(&s.problem, &s.algorithm, s.repeat);
                let rec = ok.get(&k);
                ManifestRun {
                    problem: &s.problem,
                    algorithm: &s.algorithm,
                    repeat: s.repeat,
                    seed: s.seed,
                    status: if rec.is_some() { "ok" } else { "failed" },
                    evals_used: rec.map(|r| r.evals_used),
                    truncated: rec.is_some_and(|r| r.truncated),
                    error: failed.get(&k).map(|f| f.message.as_str()),
                }
            })
            .collect();
        let m = Manifest {
            version: env!("CARGO_PKG_VERSION"),
            succeeded: self.records.len(),
            failed: self.failures.len(),
            warnings: &self.warnings,
            plan,
            runs,
        };
        toml::to_string(&m).map_err(|e| Error::Plan(format!("manifest: {e}")))
    }
}

/// A finished run with its wall time, or why it failed.
type Outcome = std::result::Result<(crate::optimizers::RunResult, u64), String>;

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "run panicked".into()
    }
}

/// Runs every (problem, algorithm, repeat) of the plan. A failing run is
/// recorded and skipped; only an unusable plan (a problem that cannot be
/// built) is an error.
pub fn run_experiment(plan: &ExperimentPlan, opts: &RunOptions) -> Result<Experiment> {
    let mut problems: IndexMap<String, Box<dyn Problem>> = IndexMap::new();
    for (name, spec) in &plan.problems {
        let p = spec
            .build(&plan.base_dir)
            .map_err(|e| Error::Plan(format!("problem `{name}`: {e}")))?;
        problems.insert(name.clone(), p);
    }
    let runs = plan.runs()?;
    let outcomes: Vec<(RunSpec, Outcome)> = opts.exec.install(opts.jobs, || {
        opts.exec.map_slice(&runs, |spec| {
            let problem = problems[&spec.problem].as_ref();
            let algorithm = &plan.algorithms[&spec.algorithm];
            let start = Instant::now();
            let out = catch_unwind(AssertUnwindSafe(|| {
                algorithm.run(problem, plan.budget, spec.seed)
            }));
            let ms = if opts.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            let out = match out {
                Ok(Ok(r)) => Ok((r, ms)),
                Ok(Err(e)) => Err(e.to_string()),
                Err(p) => Err(panic_message(p)),
            };
            (spec.clone(), out)
        })
    });

    let mut failures = Vec::new();
    let mut done = Vec::new();
    for (spec, out) in outcomes {
        match out {
            Ok((r, ms)) if !r.archive.is_empty() => done.push((spec, r, ms)),
            Ok(_) => failures.push(failure(&spec, "run produced no evaluations".into())),
            Err(message) => failures.push(failure(&spec, message)),
        }
    }

    let mut references = IndexMap::new();
    for name in problems.keys() {
        let fronts: Vec<Front> = done
            .iter()
            .filter(|(s, _, _)| &s.problem == name)
            .map(|(_, r, _)| Front::new(r.front()))
            .collect::<Result<_>>()?;
        if !fronts.is_empty() {
            references.insert(name.clone(), build_reference_front(&fronts)?);
        }
    }
    let scorers: IndexMap<&str, Scorer> = references
        .iter()
        .map(|(name, f)| Ok((name.as_str(), Scorer::new(f)?)))
        .collect::<Result<_>>()?;
    let samples = plan.hv_samples.unwrap_or(DEFAULT_HV_SAMPLES);
    let scored = opts.exec.install(opts.jobs, || {
        opts.exec.map_slice(&done, |(spec, r, _)| {
            scorers[spec.problem.as_str()].score(&r.front(), &plan.indicators, samples, spec.seed)
        })
    });

    let mut records = Vec::with_capacity(done.len());
    for ((spec, r, ms), values) in done.into_iter().zip(scored) {
        match values {
            Ok(values) => records.push(RunRecord {
                problem: spec.problem,
                algorithm: spec.algorithm,
                seed: spec.seed,
                repeat: spec.repeat,
                evals_used: r.evals_used,
                truncated: r.truncated,
                front: r.front(),
                wall_ms: ms,
                values,
            }),
            Err(e) => failures.push(failure(&spec, format!("scoring failed: {e}"))),
        }
    }
    Ok(Experiment {
        records,
        failures,
        references,
        warnings: plan.warnings(),
    })
}

fn failure(spec: &RunSpec, message: String) -> RunFailure {
    RunFailure {
        problem: spec.problem.clone(),
        algorithm: spec.algorithm.clone(),
        seed: spec.seed,
        repeat: spec.repeat,
        message,
    }
}

/// Scores fronts of one problem: everything is normalized by the bounds of
/// the reference front before any indicator is computed.
#[derive(Debug, Clone)]
pub struct Scorer {
    bounds: Vec<(f64, f64)>,
    reference: Front,
    extremes: Vec<Vec<f64>>,
    hv_point: Vec<f64>,
}

impl Scorer {
    pub fn new(reference: &Front) -> Result<Self> {
        let bounds = reference.bounds();
        let normalized = reference.normalize(Some(&bounds))?;
        let m = normalized.num_objectives();
        let extremes: Vec<Vec<f64>> = if m == 2 {
            let mut pts = normalized.points().to_vec();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            vec![pts[0].clone(), pts[pts.len() - 1].clone()]
        } else {
            (0..m)
                .map(|j| {
                    normalized
                        .points()
                        .iter()
                        .min_by(|a, b| a[j].total_cmp(&b[j]))
                        .expect("non-empty")
                        .clone()
                })
                .collect()
        };
        Ok(Self {
            bounds,
            reference: normalized,
            extremes,
            hv_point: default_reference(m),
        })
    }

    pub fn normalized_reference(&self) -> &Front {
        &self.reference
    }

    pub fn score(
        &self,
        front: &[Vec<f64>],
        indicators: &[Indicator],
        hv_samples: usize,
        seed: u64,
    ) -> Result<Vec<(Indicator, f64)>> {
        let f = Front::new(front.to_vec())?.normalize(Some(&self.bounds))?;
        let mut out = Vec::with_capacity(indicators.len());
        for &ind in indicators {
            let v = match ind {
                Indicator::Gd => generational_distance(&f, &self.reference)?,
                Indicator::Igd => inverted_generational_distance(&self.reference, &f)?,
                Indicator::Approx => additive_approximation(&self.reference, &f)?,
                Indicator::Spread => {
                    if f.len() < 2 {
                        continue;
                    }
                    let extremes = (self.extremes.len() >= 2).then_some(self.extremes.as_slice());
                    spread_with_extremes(&f, extremes)?.value
                }
                Indicator::Hv => match f.clipped_to(&self.hv_point) {
                    None => 0.0,
                    Some(inside) => {
                        let opts = HvOptions {
                            samples: hv_samples,
                            seed,
                            exec: Exec::Sequential,
                        };
                        hypervolume(&inside, &self.hv_point, &opts)?.value
                    }
                },
            };
            out.push((ind, v));
        }
        Ok(out)
    }
}

pub const RECORDS_HEADER: &str = "problem,algorithm,seed,repeat,evals_used,indicator,value,wall_ms";

pub fn write_records<W: Write>(writer: W, rows: &[RecordRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    if rows.is_empty() {
        w.write_record(RECORDS_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("records", e))
}

pub fn records_to_string(rows: &[RecordRow]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, rows).expect("in-memory write");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Reads a records CSV; errors name the 1-based line.
pub fn read_records<R: Read>(reader: R, origin: &str) -> Result<Vec<RecordRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != RECORDS_HEADER {
        return Err(Error::Data {
            path: origin.into(),
            row: 1,
            message: format!("expected header `{RECORDS_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row: RecordRow = rec.deserialize(Some(&header)).map_err(|e| Error::Data {
            path: origin.into(),
            row: line,
            message: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        })?;
        if !row.value.is_finite() {
            return Err(Error::Data {
                path: origin.into(),
                row: line,
                message: "value is not finite".into(),
            });
        }
        out.push(row);
    }
    Ok(out)
}

pub fn read_records_file(path: impl AsRef<std::path::Path>) -> Result<Vec<RecordRow>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(f, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::nondominated_indices;

    fn plan(extra: &str) -> ExperimentPlan {
        let text = format!(
            r#"
budget = 300
repeats = 30
base_seed = 7
indicators = ["gd", "igd", "spread", "hv", "approx"]
{extra}
[problems.zdt1]
type = "zdt1"
n = 5

[algorithms.rand]
type = "random"

[algorithms.ga]
type = "ga"
pop_size = 20
"#
        );
        ExperimentPlan::parse(&text, ".").unwrap()
    }

    #[test]
    fn one_record_per_run_and_reference_is_the_union() {
        let p = plan("");
        let ex = run_experiment(&p, &RunOptions::default()).unwrap();
        assert_eq!(ex.records.len(), 60);
        assert!(ex.failures.is_empty());
        let mut all: Vec<Vec<f64>> = ex.records.iter().flat_map(|r| r.front.clone()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup();
        // brute force: keep every point nothing else dominates
        let mut brute: Vec<Vec<f64>> = all
            .iter()
            .filter(|p| !all.iter().any(|q| crate::pareto::dominates_values(q, p)))
            .cloned()
            .collect();
        brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut got = ex.references["zdt1"].points().to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, brute);
        assert_eq!(
            nondominated_indices(&got, Exec::Sequential).unwrap().len(),
            got.len()
        );
        assert!(ex
            .records
            .iter()
            .all(|r| r.values.len() == 5 || r.front.len() < 2));
    }

    #[test]
    fn deterministic_across_modes() {
        let p = plan("");
        let a = run_experiment(&p, &RunOptions::default()).unwrap();
        let b = run_experiment(
            &p,
            &RunOptions {
                exec: Exec::Sequential,
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert_eq!(records_to_string(&a.rows()), records_to_string(&b.rows()));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let mut p = plan("");
        p.algorithms.insert(
            "bad".into(),
            super::super::plan::AlgorithmSpec::De {
                np: Some(1000),
                f: None,
                cr: None,
                objective: None,
            },
        );
        let ex = run_experiment(&p, &RunOptions::default()).unwrap();
        assert_eq!(ex.records.len(), 60);
        assert_eq!(ex.failures.len(), 30);
        assert!(ex.failures[0].message.contains("exceeds the budget"));
    }

    #[test]
    fn records_round_trip_and_errors_name_lines() {
        let ex = run_experiment(&plan(""), &RunOptions::default()).unwrap();
        let rows = ex.rows();
        let text = records_to_string(&rows);
        assert!(text.starts_with(RECORDS_HEADER));
        assert_eq!(read_records(text.as_bytes(), "r").unwrap(), rows);
        let bad =
            format!("{RECORDS_HEADER}\nzdt1,ga,1,0,10,igd,0.5,0\nzdt1,ga,2,1,10,igd,oops,0\n");
        match read_records(bad.as_bytes(), "r") {
            Err(Error::Data { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        let unknown = format!("{RECORDS_HEADER}\nzdt1,ga,1,0,10,nope,0.5,0\n");
        assert!(read_records(unknown.as_bytes(), "r").is_err());
    }

    #[test]
    fn scores_use_reference_bounds() {
        let reference = Front::new(vec![vec![0.0, 4.0], vec![2.0, 0.0]]).unwrap();
        let s = Scorer::new(&reference).unwrap();
        let v = s
            .score(
                &[vec![0.0, 4.0], vec![2.0, 0.0]],
                &[Indicator::Gd, Indicator::Igd, Indicator::Hv],
                1000,
                0,
            )
            .unwrap();
        assert_eq!(v[0], (Indicator::Gd, 0.0));
        assert_eq!(v[1], (Indicator::Igd, 0.0));
        // normalized points (0,1) and (1,0) against (1.1, 1.1)
        assert!((v[2].1 - (1.1 * 0.1 + 0.1 * 1.0)).abs() < 1e-12);
        let outside = s
            .score(
                &[vec![5.0, 5.0]],
                &[Indicator::Hv, Indicator::Spread],
                1000,
                0,
            )
            .unwrap();
        assert_eq!(outside, vec![(Indicator::Hv, 0.0)]);
    }

    #[test]
    fn manifest_echoes_plan_seeds_and_failures() {
        let mut p = plan("");
        p.repeats = 3;
        p.algorithms.insert(
            "bad".into(),
            super::super::plan::AlgorithmSpec::De {
                np: Some(1000),
                f: None,
                cr: None,
                objective: None,
            },
        );
        let ex = run_experiment(&p, &RunOptions::default()).unwrap();
        let text = ex.manifest(&p).unwrap();
        let v: toml::Value = toml::from_str(&text).unwrap();
        assert_eq!(v["succeeded"].as_integer(), Some(6));
        assert_eq!(v["failed"].as_integer(), Some(3));
        assert_eq!(v["plan"]["budget"].as_integer(), Some(300));
        let runs = v["runs"].as_array().unwrap();
        let seeds: Vec<i64> = runs
            .iter()
            .map(|r| r["seed"].as_integer().unwrap())
            .collect();
        let want: Vec<i64> = p.runs().unwrap().iter().map(|r| r.seed as i64).collect();
        assert_eq!(seeds, want);
        let bad: Vec<_> = runs
            .iter()
            .filter(|r| r["status"].as_str() == Some("failed"))
            .collect();
        assert_eq!(bad.len(), 3);
        assert!(bad
            .iter()
            .all(|r| r["algorithm"].as_str() == Some("bad") && r.get("error").is_some()));
        assert!(v["warnings"].as_array().unwrap()[0]
            .as_str()
            .unwrap()
            .contains("repeats"));
        // the echoed plan parses back to the same plan
        let echoed = toml::to_string(&v["plan"]).unwrap();
        assert_eq!(ExperimentPlan::parse(&echoed, ".").unwrap(), p);
    }
}
