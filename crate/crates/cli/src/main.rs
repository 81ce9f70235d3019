use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use dsekit::harness::experiment::{
    read_records_file, records_to_string, run_experiment, RunOptions,
};
use dsekit::harness::plan::ExperimentPlan;
use dsekit::harness::report::rank_records;
use dsekit::harness::stats::RankOptions;
use dsekit::harness::tune::{tune, TuneOptions, TuneTarget};
use dsekit::indicators::{compute, HvOptions, DEFAULT_HV_SAMPLES};
use dsekit::io::{front_to_string, read_front_file};
use dsekit::problems::{builtin, catalog, load_tabular, ProblemInfo};
use dsekit::{Exec, Indicator, Problem};

#[derive(Parser, Debug)]
#[command(
    name = "dsekit",
    version,
    about = "Data-driven search-based software engineering toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the problem catalog.
    Problems(ProblemsArgs),
    /// Run an experiment plan and write records, report and manifest.
    Run(RunArgs),
    /// Compute quality indicators of a predicted front against an actual one.
    Indicators(IndicatorsArgs),
    /// Rank algorithms in a records CSV with Scott-Knott.
    Rank(RankArgs),
    /// Tune an algorithm's parameters on a problem.
    Tune(TuneArgs),
}

#[derive(Args, Debug)]
struct ProblemsArgs {
    /// Also list a tabular CSV (repeatable).
    #[arg(long, value_name = "FILE")]
    tabular: Vec<PathBuf>,
    /// Objective columns at the end of each --tabular file.
    #[arg(long, default_value_t = 1)]
    objectives: usize,
    /// Also list the problems of a plan.
    #[arg(long, value_name = "FILE")]
    plan: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_name = "FILE")]
    plan: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    /// Overrides the plan's base_seed.
    #[arg(long, env = "DSEKIT_SEED", value_name = "N")]
    seed: Option<u64>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
    /// Record wall-clock milliseconds (makes outputs vary between runs).
    #[arg(long)]
    timing: bool,
    /// Also write every run's final front under DIR/fronts.
    #[arg(long)]
    fronts: bool,
}

#[derive(Args, Debug)]
struct IndicatorsArgs {
    #[arg(long, value_name = "FILE")]
    predicted: PathBuf,
    #[arg(long, value_name = "FILE")]
    actual: PathBuf,
    /// Comma-separated: gd, igd, spread, hv, approx.
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    metrics: Vec<Indicator>,
    /// Hypervolume reference point, comma-separated (default 1.1 per objective).
    #[arg(long = "ref", value_name = "CSV", value_delimiter = ',')]
    reference: Option<Vec<f64>>,
    /// Monte Carlo samples for hypervolume with four or more objectives.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_HV_SAMPLES)]
    samples: usize,
    #[arg(long, env = "DSEKIT_SEED", value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Use the fronts as given instead of scaling by the actual front's bounds.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long, value_name = "FILE")]
    records: PathBuf,
    /// Write report.csv and report.txt here instead of printing.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print CSV instead of the text table.
    #[arg(long, conflicts_with = "out")]
    csv: bool,
    /// Bootstrap seed.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct TuneArgs {
    /// ga, de, sa or flash.
    #[arg(long)]
    target: TuneTarget,
    /// A built-in problem, or a problem named in --plan.
    #[arg(long)]
    problem: String,
    /// Parameter settings to try.
    #[arg(long, value_name = "N")]
    meta_budget: usize,
    #[arg(long, env = "DSEKIT_SEED", value_name = "N")]
    seed: u64,
    /// Evaluations per inner run.
    #[arg(long, value_name = "N", default_value_t = 2000)]
    budget: usize,
    /// Inner runs per setting.
    #[arg(long, value_name = "N", default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value = "igd")]
    indicator: Indicator,
    /// Plan whose [problems] table resolves --problem.
    #[arg(long, value_name = "FILE")]
    plan: Option<PathBuf>,
    /// Name of the emitted algorithm block (default: <target>_tuned).
    #[arg(long)]
    name: Option<String>,
    /// Write the block here instead of printing it.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Bad input (exit 2) versus anything else (exit 1).
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<dsekit::Error> for Failure {
    fn from(e: dsekit::Error) -> Self {
        Failure::Input(e.into())
    }
}

type CliResult = Result<(), Failure>;

fn internal<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Internal(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = match cli.command {
        Command::Problems(a) => cmd_problems(a),
        Command::Run(a) => cmd_run(a),
        Command::Indicators(a) => cmd_indicators(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Tune(a) => cmd_tune(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_problems(a: ProblemsArgs) -> CliResult {
    let mut rows = catalog();
    for path in &a.tabular {
        let t = load_tabular(path, a.objectives)?;
        let mut info = ProblemInfo::of(&t);
        info.source = path.display().to_string();
        rows.push(info);
    }
    if let Some(path) = &a.plan {
        let plan = ExperimentPlan::load(path)?;
        for (name, spec) in &plan.problems {
            let p = spec.build(&plan.base_dir)?;
            let mut info = ProblemInfo::of(p.as_ref());
            info.name = format!("{name} ({})", info.name);
            rows.push(info);
        }
    }
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(4);
    let d = rows
        .iter()
        .map(|r| r.decisions.len())
        .max()
        .unwrap_or(0)
        .max(9);
    let mut text = format!("{:<w$}  {:<d$}  {:>2}  source\n", "name", "decisions", "m");
    for r in &rows {
        text.push_str(&format!(
            "{:<w$}  {:<d$}  {:>2}  {}\n",
            r.name, r.decisions, r.num_objectives, r.source
        ));
    }
    print!("{text}");
    Ok(())
}

fn cmd_run(a: RunArgs) -> CliResult {
    let mut plan = ExperimentPlan::load(&a.plan)?;
    if let Some(seed) = a.seed {
        plan.base_seed = seed;
    }
    if a.jobs == Some(0) {
        return Err(Failure::Input(anyhow!("--jobs must be at least 1")));
    }
    let opts = RunOptions {
        exec: if a.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        },
        jobs: a.jobs,
        timing: a.timing,
    };
    let ex = run_experiment(&plan, &opts)?;
    for w in &ex.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .map_err(internal)?;
    let rows = ex.rows();
    write_atomic(&a.out.join("records.csv"), &records_to_string(&rows)).map_err(internal)?;
    write_atomic(&a.out.join("manifest.toml"), &ex.manifest(&plan)?).map_err(internal)?;
    if a.fronts {
        let dir = a.out.join("fronts");
        std::fs::create_dir_all(&dir).map_err(internal)?;
        for r in &ex.records {
            let file = dir.join(format!("{}__{}__{}.csv", r.problem, r.algorithm, r.repeat));
            write_atomic(&file, &front_to_string(&r.front)).map_err(internal)?;
        }
    }
    for f in &ex.failures {
        eprintln!(
            "run failed: {} / {} repeat {} (seed {}): {}",
            f.problem, f.algorithm, f.repeat, f.seed, f.message
        );
    }
    if ex.records.is_empty() {
        return Err(Failure::Internal(anyhow!(
            "no run succeeded; see {}",
            a.out.join("manifest.toml").display()
        )));
    }
    // same ranking seed as `rank`, so re-ranking the records reproduces the report
    let table = rank_records(&rows, &RankOptions::default())?;
    write_atomic(&a.out.join("report.csv"), &table.to_csv()).map_err(internal)?;
    write_atomic(&a.out.join("report.txt"), &table.to_text()).map_err(internal)?;
    print!("{}", table.to_text());
    eprintln!(
        "{} runs ok, {} failed; outputs in {}",
        ex.records.len(),
        ex.failures.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_indicators(a: IndicatorsArgs) -> CliResult {
    let predicted = read_front_file(&a.predicted)?;
    let actual = read_front_file(&a.actual)?;
    if predicted.num_objectives() != actual.num_objectives() {
        return Err(Failure::Input(anyhow!(
            "predicted front has {} objectives, actual has {}",
            predicted.num_objectives(),
            actual.num_objectives()
        )));
    }
    if let Some(r) = &a.reference {
        if r.len() != actual.num_objectives() {
            return Err(Failure::Input(anyhow!(
                "--ref has {} values for {} objectives",
                r.len(),
                actual.num_objectives()
            )));
        }
    }
    let (predicted, actual) = if a.no_normalize {
        (predicted, actual)
    } else {
        let bounds = actual.bounds();
        (
            predicted.normalize(Some(bounds.as_slice()))?,
            actual.normalize(Some(bounds.as_slice()))?,
        )
    };
    let hv = HvOptions {
        samples: a.samples,
        seed: a.seed,
        exec: Exec::default(),
    };
    let mut text = String::new();
    let mut undefined = Vec::new();
    for m in a.metrics {
        match compute(m, &predicted, &actual, a.reference.as_deref(), &hv) {
            Ok(v) => {
                let kind = if v.exact { "exact" } else { "estimated" };
                text.push_str(&format!("{},{},{kind}\n", m.name(), v.value));
            }
            Err(e) => undefined.push(format!("{}: {e}", m.name())),
        }
    }
    print!("{text}");
    if undefined.is_empty() {
        Ok(())
    } else {
        Err(Failure::Input(anyhow!(undefined.join("; "))))
    }
}

fn cmd_rank(a: RankArgs) -> CliResult {
    let rows = read_records_file(&a.records)?;
    let table = rank_records(
        &rows,
        &RankOptions {
            seed: a.seed,
            ..RankOptions::default()
        },
    )?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(internal)?;
            write_atomic(&dir.join("report.csv"), &table.to_csv()).map_err(internal)?;
            write_atomic(&dir.join("report.txt"), &table.to_text()).map_err(internal)?;
        }
        None if a.csv => print!("{}", table.to_csv()),
        None => print!("{}", table.to_text()),
    }
    Ok(())
}

fn tune_problem(name: &str, plan: Option<&Path>) -> Result<Box<dyn Problem>, Failure> {
    if let Some(path) = plan {
        let plan = ExperimentPlan::load(path)?;
        if let Some(spec) = plan.problems.get(name) {
            return Ok(spec.build(&plan.base_dir)?);
        }
    }
    Ok(builtin(name, None, None)?)
}

fn cmd_tune(a: TuneArgs) -> CliResult {
    let problem = tune_problem(&a.problem, a.plan.as_deref())?;
    let opts = TuneOptions {
        meta_budget: a.meta_budget,
        inner_budget: a.budget,
        inner_repeats: a.repeats,
        indicator: a.indicator,
        seed: a.seed,
    };
    let r = tune(a.target, problem.as_ref(), &opts)?;
    let name = a.name.unwrap_or_else(|| format!("{}_tuned", a.target));
    let block = r.to_block(&name, &a.problem);
    match &a.out {
        Some(path) => write_atomic(path, &block).map_err(internal)?,
        None => print!("{block}"),
    }
    eprintln!(
        "median {}: tuned {} vs defaults {} ({} settings tried)",
        r.indicator.name(),
        r.score,
        r.default_score,
        r.meta_evals
    );
    Ok(())
}
