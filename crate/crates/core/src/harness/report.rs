//! Ranking tables: per (problem, indicator), algorithms by Scott-Knott rank
//! with median and IQR.

use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::indicators::Indicator;

use super::experiment::RecordRow;
use super::plan::RECOMMENDED_REPEATS;
use super::stats::{iqr, median, scott_knott, RankOptions};

pub const REPORT_HEADER: &str = "problem,indicator,algorithm,rank,median,iqr,n";

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub problem: String,
    pub indicator: Indicator,
    pub algorithm: String,
    pub rank: usize,
    pub median: f64,
    pub iqr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankingTable {
    pub rows: Vec<RankRow>,
    pub warnings: Vec<String>,
}

/// Ranks every (problem, indicator) cell. Hypervolume is ranked on its
/// negation so that rank 1 is always best; medians are reported as measured.
/// Cells where some algorithm has a single sample are ranked by median alone.
pub fn rank_records(rows: &[RecordRow], opts: &RankOptions) -> Result<RankingTable> {
    if rows.is_empty() {
        return Err(Error::Empty("records"));
    }
    let mut cells: IndexMap<(String, Indicator), IndexMap<String, Vec<f64>>> = IndexMap::new();
    for r in rows {
        cells
            .entry((r.problem.clone(), r.indicator))
            .or_default()
            .entry(r.algorithm.clone())
            .or_default()
            .push(r.value);
    }
    let mut table = RankingTable::default();
    let mut smallest = usize::MAX;
    let mut unranked = Vec::new();
    for (cell, ((problem, indicator), groups)) in cells.into_iter().enumerate() {
        let sign = if indicator.higher_is_better() {
            -1.0
        } else {
            1.0
        };
        let oriented: Vec<(String, Vec<f64>)> = groups
            .iter()
            .map(|(name, xs)| (name.clone(), xs.iter().map(|v| sign * v).collect()))
            .collect();
        smallest = smallest.min(groups.values().map(Vec::len).min().unwrap_or(0));
        let ranks: Vec<(String, usize)> = if groups.values().all(|xs| xs.len() >= 2) {
            let cell_opts = RankOptions {
                seed: opts.seed.wrapping_add(cell as u64),
                ..*opts
            };
            scott_knott(&oriented, &cell_opts)?
        } else {
            unranked.push(format!("{problem}/{indicator}"));
            by_median(&oriented)?
        };
        let mut cell_rows: Vec<RankRow> = ranks
            .into_iter()
            .map(|(algorithm, rank)| {
                let xs = &groups[&algorithm];
                Ok(RankRow {
                    problem: problem.clone(),
                    indicator,
                    algorithm,
                    rank,
                    median: median(xs)?,
                    iqr: iqr(xs)?,
                    n: xs.len(),
                })
            })
            .collect::<Result<_>>()?;
        cell_rows.sort_by(|a, b| {
            a.rank
                .cmp(&b.rank)
                .then((sign * a.median).total_cmp(&(sign * b.median)))
                .then(a.algorithm.cmp(&b.algorithm))
        });
        table.rows.extend(cell_rows);
    }
    if smallest < RECOMMENDED_REPEATS {
        table.warnings.push(format!(
            "some algorithms have only {smallest} samples per cell; at least {RECOMMENDED_REPEATS} repeats are recommended"
        ));
    }
    if !unranked.is_empty() {
        table.warnings.push(format!(
            "single-sample groups ranked by median without a significance test: {}",
            unranked.join(", ")
        ));
    }
    Ok(table)
}

/// Distinct medians get successive ranks.
fn by_median(groups: &[(String, Vec<f64>)]) -> Result<Vec<(String, usize)>> {
    let mut meds: Vec<(f64, &str)> = groups
        .iter()
        .map(|(n, xs)| Ok((median(xs)?, n.as_str())))
        .collect::<Result<_>>()?;
    meds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(meds.len());
    let mut rank = 0;
    let mut last = None;
    for (m, name) in meds {
        if last != Some(m) {
            rank += 1;
            last = Some(m);
        }
        out.push((name.to_string(), rank));
    }
    Ok(out)
}

impl RankingTable {
    /// CSV with `# warning:` comment lines before the header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        wtr.write_record(REPORT_HEADER.split(','))
            .expect("in-memory write");
        for r in &self.rows {
            wtr.write_record([
                r.problem.clone(),
                r.indicator.to_string(),
                r.algorithm.clone(),
                r.rank.to_string(),
                r.median.to_string(),
                r.iqr.to_string(),
                r.n.to_string(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(wtr.into_inner().expect("flush")).expect("UTF-8"));
        out
    }

    /// Aligned plain-text tables, one block per (problem, indicator).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let mut cells: IndexMap<(&str, Indicator), Vec<&RankRow>> = IndexMap::new();
        for r in &self.rows {
            cells
                .entry((r.problem.as_str(), r.indicator))
                .or_default()
                .push(r);
        }
        for ((problem, indicator), rows) in cells {
            let better = if indicator.higher_is_better() {
                "higher is better"
            } else {
                "lower is better"
            };
            let _ = writeln!(out, "\n{problem} / {indicator} ({better})");
            let cols: Vec<[String; 5]> = rows
                .iter()
                .map(|r| {
                    [
                        r.rank.to_string(),
                        r.algorithm.clone(),
                        format!("{:.6}", r.median),
                        format!("{:.6}", r.iqr),
                        r.n.to_string(),
                    ]
                })
                .collect();
            let head = ["rank", "algorithm", "median", "iqr", "n"].map(String::from);
            let width: Vec<usize> = (0..5)
                .map(|c| {
                    cols.iter()
                        .chain([&head])
                        .map(|row| row[c].len())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for row in [&head].into_iter().chain(cols.iter()) {
                let line: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(c, v)| {
                        if c == 1 {
                            format!("{v:<w$}", w = width[c])
                        } else {
                            format!("{v:>w$}", w = width[c])
                        }
                    })
                    .collect();
                let _ = writeln!(out, "  {}", line.join("  ").trim_end());
            }
        }
        out
    }
}
