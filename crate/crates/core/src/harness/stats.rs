//! Non-parametric statistics for comparing result distributions.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Effect size below which Scott-Knott refuses a split.
pub const SMALL_EFFECT: f64 = 0.147;
pub const DEFAULT_BOOTSTRAPS: usize = 512;
pub const DEFAULT_ALPHA: f64 = 0.05;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile by linear interpolation between order statistics (the common
/// "type 7" definition).
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("quantile must be in [0, 1]"));
    }
    let v = sorted(xs);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(xs: &[f64]) -> Result<f64> {
    quantile(xs, 0.5)
}

/// Interquartile range, `q75 - q25`.
pub fn iqr(xs: &[f64]) -> Result<f64> {
    Ok(quantile(xs, 0.75)? - quantile(xs, 0.25)?)
}

/// `(#{x > y} - #{x < y}) / (|xs| |ys|)` over all pairs.
pub fn cliffs_delta(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::param("samples must not contain NaN"));
    }
    let ys = sorted(ys);
    let mut more: i64 = 0;
    for x in xs {
        let below = ys.partition_point(|y| y < x);
        let not_above = ys.partition_point(|y| y <= x);
        more += below as i64 - (ys.len() - not_above) as i64;
    }
    Ok(more as f64 / (xs.len() * ys.len()) as f64)
}

/// Two-sided bootstrap test on the difference of means. Both resamples are
/// drawn from the pooled data (the null of one common distribution); the
/// groups differ when the observed gap exceeds the `1 - alpha` quantile of
/// the resampled gaps.
pub fn bootstrap_different(xs: &[f64], ys: &[f64], n_boot: usize, seed: u64) -> Result<bool> {
    bootstrap_different_at(xs, ys, n_boot, DEFAULT_ALPHA, seed)
}

pub fn bootstrap_different_at(
    xs: &[f64],
    ys: &[f64],
    n_boot: usize,
    alpha: f64,
    seed: u64,
) -> Result<bool> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if n_boot < 100 {
        return Err(Error::param("bootstrap needs at least 100 resamples"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha must be in (0, 1)"));
    }
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(false);
    }
    let observed = (mean(xs) - mean(ys)).abs();
    let mut rng = SeededRng::new(seed);
    let draw = |n: usize, rng: &mut SeededRng| {
        (0..n)
            .map(|_| pooled[rng.random_range(0..pooled.len())])
            .sum::<f64>()
            / n as f64
    };
    let gaps: Vec<f64> = (0..n_boot)
        .map(|_| (draw(xs.len(), &mut rng) - draw(ys.len(), &mut rng)).abs())
        .collect();
    Ok(observed > quantile(&gaps, 1.0 - alpha)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    pub n_boot: usize,
    pub seed: u64,
    pub min_effect: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            n_boot: DEFAULT_BOOTSTRAPS,
            seed: 0,
            min_effect: SMALL_EFFECT,
        }
    }
}

/// Scott-Knott ranking, lower values better. Groups are sorted by median,
/// then split recursively where the between-group sum of squares is largest,
/// keeping a split only if the two sides differ by the bootstrap test and by
/// at least a small Cliff's delta. Returns `(name, rank)` in median order.
pub fn scott_knott<S: AsRef<str>>(
    groups: &[(S, Vec<f64>)],
    opts: &RankOptions,
) -> Result<Vec<(String, usize)>> {
    if groups.is_empty() {
        return Err(Error::Empty("groups"));
    }
    for (name, xs) in groups {
        if xs.len() < 2 {
            return Err(Error::param(format!(
                "group `{}` needs at least two samples",
                name.as_ref()
            )));
        }
        if xs.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "group `{}` has non-finite samples",
                name.as_ref()
            )));
        }
    }
    let mut order: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .map(|(i, (_, xs))| Ok((median(xs)?, i)))
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let seq: Vec<&[f64]> = order.iter().map(|&(_, i)| groups[i].1.as_slice()).collect();
    let mut cuts = Vec::new();
    split(&seq, 0, opts, &mut cuts)?;
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(groups.len());
    let mut rank = 1;
    for (pos, &(_, i)) in order.iter().enumerate() {
        if cuts.contains(&pos) {
            rank += 1;
        }
        out.push((groups[i].0.as_ref().to_string(), rank));
    }
    Ok(out)
}

/// Records in `cuts` the absolute positions where a new rank starts.
fn split(seq: &[&[f64]], offset: usize, opts: &RankOptions, cuts: &mut Vec<usize>) -> Result<()> {
    if seq.len() < 2 {
        return Ok(());
    }
    let all: Vec<f64> = seq.iter().flat_map(|g| g.iter().copied()).collect();
    let mu = mean(&all);
    let mut best: Option<(f64, usize)> = None;
    for cut in 1..seq.len() {
        let left: Vec<f64> = seq[..cut].iter().flat_map(|g| g.iter().copied()).collect();
        let right: Vec<f64> = seq[cut..].iter().flat_map(|g| g.iter().copied()).collect();
        let ss = left.len() as f64 * (mean(&left) - mu).powi(2)
            + right.len() as f64 * (mean(&right) - mu).powi(2);
        if best.is_none_or(|b| ss > b.0) {
            best = Some((ss, cut));
        }
    }
    let (_, cut) = best.expect("at least one cut");
    let left: Vec<f64> = seq[..cut].iter().flat_map(|g| g.iter().copied()).collect();
    let right: Vec<f64> = seq[cut..].iter().flat_map(|g| g.iter().copied()).collect();
    let seed = opts.seed.wrapping_add((offset as u64) << 32 | cut as u64);
    if bootstrap_different(&left, &right, opts.n_boot, seed)?
        && cliffs_delta(&left, &right)?.abs() >= opts.min_effect
    {
        cuts.push(offset + cut);
        split(&seq[..cut], offset, opts, cuts)?;
        split(&seq[cut..], offset + cut, opts, cuts)?;
    }
    Ok(())
}

/// A statistic that may be undefined or unbounded instead of NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Value(f64),
    Infinite,
    Undefined,
}

impl Measure {
    pub fn value(self) -> Option<f64> {
        match self {
            Measure::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Measure::Value(v) => write!(f, "{v}"),
            Measure::Infinite => f.write_str("inf"),
            Measure::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reproducibility {
    /// Sample standard deviation over the mean.
    pub cv: Measure,
    /// `1 / cv`.
    pub reproducibility: Measure,
}

pub fn reproducibility(samples: &[f64]) -> Result<Reproducibility> {
    if samples.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("samples must be finite"));
    }
    let m = mean(samples);
    let n = samples.len();
    let sd = if n > 1 {
        Some((samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt())
    } else {
        None
    };
    let cv = match sd {
        Some(_) if m == 0.0 => Measure::Undefined,
        Some(sd) => Measure::Value(sd / m),
        None => Measure::Undefined,
    };
    let reproducibility = match cv {
        Measure::Value(0.0) => Measure::Infinite,
        Measure::Value(c) => Measure::Value(1.0 / c),
        other => other,
    };
    Ok(Reproducibility {
        cv,
        reproducibility,
    })
}
