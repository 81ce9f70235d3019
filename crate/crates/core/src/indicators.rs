//! Quality indicators comparing a predicted front `P` with an actual or
//! reference front `A`. All fronts are in minimization form.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pareto::{
    bounds_of, epsilon_unchecked, euclidean, nondominated_indices, normalize_front,
    weakly_dominates_values,
};
use crate::rng::SeededRng;

/// A set of objective points of uniform arity.
///
/// `normalized` records that the points were mapped through min-max bounds
/// (see [`Front::normalize`]). Points lying outside those bounds keep values
/// outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    points: Vec<Vec<f64>>,
    normalized: bool,
}

impl Front {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(points, false)
    }

    /// A front already in normalized coordinates; every value must be in [0, 1].
    pub fn new_normalized(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("normalized front has values outside [0, 1]"));
        }
        Self::build(points, true)
    }

    fn build(points: Vec<Vec<f64>>, normalized: bool) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("front"))?;
        let m = first.len();
        if m == 0 {
            return Err(Error::Empty("objective vector"));
        }
        for p in &points {
            if p.len() != m {
                return Err(Error::ArityMismatch {
                    expected: m,
                    found: p.len(),
                });
            }
            if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFiniteObjective { index, value });
            }
        }
        Ok(Self { points, normalized })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn num_objectives(&self) -> usize {
        self.points[0].len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        bounds_of(&self.points).expect("front is non-empty with uniform arity")
    }

    /// Maps every point through `(v - min) / (max - min)` with the given bounds
    /// (the front's own when `None`).
    pub fn normalize(&self, bounds: Option<&[(f64, f64)]>) -> Result<Front> {
        Ok(Front {
            points: normalize_front(&self.points, bounds)?,
            normalized: true,
        })
    }

    /// Keeps only points that weakly dominate `reference`.
    pub fn clipped_to(&self, reference: &[f64]) -> Option<Front> {
        let points: Vec<Vec<f64>> = self
            .points
            .iter()
            .filter(|p| weakly_dominates_values(p, reference))
            .cloned()
            .collect();
        (!points.is_empty()).then_some(Front {
            points,
            normalized: self.normalized,
        })
    }
}

fn check_pair(p: &Front, a: &Front) -> Result<()> {
    if p.num_objectives() != a.num_objectives() {
        return Err(Error::ArityMismatch {
            expected: a.num_objectives(),
            found: p.num_objectives(),
        });
    }
    if p.normalized != a.normalized {
        return Err(Error::param("fronts differ in normalization status"));
    }
    Ok(())
}

fn mean_nearest(from: &Front, to: &Front) -> f64 {
    let total: f64 = from
        .points
        .iter()
        .map(|p| {
            to.points
                .iter()
                .map(|q| euclidean(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / from.len() as f64
}

/// Mean Euclidean distance from each predicted point to its nearest actual point.
pub fn generational_distance(predicted: &Front, actual: &Front) -> Result<f64> {
    check_pair(predicted, actual)?;
    Ok(mean_nearest(predicted, actual))
}

/// Mean Euclidean distance from each actual point to its nearest predicted point.
pub fn inverted_generational_distance(actual: &Front, predicted: &Front) -> Result<f64> {
    check_pair(predicted, actual)?;
    Ok(mean_nearest(actual, predicted))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadValue {
    pub value: f64,
    /// All gaps were zero (coincident points); `value` is 0 by convention.
    pub degenerate: bool,
}

/// Deb's spread, with boundary terms taken from the front's own extremes
/// (both zero). See [`spread_with_extremes`].
pub fn spread(front: &Front) -> Result<SpreadValue> {
    spread_with_extremes(front, None)
}

/// Deb's spread `(d_f + d_l + sum |d_i - mean|) / (d_f + d_l + k * mean)`.
///
/// Two objectives: `d_i` are the consecutive gaps along the front sorted by
/// the first objective (`k = N - 1`), and `d_f`, `d_l` the distances from the
/// first/last extreme to the front's boundary points. More objectives: `d_i`
/// is each point's nearest-neighbour distance (`k = N`) and the boundary term
/// sums, over the given extremes, the distance to the nearest front point.
/// Without extremes the boundary terms are zero. Lower is better.
pub fn spread_with_extremes(front: &Front, extremes: Option<&[Vec<f64>]>) -> Result<SpreadValue> {
    let n = front.len();
    if n < 2 {
        return Err(Error::param("spread needs at least two points"));
    }
    let m = front.num_objectives();
    if let Some(ext) = extremes {
        if ext.iter().any(|e| e.len() != m) {
            return Err(Error::ArityMismatch {
                expected: m,
                found: ext.iter().map(Vec::len).find(|&l| l != m).unwrap_or(m),
            });
        }
    }
    let (gaps, boundary, k) = if m == 2 {
        let mut sorted = front.points.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let gaps: Vec<f64> = sorted.windows(2).map(|w| euclidean(&w[0], &w[1])).collect();
        let boundary = match extremes {
            Some([first, last]) => euclidean(first, &sorted[0]) + euclidean(last, &sorted[n - 1]),
            Some(_) => {
                return Err(Error::param(
                    "two-objective spread takes exactly two extremes",
                ))
            }
            None => 0.0,
        };
        (gaps, boundary, (n - 1) as f64)
    } else {
        let gaps: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| euclidean(&front.points[i], &front.points[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let boundary = extremes
            .map(|ext| {
                ext.iter()
                    .map(|e| {
                        front
                            .points
                            .iter()
                            .map(|p| euclidean(e, p))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum()
            })
            .unwrap_or(0.0);
        (gaps, boundary, n as f64)
    };
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let denom = boundary + k * mean;
    if denom <= 0.0 {
        return Ok(SpreadValue {
            value: 0.0,
            degenerate: true,
        });
    }
    let numer = boundary + gaps.iter().map(|d| (d - mean).abs()).sum::<f64>();
    Ok(SpreadValue {
        value: numer / denom,
        degenerate: false,
    })
}

/// Default Monte Carlo sample count for hypervolume in four or more objectives.
pub const DEFAULT_HV_SAMPLES: usize = 100_000;
const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypervolumeValue {
    pub value: f64,
    /// Monte Carlo estimate rather than an exact measure.
    pub estimated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct HvOptions {
    pub samples: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for HvOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_HV_SAMPLES,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

/// The conventional reference point `(1.1, ..., 1.1)` for normalized fronts.
pub fn default_reference(m: usize) -> Vec<f64> {
    vec![1.1; m]
}

fn check_reference(front: &Front, reference: &[f64]) -> Result<()> {
    if reference.len() != front.num_objectives() {
        return Err(Error::ArityMismatch {
            expected: front.num_objectives(),
            found: reference.len(),
        });
    }
    if let Some(index) = front
        .points
        .iter()
        .position(|p| !weakly_dominates_values(p, reference))
    {
        return Err(Error::OutsideReferenceBox { index });
    }
    Ok(())
}

/// Volume dominated by `front` inside the box bounded by `reference`.
/// Exact for up to three objectives, Monte Carlo beyond.
pub fn hypervolume(front: &Front, reference: &[f64], opts: &HvOptions) -> Result<HypervolumeValue> {
    check_reference(front, reference)?;
    if front.num_objectives() <= 3 {
        Ok(HypervolumeValue {
            value: exact_volume(&front.points, reference),
            estimated: false,
        })
    } else {
        hypervolume_monte_carlo(front, reference, opts)
    }
}

/// Exact hypervolume: sweep in two objectives, slicing along the last
/// objective above that.
pub fn hypervolume_exact(front: &Front, reference: &[f64]) -> Result<f64> {
    check_reference(front, reference)?;
    Ok(exact_volume(&front.points, reference))
}

fn exact_volume(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let m = reference.len();
    match m {
        1 => {
            let best = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            (reference[0] - best).max(0.0)
        }
        2 => sweep_2d(
            points.iter().map(|p| (p[0], p[1])).collect(),
            reference[0],
            reference[1],
        ),
        _ => {
            let last = m - 1;
            let mut order: Vec<&Vec<f64>> = points.iter().collect();
            order.sort_by(|a, b| a[last].total_cmp(&b[last]));
            let mut volume = 0.0;
            let mut active: Vec<Vec<f64>> = Vec::with_capacity(order.len());
            for (k, p) in order.iter().enumerate() {
                active.push(p[..last].to_vec());
                let upper = order.get(k + 1).map_or(reference[last], |q| q[last]);
                let height = upper - p[last];
                if height > 0.0 {
                    volume += exact_volume(&active, &reference[..last]) * height;
                }
            }
            volume
        }
    }
}

fn sweep_2d(mut pts: Vec<(f64, f64)>, rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = ry;
    for (x, y) in pts {
        if y < ceiling {
            area += (rx - x) * (ceiling - y);
            ceiling = y;
        }
    }
    area
}

/// Monte Carlo hypervolume: uniform samples in the box between the front's
/// ideal point and `reference`, counting those weakly dominated by some point.
///
/// Samples are drawn in fixed chunks, each with its own RNG stream, so the
/// estimate is identical in sequential and parallel mode.
pub fn hypervolume_monte_carlo(
    front: &Front,
    reference: &[f64],
    opts: &HvOptions,
) -> Result<HypervolumeValue> {
    check_reference(front, reference)?;
    if opts.samples == 0 {
        return Err(Error::param(
            "Monte Carlo hypervolume needs at least one sample",
        ));
    }
    let m = reference.len();
    let lower: Vec<f64> = (0..m)
        .map(|i| {
            front
                .points
                .iter()
                .map(|p| p[i])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let box_volume: f64 = lower.iter().zip(reference).map(|(l, r)| r - l).product();
    if box_volume <= 0.0 {
        return Ok(HypervolumeValue {
            value: 0.0,
            estimated: true,
        });
    }
    let chunks = opts.samples.div_ceil(MC_CHUNK);
    let hits: usize = opts
        .exec
        .map_range(chunks, |c| {
            let mut rng = SeededRng::stream(opts.seed, c as u64);
            let count = MC_CHUNK.min(opts.samples - c * MC_CHUNK);
            let mut sample = vec![0.0; m];
            let mut hits = 0usize;
            for _ in 0..count {
                for (i, s) in sample.iter_mut().enumerate() {
                    *s = lower[i] + rng.random::<f64>() * (reference[i] - lower[i]);
                }
                if front
                    .points
                    .iter()
                    .any(|p| weakly_dominates_values(p, &sample))
                {
                    hits += 1;
                }
            }
            hits
        })
        .into_iter()
        .sum();
    Ok(HypervolumeValue {
        value: box_volume * hits as f64 / opts.samples as f64,
        estimated: true,
    })
}

/// Additive approximation `max_a min_p max_i (p_i - a_i)`: the smallest
/// uniform shift after which every actual point is weakly dominated by some
/// predicted point.
pub fn additive_approximation(actual: &Front, predicted: &Front) -> Result<f64> {
    check_pair(predicted, actual)?;
    Ok(actual
        .points
        .iter()
        .map(|a| {
            predicted
                .points
                .iter()
                .map(|p| epsilon_unchecked(p, a))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Non-dominated, de-duplicated union of several outcomes.
pub fn build_reference_front(outcomes: &[Front]) -> Result<Front> {
    let first = outcomes.first().ok_or(Error::Empty("outcome list"))?;
    let mut seen = HashSet::new();
    let mut all = Vec::new();
    for f in outcomes {
        if f.num_objectives() != first.num_objectives() {
            return Err(Error::ArityMismatch {
                expected: first.num_objectives(),
                found: f.num_objectives(),
            });
        }
        if f.normalized != first.normalized {
            return Err(Error::param("outcomes differ in normalization status"));
        }
        for p in &f.points {
            let key: Vec<u64> = p.iter().map(|v| (v + 0.0).to_bits()).collect();
            if seen.insert(key) {
                all.push(p.clone());
            }
        }
    }
    let keep = nondominated_indices(&all, Exec::Sequential)?;
    Ok(Front {
        points: keep.into_iter().map(|i| all[i].clone()).collect(),
        normalized: first.normalized,
    })
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Gd,
    Igd,
    Spread,
    Hv,
    Approx,
}

impl Indicator {
    pub const ALL: [Indicator; 5] = [
        Indicator::Gd,
        Indicator::Igd,
        Indicator::Spread,
        Indicator::Hv,
        Indicator::Approx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Gd => "gd",
            Indicator::Igd => "igd",
            Indicator::Spread => "spread",
            Indicator::Hv => "hv",
            Indicator::Approx => "approx",
        }
    }

    /// Whether larger values are better.
    pub fn higher_is_better(self) -> bool {
        self == Indicator::Hv
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.name() == s.trim())
            .ok_or_else(|| Error::Unknown {
                what: "indicator",
                name: s.to_string(),
            })
    }
}

/// One computed indicator, printable as `name,value,exact|estimated`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorValue {
    pub indicator: Indicator,
    pub value: f64,
    pub exact: bool,
}

impl fmt::Display for IndicatorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            self.indicator,
            self.value,
            if self.exact { "exact" } else { "estimated" }
        )
    }
}

/// Computes `indicator` for `predicted` against `actual`. Hypervolume uses
/// `reference` (default `(1.1, ..)`) and ignores `actual`.
pub fn compute(
    indicator: Indicator,
    predicted: &Front,
    actual: &Front,
    reference: Option<&[f64]>,
    opts: &HvOptions,
) -> Result<IndicatorValue> {
    let (value, exact) = match indicator {
        Indicator::Gd => (generational_distance(predicted, actual)?, true),
        Indicator::Igd => (inverted_generational_distance(actual, predicted)?, true),
        Indicator::Spread => (spread(predicted)?.value, true),
        Indicator::Approx => (additive_approximation(actual, predicted)?, true),
        Indicator::Hv => {
            let default;
            let reference = match reference {
                Some(r) => r,
                None => {
                    default = default_reference(predicted.num_objectives());
                    &default
                }
            };
            let hv = hypervolume(predicted, reference, opts)?;
            (hv.value, !hv.estimated)
        }
    };
    Ok(IndicatorValue {
        indicator,
        value,
        exact,
    })
}
