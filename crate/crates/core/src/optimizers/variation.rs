//! Variation operators, dispatched per decision kind.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::space::{Decision, DecisionKind, DecisionSpace, Solution, Value};

/// Bounded simulated binary crossover on one variable pair.
fn sbx_pair<R: Rng + ?Sized>(
    x1: f64,
    x2: f64,
    lo: f64,
    hi: f64,
    eta: f64,
    rng: &mut R,
) -> (f64, f64) {
    if (x1 - x2).abs() <= 1e-14 {
        return (x1, x2);
    }
    let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let u: f64 = rng.random();
    let child = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
    let c1 = 0.5 * ((y1 + y2) - child(beta_lo) * (y2 - y1));
    let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
    let c2 = 0.5 * ((y1 + y2) + child(beta_hi) * (y2 - y1));
    let (c1, c2) = (c1.clamp(lo, hi), c2.clamp(lo, hi));
    if rng.random_bool(0.5) {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

/// Bounded polynomial mutation of one variable.
fn polynomial<R: Rng + ?Sized>(x: f64, lo: f64, hi: f64, eta: f64, rng: &mut R) -> f64 {
    let span = hi - lo;
    let d1 = (x - lo) / span;
    let d2 = (hi - x) / span;
    let u: f64 = rng.random();
    let pow = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(pow) - 1.0
    } else {
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(pow)
    };
    (x + dq * span).clamp(lo, hi)
}

/// SBX on continuous decisions (each with probability 0.5), uniform
/// crossover on the rest.
pub(crate) fn crossover<R: Rng + ?Sized>(
    space: &DecisionSpace,
    a: &Solution,
    b: &Solution,
    eta: f64,
    rng: &mut R,
) -> (Solution, Solution) {
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for (j, d) in space.decisions().iter().enumerate() {
        match (&d.kind, a.values[j], b.values[j]) {
            (DecisionKind::Continuous { lo, hi }, Value::Real(x1), Value::Real(x2)) => {
                if rng.random_bool(0.5) {
                    let (y1, y2) = sbx_pair(x1, x2, *lo, *hi, eta, rng);
                    c1.values[j] = Value::Real(y1);
                    c2.values[j] = Value::Real(y2);
                }
            }
            _ => {
                if rng.random_bool(0.5) {
                    c1.values[j] = b.values[j];
                    c2.values[j] = a.values[j];
                }
            }
        }
    }
    (c1, c2)
}

/// Polynomial mutation for continuous decisions, bit flip for booleans and
/// random reset for integers and categorical levels; each decision mutates
/// with probability `rate`.
pub(crate) fn mutate<R: Rng + ?Sized>(
    space: &DecisionSpace,
    s: &mut Solution,
    rate: f64,
    eta: f64,
    rng: &mut R,
) {
    if rate <= 0.0 {
        return;
    }
    for (j, d) in space.decisions().iter().enumerate() {
        if !rng.random_bool(rate.min(1.0)) {
            continue;
        }
        s.values[j] = match (&d.kind, s.values[j]) {
            (DecisionKind::Continuous { lo, hi }, Value::Real(x)) => {
                Value::Real(polynomial(x, *lo, *hi, eta, rng))
            }
            (DecisionKind::Boolean, Value::Bool(b)) => Value::Bool(!b),
            (_, v) => reset(d, v, rng),
        };
    }
}

/// A uniformly drawn value different from `current` (when the domain allows).
pub(crate) fn reset<R: Rng + ?Sized>(d: &Decision, current: Value, rng: &mut R) -> Value {
    for _ in 0..16 {
        let v = d.sample(rng);
        if v != current {
            return v;
        }
    }
    current
}

/// Moves one randomly chosen decision: Gaussian step of `scale * (hi - lo)`
/// for numeric kinds, flip for booleans, another level for categoricals.
pub(crate) fn neighbor<R: Rng + ?Sized>(
    space: &DecisionSpace,
    s: &Solution,
    scale: f64,
    rng: &mut R,
) -> Solution {
    let mut out = s.clone();
    let j = rng.random_range(0..space.len());
    let d = &space.decisions()[j];
    let z: f64 = StandardNormal.sample(rng);
    out.values[j] = match (&d.kind, s.values[j]) {
        (DecisionKind::Continuous { lo, hi }, Value::Real(x)) => {
            Value::Real((x + z * scale * (hi - lo)).clamp(*lo, *hi))
        }
        (DecisionKind::Integer { lo, hi }, Value::Int(x)) => {
            let step = (z * scale * (hi - lo) as f64).round() as i64;
            let step = if step == 0 {
                if z < 0.0 {
                    -1
                } else {
                    1
                }
            } else {
                step
            };
            let moved = (x + step).clamp(*lo, *hi);
            if moved == x {
                Value::Int((x - step).clamp(*lo, *hi))
            } else {
                Value::Int(moved)
            }
        }
        (DecisionKind::Boolean, Value::Bool(b)) => Value::Bool(!b),
        (_, v) => reset(d, v, rng),
    };
    out
}
