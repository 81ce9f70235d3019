//! Dominance, non-dominated filtering, the additive-epsilon indicator,
//! indicator-based fitness, normalization and Minkowski distance.
//!
//! Everything here works on canonical (minimization) values. Comparisons use
//! exact float equality; callers needing a tolerance must round first.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::objective::{EvaluatedSolution, ObjectiveVector};

/// Sorted points per task in parallel non-dominated filtering.
const PARALLEL_CHUNK: usize = 512;

/// Default scale for [`indicator_fitness`] on normalized objectives.
pub const DEFAULT_KAPPA: f64 = 0.05;

fn check_arity(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::ArityMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(())
}

/// `u` is no worse than `v` everywhere and strictly better somewhere.
///
/// Assumes equal lengths; see [`dominates`] for the checked form.
pub fn dominates_values(u: &[f64], v: &[f64]) -> bool {
    debug_assert_eq!(u.len(), v.len());
    let mut strictly = false;
    for (a, b) in u.iter().zip(v) {
        if a > b {
            return false;
        }
        if a < b {
            strictly = true;
        }
    }
    strictly
}

/// `u` is no worse than `v` in every objective.
pub fn weakly_dominates_values(u: &[f64], v: &[f64]) -> bool {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).all(|(a, b)| a <= b)
}

pub fn dominates(u: &ObjectiveVector, v: &ObjectiveVector) -> Result<bool> {
    check_arity(u.canonical(), v.canonical())?;
    Ok(dominates_values(u.canonical(), v.canonical()))
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Indices (ascending) of the points dominated by no other point.
///
/// Points are sorted lexicographically, so any dominator of `p` sorts strictly
/// before `p`, and culled against the running front. Parallel mode culls
/// chunks of the sorted order independently, then drops local survivors
/// dominated by a survivor of an earlier chunk. Both return the same indices.
pub fn nondominated_indices<P: AsRef<[f64]> + Sync>(
    points: &[P],
    exec: Exec,
) -> Result<Vec<usize>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    for p in points {
        check_arity(first.as_ref(), p.as_ref())?;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lexicographic(points[a].as_ref(), points[b].as_ref()));
    let cull = |ids: &[usize]| {
        let mut front: Vec<usize> = Vec::new();
        for &i in ids {
            let p = points[i].as_ref();
            if !front
                .iter()
                .any(|&f| dominates_values(points[f].as_ref(), p))
            {
                front.push(i);
            }
        }
        front
    };
    let mut front = if exec.is_parallel() && points.len() >= 2 * PARALLEL_CHUNK {
        let chunks: Vec<&[usize]> = order.chunks(PARALLEL_CHUNK).collect();
        let local = exec.map_slice(&chunks, |c| cull(c));
        let kept = exec.map_range(local.len(), |k| {
            local[k]
                .iter()
                .copied()
                .filter(|&i| {
                    let p = points[i].as_ref();
                    !local[..k]
                        .iter()
                        .flatten()
                        .any(|&f| dominates_values(points[f].as_ref(), p))
                })
                .collect::<Vec<usize>>()
        });
        kept.concat()
    } else {
        cull(&order)
    };
    front.sort_unstable();
    Ok(front)
}

/// Members of `set` dominated by no other member, in input order.
pub fn nondominated_filter(set: &[EvaluatedSolution]) -> Result<ParetoArchive> {
    nondominated_filter_with(set, Exec::Sequential)
}

pub fn nondominated_filter_with(set: &[EvaluatedSolution], exec: Exec) -> Result<ParetoArchive> {
    let idx = nondominated_indices(set, exec)?;
    Ok(ParetoArchive {
        members: idx.into_iter().map(|i| set[i].clone()).collect(),
    })
}

/// A mutually non-dominated set of evaluated solutions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    members: Vec<EvaluatedSolution>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[EvaluatedSolution] {
        &self.members
    }

    pub fn into_members(self) -> Vec<EvaluatedSolution> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Canonical objective values of every member.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.members
            .iter()
            .map(|m| m.objectives.canonical().to_vec())
            .collect()
    }

    /// Offers a candidate. It is rejected when some member weakly dominates it
    /// (an exact duplicate included); otherwise it enters and evicts every
    /// member it dominates. Returns whether the archive changed.
    pub fn insert(&mut self, candidate: EvaluatedSolution) -> bool {
        let c = candidate.objectives.canonical();
        if self
            .members
            .iter()
            .any(|m| weakly_dominates_values(m.objectives.canonical(), c))
        {
            return false;
        }
        self.members
            .retain(|m| !dominates_values(c, m.objectives.canonical()));
        self.members.push(candidate);
        true
    }

    /// O(n²) check of the archive invariant.
    pub fn is_mutually_nondominated(&self) -> bool {
        self.members.iter().all(|a| {
            self.members
                .iter()
                .all(|b| !dominates_values(a.objectives.canonical(), b.objectives.canonical()))
        })
    }
}

/// Additive epsilon: the smallest shift `e` such that `u - e` weakly
/// dominates `v`, i.e. `max_i (u_i - v_i)`. Non-positive iff `u` weakly
/// dominates `v`.
pub fn epsilon_indicator(u: &[f64], v: &[f64]) -> Result<f64> {
    check_arity(u, v)?;
    Ok(epsilon_unchecked(u, v))
}

pub(crate) fn epsilon_unchecked(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Indicator fitness of `population[index]`:
/// `sum over y != x of -exp(-eps(y, x) / kappa)`. Larger is better.
pub fn indicator_fitness<P: AsRef<[f64]>>(
    population: &[P],
    index: usize,
    kappa: f64,
) -> Result<f64> {
    check_fitness_inputs(population, kappa)?;
    if index >= population.len() {
        return Err(Error::param(format!("member index {index} out of range")));
    }
    let x = population[index].as_ref();
    Ok(population
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != index)
        .map(|(_, y)| -(-epsilon_unchecked(y.as_ref(), x) / kappa).exp())
        .sum())
}

/// Indicator fitness of every member.
pub fn indicator_fitnesses<P: AsRef<[f64]>>(population: &[P], kappa: f64) -> Result<Vec<f64>> {
    check_fitness_inputs(population, kappa)?;
    let n = population.len();
    let mut fit = vec![0.0; n];
    for (i, x) in population.iter().enumerate() {
        for (j, y) in population.iter().enumerate() {
            if i != j {
                fit[i] -= (-epsilon_unchecked(y.as_ref(), x.as_ref()) / kappa).exp();
            }
        }
    }
    Ok(fit)
}

fn check_fitness_inputs<P: AsRef<[f64]>>(population: &[P], kappa: f64) -> Result<()> {
    if population.len() < 2 {
        return Err(Error::param("indicator fitness needs at least two members"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa must be a positive finite number"));
    }
    let first = population[0].as_ref();
    for p in population {
        check_arity(first, p.as_ref())?;
    }
    Ok(())
}

/// Per-objective (min, max) over a set of points.
pub fn bounds_of<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<(f64, f64)>> {
    let first = points.first().ok_or(Error::Empty("front"))?.as_ref();
    let mut bounds: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
    for p in points {
        let p = p.as_ref();
        check_arity(first, p)?;
        for (b, &v) in bounds.iter_mut().zip(p) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    Ok(bounds)
}

/// Min-max normalization per objective, `(v - min) / (max - min)`.
///
/// Bounds default to the front's own. An objective with `max == min` maps to 0.
pub fn normalize_front<P: AsRef<[f64]>>(
    front: &[P],
    bounds: Option<&[(f64, f64)]>,
) -> Result<Vec<Vec<f64>>> {
    if front.is_empty() {
        return Err(Error::Empty("front"));
    }
    let own;
    let bounds = match bounds {
        Some(b) => b,
        None => {
            own = bounds_of(front)?;
            &own
        }
    };
    front
        .iter()
        .map(|p| {
            let p = p.as_ref();
            if p.len() != bounds.len() {
                return Err(Error::ArityMismatch {
                    expected: bounds.len(),
                    found: p.len(),
                });
            }
            Ok(p.iter()
                .zip(bounds)
                .map(|(&v, &(lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
                .collect())
        })
        .collect()
}

/// `(sum_i |x_i - y_i|^n)^(1/n)`; `n = 2` is Euclidean, `n = inf` Chebyshev.
pub fn minkowski_distance(x: &[f64], y: &[f64], n: f64) -> Result<f64> {
    check_arity(x, y)?;
    if n.is_nan() || n < 1.0 {
        return Err(Error::param(format!(
            "Minkowski order must be >= 1, got {n}"
        )));
    }
    if n.is_infinite() {
        return Ok(x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max));
    }
    if n == 2.0 {
        return Ok(euclidean(x, y));
    }
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(n)).sum();
    Ok(s.powf(1.0 / n))
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::space::Solution;
    use proptest::prelude::*;
    use rand::Rng;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::minimize(v.to_vec()).unwrap()
    }

    fn ev(v: &[f64], i: usize) -> EvaluatedSolution {
        EvaluatedSolution {
            solution: Solution::reals([i as f64]),
            objectives: ov(v),
            eval_index: i + 1,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&ov(&[0.0, 0.0]), &ov(&[1.0, 1.0])).unwrap());
        assert!(!dominates(&ov(&[0.0, 1.0]), &ov(&[1.0, 0.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 0.0]), &ov(&[0.0, 1.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
        assert!(matches!(
            dominates(&ov(&[1.0]), &ov(&[1.0, 1.0])),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn filter_examples() {
        let set = vec![ev(&[0.0, 0.0], 0), ev(&[1.0, 1.0], 1)];
        let a = nondominated_filter(&set).unwrap();
        assert_eq!(a.points(), vec![vec![0.0, 0.0]]);

        let set = vec![ev(&[0.0, 1.0], 0), ev(&[1.0, 0.0], 1), ev(&[2.0, 2.0], 2)];
        let a = nondominated_filter(&set).unwrap();
        assert_eq!(a.points(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

        assert!(nondominated_filter(&[]).unwrap().is_empty());
    }

    fn brute_force(points: &[Vec<f64>]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| {
                (0..points.len()).all(|j| {
                    let (p, q) = (&points[j], &points[i]);
                    let no_worse = p.iter().zip(q).all(|(a, b)| a <= b);
                    let better = p.iter().zip(q).any(|(a, b)| a < b);
                    !(no_worse && better)
                })
            })
            .collect()
    }

    #[test]
    fn filter_matches_pairwise_oracle_on_random_sets() {
        let mut rng = SeededRng::new(11);
        for n in [200, 200, 200, 1100, 3000] {
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..3)
                        .map(|_| (rng.random::<f64>() * 10.0).floor())
                        .collect()
                })
                .collect();
            let want = brute_force(&pts);
            assert_eq!(nondominated_indices(&pts, Exec::Sequential).unwrap(), want);
            assert_eq!(nondominated_indices(&pts, Exec::Parallel).unwrap(), want);
        }
    }

    #[test]
    fn archive_insert_keeps_invariant() {
        let mut rng = SeededRng::new(5);
        let mut a = ParetoArchive::new();
        for i in 0..300 {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            a.insert(ev(&p, i));
            assert!(a.is_mutually_nondominated());
        }
        assert!(!a.insert(a.members()[0].clone()));
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_indicator(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(epsilon_indicator(&[0.0, 0.0], &[0.5, 0.5]).unwrap(), -0.5);
        assert!(epsilon_indicator(&[0.0], &[0.5, 0.5]).is_err());
        let mut rng = SeededRng::new(8);
        for _ in 0..100 {
            let u: Vec<f64> = (0..4).map(|_| rng.random()).collect();
            let v: Vec<f64> = (0..4).map(|_| rng.random()).collect();
            let mut want = f64::NEG_INFINITY;
            for i in 0..4 {
                if u[i] - v[i] > want {
                    want = u[i] - v[i];
                }
            }
            assert_eq!(epsilon_indicator(&u, &v).unwrap(), want);
        }
    }

    #[test]
    fn fitness_examples() {
        let pop = vec![vec![0.2, 0.4], vec![0.2, 0.4]];
        let f = indicator_fitnesses(&pop, DEFAULT_KAPPA).unwrap();
        assert_eq!(f[0], f[1]);

        // single-term sum
        let pop = vec![vec![0.1, 0.5], vec![0.3, 0.2]];
        let eps = (0.3f64 - 0.1).max(0.2 - 0.5);
        assert_eq!(
            indicator_fitness(&pop, 0, 0.05).unwrap(),
            -(-eps / 0.05).exp()
        );

        // hand-enumerated 3x2 epsilon terms; x0 dominates both peers
        let pop: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![0.5, 0.2], vec![0.2, 0.6]];
        let k = 0.05;
        let e = |y: usize, x: usize| -> f64 {
            let (a, b) = (&pop[y], &pop[x]);
            (a[0] - b[0]).max(a[1] - b[1])
        };
        let hand: Vec<f64> = (0..3)
            .map(|x| {
                (0..3)
                    .filter(|&y| y != x)
                    .map(|y| -(-e(y, x) / k).exp())
                    .sum()
            })
            .collect();
        // eps(1,0)=0.5, eps(2,0)=0.6, eps(0,1)=-0.2, eps(2,1)=0.4, eps(0,2)=0.0, eps(1,2)=0.3
        assert_eq!(e(1, 0), 0.5);
        assert_eq!(e(0, 1), -0.2);
        let f = indicator_fitnesses(&pop, k).unwrap();
        for i in 0..3 {
            assert!((f[i] - hand[i]).abs() <= 1e-12 * hand[i].abs().max(1.0));
            assert_eq!(f[i], indicator_fitness(&pop, i, k).unwrap());
        }
        assert!(f[0] > f[1] && f[0] > f[2]);

        assert!(indicator_fitnesses(&pop[..1], k).is_err());
        assert!(indicator_fitnesses(&pop, 0.0).is_err());
    }

    #[test]
    fn normalize_examples() {
        let front = vec![vec![1.0, 10.0], vec![3.0, 30.0]];
        assert_eq!(
            normalize_front(&front, None).unwrap(),
            vec![vec![0.0, 0.0], vec![1.0, 1.0]]
        );

        let single = vec![vec![4.0, -2.0, 7.0]];
        assert_eq!(normalize_front(&single, None).unwrap(), vec![vec![0.0; 3]]);

        // objective i spans [0, 2i]; widths differ tenfold
        let front = vec![
            vec![0.0, 0.0, 0.0],
            vec![2.0, 4.0, 20.0],
            vec![1.0, 1.0, 5.0],
        ];
        let n = normalize_front(&front, None).unwrap();
        for i in 0..3 {
            let col: Vec<f64> = n.iter().map(|p| p[i]).collect();
            assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        let empty: Vec<Vec<f64>> = vec![];
        assert!(normalize_front(&empty, None).is_err());
    }

    #[test]
    fn minkowski_examples() {
        assert_eq!(
            minkowski_distance(&[1.0, 2.0], &[1.0, 2.0], 3.0).unwrap(),
            0.0
        );
        assert_eq!(
            minkowski_distance(&[0.0, 0.0], &[3.0, 4.0], 2.0).unwrap(),
            5.0
        );
        let want = (1.0f64 + 1.0).powf(1.0 / 3.0);
        assert!((minkowski_distance(&[0.0, 0.0], &[1.0, 1.0], 3.0).unwrap() - want).abs() < 1e-15);
        assert!(minkowski_distance(&[0.0], &[1.0], 0.5).is_err());
        assert!(minkowski_distance(&[0.0], &[1.0, 2.0], 2.0).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0..5i32, 3).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn dominance_is_a_strict_partial_order(a in vec3(), b in vec3(), c in vec3()) {
            prop_assert!(!dominates_values(&a, &a));
            prop_assert!(!(dominates_values(&a, &b) && dominates_values(&b, &a)));
            if dominates_values(&a, &b) && dominates_values(&b, &c) {
                prop_assert!(dominates_values(&a, &c));
            }
        }

        #[test]
        fn filter_is_idempotent(pts in prop::collection::vec(vec3(), 0..40)) {
            let idx = nondominated_indices(&pts, Exec::Sequential).unwrap();
            let kept: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
            let again = nondominated_indices(&kept, Exec::Sequential).unwrap();
            prop_assert_eq!(again, (0..kept.len()).collect::<Vec<_>>());
        }

        #[test]
        fn normalization_preserves_order(pts in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 2), 1..20)) {
            let n = normalize_front(&pts, None).unwrap();
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    for k in 0..2 {
                        if pts[i][k] < pts[j][k] {
                            prop_assert!(n[i][k] <= n[j][k]);
                        }
                    }
                }
            }
        }

        #[test]
        fn best_everywhere_member_has_greatest_fitness(pts in prop::collection::vec(prop::collection::vec(0.1..1.0f64, 3), 2..12)) {
            let mut pop = pts.clone();
            pop.push(vec![0.0, 0.0, 0.0]);
            let f = indicator_fitnesses(&pop, DEFAULT_KAPPA).unwrap();
            let best = pop.len() - 1;
            for i in 0..best {
                prop_assert!(f[best] > f[i]);
            }
        }
    }
}
