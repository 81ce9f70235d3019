//! Synthetic fronts for debugging optimizers: ZDT1, ZDT3, DTLZ2 and a
//! shifted-sphere family.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::objective::{Direction, ObjectiveVector};
use crate::pareto::nondominated_indices;
use crate::space::{DecisionSpace, Solution};

use super::Problem;

fn reals(space: &DecisionSpace, s: &Solution) -> Result<Vec<f64>> {
    space.validate(s)?;
    Ok(s.to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZdtVariant {
    One,
    Three,
}

#[derive(Debug, Clone)]
pub struct Zdt {
    variant: ZdtVariant,
    space: DecisionSpace,
    directions: [Direction; 2],
}

impl Zdt {
    pub fn new(variant: ZdtVariant, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("ZDT needs at least two decisions"));
        }
        Ok(Self {
            variant,
            space: DecisionSpace::unit_box(n, 0.0, 1.0)?,
            directions: [Direction::Minimize; 2],
        })
    }

    fn front_f2(&self, f1: f64) -> f64 {
        match self.variant {
            ZdtVariant::One => 1.0 - f1.sqrt(),
            ZdtVariant::Three => 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin(),
        }
    }
}

impl Problem for Zdt {
    fn name(&self) -> String {
        match self.variant {
            ZdtVariant::One => "zdt1".into(),
            ZdtVariant::Three => "zdt3".into(),
        }
    }

    fn space(&self) -> &DecisionSpace {
        &self.space
    }

    fn directions(&self) -> &[Direction] {
        &self.directions
    }

    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector> {
        let x = reals(&self.space, solution)?;
        let n = x.len();
        let f1 = x[0];
        let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n - 1) as f64;
        let h = match self.variant {
            ZdtVariant::One => 1.0 - (f1 / g).sqrt(),
            ZdtVariant::Three => 1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * PI * f1).sin(),
        };
        ObjectiveVector::minimize(vec![f1, g * h])
    }

    fn true_front(&self, points: usize) -> Option<Vec<Vec<f64>>> {
        let points = points.max(2);
        let samples: Vec<Vec<f64>> = (0..points)
            .map(|i| {
                let f1 = i as f64 / (points - 1) as f64;
                vec![f1, self.front_f2(f1)]
            })
            .collect();
        match self.variant {
            ZdtVariant::One => Some(samples),
            ZdtVariant::Three => {
                let keep = nondominated_indices(&samples, Exec::Sequential).ok()?;
                Some(keep.into_iter().map(|i| samples[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dtlz2 {
    m: usize,
    space: DecisionSpace,
    directions: Vec<Direction>,
}

impl Dtlz2 {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 2 || n < m {
            return Err(Error::param(format!(
                "DTLZ2 needs n >= m >= 2 (n={n}, m={m})"
            )));
        }
        Ok(Self {
            m,
            space: DecisionSpace::unit_box(n, 0.0, 1.0)?,
            directions: vec![Direction::Minimize; m],
        })
    }

    fn objectives(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let g: f64 = x[m - 1..].iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
        (0..m)
            .map(|j| {
                let mut f = 1.0 + g;
                for xi in &x[..m - 1 - j] {
                    f *= (xi * PI / 2.0).cos();
                }
                if j > 0 {
                    f *= (x[m - 1 - j] * PI / 2.0).sin();
                }
                f
            })
            .collect()
    }
}

impl Problem for Dtlz2 {
    fn name(&self) -> String {
        "dtlz2".into()
    }

    fn space(&self) -> &DecisionSpace {
        &self.space
    }

    fn directions(&self) -> &[Direction] {
        &self.directions
    }

    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector> {
        let x = reals(&self.space, solution)?;
        ObjectiveVector::minimize(self.objectives(&x))
    }

    /// Regular grid over the position variables with distance variables at 0.5.
    fn true_front(&self, points: usize) -> Option<Vec<Vec<f64>>> {
        let dims = self.m - 1;
        let per_axis = ((points.max(2) as f64).powf(1.0 / dims as f64).ceil() as usize).max(2);
        let total = per_axis.pow(dims as u32);
        let mut x = vec![0.5; self.space.len()];
        Some(
            (0..total)
                .map(|mut code| {
                    for xi in x.iter_mut().take(dims) {
                        *xi = (code % per_axis) as f64 / (per_axis - 1) as f64;
                        code /= per_axis;
                    }
                    self.objectives(&x)
                })
                .collect(),
        )
    }
}

/// `m` objectives `f_j(x) = sum_i (x_i - c_ji)^2` over `[-5, 5]^n`, where the
/// centres sit on the first axis at `c_j0 = j - (m - 1) / 2` and zero elsewhere.
/// With `m = 1` this is the plain sphere function with optimum 0 at the origin.
#[derive(Debug, Clone)]
pub struct Sphere {
    centres: Vec<Vec<f64>>,
    space: DecisionSpace,
    directions: Vec<Direction>,
}

impl Sphere {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_bounds(n, m, -5.0, 5.0)
    }

    pub fn with_bounds(n: usize, m: usize, lo: f64, hi: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::param("sphere needs n >= 1 and m >= 1"));
        }
        let centres = (0..m)
            .map(|j| {
                let mut c = vec![0.0; n];
                c[0] = j as f64 - (m as f64 - 1.0) / 2.0;
                c
            })
            .collect();
        Ok(Self {
            centres,
            space: DecisionSpace::unit_box(n, lo, hi)?,
            directions: vec![Direction::Minimize; m],
        })
    }
}

impl Problem for Sphere {
    fn name(&self) -> String {
        "sphere".into()
    }

    fn space(&self) -> &DecisionSpace {
        &self.space
    }

    fn directions(&self) -> &[Direction] {
        &self.directions
    }

    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector> {
        let x = reals(&self.space, solution)?;
        ObjectiveVector::minimize(
            self.centres
                .iter()
                .map(|c| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect(),
        )
    }

    /// Known for one and two objectives (the segment between the centres).
    fn true_front(&self, points: usize) -> Option<Vec<Vec<f64>>> {
        match self.centres.len() {
            1 => Some(vec![vec![0.0]]),
            2 => {
                let points = points.max(2);
                Some(
                    (0..points)
                        .map(|i| {
                            let t = i as f64 / (points - 1) as f64;
                            vec![t * t, (1.0 - t) * (1.0 - t)]
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }
}
