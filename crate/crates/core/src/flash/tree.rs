//! Regression trees grown by greedy variance reduction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Test {
    /// Rows with `x <= t` go left.
    AtMost(f64),
    /// Rows equal to this level go left, the rest right.
    Level(f64),
}

impl Test {
    fn goes_left(self, x: f64) -> bool {
        match self {
            Test::AtMost(t) => x <= t,
            Test::Level(l) => x == l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        mean: f64,
        rows: usize,
    },
    Split {
        feature: usize,
        test: Test,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_leaf: 4,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    arity: usize,
    min_leaf: usize,
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    targets: &'a [f64],
    categorical: &'a [bool],
    params: TreeParams,
    nodes: Vec<Node>,
}

/// Best split found for one node: (gain, feature, test).
type Candidate = (f64, usize, Test);

impl Grower<'_> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.targets[i]).sum::<f64>() / n as f64;
        self.nodes.push(Node::Leaf { mean, rows: n });
        if self.params.max_depth.is_some_and(|d| depth >= d) || n < 2 * self.params.min_leaf.max(1)
        {
            return at;
        }
        let Some((_, feature, test)) = self.best_split(&idx, mean) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| test.goes_left(self.rows[i][feature]));
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            test,
            left,
            right,
        };
        at
    }

    /// Gain is the drop in squared error, `S_l^2 / n_l + S_r^2 / n_r` over
    /// targets centred on the node mean.
    fn best_split(&self, idx: &[usize], mean: f64) -> Option<Candidate> {
        let min_leaf = self.params.min_leaf.max(1);
        let n = idx.len();
        let mut best: Option<Candidate> = None;
        let mut consider = |c: Candidate| {
            if c.0 > 0.0 && best.is_none_or(|b| c.0 > b.0) {
                best = Some(c);
            }
        };
        for f in 0..self.categorical.len() {
            let mut col: Vec<(f64, f64)> = idx
                .iter()
                .map(|&i| (self.rows[i][f], self.targets[i] - mean))
                .collect();
            col.sort_by(|a, b| a.0.total_cmp(&b.0));
            if self.categorical[f] {
                let mut k = 0;
                while k < n {
                    let level = col[k].0;
                    let (mut s, mut c) = (0.0, 0usize);
                    while k < n && col[k].0 == level {
                        s += col[k].1;
                        c += 1;
                        k += 1;
                    }
                    if c >= min_leaf && n - c >= min_leaf {
                        let rest: f64 = col.iter().filter(|p| p.0 != level).map(|p| p.1).sum();
                        consider((
                            s * s / c as f64 + rest * rest / (n - c) as f64,
                            f,
                            Test::Level(level),
                        ));
                    }
                }
            } else {
                let total: f64 = col.iter().map(|p| p.1).sum();
                let mut s = 0.0;
                for k in 0..n - 1 {
                    s += col[k].1;
                    let nl = k + 1;
                    if col[k].0 == col[k + 1].0 || nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let sr = total - s;
                    let gain = s * s / nl as f64 + sr * sr / (n - nl) as f64;
                    consider((gain, f, Test::AtMost(midpoint(col[k].0, col[k + 1].0))));
                }
            }
        }
        best
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // guard against rounding up to `b` for adjacent floats
    if m < b {
        m
    } else {
        a
    }
}

impl RegressionTree {
    /// Fits a tree on numeric features.
    pub fn fit(rows: &[Vec<f64>], targets: &[f64], params: TreeParams) -> Result<Self> {
        let arity = rows.first().map_or(0, Vec::len);
        Self::fit_mixed(rows, targets, &vec![false; arity], params)
    }

    /// Fits a tree where `categorical[j]` marks features split by level
    /// (one level against the rest) instead of by threshold.
    pub fn fit_mixed(
        rows: &[Vec<f64>],
        targets: &[f64],
        categorical: &[bool],
        params: TreeParams,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if rows.len() != targets.len() {
            return Err(Error::ArityMismatch {
                expected: rows.len(),
                found: targets.len(),
            });
        }
        let arity = categorical.len();
        if let Some(r) = rows.iter().find(|r| r.len() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: r.len(),
            });
        }
        if rows.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
            return Err(Error::param("training data must be finite"));
        }
        let mut g = Grower {
            rows,
            targets,
            categorical,
            params,
            nodes: Vec::new(),
        };
        g.grow((0..rows.len()).collect(), 0);
        Ok(Self {
            nodes: g.nodes,
            arity,
            min_leaf: params.min_leaf,
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: row.len(),
            });
        }
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { mean, .. } => return *mean,
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    at = if test.goes_left(row[*feature]) {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Nodes in depth-first order; the root is at index 0.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { mean, rows } => Some((*mean, *rows)),
            Node::Split { .. } => None,
        })
    }
}
