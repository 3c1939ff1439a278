//! Maximum score objective and its grid maximization under `|b_{1,1}| = 1`.
//!
//! The objective is `S_N(b) = N^-1 Σ τ_i (2 d_i - 1) 1{w_i'b > 0}` with
//! `w_i = (z_i, Ĝ(x_i))`. It is a step function of `b`, so the maximizer is
//! found by exhaustive evaluation over `{-1, +1} × grid`. Scores are
//! accumulated as integer counts so ties are detected exactly.

mod grid;
pub mod subsampling;

pub use grid::{GridAxis, GridSpec};
pub use subsampling::{subsampling_ci, SubsamplingCi, SubsamplingConfig};

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::first_stage::{fit_first_stage, FirstStageConfig, FirstStageFit};

/// Scale-normalized coefficient vector `(b_{1,1}, b̃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    /// Either `-1` or `+1`.
    pub b11: i8,
    pub btilde: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(b11: i8, btilde: Vec<f64>) -> Result<Self> {
        if b11 != 1 && b11 != -1 {
            return Err(Error::invalid("b11", format!("must be -1 or +1, got {b11}")));
        }
        Ok(Self { b11, btilde })
    }

    /// Full coefficient vector of length `k + p`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.btilde.len() + 1);
        v.push(f64::from(self.b11));
        v.extend_from_slice(&self.btilde);
        v
    }
}

/// Regressors, outcomes and trimming weights for the score objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreProblem {
    w: Vec<f64>,
    dim: usize,
    d: Vec<u8>,
    tau: Vec<bool>,
}

impl ScoreProblem {
    /// `w` is row-major `N × dim`.
    pub fn new(w: Vec<f64>, dim: usize, d: Vec<u8>, tau: Vec<bool>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("dim", "need at least two regressors"));
        }
        let n = d.len();
        if n == 0 {
            return Err(Error::Empty("score problem"));
        }
        if w.len() != n * dim {
            return Err(Error::DimensionMismatch {
                what: "w",
                expected: n * dim,
                got: w.len(),
            });
        }
        if tau.len() != n {
            return Err(Error::DimensionMismatch {
                what: "tau",
                expected: n,
                got: tau.len(),
            });
        }
        if d.iter().any(|v| *v > 1) {
            return Err(Error::invalid("d", "outcomes must be 0 or 1"));
        }
        for (row, t) in w.chunks_exact(dim).zip(&tau) {
            if *t && !row.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("regressor row with tau = 1"));
            }
        }
        Ok(Self { w, dim, d, tau })
    }

    /// Builds `w_i = (z_i, g_i)` from a dataset and per-observation `G` values.
    pub fn from_dataset(data: &Dataset, g_rows: &[Vec<f64>], tau: &[bool]) -> Result<Self> {
        let dims = data.dims();
        if g_rows.len() != data.len() {
            return Err(Error::DimensionMismatch {
                what: "G rows",
                expected: data.len(),
                got: g_rows.len(),
            });
        }
        let dim = dims.k + dims.p;
        let mut w = Vec::with_capacity(data.len() * dim);
        for (obs, g) in data.observations().iter().zip(g_rows) {
            if g.len() != dims.p {
                return Err(Error::DimensionMismatch {
                    what: "G row",
                    expected: dims.p,
                    got: g.len(),
                });
            }
            w.extend_from_slice(&obs.z);
            w.extend_from_slice(g);
        }
        let d = data.observations().iter().map(|o| o.d).collect();
        Self::new(w, dim, d, tau.to_vec())
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_effective(&self) -> usize {
        self.tau.iter().filter(|t| **t).count()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.dim..(i + 1) * self.dim]
    }

    /// `Σ τ_i (2 d_i - 1) 1{w_i'b > 0}` as an integer.
    fn count(&self, b: &[f64]) -> i64 {
        let mut total = 0i64;
        for i in 0..self.len() {
            if self.tau[i] && dot(self.row(i), b) > 0.0 {
                total += sign(self.d[i]);
            }
        }
        total
    }

    /// Score at an arbitrary (not necessarily normalized) coefficient vector.
    pub fn score_at(&self, b: &[f64]) -> Result<f64> {
        if b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "parameter",
                expected: self.dim,
                got: b.len(),
            });
        }
        Ok(self.count(b) as f64 / self.len() as f64)
    }

    /// Reorders observations; `order` must be a permutation of `0..N`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("order", "not a permutation"));
            }
        }
        if order.len() != self.len() {
            return Err(Error::invalid("order", "not a permutation"));
        }
        Ok(Self {
            w: order.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            dim: self.dim,
            d: order.iter().map(|&i| self.d[i]).collect(),
            tau: order.iter().map(|&i| self.tau[i]).collect(),
        })
    }

    fn check_point(&self, b: &ParameterPoint) -> Result<()> {
        if b.btilde.len() + 1 != self.dim {
            return Err(Error::DimensionMismatch {
                what: "parameter",
                expected: self.dim,
                got: b.btilde.len() + 1,
            });
        }
        Ok(())
    }
}

#[inline]
fn dot(w: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in w.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
fn sign(d: u8) -> i64 {
    2 * i64::from(d) - 1
}

/// Sample score `N^-1 Σ τ_i (2 d_i - 1) 1{w_i'b > 0}`.
pub fn score(problem: &ScoreProblem, b: &ParameterPoint) -> Result<f64> {
    problem.check_point(b)?;
    Ok(problem.count(&b.to_vec()) as f64 / problem.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxScoreEstimate {
    /// First maximizer in scan order.
    pub estimate: ParameterPoint,
    pub score_value: f64,
    /// Every grid maximizer, in scan order.
    pub argmax_set: Vec<ParameterPoint>,
    pub n_effective: usize,
}

const B11_ORDER: [i8; 2] = [-1, 1];

/// Exact grid maximization over `{-1, +1} × grid`.
///
/// Scan order is `b11 = -1` before `+1`, then lexicographic in the grid
/// indices. With a single free coefficient the per-point counts are built
/// from monotone switch points instead of a full rescan; the result is
/// identical to [`maximize_score_exhaustive`].
pub fn maximize_score(problem: &ScoreProblem, grid: &GridSpec) -> Result<MaxScoreEstimate> {
    check_grid(problem, grid)?;
    if grid.dim() == 1 {
        let counts: Vec<Vec<i64>> = B11_ORDER
            .iter()
            .map(|&b11| scalar_counts(problem, f64::from(b11), &grid.axes[0]))
            .collect();
        Ok(collect_argmax(problem, grid, &counts))
    } else {
        maximize_score_exhaustive(problem, grid)
    }
}

/// Evaluates the objective independently at every grid point.
pub fn maximize_score_exhaustive(problem: &ScoreProblem, grid: &GridSpec) -> Result<MaxScoreEstimate> {
    check_grid(problem, grid)?;
    let size = grid.size();
    let counts: Vec<Vec<i64>> = B11_ORDER
        .iter()
        .map(|&b11| {
            (0..size)
                .into_par_iter()
                .map(|flat| {
                    let mut b = Vec::with_capacity(problem.dim);
                    b.push(f64::from(b11));
                    b.extend(grid.point(flat));
                    problem.count(&b)
                })
                .collect()
        })
        .collect();
    Ok(collect_argmax(problem, grid, &counts))
}

fn check_grid(problem: &ScoreProblem, grid: &GridSpec) -> Result<()> {
    if grid.axes.is_empty() || grid.size() == 0 {
        return Err(Error::EmptyGrid);
    }
    if grid.dim() + 1 != problem.dim {
        return Err(Error::DimensionMismatch {
            what: "grid",
            expected: problem.dim - 1,
            got: grid.dim(),
        });
    }
    Ok(())
}

/// Counts at every point of a one-dimensional grid for fixed `b11`.
///
/// For each row, `fl(fl(z b11) + fl(g v))` is monotone in `v` (rounding is
/// monotone), so the indicator switches at most once along the grid and the
/// switch index is located by binary search on the same expression used by
/// [`score`].
fn scalar_counts(problem: &ScoreProblem, b11: f64, axis: &GridAxis) -> Vec<i64> {
    let values = axis.values();
    let len = values.len();
    let mut diff = vec![0i64; len + 1];
    for i in 0..problem.len() {
        if !problem.tau[i] {
            continue;
        }
        let row = problem.row(i);
        let (z, g) = (row[0], row[1]);
        let base = 0.0 + z * b11;
        let on = |v: f64| base + g * v > 0.0;
        let s = sign(problem.d[i]);
        let (from, to) = if g > 0.0 {
            (values.partition_point(|&v| !on(v)), len)
        } else if g < 0.0 {
            (0, values.partition_point(|&v| on(v)))
        } else if on(values[0]) {
            (0, len)
        } else {
            (0, 0)
        };
        if from < to {
            diff[from] += s;
            diff[to] -= s;
        }
    }
    let mut acc = 0i64;
    diff[..len]
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn collect_argmax(problem: &ScoreProblem, grid: &GridSpec, counts: &[Vec<i64>]) -> MaxScoreEstimate {
    let best = counts.iter().flatten().copied().max().unwrap_or(0);
    let mut argmax_set = Vec::new();
    for (b11, row) in B11_ORDER.iter().zip(counts) {
        for (flat, c) in row.iter().enumerate() {
            if *c == best {
                argmax_set.push(ParameterPoint {
                    b11: *b11,
                    btilde: grid.point(flat),
                });
            }
        }
    }
    MaxScoreEstimate {
        estimate: argmax_set[0].clone(),
        score_value: best as f64 / problem.len() as f64,
        argmax_set,
        n_effective: problem.n_effective(),
    }
}

/// Infeasible estimator using the true `G(x_i)` as regressors.
pub fn single_stage_estimate(
    data: &Dataset,
    true_g_at_obs: &[Vec<f64>],
    tau: &[bool],
    grid: &GridSpec,
) -> Result<MaxScoreEstimate> {
    let problem = ScoreProblem::from_dataset(data, true_g_at_obs, tau)?;
    maximize_score(&problem, grid)
}

/// First stage plus score maximization with `w_i = (z_i, Ĝ(x_i))`.
pub fn two_stage_estimate(data: &Dataset, fs_cfg: &FirstStageConfig, grid: &GridSpec) -> Result<MaxScoreEstimate> {
    two_stage_with_fit(data, fs_cfg, grid).map(|(est, _)| est)
}

/// As [`two_stage_estimate`], also returning the first-stage fit.
pub fn two_stage_with_fit(
    data: &Dataset,
    fs_cfg: &FirstStageConfig,
    grid: &GridSpec,
) -> Result<(MaxScoreEstimate, FirstStageFit)> {
    let fit = fit_first_stage(data, fs_cfg)?;
    let problem = ScoreProblem::from_dataset(data, &fit.g_hat_at_obs, &fit.tau)?;
    let est = maximize_score(&problem, grid)?;
    Ok((est, fit))
}
