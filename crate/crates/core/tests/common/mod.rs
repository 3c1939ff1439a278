//! Shared test oracles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twostage_core::maxscore::{GridAxis, GridSpec, ScoreProblem};

/// A two-regressor instance on the quarter lattice: `z = Z/4`, `g = G/4`,
/// grid `t = T/4` for integer `T` in `[-20, 20]`.
#[derive(Debug, Clone)]
pub struct LatticeInstance {
    pub z: Vec<i64>,
    pub g: Vec<i64>,
    pub d: Vec<u8>,
    pub tau: Vec<bool>,
}

pub const T_MIN: i64 = -20;
pub const T_MAX: i64 = 20;

impl LatticeInstance {
    pub fn random(rng: &mut ChaCha8Rng, max_n: usize) -> Self {
        let n = rng.random_range(1..=max_n);
        Self {
            z: (0..n).map(|_| rng.random_range(-8..=8)).collect(),
            g: (0..n).map(|_| rng.random_range(-8..=8)).collect(),
            d: (0..n).map(|_| rng.random_range(0..=1)).collect(),
            tau: (0..n).map(|_| rng.random_bool(0.85)).collect(),
        }
    }

    pub fn problem(&self) -> ScoreProblem {
        let w = self
            .z
            .iter()
            .zip(&self.g)
            .flat_map(|(z, g)| [*z as f64 / 4.0, *g as f64 / 4.0])
            .collect();
        ScoreProblem::new(w, 2, self.d.clone(), self.tau.clone()).unwrap()
    }

    pub fn grid() -> GridSpec {
        GridSpec::new(vec![GridAxis::new(T_MIN as f64 / 4.0, T_MAX as f64 / 4.0, (T_MAX - T_MIN + 1) as usize).unwrap()])
            .unwrap()
    }

    /// Score count at the rational point `t = num / (4 den)`, exact in integers.
    fn count_at(&self, b11: i64, num: i64, den: i64) -> i64 {
        let mut total = 0;
        for i in 0..self.z.len() {
            // b11 Z/4 + (G/4)(num/(4 den)) > 0  <=>  4 den b11 Z + G num > 0
            if self.tau[i] && 4 * den * b11 * self.z[i] + self.g[i] * num > 0 {
                total += 2 * i64::from(self.d[i]) - 1;
            }
        }
        total
    }

    /// Argmax over `{-1, +1} × grid` via the cells cut out by the sorted
    /// switch points `T = -4 b11 Z / G`. Returns `(b11, T)` in scan order and
    /// the maximal count.
    pub fn cell_oracle(&self) -> (Vec<(i8, i64)>, i64) {
        let mut per_point = Vec::new();
        for b11 in [-1i64, 1] {
            // thresholds as reduced fractions num/den with den > 0
            let mut cuts: Vec<(i64, i64)> = Vec::new();
            for i in 0..self.z.len() {
                if self.tau[i] && self.g[i] != 0 {
                    let (mut num, mut den) = (-4 * b11 * self.z[i], self.g[i]);
                    if den < 0 {
                        num = -num;
                        den = -den;
                    }
                    cuts.push((num, den));
                }
            }
            cuts.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
            cuts.dedup_by(|a, b| a.0 * b.1 == b.0 * a.1);

            // one representative per cell: rays, points, open intervals
            let k = cuts.len();
            let mut cell_counts = Vec::with_capacity(2 * k + 1);
            for cell in 0..=(2 * k) {
                let (num, den) = if k == 0 {
                    (0, 1)
                } else if cell % 2 == 1 {
                    cuts[cell / 2]
                } else if cell == 0 {
                    (cuts[0].0 - cuts[0].1, cuts[0].1)
                } else if cell == 2 * k {
                    (cuts[k - 1].0 + cuts[k - 1].1, cuts[k - 1].1)
                } else {
                    let (a, b) = (cuts[cell / 2 - 1], cuts[cell / 2]);
                    (a.0 * b.1 + b.0 * a.1, 2 * a.1 * b.1)
                };
                cell_counts.push(self.count_at(b11, num, den));
            }
            for t in T_MIN..=T_MAX {
                let below = cuts.iter().filter(|c| c.0 < t * c.1).count();
                let on = cuts.iter().any(|c| c.0 == t * c.1);
                let cell = 2 * below + usize::from(on);
                per_point.push((b11 as i8, t, cell_counts[cell]));
            }
        }
        let best = per_point.iter().map(|p| p.2).max().unwrap();
        let set = per_point
            .into_iter()
            .filter(|p| p.2 == best)
            .map(|p| (p.0, p.1))
            .collect();
        (set, best)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact rational arithmetic for the Lagrange oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frac(pub i128, pub i128);

impl Frac {
    fn norm(self) -> Self {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let g = gcd(self.0, self.1).max(1);
        let s = if self.1 < 0 { -1 } else { 1 };
        Frac(s * self.0 / g, s * self.1 / g)
    }
    fn mul(self, o: Self) -> Self {
        Frac(self.0 * o.0, self.1 * o.1).norm()
    }
    fn div(self, o: Self) -> Self {
        Frac(self.0 * o.1, self.1 * o.0).norm()
    }
    fn sub(self, o: Self) -> Self {
        Frac(self.0 * o.1 - o.0 * self.1, self.1 * o.1).norm()
    }
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// a_s = Π_{t≠s} (0 - x_t) / (x_s - x_t) over nodes x_s = b_s² = 1/s.
pub fn lagrange_oracle() -> [Frac; 4] {
    let nodes: Vec<Frac> = (1..=4).map(|s| Frac(1, s)).collect();
    let mut a = [Frac(0, 1); 4];
    for s in 0..4 {
        let mut v = Frac(1, 1);
        for t in 0..4 {
            if t != s {
                v = v.mul(Frac(0, 1).sub(nodes[t]).div(nodes[s].sub(nodes[t])));
            }
        }
        a[s] = v;
    }
    a
}

