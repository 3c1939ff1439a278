//! Subsampling confidence intervals for the cube-root-consistent estimator.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{two_stage_estimate, GridSpec, MaxScoreEstimate};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::first_stage::FirstStageConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SubsamplingConfig {
    /// Subsample size `m`, `1 < m < N`.
    pub m: usize,
    /// Number of subsamples `B`.
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl SubsamplingConfig {
    /// `m = ⌈N^(2/3)⌉`, `B = 200`.
    pub fn defaults_for(n: usize, level: f64, seed: u64) -> Self {
        Self {
            m: default_subsample_size(n),
            replicates: 200,
            level,
            seed,
        }
    }
}

pub fn default_subsample_size(n: usize) -> usize {
    let m = (n as f64).powf(2.0 / 3.0).ceil() as usize;
    // guard against 1000^(2/3) landing a hair above an integer
    if m > 1 && ((m - 1) as f64).powi(3) >= (n as f64).powi(2) {
        m - 1
    } else {
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsamplingCi {
    pub estimate: MaxScoreEstimate,
    /// Per coordinate of `btilde`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Subsamples whose estimator succeeded.
    pub replicates_used: usize,
}

/// Recomputes the two-stage estimate on `B` subsamples of size `m` drawn
/// without replacement, and inverts the quantiles of
/// `m^(1/3) (β̂*_b - β̂)` at rate `N^(-1/3)`.
pub fn subsampling_ci(
    data: &Dataset,
    fs_cfg: &FirstStageConfig,
    grid: &GridSpec,
    cfg: &SubsamplingConfig,
) -> Result<SubsamplingCi> {
    let n = data.len();
    if cfg.m <= 1 || cfg.m >= n {
        return Err(Error::invalid("m", format!("need 1 < m < N = {n}, got {}", cfg.m)));
    }
    if cfg.replicates < 2 {
        return Err(Error::invalid("replicates", format!("need at least 2, got {}", cfg.replicates)));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::invalid("level", format!("must lie in (0, 1), got {}", cfg.level)));
    }
    let full = two_stage_estimate(data, fs_cfg, grid)?;

    let draws: Vec<Option<Vec<f64>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(rep as u64);
            let mut idx = index::sample(&mut rng, n, cfg.m).into_vec();
            idx.sort_unstable();
            let sub = data.select(&idx).ok()?;
            two_stage_estimate(&sub, fs_cfg, grid)
                .ok()
                .map(|e| e.estimate.btilde)
        })
        .collect();
    let draws: Vec<Vec<f64>> = draws.into_iter().flatten().collect();
    if draws.len() < 2 {
        return Err(Error::Subsampling(format!(
            "only {} of {} subsample estimates succeeded",
            draws.len(),
            cfg.replicates
        )));
    }

    let root_m = (cfg.m as f64).cbrt();
    let root_n = (n as f64).cbrt();
    let alpha = 1.0 - cfg.level;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (c, center) in full.estimate.btilde.iter().enumerate() {
        let mut stats: Vec<f64> = draws.iter().map(|b| root_m * (b[c] - center)).collect();
        stats.sort_by(f64::total_cmp);
        let q_lo = quantile_sorted(&stats, alpha / 2.0);
        let q_hi = quantile_sorted(&stats, 1.0 - alpha / 2.0);
        lower.push(center - q_hi / root_n);
        upper.push(center - q_lo / root_n);
    }
    Ok(SubsamplingCi {
        estimate: full,
        lower,
        upper,
        replicates_used: draws.len(),
    })
}

/// Linear-interpolation sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let pos = prob.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
