//! Replicated simulation studies and their summary statistics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::first_stage::FirstStageConfig;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::maxscore::{single_stage_estimate, two_stage_estimate, GridSpec};
use crate::simulation::{draw_sample, DgpConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Infeasible estimator using the true `G(x)`.
    SingleStage,
    TwoStageOls,
    TwoStageKernel { family: KernelFamily, c: f64 },
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::SingleStage => "single",
            Variant::TwoStageOls => "ols",
            Variant::TwoStageKernel {
                family: KernelFamily::Gaussian2,
                ..
            } => "kernel2",
            Variant::TwoStageKernel {
                family: KernelFamily::MultiGauss8,
                ..
            } => "kernel8",
        }
    }

    pub fn bandwidth_scale(&self) -> Option<f64> {
        match self {
            Variant::TwoStageKernel { c, .. } => Some(*c),
            _ => None,
        }
    }

    /// Two-stage variants trim by default; the infeasible single-stage
    /// estimator keeps every observation.
    pub fn trims_by_default(&self) -> bool {
        !matches!(self, Variant::SingleStage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantSpec {
    pub variant: Variant,
    /// Overrides [`Variant::trims_by_default`] when set.
    pub trim: Option<bool>,
}

impl VariantSpec {
    pub fn new(variant: Variant) -> Self {
        Self { variant, trim: None }
    }

    pub fn trims(&self) -> bool {
        self.trim.unwrap_or_else(|| self.variant.trims_by_default())
    }
}

impl From<Variant> for VariantSpec {
    fn from(variant: Variant) -> Self {
        Self::new(variant)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub dgp: DgpConfig,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    pub variants: Vec<VariantSpec>,
    pub grid: GridSpec,
    pub trim_bound: f64,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.reps == 0 {
            return Err(Error::invalid("reps", "must be at least 1"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::invalid("sample_sizes", "must be nonempty"));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::invalid("sample_sizes", "sizes must be positive"));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid("variants", "must be nonempty"));
        }
        if self.trim_bound.is_nan() || self.trim_bound <= 0.0 {
            return Err(Error::invalid("trim_bound", "must be positive"));
        }
        if self.grid.dim() != 1 {
            return Err(Error::DimensionMismatch {
                what: "grid",
                expected: 1,
                got: self.grid.dim(),
            });
        }
        for v in &self.variants {
            if let Some(c) = v.variant.bandwidth_scale() {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::invalid("c", format!("bandwidth scale must be positive, got {c}")));
                }
            }
        }
        Ok(())
    }
}

/// The five summary statistics of `β̂₂` about the true `β₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub bias: f64,
    pub rmse: f64,
    pub median: f64,
    pub mean_ad: f64,
    pub median_ad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variant: &'static str,
    pub n: usize,
    pub c: Option<f64>,
    pub stats: Summary,
    pub reps_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfCurve {
    pub variant: &'static str,
    pub n: usize,
    pub c: Option<f64>,
    /// `(N^(1/3)(β̂₂ - β₂) sorted ascending, r / reps)`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<SummaryRow>,
    pub curves: Vec<EdfCurve>,
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn summarize(estimates: &[f64], true_beta2: f64) -> Result<Summary> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    let n = estimates.len() as f64;
    let errors: Vec<f64> = estimates.iter().map(|e| e - true_beta2).collect();
    let bias = errors.iter().sum::<f64>() / n;
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let mean_ad = errors.iter().map(|e| e.abs()).sum::<f64>() / n;

    let mut sorted = estimates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut abs_dev: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    abs_dev.sort_by(f64::total_cmp);
    Ok(Summary {
        bias,
        rmse,
        median: median_of_sorted(&sorted),
        mean_ad,
        median_ad: median_of_sorted(&abs_dev),
    })
}

/// Step points of the EDF of `N^(1/3)(β̂₂ - β₂)`.
pub fn edf_points(estimates: &[f64], true_beta2: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    let root = (n as f64).cbrt();
    let mut values: Vec<f64> = estimates.iter().map(|e| root * (e - true_beta2)).collect();
    values.sort_by(f64::total_cmp);
    let reps = values.len() as f64;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(r, v)| (v, (r + 1) as f64 / reps))
        .collect())
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one replication: SplitMix64 folded over
/// `(master_seed, FNV-1a(variant label), N, c bits or 0, rep)`.
pub fn replication_seed(master_seed: u64, variant: &Variant, n: usize, rep: usize) -> u64 {
    let c_bits = variant.bandwidth_scale().map_or(0, f64::to_bits);
    [fnv1a(variant.label().as_bytes()), n as u64, c_bits, rep as u64]
        .iter()
        .fold(splitmix64(master_seed), |h, v| splitmix64(h ^ v))
}

/// Draws one dataset and returns `β̂₂`.
pub fn run_replication(cfg: &StudyConfig, spec: &VariantSpec, n: usize, rep: usize) -> Result<f64> {
    let seed = replication_seed(cfg.master_seed, &spec.variant, n, rep);
    let data = draw_sample(&cfg.dgp, n, seed)?;
    let trim_bound = spec.trims().then_some(cfg.trim_bound);
    let est = match spec.variant {
        Variant::SingleStage => {
            let g: Vec<Vec<f64>> = data
                .observations()
                .iter()
                .map(|o| vec![cfg.dgp.true_g(o.x[0])])
                .collect();
            let tau: Vec<bool> = data
                .observations()
                .iter()
                .map(|o| trim_bound.is_none_or(|b| crate::first_stage::trim_indicator(&o.x, b)))
                .collect();
            single_stage_estimate(&data, &g, &tau, &cfg.grid)?
        }
        Variant::TwoStageOls => {
            let fs = FirstStageConfig {
                method: crate::first_stage::FirstStageMethod::Ols,
                trim_bound,
            };
            two_stage_estimate(&data, &fs, &cfg.grid)?
        }
        Variant::TwoStageKernel { family, c } => {
            let fs = FirstStageConfig::kernel(KernelSpec::new(family, c)?, trim_bound);
            two_stage_estimate(&data, &fs, &cfg.grid)?
        }
    };
    Ok(est.estimate.btilde[0])
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let cells: Vec<(VariantSpec, usize)> = cfg
        .variants
        .iter()
        .flat_map(|v| cfg.sample_sizes.iter().map(move |n| (*v, *n)))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.reps).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(c, rep)| {
            let (spec, n) = &cells[c];
            run_replication(cfg, spec, *n, rep)
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut curves = Vec::with_capacity(cells.len());
    for (c, (spec, n)) in cells.iter().enumerate() {
        let estimates: Vec<f64> = outcomes[c * cfg.reps..(c + 1) * cfg.reps]
            .iter()
            .filter_map(|r| r.as_ref().ok().copied())
            .collect();
        let label = spec.variant.label();
        let scale = spec.variant.bandwidth_scale();
        if estimates.is_empty() {
            return Err(Error::CellFailure {
                cell: cell_name(label, *n, scale),
                reps: cfg.reps,
            });
        }
        rows.push(SummaryRow {
            variant: label,
            n: *n,
            c: scale,
            stats: summarize(&estimates, cfg.dgp.beta2)?,
            reps_used: estimates.len(),
        });
        curves.push(EdfCurve {
            variant: label,
            n: *n,
            c: scale,
            points: edf_points(&estimates, cfg.dgp.beta2, *n)?,
        });
    }
    Ok(StudyResult { rows, curves })
}

fn cell_name(label: &str, n: usize, c: Option<f64>) -> String {
    match c {
        Some(c) => format!("{label} N={n} c={c}"),
        None => format!("{label} N={n}"),
    }
}
