//! First-stage estimation of `G(x) = E(y | x, d=1) - E(y | x, d=0)`.
//!
//! Each conditional mean is fitted on its own choice subsample, either by
//! OLS of `y` on `(1, x)` or by Nadaraya-Watson regression with a product
//! kernel whose per-coordinate scale is the subsample standard deviation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// Kernel denominators below this magnitude are treated as degenerate.
pub const DENOMINATOR_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum FirstStageMethod {
    Ols,
    Kernel(KernelSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageConfig {
    pub method: FirstStageMethod,
    /// `None` keeps every observation (`τ ≡ 1`).
    pub trim_bound: Option<f64>,
}

impl FirstStageConfig {
    pub fn ols() -> Self {
        Self {
            method: FirstStageMethod::Ols,
            trim_bound: None,
        }
    }

    pub fn kernel(spec: KernelSpec, trim_bound: Option<f64>) -> Self {
        Self {
            method: FirstStageMethod::Kernel(spec),
            trim_bound,
        }
    }
}

/// `1` iff every coordinate satisfies `|x_c| <= bound`.
pub fn trim_indicator(x: &[f64], bound: f64) -> bool {
    x.iter().all(|v| v.abs() <= bound)
}

/// Sample standard deviation (divisor `n - 1`) of `x[coord]` over the `d = j` subsample.
pub fn conditional_std(data: &Dataset, choice: u8, coord: usize) -> Result<f64> {
    if coord >= data.dims().q {
        return Err(Error::invalid("coord", format!("{coord} >= q = {}", data.dims().q)));
    }
    let values: Vec<f64> = data
        .observations()
        .iter()
        .filter(|o| o.d == choice)
        .map(|o| o.x[coord])
        .collect();
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            choice,
            needed: 2,
            have: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateCovariate { choice, coord });
    }
    Ok(sd)
}

/// One choice subsample prepared for Nadaraya-Watson evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSubsample {
    spec: KernelSpec,
    /// Per-coordinate `1 / (σ_c h)`.
    inv_width: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    p: usize,
    q: usize,
}

impl KernelSubsample {
    pub fn new(data: &Dataset, choice: u8, spec: &KernelSpec, h: f64, sigma: &[f64]) -> Result<Self> {
        let dims = data.dims();
        if sigma.len() != dims.q {
            return Err(Error::DimensionMismatch {
                what: "sigma",
                expected: dims.q,
                got: sigma.len(),
            });
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("h", format!("bandwidth must be positive, got {h}")));
        }
        if !sigma.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::invalid("sigma", "scales must be positive"));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for o in data.observations().iter().filter(|o| o.d == choice) {
            xs.extend_from_slice(&o.x);
            ys.extend_from_slice(&o.y);
        }
        if xs.is_empty() {
            return Err(Error::InsufficientData {
                choice,
                needed: 1,
                have: 0,
            });
        }
        Ok(Self {
            spec: spec.clone(),
            inv_width: sigma.iter().map(|s| 1.0 / (s * h)).collect(),
            xs,
            ys,
            p: dims.p,
            q: dims.q,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len() / self.q
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn estimate(&self, x0: &[f64]) -> Result<Vec<f64>> {
        if x0.len() != self.q {
            return Err(Error::DimensionMismatch {
                what: "x0",
                expected: self.q,
                got: x0.len(),
            });
        }
        if !x0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("evaluation point"));
        }
        let mut den = 0.0;
        let mut num = vec![0.0; self.p];
        for (xi, yi) in self.xs.chunks_exact(self.q).zip(self.ys.chunks_exact(self.p)) {
            let mut w = 1.0;
            for c in 0..self.q {
                w *= self.spec.eval_unchecked((x0[c] - xi[c]) * self.inv_width[c]);
            }
            den += w;
            for (acc, y) in num.iter_mut().zip(yi) {
                *acc += w * y;
            }
        }
        if den.abs() < DENOMINATOR_EPS {
            return Err(Error::DegenerateDenominator(den.abs()));
        }
        Ok(num.into_iter().map(|v| v / den).collect())
    }
}

/// Nadaraya-Watson estimate of `E(y | x = x0, d = j)`.
pub fn nw_estimate(
    data: &Dataset,
    choice: u8,
    x0: &[f64],
    spec: &KernelSpec,
    h: f64,
    sigma: &[f64],
) -> Result<Vec<f64>> {
    KernelSubsample::new(data, choice, spec, h, sigma)?.estimate(x0)
}

/// OLS coefficients of each outcome coordinate on `(1, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// `coef[r]` holds `(intercept, slope_1, .., slope_q)` for outcome `r`.
    pub coef: Vec<Vec<f64>>,
}

impl OlsFit {
    pub fn fit(data: &Dataset, choice: u8) -> Result<Self> {
        let dims = data.dims();
        let rows: Vec<_> = data.observations().iter().filter(|o| o.d == choice).collect();
        let n = rows.len();
        if n < dims.q + 1 {
            return Err(Error::InsufficientData {
                choice,
                needed: dims.q + 1,
                have: n,
            });
        }
        let design = DMatrix::from_fn(n, dims.q + 1, |i, c| if c == 0 { 1.0 } else { rows[i].x[c - 1] });
        let qr = design.clone().qr();
        let r = qr.r();
        let diag: Vec<f64> = (0..dims.q + 1).map(|c| r[(c, c)].abs()).collect();
        let col_norm = (0..dims.q + 1)
            .map(|c| design.column(c).norm())
            .fold(0.0f64, f64::max);
        if diag.iter().any(|d| *d <= 1e-10 * col_norm) {
            return Err(Error::SingularFit(choice));
        }
        let qt = qr.q().transpose();
        let mut coef = Vec::with_capacity(dims.p);
        for out in 0..dims.p {
            let y = DVector::from_fn(n, |i, _| rows[i].y[out]);
            let beta = r
                .solve_upper_triangular(&(&qt * y))
                .ok_or(Error::SingularFit(choice))?;
            coef.push(beta.iter().copied().collect());
        }
        Ok(Self { coef })
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.coef
            .iter()
            .map(|b| b[0] + b[1..].iter().zip(x).map(|(b, x)| b * x).sum::<f64>())
            .collect()
    }
}

/// Maps an arbitrary `x` to `Ĝ(x)`.
#[allow(clippy::large_enum_variant)] // one evaluator per fit, never stored in bulk
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    /// Fits for the `d = 0` and `d = 1` subsamples.
    Ols([OlsFit; 2]),
    Kernel([KernelSubsample; 2]),
}

impl Evaluator {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Evaluator::Ols(fits) => {
                let m1 = fits[1].predict(x);
                let m0 = fits[0].predict(x);
                Ok(m1.iter().zip(&m0).map(|(a, b)| a - b).collect())
            }
            Evaluator::Kernel(subs) => {
                let m1 = subs[1].estimate(x)?;
                let m0 = subs[0].estimate(x)?;
                Ok(m1.iter().zip(&m0).map(|(a, b)| a - b).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Ols,
    Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageFit {
    pub method: FitMethod,
    /// `Ĝ(x_i)` per observation; rows with `tau[i] == false` may be NaN.
    pub g_hat_at_obs: Vec<Vec<f64>>,
    pub evaluator: Evaluator,
    pub tau: Vec<bool>,
    /// Per-coordinate `σ̂_j` for `j = 0, 1` (kernel fits only).
    pub sigma_hat: Option<[Vec<f64>; 2]>,
    /// Trimmed-in points dropped because a kernel denominator vanished.
    pub degenerate_points: usize,
}

impl FirstStageFit {
    pub fn n_trimmed_in(&self) -> usize {
        self.tau.iter().filter(|t| **t).count()
    }
}

pub fn fit_first_stage(data: &Dataset, cfg: &FirstStageConfig) -> Result<FirstStageFit> {
    for choice in [0u8, 1] {
        if data.count_choice(choice) == 0 {
            return Err(Error::InsufficientData {
                choice,
                needed: 1,
                have: 0,
            });
        }
    }
    if let Some(bound) = cfg.trim_bound {
        if bound.is_nan() || bound <= 0.0 {
            return Err(Error::invalid("trim_bound", format!("must be positive, got {bound}")));
        }
    }
    let mut tau: Vec<bool> = data
        .observations()
        .iter()
        .map(|o| cfg.trim_bound.is_none_or(|b| trim_indicator(&o.x, b)))
        .collect();

    match &cfg.method {
        FirstStageMethod::Ols => {
            let fits = [OlsFit::fit(data, 0)?, OlsFit::fit(data, 1)?];
            let evaluator = Evaluator::Ols(fits);
            let g_hat_at_obs = data
                .observations()
                .iter()
                .map(|o| evaluator.eval(&o.x))
                .collect::<Result<Vec<_>>>()?;
            Ok(FirstStageFit {
                method: FitMethod::Ols,
                g_hat_at_obs,
                evaluator,
                tau,
                sigma_hat: None,
                degenerate_points: 0,
            })
        }
        FirstStageMethod::Kernel(spec) => {
            let q = data.dims().q;
            let sigma0 = (0..q)
                .map(|c| conditional_std(data, 0, c))
                .collect::<Result<Vec<_>>>()?;
            let sigma1 = (0..q)
                .map(|c| conditional_std(data, 1, c))
                .collect::<Result<Vec<_>>>()?;
            let h = spec.bandwidth(data.len())?;
            let subs = [
                KernelSubsample::new(data, 0, spec, h, &sigma0)?,
                KernelSubsample::new(data, 1, spec, h, &sigma1)?,
            ];
            let evaluator = Evaluator::Kernel(subs);
            let p = data.dims().p;
            let rows: Vec<Option<Vec<f64>>> = data
                .observations()
                .par_iter()
                .map(|o| evaluator.eval(&o.x).ok())
                .collect();
            let mut degenerate_points = 0;
            let mut g_hat_at_obs = Vec::with_capacity(rows.len());
            let mut any_in = false;
            for (row, t) in rows.into_iter().zip(tau.iter_mut()) {
                match row {
                    Some(g) => {
                        any_in |= *t;
                        g_hat_at_obs.push(g);
                    }
                    None => {
                        if *t {
                            degenerate_points += 1;
                            *t = false;
                        }
                        g_hat_at_obs.push(vec![f64::NAN; p]);
                    }
                }
            }
            if degenerate_points > 0 && !any_in {
                return Err(Error::FitFailure(format!(
                    "kernel denominators vanished at all {degenerate_points} trimmed-in points"
                )));
            }
            Ok(FirstStageFit {
                method: FitMethod::Kernel,
                g_hat_at_obs,
                evaluator,
                tau,
                sigma_hat: Some([sigma0, sigma1]),
                degenerate_points,
            })
        }
    }
}
