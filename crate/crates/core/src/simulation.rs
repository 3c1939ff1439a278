//! Synthetic data from the binary choice model with an uncertain payoff.
//!
//! For each observation, in this order, the generator draws
//! `z ~ Logistic(0, 1)` (inverse CDF of an open-unit uniform), `x ~ N(0, 1)`,
//! `η ~ N(0, 1)`, and two standard normals `e1, e2` driving the outcome
//! errors. Then
//!
//! ```text
//! ε  = 0.25 η sqrt(1 + z² + x²)
//! d  = 1{z β1 + G(x) β2 > ε}
//! u1 = σ_u e1
//! u0 = σ_u (ρ e1 + sqrt(1 - ρ²) e2)
//! y  = d (γ01 + γ11 m(x) + u1) + (1 - d)(γ00 + γ10 m(x) + u0)
//! ```
//!
//! so `(u1, u0)` has standard deviation `σ_u` and correlation `ρ`. The
//! stream is `ChaCha8Rng::seed_from_u64(seed)`, which is portable across
//! platforms.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Dims, Observation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    Linear,
    Nonlinear,
}

impl Design {
    pub fn label(self) -> &'static str {
        match self {
            Design::Linear => "linear",
            Design::Nonlinear => "nonlinear",
        }
    }
}

/// `m(x)`: `x` for the linear design, `x² atan(x)` for the nonlinear one.
pub fn m_function(x: f64, design: Design) -> f64 {
    match design {
        Design::Linear => x,
        Design::Nonlinear => x * x * x.atan(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub g01: f64,
    pub g11: f64,
    pub g00: f64,
    pub g10: f64,
    /// Correlation of `(u1, u0)`.
    pub rho: f64,
    pub sigma_u: f64,
    pub design: Design,
    pub error_scale: f64,
}

impl DgpConfig {
    /// The Monte Carlo design's parameter values.
    pub fn paper(design: Design) -> Self {
        Self {
            beta1: 1.0,
            beta2: 1.0,
            g01: 0.2,
            g11: 0.1,
            g00: 0.1,
            g10: 0.4,
            rho: -0.8,
            sigma_u: 0.33,
            design,
            error_scale: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.beta1,
            self.beta2,
            self.g01,
            self.g11,
            self.g00,
            self.g10,
            self.rho,
            self.sigma_u,
            self.error_scale,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dgp parameter"));
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::invalid("rho", format!("|rho| must be < 1, got {}", self.rho)));
        }
        if self.sigma_u < 0.0 {
            return Err(Error::invalid("sigma_u", "must be nonnegative"));
        }
        Ok(())
    }

    /// `G(x) = γ01 - γ00 + (γ11 - γ10) m(x)`.
    pub fn true_g(&self, x: f64) -> f64 {
        self.g01 - self.g00 + (self.g11 - self.g10) * m_function(x, self.design)
    }

    /// `1{z β1 + G(x) β2 > ε}`.
    pub fn choice(&self, z: f64, x: f64, eps: f64) -> u8 {
        u8::from(z * self.beta1 + self.true_g(x) * self.beta2 > eps)
    }

    pub fn outcome(&self, d: u8, x: f64, u1: f64, u0: f64) -> f64 {
        let m = m_function(x, self.design);
        if d == 1 {
            self.g01 + self.g11 * m + u1
        } else {
            self.g00 + self.g10 * m + u0
        }
    }
}

pub fn true_g(x: f64, cfg: &DgpConfig) -> f64 {
    cfg.true_g(x)
}

/// One simulated observation with its latent draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentDraw {
    pub z: f64,
    pub x: f64,
    pub eta: f64,
    pub eps: f64,
    pub u1: f64,
    pub u0: f64,
    pub d: u8,
    pub y: f64,
}

pub fn draw_latent(cfg: &DgpConfig, n: usize, seed: u64) -> Result<Vec<LatentDraw>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corr_tail = (1.0 - cfg.rho * cfg.rho).sqrt();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.sample(Open01);
        let z = (u / (1.0 - u)).ln();
        let x: f64 = rng.sample(StandardNormal);
        let eta: f64 = rng.sample(StandardNormal);
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        let eps = cfg.error_scale * eta * (1.0 + z * z + x * x).sqrt();
        let d = cfg.choice(z, x, eps);
        let u1 = cfg.sigma_u * e1;
        let u0 = cfg.sigma_u * (cfg.rho * e1 + corr_tail * e2);
        let y = cfg.outcome(d, x, u1, u0);
        out.push(LatentDraw {
            z,
            x,
            eta,
            eps,
            u1,
            u0,
            d,
            y,
        });
    }
    Ok(out)
}

/// Draws `n` observations with `k = p = q = 1`.
pub fn draw_sample(cfg: &DgpConfig, n: usize, seed: u64) -> Result<Dataset> {
    let obs = draw_latent(cfg, n, seed)?
        .into_iter()
        .map(|l| Observation {
            d: l.d,
            y: vec![l.y],
            z: vec![l.z],
            x: vec![l.x],
        })
        .collect();
    Dataset::new(obs, Dims { k: 1, p: 1, q: 1 })
}
