//! TOML run configurations. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use twostage_core::first_stage::{FirstStageConfig, FirstStageMethod};
use twostage_core::kernels::{KernelFamily, KernelSpec};
use twostage_core::maxscore::{GridAxis, GridSpec, SubsamplingConfig};
use twostage_core::montecarlo::{StudyConfig, Variant, VariantSpec};
use twostage_core::simulation::{Design, DgpConfig};

use crate::error::CliError;

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DesignName {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Gaussian2,
    Multigauss8,
}

impl From<FamilyName> for KernelFamily {
    fn from(f: FamilyName) -> Self {
        match f {
            FamilyName::Gaussian2 => KernelFamily::Gaussian2,
            FamilyName::Multigauss8 => KernelFamily::MultiGauss8,
        }
    }
}

/// Data generating process; omitted fields take the Monte Carlo design values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSection {
    pub design: DesignName,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub g01: Option<f64>,
    pub g11: Option<f64>,
    pub g00: Option<f64>,
    pub g10: Option<f64>,
    pub rho: Option<f64>,
    pub sigma_u: Option<f64>,
    pub error_scale: Option<f64>,
}

impl DgpSection {
    pub fn build(&self) -> Result<DgpConfig, CliError> {
        let design = match self.design {
            DesignName::Linear => Design::Linear,
            DesignName::Nonlinear => Design::Nonlinear,
        };
        let base = DgpConfig::paper(design);
        let cfg = DgpConfig {
            beta1: self.beta1.unwrap_or(base.beta1),
            beta2: self.beta2.unwrap_or(base.beta2),
            g01: self.g01.unwrap_or(base.g01),
            g11: self.g11.unwrap_or(base.g11),
            g00: self.g00.unwrap_or(base.g00),
            g10: self.g10.unwrap_or(base.g10),
            rho: self.rho.unwrap_or(base.rho),
            sigma_u: self.sigma_u.unwrap_or(base.sigma_u),
            design,
            error_scale: self.error_scale.unwrap_or(base.error_scale),
        };
        cfg.validate().map_err(|e| CliError::Config(format!("[dgp] {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Search grid for `btilde`. A single axis is reused for every free coefficient.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub axes: Vec<AxisSection>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            axes: vec![AxisSection {
                lower: -5.0,
                upper: 5.0,
                count: 5001,
            }],
        }
    }
}

impl GridSection {
    pub fn build(&self, free: usize) -> Result<GridSpec, CliError> {
        let bad = |msg: String| CliError::Config(format!("[grid] {msg}"));
        let axes = self
            .axes
            .iter()
            .map(|a| GridAxis::new(a.lower, a.upper, a.count).map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let axes = match axes.len() {
            n if n == free => axes,
            1 => vec![axes[0]; free],
            n => return Err(bad(format!("{n} axes given but {free} free coefficients"))),
        };
        GridSpec::new(axes).map_err(|e| bad(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    Single,
    Ols,
    Kernel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    pub kind: VariantKind,
    pub family: Option<FamilyName>,
    pub c: Option<f64>,
    pub trim: Option<bool>,
}

impl VariantSection {
    fn build(&self, idx: usize) -> Result<VariantSpec, CliError> {
        let bad = |msg: &str| CliError::Config(format!("[[variants]] entry {}: {msg}", idx + 1));
        let variant = match self.kind {
            VariantKind::Single | VariantKind::Ols => {
                if self.family.is_some() || self.c.is_some() {
                    return Err(bad("`family` and `c` only apply to kernel variants"));
                }
                if self.kind == VariantKind::Single {
                    Variant::SingleStage
                } else {
                    Variant::TwoStageOls
                }
            }
            VariantKind::Kernel => {
                let family = self.family.ok_or_else(|| bad("kernel variant needs `family`"))?;
                let c = self.c.ok_or_else(|| bad("kernel variant needs `c`"))?;
                if !(c.is_finite() && c > 0.0) {
                    return Err(bad("`c` must be positive"));
                }
                Variant::TwoStageKernel {
                    family: family.into(),
                    c,
                }
            }
        };
        Ok(VariantSpec {
            variant,
            trim: self.trim,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub master_seed: Option<u64>,
    #[serde(default = "default_trim")]
    pub trim_bound: f64,
}

fn default_trim() -> f64 {
    1.95
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub dgp: DgpSection,
    pub study: StudySection,
    #[serde(default)]
    pub grid: GridSection,
    pub variants: Vec<VariantSection>,
}

impl SimulateConfig {
    pub fn build(&self, seed_override: Option<u64>) -> Result<StudyConfig, CliError> {
        let variants = self
            .variants
            .iter()
            .enumerate()
            .map(|(i, v)| v.build(i))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = StudyConfig {
            dgp: self.dgp.build()?,
            sample_sizes: self.study.sample_sizes.clone(),
            reps: self.study.reps,
            master_seed: seed_override.or(self.study.master_seed).unwrap_or(0),
            variants,
            grid: self.grid.build(1)?,
            trim_bound: self.study.trim_bound,
        };
        cfg.validate().map_err(|e| CliError::Config(format!("[study] {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Ols,
    Kernel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstStageSection {
    pub method: MethodName,
    pub family: Option<FamilyName>,
    pub c: Option<f64>,
    /// Custom scales for the eighth-order kernel.
    pub scales: Option<[f64; 4]>,
    pub trim_bound: Option<f64>,
}

impl FirstStageSection {
    pub fn build(&self) -> Result<FirstStageConfig, CliError> {
        let bad = |msg: String| CliError::Config(format!("[first_stage] {msg}"));
        if let Some(b) = self.trim_bound {
            if b.is_nan() || b <= 0.0 {
                return Err(bad("`trim_bound` must be positive".into()));
            }
        }
        let method = match self.method {
            MethodName::Ols => {
                if self.family.is_some() || self.c.is_some() || self.scales.is_some() {
                    return Err(bad("kernel settings given for the OLS method".into()));
                }
                FirstStageMethod::Ols
            }
            MethodName::Kernel => {
                let family: KernelFamily = self.family.ok_or_else(|| bad("missing `family`".into()))?.into();
                let c = self.c.ok_or_else(|| bad("missing `c`".into()))?;
                let spec = match (family, self.scales) {
                    (KernelFamily::MultiGauss8, Some(b)) => KernelSpec::multigauss8_with_scales(b, c),
                    (KernelFamily::Gaussian2, Some(_)) => {
                        return Err(bad("`scales` only applies to multigauss8".into()))
                    }
                    (f, None) => KernelSpec::new(f, c),
                }
                .map_err(|e| bad(e.to_string()))?;
                FirstStageMethod::Kernel(spec)
            }
        };
        Ok(FirstStageConfig {
            method,
            trim_bound: self.trim_bound,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsamplingSection {
    pub m: Option<usize>,
    pub replicates: Option<usize>,
    #[serde(default = "default_level")]
    pub level: f64,
    pub seed: Option<u64>,
}

fn default_level() -> f64 {
    0.9
}

impl SubsamplingSection {
    pub fn build(&self, n: usize, seed_override: Option<u64>) -> SubsamplingConfig {
        let mut cfg = SubsamplingConfig::defaults_for(n, self.level, seed_override.or(self.seed).unwrap_or(0));
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(b) = self.replicates {
            cfg.replicates = b;
        }
        cfg
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub first_stage: FirstStageSection,
    #[serde(default)]
    pub grid: GridSection,
    pub subsampling: Option<SubsamplingSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    pub dgp: DgpSection,
    pub n: usize,
    pub seed: Option<u64>,
}
