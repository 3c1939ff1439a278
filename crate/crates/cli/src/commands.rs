//! Subcommand implementations. Each returns the text destined for stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use twostage_core::first_stage::FirstStageMethod;
use twostage_core::io::{read_dataset_csv, write_dataset_csv, write_edf_csv, write_summary_csv};
use twostage_core::kernels::{constraint_residual, default_scales, simpson, solve_eighth_order_coefficients, KernelSpec};
use twostage_core::maxscore::{subsampling_ci, two_stage_with_fit};
use twostage_core::montecarlo::run_study;
use twostage_core::simulation::draw_sample;

use crate::config::{self, EstimateConfig, ExportConfig, SimulateConfig};
use crate::error::CliError;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<String, CliError> {
    let cfg = config::load::<SimulateConfig>(config)?.build(seed)?;
    let result = run_study(&cfg)?;
    write_file(out, "summary.csv", &write_summary_csv(&result.rows))?;
    write_file(out, "edf.csv", &write_edf_csv(&result.curves))?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<8} {:>6} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>6}",
        "variant", "N", "c", "bias", "rmse", "median", "mean_ad", "med_ad", "reps"
    );
    for row in &result.rows {
        let c = row.c.map_or_else(|| "-".to_string(), |c| format!("{c}"));
        let s = &row.stats;
        let _ = writeln!(
            text,
            "{:<8} {:>6} {:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>6}",
            row.variant, row.n, c, s.bias, s.rmse, s.median, s.mean_ad, s.median_ad, row.reps_used
        );
    }
    Ok(text)
}

pub fn estimate(data: &Path, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<String, CliError> {
    let cfg: EstimateConfig = config::load(config)?;
    let fs_cfg = cfg.first_stage.build()?;
    let file = fs::File::open(data).map_err(|e| CliError::Io(format!("cannot open {}: {e}", data.display())))?;
    let dataset = read_dataset_csv(file).map_err(|e| match e {
        twostage_core::Error::Parse { .. } => CliError::Input(format!("{}: {e}", data.display())),
        other => other.into(),
    })?;
    let dims = dataset.dims();
    let grid = cfg.grid.build(dims.k + dims.p - 1)?;

    let (est, fit) = two_stage_with_fit(&dataset, &fs_cfg, &grid)?;
    let ci = match &cfg.subsampling {
        Some(section) => Some(subsampling_ci(&dataset, &fs_cfg, &grid, &section.build(dataset.len(), seed))?),
        None => None,
    };

    let method = match &fs_cfg.method {
        FirstStageMethod::Ols => "ols".to_string(),
        FirstStageMethod::Kernel(spec) => format!("{}(c={})", spec.family().label(), spec.bandwidth_scale()),
    };
    let point = &est.estimate;
    let mut text = String::new();
    let _ = writeln!(text, "observations      {}", dataset.len());
    let _ = writeln!(text, "first stage       {method}");
    let _ = writeln!(text, "trimmed in        {}", fit.n_trimmed_in());
    let _ = writeln!(text, "degenerate points {}", fit.degenerate_points);
    let _ = writeln!(text, "b11               {}", point.b11);
    let _ = writeln!(text, "btilde            {:?}", point.btilde);
    let _ = writeln!(text, "score             {}", est.score_value);
    let _ = writeln!(text, "argmax set size   {}", est.argmax_set.len());
    if let Some(ci) = &ci {
        let level = cfg.subsampling.as_ref().map_or(0.0, |s| s.level);
        for (j, (lo, hi)) in ci.lower.iter().zip(&ci.upper).enumerate() {
            let _ = writeln!(text, "ci[{j}] at {level}      [{lo}, {hi}]");
        }
        let _ = writeln!(text, "subsamples used   {}", ci.replicates_used);
    }

    if let Some(dir) = out {
        let report = json!({
            "observations": dataset.len(),
            "first_stage": method,
            "trimmed_in": fit.n_trimmed_in(),
            "degenerate_points": fit.degenerate_points,
            "b11": point.b11,
            "btilde": point.btilde,
            "score": est.score_value,
            "argmax_set_size": est.argmax_set.len(),
            "subsampling": ci.as_ref().map(|ci| json!({
                "lower": ci.lower,
                "upper": ci.upper,
                "replicates_used": ci.replicates_used,
            })),
        });
        let body = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(dir, "estimate.json", &(body + "\n"))?;
    }
    Ok(text)
}

/// Quadrature half-width and interval count for the moment check.
const MOMENT_RANGE: f64 = 12.0;
const MOMENT_INTERVALS: usize = 24_000;
const RESIDUAL_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-6;

pub fn kernelcheck() -> Result<String, CliError> {
    let b = default_scales();
    let a = solve_eighth_order_coefficients(b)?;
    let residual = constraint_residual(&a, &b);
    let spec = KernelSpec::multigauss8(1.0)?;
    let k = |u: f64| spec.eval(u).unwrap_or(f64::NAN);
    let mass = simpson(k, -MOMENT_RANGE, MOMENT_RANGE, MOMENT_INTERVALS);
    let mass_err = (mass - (2.0 * std::f64::consts::PI).sqrt()).abs();

    let mut text = String::new();
    let _ = writeln!(text, "scales     {b:?}");
    let _ = writeln!(text, "a          {a:?}");
    let _ = writeln!(text, "residual   {residual:e}");
    let _ = writeln!(text, "mass       {mass} (error {mass_err:e})");
    let mut ok = residual < RESIDUAL_TOL && mass_err < MOMENT_TOL;
    for l in 1..=3 {
        let m = simpson(|u| u.powi(2 * l) * k(u), -MOMENT_RANGE, MOMENT_RANGE, MOMENT_INTERVALS);
        let _ = writeln!(text, "moment u^{} {m:e}", 2 * l);
        ok &= m.abs() < MOMENT_TOL;
    }
    if ok {
        Ok(text)
    } else {
        Err(CliError::Compute(format!("kernel check outside tolerance\n{text}")))
    }
}

pub fn export_dgp(config: &Path, out: &Path, seed: Option<u64>) -> Result<String, CliError> {
    let cfg: ExportConfig = config::load(config)?;
    let dgp = cfg.dgp.build()?;
    if cfg.n == 0 {
        return Err(CliError::Config("`n` must be positive".into()));
    }
    let data = draw_sample(&dgp, cfg.n, seed.or(cfg.seed).unwrap_or(0))?;
    let path = write_file(out, "dataset.csv", &write_dataset_csv(&data))?;
    Ok(format!("wrote {} observations to {}\n", data.len(), path.display()))
}
