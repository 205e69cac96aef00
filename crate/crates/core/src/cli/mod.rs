//! The `spectral`, `simulate`, `mc`, `covcheck` and `convergence` workflows
//! and their file outputs. Each `cmd_*` writes under
//! `<out>/<label>/<T>_<h_max>/` and returns what it wrote.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::driver::{DriverSpec, RngStream};
use crate::error::{invalid, Result};
use crate::grid::ObservationGrid;
use crate::mc::{self, stats, CovarianceEntry, MCReport, ReferenceLaw, SampleMatrix};
use crate::model::CarmaSpec;
use crate::simulate::simulate_path;

pub use config::{ladder_level, Run, RunConfig, LADDER, PRESETS};
pub use output::Format;

/// One row of the spectral table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub omega: f64,
    pub density: f64,
    pub transfer_re: f64,
    pub transfer_im: f64,
}

/// `f_Y` and `H` on `omega_min, omega_min + step, ...`, `floor(range / step) + 1` rows.
pub fn spectral_table(spec: &CarmaSpec, omega_min: f64, omega_max: f64, step: f64) -> Result<Vec<SpectralRow>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    if !(omega_min.is_finite() && omega_max.is_finite() && omega_max >= omega_min) {
        return Err(invalid("need finite omega_min <= omega_max"));
    }
    let count = ((omega_max - omega_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let omega = omega_min + k as f64 * step;
            let h = spec.transfer(omega);
            SpectralRow {
                omega,
                density: spec.spectral_density(omega),
                transfer_re: h.re,
                transfer_im: h.im,
            }
        })
        .collect())
}

fn run_dir(out: &Path, label: &str, horizon: f64, h_max: f64) -> PathBuf {
    out.join(label).join(format!("{horizon}_{h_max}"))
}

pub fn cmd_spectral(cfg: &RunConfig, out: &Path, format: Format) -> Result<PathBuf> {
    let driver = cfg.drivers[0];
    let spec = cfg.spec_for(&driver)?;
    let s = &cfg.spectral;
    let rows = spectral_table(&spec, s.omega_min, s.omega_max, s.step)?;
    let dir = out.join(cfg.base_label()?);
    let path = dir.join(format!("spectral.{}", format.extension()));
    output::write_spectral(&path, &rows, format)?;
    Ok(path)
}

/// Writes `path_<m>.csv` (`t,y`) for `m < [simulate].paths`, per run.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for run in cfg.runs()? {
        let dir = run_dir(out, &run.label, run.horizon, run.h_max);
        for m in 0..cfg.simulate.paths as u64 {
            let mut rng = RngStream::new(cfg.mc.master_seed, run.stream_base + m);
            let grid = if cfg.grid.freeze {
                ObservationGrid::non_equidistant(run.horizon, run.h_max, &mut RngStream::new(cfg.mc.master_seed, mc::FROZEN_GRID_STREAM))?
            } else {
                ObservationGrid::non_equidistant(run.horizon, run.h_max, &mut rng)?
            };
            let sim = simulate_path(&run.spec, &run.driver, &grid, cfg.grid.mesh, &mut rng, false)?;
            let path = dir.join(format!("path_{m}.{}", format.extension()));
            output::write_path(&path, &sim.observed, format)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Output of one study.
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub dir: PathBuf,
    pub report: MCReport,
    pub samples: SampleMatrix,
}

/// QQ pairs for every suite entry of a report.
pub fn qq_sets(report: &MCReport, samples: &SampleMatrix) -> Result<Vec<(String, f64, Vec<(f64, f64)>)>> {
    let mut sets = Vec::new();
    for (j, &omega) in samples.frequencies.iter().enumerate() {
        let col = samples.column(j);
        for entry in &report.suites[j] {
            let values: Vec<f64> = match entry.statistic.as_str() {
                "re" | "zero" => col.iter().map(|z| z.re).collect(),
                "im" => col.iter().map(|z| z.im).collect(),
                "modulus_sq" => col.iter().map(|z| z.norm_sqr()).collect(),
                "zero_chisq" => {
                    let scale = report.entry(omega, "zero").map(|e| match e.law {
                        ReferenceLaw::Normal { variance } => variance,
                        _ => 1.0,
                    });
                    col.iter().map(|z| z.re * z.re / scale.unwrap_or(1.0)).collect()
                }
                other => return Err(invalid(format!("unknown statistic {other}"))),
            };
            sets.push((entry.statistic.clone(), omega, stats::qq_data(&values, entry.law)?));
        }
    }
    Ok(sets)
}

/// Full study per run: `report.json`, `samples.csv` and one QQ file per
/// (statistic, frequency).
pub fn cmd_mc(cfg: &RunConfig, out: &Path) -> Result<Vec<StudyOutput>> {
    let mut outputs = Vec::new();
    for run in cfg.runs()? {
        let mc_cfg = cfg.mc_config(&run);
        let samples = mc::run_mc(&mc_cfg)?;
        let report = MCReport::analyse(&mc_cfg, &samples, cfg.mc.k_formula)?;
        let dir = run_dir(out, &run.label, run.horizon, run.h_max);
        output::write_json(&dir.join("report.json"), &report)?;
        output::write_samples(&dir.join("samples.csv"), &samples)?;
        for (stat, omega, pairs) in qq_sets(&report, &samples)? {
            output::write_qq(&dir.join(format!("qq_{stat}_omega{omega}.csv")), &pairs)?;
        }
        outputs.push(StudyOutput { dir, report, samples });
    }
    Ok(outputs)
}

/// Report of `cmd_covcheck`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovcheckReport {
    pub report_version: u32,
    #[serde(rename = "M")]
    pub paths: usize,
    pub master_seed: u64,
    pub entries: Vec<CovarianceEntry>,
}

/// MC mean of `|T|^2` against the finite-horizon formula. Gaussian driver only.
pub fn cmd_covcheck(cfg: &RunConfig, out: &Path) -> Result<Vec<(PathBuf, CovcheckReport)>> {
    let mut outputs = Vec::new();
    for run in cfg.runs()? {
        if !matches!(run.driver, DriverSpec::Brownian { .. }) {
            return Err(invalid(format!(
                "covcheck needs the brownian driver, got {}: the second-moment formula is checked on Gaussian paths",
                run.driver.name()
            )));
        }
        let mut mc_cfg = cfg.mc_config(&run);
        mc_cfg.frequencies = cfg.covcheck.frequencies.clone();
        if mc_cfg.frequencies.iter().any(|&w| w < 0.0) {
            return Err(invalid("covcheck frequencies must be non-negative"));
        }
        let samples = mc::run_mc(&mc_cfg)?;
        let entries = (0..samples.frequencies.len())
            .map(|j| mc::covariance_check(&samples.column(j), &run.spec, run.horizon, samples.frequencies[j], cfg.mc.k_formula))
            .collect::<Result<Vec<_>>>()?;
        let report = CovcheckReport {
            report_version: mc::REPORT_VERSION,
            paths: mc_cfg.paths,
            master_seed: mc_cfg.master_seed,
            entries,
        };
        let path = run_dir(out, &run.label, run.horizon, run.h_max).join("covcheck.json");
        output::write_json(&path, &report)?;
        outputs.push((path, report));
    }
    Ok(outputs)
}

/// Convergence table per driver, under `<label>/<T>_<finest h>/`.
pub fn cmd_convergence(cfg: &RunConfig, out: &Path, format: Format) -> Result<Vec<(PathBuf, mc::ConvergenceTable)>> {
    let base = cfg.base_label()?;
    let mut outputs = Vec::new();
    for driver in &cfg.drivers {
        let conv = cfg.convergence_config(driver)?;
        let table = mc::convergence_study(&conv)?;
        let label = if cfg.drivers.len() > 1 {
            format!("{base}-{}", driver.name())
        } else {
            base.clone()
        };
        let finest = conv.ladder[conv.ladder.len() - 1];
        let path = run_dir(out, &label, conv.horizon, finest).join(format!("convergence.{}", format.extension()));
        output::write_convergence(&path, &table, format)?;
        outputs.push((path, table));
    }
    Ok(outputs)
}
