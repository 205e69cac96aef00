//! Run configuration: TOML or JSON files, presets, and the ladder of
//! `(T, h_max)` settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::driver::DriverSpec;
use crate::error::{invalid, CarmaError, Result};
use crate::fourier::KFormula;
use crate::mc::{self, ConvergenceConfig, MCConfig};
use crate::model::CarmaSpec;

/// A named `(T, h_max)` setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderLevel {
    pub name: &'static str,
    pub horizon: f64,
    pub h_max: f64,
}

pub const LADDER: [LadderLevel; 3] = [
    LadderLevel { name: "t10", horizon: 10.0, h_max: 0.1 },
    LadderLevel { name: "t50", horizon: 50.0, h_max: 0.05 },
    LadderLevel { name: "t100", horizon: 100.0, h_max: 0.01 },
];

pub fn ladder_level(name: &str) -> Result<(usize, LadderLevel)> {
    LADDER
        .iter()
        .copied()
        .enumerate()
        .find(|(_, l)| l.name == name)
        .ok_or_else(|| CarmaError::Config(format!("unknown ladder level {name:?}; expected one of t10, t50, t100")))
}

pub const PRESETS: [&str; 2] = ["paper-car1", "paper-carma21"];

/// The three drivers of the simulation study: Brownian, variance gamma and
/// two-sided Poisson.
pub fn study_drivers() -> Vec<DriverSpec> {
    vec![
        DriverSpec::brownian(1.0),
        DriverSpec::variance_gamma(1.0, 4.0),
        DriverSpec::two_sided_poisson(10.0, 1.0),
    ]
}

/// Autoregressive and moving-average coefficients; `sigma2` is taken from
/// the driver and, if given here, must agree with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub h_max: f64,
    pub mesh: f64,
    pub freeze: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    #[serde(rename = "M")]
    pub paths: usize,
    pub frequencies: Vec<f64>,
    pub master_seed: u64,
    pub alpha: f64,
    /// Named levels to run; empty means the `[grid]` setting alone.
    pub ladder: Vec<String>,
    pub k_formula: KFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub ladder: Vec<f64>,
    pub mesh: f64,
    #[serde(rename = "M")]
    pub paths: usize,
    pub frequencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovcheckSection {
    pub frequencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(DriverSpec),
    Many(Vec<DriverSpec>),
}

fn drivers_de<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<DriverSpec>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Everything the subcommands read. `[driver]` may be one table or an array
/// of tables; each driver is a separate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub model: ModelSection,
    #[serde(rename = "driver", deserialize_with = "drivers_de")]
    pub drivers: Vec<DriverSpec>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub covcheck: CovcheckSection,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { horizon: 50.0, h_max: 0.05, mesh: 0.001, freeze: false }
    }
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            paths: mc::DEFAULT_PATHS,
            frequencies: mc::DEFAULT_FREQUENCIES.to_vec(),
            master_seed: 20_240_101,
            alpha: mc::DEFAULT_ALPHA,
            ladder: Vec::new(),
            k_formula: KFormula::Derived,
        }
    }
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self { omega_min: -10.0, omega_max: 10.0, step: 0.01 }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { paths: 1 }
    }
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            ladder: vec![0.1, 0.05, 0.025],
            mesh: 0.001,
            paths: 200,
            frequencies: vec![0.0, 1.0],
        }
    }
}

impl Default for CovcheckSection {
    fn default() -> Self {
        Self { frequencies: vec![0.0, 1.0] }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            model: ModelSection { a: vec![2.0], b: vec![1.0], sigma2: None },
            drivers: vec![DriverSpec::brownian(1.0)],
            grid: GridSection::default(),
            mc: McSection::default(),
            spectral: SpectralSection::default(),
            simulate: SimulateSection::default(),
            convergence: ConvergenceSection::default(),
            covcheck: CovcheckSection::default(),
        }
    }
}

/// One fully specified study: a model with its driver at one `(T, h_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    /// Directory label, `<preset-or-hash>` with a driver suffix when the
    /// configuration holds several drivers.
    pub label: String,
    pub spec: CarmaSpec,
    pub driver: DriverSpec,
    pub horizon: f64,
    pub h_max: f64,
    pub stream_base: u64,
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (a, b) = match name {
            "paper-car1" => (vec![2.0], vec![1.0]),
            "paper-carma21" => (vec![1.0, 2.0], vec![1.0, 1.0]),
            other => {
                return Err(CarmaError::Config(format!(
                    "unknown preset {other:?}; expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(Self {
            preset: Some(name.to_string()),
            model: ModelSection { a, b, sigma2: None },
            drivers: study_drivers(),
            mc: McSection {
                ladder: LADDER.iter().map(|l| l.name.to_string()).collect(),
                ..Self::default().mc
            },
            ..Self::default()
        })
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CarmaError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CarmaError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CarmaError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.drivers.is_empty() {
            return Err(CarmaError::Config("at least one [driver] is required".into()));
        }
        for d in &self.drivers {
            self.spec_for(d)?;
        }
        for name in &self.mc.ladder {
            ladder_level(name)?;
        }
        if self.simulate.paths == 0 {
            return Err(invalid("[simulate] paths must be positive"));
        }
        let s = &self.spectral;
        if !(s.step > 0.0 && s.omega_max >= s.omega_min && s.omega_min.is_finite() && s.omega_max.is_finite()) {
            return Err(invalid("[spectral] needs step > 0 and omega_min <= omega_max"));
        }
        Ok(())
    }

    /// The model with `sigma2` set to the driver's variance rate.
    pub fn spec_for(&self, driver: &DriverSpec) -> Result<CarmaSpec> {
        driver.validate()?;
        let sigma2 = if matches!(driver, DriverSpec::Zero {}) {
            self.model.sigma2.unwrap_or(1.0)
        } else {
            driver.variance_rate()
        };
        let spec = CarmaSpec::new(self.model.a.clone(), self.model.b.clone(), sigma2)?;
        if let Some(given) = self.model.sigma2 {
            let trial = CarmaSpec::new(self.model.a.clone(), self.model.b.clone(), given)?;
            mc::check_variance_match(&trial, driver)?;
        }
        Ok(spec)
    }

    /// `<preset>` or `cfg-<hash>` of the serialised configuration.
    pub fn base_label(&self) -> Result<String> {
        Ok(match &self.preset {
            Some(p) => p.clone(),
            None => format!("cfg-{}", &crate::hex_digest(self.to_toml()?.as_bytes())[..12]),
        })
    }

    fn label_for(&self, driver: &DriverSpec) -> Result<String> {
        let base = self.base_label()?;
        Ok(if self.drivers.len() > 1 {
            format!("{base}-{}", driver.name())
        } else {
            base
        })
    }

    /// One run per driver and ladder level (or the `[grid]` setting).
    /// Named level `k` draws its paths from streams starting at `(k + 1) << 32`.
    pub fn runs(&self) -> Result<Vec<Run>> {
        let mut settings = Vec::new();
        if self.mc.ladder.is_empty() {
            settings.push((self.grid.horizon, self.grid.h_max, 0u64));
        } else {
            for name in &self.mc.ladder {
                let (k, level) = ladder_level(name)?;
                settings.push((level.horizon, level.h_max, (k as u64 + 1) << 32));
            }
        }
        let mut runs = Vec::new();
        for driver in &self.drivers {
            for &(horizon, h_max, stream_base) in &settings {
                runs.push(Run {
                    label: self.label_for(driver)?,
                    spec: self.spec_for(driver)?,
                    driver: *driver,
                    horizon,
                    h_max,
                    stream_base,
                });
            }
        }
        Ok(runs)
    }

    pub fn mc_config(&self, run: &Run) -> MCConfig {
        MCConfig {
            spec: run.spec.clone(),
            driver: run.driver,
            horizon: run.horizon,
            h_max: run.h_max,
            mesh: self.grid.mesh,
            paths: self.mc.paths,
            frequencies: self.mc.frequencies.clone(),
            master_seed: self.mc.master_seed,
            stream_base: run.stream_base,
            freeze_grid: self.grid.freeze,
            alpha: self.mc.alpha,
        }
    }

    pub fn convergence_config(&self, driver: &DriverSpec) -> Result<ConvergenceConfig> {
        let c = &self.convergence;
        Ok(ConvergenceConfig {
            spec: self.spec_for(driver)?,
            driver: *driver,
            horizon: c.horizon,
            ladder: c.ladder.clone(),
            mesh: c.mesh,
            paths: c.paths,
            frequencies: c.frequencies.clone(),
            master_seed: self.mc.master_seed,
            stream_base: 0,
        })
    }
}
