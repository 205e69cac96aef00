//! Monte Carlo studies of the truncated Fourier transform: batch simulation,
//! goodness of fit against the limit laws, cross-frequency correlations,
//! the finite-horizon second moment, and convergence along an `h_max` ladder.

pub mod stats;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{DriverSpec, RngStream};
use crate::error::{invalid, Result};
use crate::fourier::{self, FtSample, KFormula};
use crate::grid::{self, ObservationGrid};
use crate::model::{CarmaSpec, Statistic};
use crate::simulate::{restrict_to_observations, simulate_path};

pub use stats::{ks_critical, ks_statistic, qq_data, qq_slope, ReferenceLaw, SlopeFit};

/// Stream index of the shared grid when grids are frozen.
pub const FROZEN_GRID_STREAM: u64 = u64::MAX;

pub const DEFAULT_FREQUENCIES: [f64; 4] = [0.0, 0.1, 1.0, 10.0];
pub const DEFAULT_PATHS: usize = 2000;
pub const DEFAULT_ALPHA: f64 = 0.01;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// One study setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub spec: CarmaSpec,
    pub driver: DriverSpec,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub h_max: f64,
    pub mesh: f64,
    #[serde(rename = "M")]
    pub paths: usize,
    pub frequencies: Vec<f64>,
    pub master_seed: u64,
    /// Path `m` uses stream `stream_base + m`.
    #[serde(default)]
    pub stream_base: u64,
    /// Reuse one grid realisation for every path.
    #[serde(default)]
    pub freeze_grid: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(invalid(format!("M must be at least 2, got {}", self.paths)));
        }
        if self.frequencies.iter().any(|w| !w.is_finite()) {
            return Err(invalid("frequencies must be finite"));
        }
        if !(self.mesh > 0.0 && self.mesh <= self.h_max) {
            return Err(invalid(format!("need 0 < mesh <= h_max, got mesh {} and h_max {}", self.mesh, self.h_max)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        grid::cell_count(self.horizon, self.h_max)?;
        self.driver.validate()?;
        check_variance_match(&self.spec, &self.driver)?;
        self.stream_base
            .checked_add(self.paths as u64)
            .filter(|&end| end <= FROZEN_GRID_STREAM)
            .ok_or_else(|| invalid("stream range overflows"))?;
        Ok(())
    }

    fn grid_for(&self, rng: &mut RngStream) -> Result<ObservationGrid> {
        if self.freeze_grid {
            ObservationGrid::non_equidistant(self.horizon, self.h_max, &mut RngStream::new(self.master_seed, FROZEN_GRID_STREAM))
        } else {
            ObservationGrid::non_equidistant(self.horizon, self.h_max, rng)
        }
    }
}

/// The model's `sigma2` must be the driver's variance rate (any value for the zero driver).
pub fn check_variance_match(spec: &CarmaSpec, driver: &DriverSpec) -> Result<()> {
    if matches!(driver, DriverSpec::Zero {}) {
        return Ok(());
    }
    let rate = driver.variance_rate();
    if (spec.sigma2() - rate).abs() > 1e-12 * rate.max(1.0) {
        return Err(invalid(format!(
            "model sigma2 = {} differs from the {} driver's variance rate {rate}",
            spec.sigma2(),
            driver.name()
        )));
    }
    Ok(())
}

/// Transform values, one row per path, one column per frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub frequencies: Vec<f64>,
    pub rows: Vec<Vec<FtSample>>,
}

impl SampleMatrix {
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.rows.iter().map(|r| r[j].value).collect()
    }

    pub fn paths(&self) -> usize {
        self.rows.len()
    }
}

/// Simulates `M` paths in parallel; path `m` draws its grid, burn-in and
/// increments from stream `stream_base + m`. The first failing path aborts.
pub fn run_mc(config: &MCConfig) -> Result<SampleMatrix> {
    config.validate()?;
    let rows = (0..config.paths as u64)
        .into_par_iter()
        .map(|m| {
            let mut rng = RngStream::new(config.master_seed, config.stream_base + m);
            let grid = config.grid_for(&mut rng)?;
            let sim = simulate_path(&config.spec, &config.driver, &grid, config.mesh, &mut rng, false)?;
            fourier::truncated_ft_many(&sim.observed, &config.frequencies)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleMatrix {
        frequencies: config.frequencies.clone(),
        rows,
    })
}

/// Mean of `|T|^2` compared with its limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCheck {
    pub theoretical: f64,
    pub standard_error: f64,
    pub z: f64,
    pub pass: bool,
}

/// One goodness-of-fit line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub omega: f64,
    /// `re`, `im`, `modulus_sq`, `zero` or `zero_chisq`.
    pub statistic: String,
    pub law: ReferenceLaw,
    pub sample_count: usize,
    pub mean: f64,
    pub variance: f64,
    pub ks_d: f64,
    pub ks_critical: f64,
    pub pass: bool,
    pub mean_check: Option<MeanCheck>,
}

/// Mean check passes within this many standard errors.
pub const MEAN_CHECK_Z: f64 = 4.0;

fn suite_entry(omega: f64, name: &str, xs: &[f64], law: ReferenceLaw, alpha: f64) -> Result<SuiteEntry> {
    law.validate()?;
    let (mean, variance) = stats::mean_variance(xs);
    let ks_d = ks_statistic(xs, |x| law.cdf(x))?;
    let ks_critical = ks_critical(alpha, xs.len())?;
    Ok(SuiteEntry {
        omega,
        statistic: name.to_string(),
        law,
        sample_count: xs.len(),
        mean,
        variance,
        ks_d,
        ks_critical,
        pass: ks_d <= ks_critical,
        mean_check: None,
    })
}

/// KS tests of the samples at `omega` against the limit laws: Re and Im
/// against `N(0, sigma2 |H|^2 / 2)` and `|T|^2` against `Exp(sigma2 |H|^2)`
/// for `omega > 0`; the value against `N(0, (b(0)/a(0))^2 sigma2)` and its
/// squared standardisation against chi-squared(1) at `omega = 0`.
pub fn distribution_suite(samples: &[Complex64], spec: &CarmaSpec, omega: f64, alpha: f64) -> Result<Vec<SuiteEntry>> {
    if samples.is_empty() {
        return Err(invalid("distribution suite needs samples"));
    }
    if omega == 0.0 {
        let kind = spec.limit_law(0.0, Statistic::ZeroFreq)?.kind;
        let law = ReferenceLaw::from_limit(kind);
        let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
        let scale = match spec.limit_law(0.0, Statistic::ZeroFreqChiSq)?.kind {
            crate::model::LimitKind::ScaledChiSquared1 { scale } => scale,
            other => return Err(invalid(format!("unexpected limit kind {other:?}"))),
        };
        let chi: Vec<f64> = re.iter().map(|x| x * x / scale).collect();
        return Ok(vec![
            suite_entry(omega, "zero", &re, law, alpha)?,
            suite_entry(omega, "zero_chisq", &chi, ReferenceLaw::ChiSquared1, alpha)?,
        ]);
    }
    let coord = ReferenceLaw::from_limit(spec.limit_law(omega, Statistic::ReIm)?.kind);
    let modulus = ReferenceLaw::from_limit(spec.limit_law(omega, Statistic::ModulusSquared)?.kind);
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let sq: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    let mut m = suite_entry(omega, "modulus_sq", &sq, modulus, alpha)?;
    let standard_error = (m.variance / sq.len() as f64).sqrt();
    let z = (m.mean - modulus.mean()) / standard_error;
    m.mean_check = Some(MeanCheck {
        theoretical: modulus.mean(),
        standard_error,
        z,
        pass: z.abs() <= MEAN_CHECK_Z,
    });
    Ok(vec![
        suite_entry(omega, "re", &re, coord, alpha)?,
        suite_entry(omega, "im", &im, coord, alpha)?,
        m,
    ])
}

/// Pairwise correlations of the Re/Im coordinates at the positive frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// `re@<omega>` / `im@<omega>`.
    pub labels: Vec<String>,
    /// `None` where a coordinate has zero variance.
    pub matrix: Vec<Vec<Option<f64>>>,
    /// `1 / sqrt(M)`.
    pub standard_error: f64,
}

impl CorrelationTable {
    /// Largest off-diagonal `|corr|`, `None` if any entry is undefined.
    pub fn max_abs_off_diagonal(&self) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if i != j {
                    worst = worst.max(c.map(f64::abs)?);
                }
            }
        }
        Some(worst)
    }
}

pub fn cross_frequency_independence(matrix: &SampleMatrix) -> Result<CorrelationTable> {
    let positive: Vec<usize> = (0..matrix.frequencies.len()).filter(|&j| matrix.frequencies[j] > 0.0).collect();
    if positive.len() < 2 {
        return Err(invalid("cross-frequency check needs at least two positive frequencies"));
    }
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    for &j in &positive {
        let col = matrix.column(j);
        labels.push(format!("re@{}", matrix.frequencies[j]));
        coords.push(col.iter().map(|z| z.re).collect::<Vec<_>>());
        labels.push(format!("im@{}", matrix.frequencies[j]));
        coords.push(col.iter().map(|z| z.im).collect::<Vec<_>>());
    }
    let k = coords.len();
    let mut out = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = if i == j {
                stats::correlation(&coords[i], &coords[i]).map(|_| 1.0)
            } else {
                stats::correlation(&coords[i], &coords[j])
            };
        }
    }
    Ok(CorrelationTable {
        labels,
        matrix: out,
        standard_error: 1.0 / (matrix.paths() as f64).sqrt(),
    })
}

/// MC mean of `|T|^2` against the exact finite-horizon second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEntry {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub omega: f64,
    pub form: KFormula,
    pub theoretical: f64,
    pub limit: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub z: f64,
}

pub fn covariance_check(samples: &[Complex64], spec: &CarmaSpec, horizon: f64, omega: f64, form: KFormula) -> Result<CovarianceEntry> {
    if samples.len() < 2 {
        return Err(invalid("covariance check needs at least two samples"));
    }
    let sq: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    let (empirical, var) = stats::mean_variance(&sq);
    let standard_error = (var / sq.len() as f64).sqrt();
    let theoretical = fourier::theoretical_product_mean(spec, horizon, omega, -omega, form)?.re;
    Ok(CovarianceEntry {
        horizon,
        omega,
        form,
        theoretical,
        limit: spec.sigma2() * spec.transfer(omega).norm_sqr(),
        empirical,
        standard_error,
        z: (empirical - theoretical) / standard_error,
    })
}

/// Parameters of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub spec: CarmaSpec,
    pub driver: DriverSpec,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub ladder: Vec<f64>,
    pub mesh: f64,
    #[serde(rename = "M")]
    pub paths: usize,
    pub frequencies: Vec<f64>,
    pub master_seed: u64,
    #[serde(default)]
    pub stream_base: u64,
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(invalid("convergence ladder is empty"));
        }
        if self.ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("convergence ladder must be strictly decreasing"));
        }
        if self.paths < 1 {
            return Err(invalid("convergence study needs at least one path"));
        }
        let finest = self.ladder[self.ladder.len() - 1];
        if !(self.mesh > 0.0 && self.mesh < finest) {
            return Err(invalid(format!("mesh {} must be below the finest h_max {finest}", self.mesh)));
        }
        if self.frequencies.is_empty() || self.frequencies.iter().any(|w| !w.is_finite()) {
            return Err(invalid("convergence study needs finite frequencies"));
        }
        for &h in &self.ladder {
            grid::cell_count(self.horizon, h)?;
        }
        self.driver.validate()?;
        check_variance_match(&self.spec, &self.driver)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h_max: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    /// RMS of `|T_T - fine oracle|` per frequency.
    pub rms: Vec<f64>,
    /// RMS at the previous (coarser) level over this one; `None` on the
    /// first row or when this level's RMS is zero.
    pub ratio: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub frequencies: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
}

fn merge_times(grids: &[ObservationGrid]) -> Result<ObservationGrid> {
    let mut all: Vec<f64> = grids.iter().flat_map(|g| g.times().iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    ObservationGrid::from_times(all)
}

/// For each path one grid per ladder level is drawn, a single path is
/// simulated on the joint refinement of all of them, and each level's
/// estimate is compared with the fine-grid estimate of the same path.
pub fn convergence_study(config: &ConvergenceConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let levels = config.ladder.len();
    let nf = config.frequencies.len();
    let per_path = (0..config.paths as u64)
        .into_par_iter()
        .map(|m| {
            let mut rng = RngStream::new(config.master_seed, config.stream_base + m);
            let grids = config
                .ladder
                .iter()
                .map(|&h| ObservationGrid::non_equidistant(config.horizon, h, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let union = merge_times(&grids)?;
            let sim = simulate_path(&config.spec, &config.driver, &union, config.mesh, &mut rng, false)?;
            let oracle = config
                .frequencies
                .iter()
                .map(|&w| fourier::fine_ft_oracle(&sim.fine, w))
                .collect::<Result<Vec<_>>>()?;
            let mut sq = vec![vec![0.0; nf]; levels];
            for (level, g) in grids.iter().enumerate() {
                let path = restrict_to_observations(&sim.fine, g)?;
                for (k, &w) in config.frequencies.iter().enumerate() {
                    sq[level][k] = (fourier::truncated_ft(&path, w)?.value - oracle[k]).norm_sqr();
                }
            }
            Ok(sq)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for (level, &h) in config.ladder.iter().enumerate() {
        let rms: Vec<f64> = (0..nf)
            .map(|k| (per_path.iter().map(|p| p[level][k]).sum::<f64>() / config.paths as f64).sqrt())
            .collect();
        let ratio = match rows.last() {
            Some(prev) => prev.rms.iter().zip(&rms).map(|(&a, &b)| (b > 0.0).then(|| a / b)).collect(),
            None => vec![None; nf],
        };
        rows.push(ConvergenceRow {
            h_max: h,
            n_points: grid::cell_count(config.horizon, h)? + 1,
            rms,
            ratio,
        });
    }
    Ok(ConvergenceTable {
        frequencies: config.frequencies.clone(),
        rows,
    })
}

/// Everything a study reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub report_version: u32,
    pub config: MCConfig,
    /// One block of entries per frequency, in the configured order.
    pub suites: Vec<Vec<SuiteEntry>>,
    pub correlations: Option<CorrelationTable>,
    pub covariance_checks: Vec<CovarianceEntry>,
    pub convergence: Option<ConvergenceTable>,
}

pub const REPORT_VERSION: u32 = 1;

impl MCReport {
    /// Suites at every frequency, correlations when at least two frequencies
    /// are positive, and the second-moment check at every non-negative frequency.
    pub fn analyse(config: &MCConfig, matrix: &SampleMatrix, form: KFormula) -> Result<Self> {
        let mut suites = Vec::with_capacity(matrix.frequencies.len());
        let mut covariance_checks = Vec::new();
        for (j, &w) in matrix.frequencies.iter().enumerate() {
            let col = matrix.column(j);
            suites.push(distribution_suite(&col, &config.spec, w, config.alpha)?);
            if w >= 0.0 {
                covariance_checks.push(covariance_check(&col, &config.spec, config.horizon, w, form)?);
            }
        }
        let positive = matrix.frequencies.iter().filter(|&&w| w > 0.0).count();
        let correlations = if positive >= 2 {
            Some(cross_frequency_independence(matrix)?)
        } else {
            None
        };
        Ok(Self {
            report_version: REPORT_VERSION,
            config: config.clone(),
            suites,
            correlations,
            covariance_checks,
            convergence: None,
        })
    }

    pub fn entry(&self, omega: f64, statistic: &str) -> Option<&SuiteEntry> {
        self.suites.iter().flatten().find(|e| e.omega == omega && e.statistic == statistic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car1() -> CarmaSpec {
        CarmaSpec::car1(1.0, 2.0, 1.0).unwrap()
    }

    fn small(driver: DriverSpec) -> MCConfig {
        MCConfig {
            spec: car1(),
            driver,
            horizon: 2.0,
            h_max: 0.1,
            mesh: 0.01,
            paths: 8,
            frequencies: DEFAULT_FREQUENCIES.to_vec(),
            master_seed: 9,
            stream_base: 0,
            freeze_grid: false,
            alpha: DEFAULT_ALPHA,
        }
    }

    #[test]
    fn zero_driver_gives_zero_transforms() {
        let mut cfg = small(DriverSpec::zero());
        cfg.paths = 50;
        let m = run_mc(&cfg).unwrap();
        assert_eq!(m.paths(), 50);
        assert!(m.rows.iter().flatten().all(|s| s.value == Complex64::new(0.0, 0.0)));
        // degenerate samples fail every suite and have undefined correlations
        for (j, &w) in m.frequencies.iter().enumerate() {
            for e in distribution_suite(&m.column(j), &cfg.spec, w, 0.01).unwrap() {
                assert!(!e.pass, "{e:?}");
            }
        }
        let corr = cross_frequency_independence(&m).unwrap();
        assert_eq!(corr.labels.len(), 6);
        assert!(corr.matrix.iter().flatten().all(Option::is_none));
        assert_eq!(corr.max_abs_off_diagonal(), None);
    }

    #[test]
    fn deterministic_and_stream_dependent() {
        let cfg = small(DriverSpec::brownian(1.0));
        let a = run_mc(&cfg).unwrap();
        assert_eq!(a, run_mc(&cfg).unwrap());
        let mut other = cfg.clone();
        other.stream_base = 1 << 32;
        assert_ne!(a, run_mc(&other).unwrap());
        let ra = MCReport::analyse(&cfg, &a, KFormula::Derived).unwrap();
        let rb = MCReport::analyse(&cfg, &run_mc(&cfg).unwrap(), KFormula::Derived).unwrap();
        assert_eq!(serde_json::to_string(&ra).unwrap(), serde_json::to_string(&rb).unwrap());
    }

    #[test]
    fn frozen_grid_shared_across_paths() {
        let mut cfg = small(DriverSpec::brownian(1.0));
        let g0 = cfg.grid_for(&mut RngStream::new(9, 0)).unwrap();
        let g5 = cfg.grid_for(&mut RngStream::new(9, 5)).unwrap();
        assert_ne!(g0, g5);
        cfg.freeze_grid = true;
        let g0 = cfg.grid_for(&mut RngStream::new(9, 0)).unwrap();
        let g5 = cfg.grid_for(&mut RngStream::new(9, 5)).unwrap();
        assert_eq!(g0, g5);
        assert_eq!(run_mc(&cfg).unwrap().paths(), 8);
    }

    #[test]
    fn config_validation() {
        let good = small(DriverSpec::brownian(1.0));
        assert!(good.validate().is_ok());
        let mut c = good.clone();
        c.paths = 1;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.mesh = 0.2;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.frequencies.push(f64::NAN);
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.driver = DriverSpec::brownian(2.0);
        assert!(c.validate().unwrap_err().to_string().contains("variance rate"));
        let mut c = good;
        c.h_max = 0.3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn suite_shapes() {
        let cfg = small(DriverSpec::brownian(1.0));
        let m = run_mc(&cfg).unwrap();
        let r = MCReport::analyse(&cfg, &m, KFormula::Derived).unwrap();
        assert_eq!(r.report_version, 1);
        assert_eq!(r.suites.len(), 4);
        assert_eq!(r.suites[0].len(), 2);
        assert!(r.suites[1..].iter().all(|s| s.len() == 3));
        assert_eq!(r.covariance_checks.len(), 4);
        let corr = r.correlations.as_ref().unwrap();
        for (i, row) in corr.matrix.iter().enumerate() {
            assert_eq!(row[i], Some(1.0));
            assert!(row.iter().flatten().all(|c| (-1.0..=1.0).contains(c)));
        }
        assert!(r.suites.iter().flatten().all(|e| (0.0..=1.0).contains(&e.ks_d)));
        assert!(r.entry(1.0, "modulus_sq").unwrap().mean_check.is_some());
        assert!(distribution_suite(&m.column(1), &cfg.spec, -1.0, 0.01).is_err());
    }

    #[test]
    fn variance_identity() {
        let cfg = small(DriverSpec::brownian(1.0));
        let m = run_mc(&cfg).unwrap();
        for j in 1..4 {
            let col = m.column(j);
            let s = distribution_suite(&col, &cfg.spec, m.frequencies[j], 0.01).unwrap();
            let n = col.len() as f64;
            let lhs = s[0].variance + s[1].variance;
            let rhs = (s[2].mean - s[0].mean.powi(2) - s[1].mean.powi(2)) * n / (n - 1.0);
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} {rhs}");
        }
    }

    #[test]
    fn single_positive_frequency_has_no_correlations() {
        let mut cfg = small(DriverSpec::brownian(1.0));
        cfg.frequencies = vec![0.0, 1.0];
        let m = run_mc(&cfg).unwrap();
        assert!(cross_frequency_independence(&m).is_err());
        assert!(MCReport::analyse(&cfg, &m, KFormula::Derived).unwrap().correlations.is_none());
    }

    #[test]
    fn convergence_zero_driver_and_validation() {
        let cfg = ConvergenceConfig {
            spec: car1(),
            driver: DriverSpec::zero(),
            horizon: 2.0,
            ladder: vec![0.1, 0.05, 0.025],
            mesh: 0.001,
            paths: 3,
            frequencies: vec![0.0, 1.0],
            master_seed: 1,
            stream_base: 0,
        };
        let t = convergence_study(&cfg).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows.iter().map(|r| r.n_points).collect::<Vec<_>>(), vec![41, 81, 161]);
        assert!(t.rows.iter().all(|r| r.rms.iter().all(|&e| e == 0.0) && r.ratio.iter().all(Option::is_none)));

        let mut bad = cfg.clone();
        bad.ladder = vec![0.05, 0.1];
        assert!(bad.validate().unwrap_err().to_string().contains("strictly decreasing"));
        let mut bad = cfg;
        bad.mesh = 0.05;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn convergence_errors_shrink() {
        let cfg = ConvergenceConfig {
            spec: car1(),
            driver: DriverSpec::brownian(1.0),
            horizon: 2.0,
            ladder: vec![0.1, 0.05],
            mesh: 0.001,
            paths: 40,
            frequencies: vec![0.0, 1.0],
            master_seed: 2,
            stream_base: 0,
        };
        let t = convergence_study(&cfg).unwrap();
        for k in 0..2 {
            assert!(t.rows[1].rms[k] < t.rows[0].rms[k]);
            assert!(t.rows[1].ratio[k].unwrap() > 1.0);
        }
    }
}
