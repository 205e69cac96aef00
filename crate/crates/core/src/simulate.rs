//! Euler simulation of the CARMA state equation on a fine grid, burn-in
//! initialisation, and restriction to the observation times.

use serde::{Deserialize, Serialize};

use crate::driver::{DriverSpec, RngStream};
use crate::error::{invalid, Result};
use crate::grid::{FineGrid, ObservationGrid};
use crate::model::CarmaSpec;

/// Number of e-foldings of the slowest mode covered by the burn-in.
pub const BURN_IN_FACTOR: f64 = 20.0;

/// `T_b = 20 / |max Re lambda|`.
pub fn burn_in_horizon(spec: &CarmaSpec) -> Result<f64> {
    Ok(BURN_IN_FACTOR / spec.slowest_decay_rate()?)
}

/// One Euler step `X += dt A X + e dL` for the companion matrix of `a`.
#[inline]
fn euler_step(a: &[f64], x: &mut [f64], dt: f64, dl: f64) {
    let p = x.len();
    let drift_last: f64 = -x.iter().zip(a.iter().rev()).map(|(xi, ai)| xi * ai).sum::<f64>();
    for i in 0..p - 1 {
        x[i] += dt * x[i + 1];
    }
    x[p - 1] += dt * drift_last + dl;
}

/// Approximate draw from the stationary state law: Euler evolution from the
/// zero vector over a burn-in window of length [`burn_in_horizon`] on a
/// regular grid no coarser than `mesh`.
pub fn sample_stationary_initial(
    spec: &CarmaSpec,
    driver: &DriverSpec,
    mesh: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let grid = FineGrid::regular(burn_in_horizon(spec)?, mesh)?;
    let mut x = vec![0.0; spec.p()];
    let a = spec.ar_coeffs();
    for w in grid.times().windows(2) {
        let dt = w[1] - w[0];
        let dl = driver.sample_increment(dt, rng)?;
        euler_step(a, &mut x, dt, dl);
    }
    Ok(x)
}

/// A path on the fine simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FinePath {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    /// State vectors, one row of length `p` per time, when requested.
    pub states: Option<Vec<Vec<f64>>>,
}

/// Euler scheme `X_{k+1} = X_k + dt_k A X_k + e dL_k`, `Y_k = b^T X_k`.
pub fn euler_path(
    spec: &CarmaSpec,
    driver: &DriverSpec,
    fine: &FineGrid,
    x0: &[f64],
    rng: &mut RngStream,
    keep_states: bool,
) -> Result<FinePath> {
    if x0.len() != spec.p() {
        return Err(invalid(format!("initial state has length {}, expected {}", x0.len(), spec.p())));
    }
    let times = fine.times();
    let a = spec.ar_coeffs();
    let b = spec.ma_coeffs();
    let observe = |x: &[f64]| x.iter().zip(b).map(|(xi, bi)| xi * bi).sum::<f64>();

    let mut x = x0.to_vec();
    let mut y = Vec::with_capacity(times.len());
    let mut states = keep_states.then(|| Vec::with_capacity(times.len()));
    y.push(observe(&x));
    if let Some(s) = states.as_mut() {
        s.push(x.clone());
    }
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let dl = driver.sample_increment(dt, rng)?;
        euler_step(a, &mut x, dt, dl);
        y.push(observe(&x));
        if let Some(s) = states.as_mut() {
            s.push(x.clone());
        }
    }
    Ok(FinePath {
        times: times.to_vec(),
        y,
        states,
    })
}

/// Provenance of a simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMetadata {
    pub spec_fingerprint: String,
    pub driver: DriverSpec,
    pub master_seed: u64,
    pub stream_index: u64,
    pub mesh: f64,
    pub burn_in: f64,
}

/// CARMA values at the observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub grid: ObservationGrid,
    pub y: Vec<f64>,
    pub metadata: Option<PathMetadata>,
}

impl SamplePath {
    pub fn new(grid: ObservationGrid, y: Vec<f64>) -> Result<Self> {
        if grid.len() != y.len() {
            return Err(invalid(format!("{} values for {} grid points", y.len(), grid.len())));
        }
        Ok(Self { grid, y, metadata: None })
    }
}

/// Picks out the fine-path values at the observation times (exact lookup).
pub fn restrict_to_observations(fine: &FinePath, grid: &ObservationGrid) -> Result<SamplePath> {
    let mut y = Vec::with_capacity(grid.len());
    let mut lo = 0;
    for &x in grid.times() {
        let offset = fine.times[lo..]
            .binary_search_by(|t| t.total_cmp(&x))
            .map_err(|_| invalid(format!("observation time {x} is not on the fine grid")))?;
        lo += offset;
        y.push(fine.y[lo]);
    }
    SamplePath::new(grid.clone(), y)
}

/// Result of [`simulate_path`].
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub observed: SamplePath,
    pub fine: FinePath,
}

/// Burn-in, Euler simulation on the joint refinement of `grid`, and
/// restriction to the grid's times.
pub fn simulate_path(
    spec: &CarmaSpec,
    driver: &DriverSpec,
    grid: &ObservationGrid,
    mesh: f64,
    rng: &mut RngStream,
    keep_states: bool,
) -> Result<SimulatedPath> {
    let fine_grid = FineGrid::joint_refinement(grid, mesh)?;
    let x0 = sample_stationary_initial(spec, driver, mesh, rng)?;
    let fine = euler_path(spec, driver, &fine_grid, &x0, rng, keep_states)?;
    let y = fine_grid.observation_index().iter().map(|&i| fine.y[i]).collect();
    let mut observed = SamplePath::new(grid.clone(), y)?;
    observed.metadata = Some(PathMetadata {
        spec_fingerprint: spec.fingerprint(),
        driver: *driver,
        master_seed: rng.master_seed(),
        stream_index: rng.stream_index(),
        mesh,
        burn_in: burn_in_horizon(spec)?,
    });
    Ok(SimulatedPath { observed, fine })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car1() -> CarmaSpec {
        CarmaSpec::car1(1.0, 2.0, 1.0).unwrap()
    }

    fn carma21() -> CarmaSpec {
        CarmaSpec::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0).unwrap()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn burn_in_examples() {
        assert!((burn_in_horizon(&car1()).unwrap() - 10.0).abs() < 1e-9);
        assert!((burn_in_horizon(&carma21()).unwrap() - 40.0).abs() < 1e-8);
        // doubling root magnitudes: roots of z^2 + 2z + 8 are twice those of z^2 + z + 2
        let scaled = CarmaSpec::new(vec![2.0, 8.0], vec![1.0, 1.0], 1.0).unwrap();
        assert!((burn_in_horizon(&scaled).unwrap() - 20.0).abs() < 1e-8);
    }

    #[test]
    fn zero_driver_ode() {
        let spec = car1();
        let zero = DriverSpec::zero();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(sample_stationary_initial(&spec, &zero, 0.001, &mut rng).unwrap(), vec![0.0]);

        let fine = FineGrid::regular(1.0, 0.001).unwrap();
        let path = euler_path(&spec, &zero, &fine, &[1.0], &mut rng, false).unwrap();
        let y1 = *path.y.last().unwrap();
        assert!((y1 - (-2.0_f64).exp()).abs() < 2e-3, "{y1}");

        let path = euler_path(&spec, &zero, &fine, &[0.0], &mut rng, true).unwrap();
        assert!(path.y.iter().all(|&v| v == 0.0));
        assert_eq!(path.states.unwrap().len(), fine.len());
    }

    #[test]
    fn zero_driver_carma21_matches_matrix_exponential() {
        let spec = carma21();
        let fine = FineGrid::regular(2.0, 1e-4).unwrap();
        let x0 = [1.0, -0.5];
        let path = euler_path(&spec, &DriverSpec::zero(), &fine, &x0, &mut RngStream::new(0, 0), true).unwrap();
        let exact = crate::linalg::mat_exp(spec.state_matrix(), 2.0).unwrap().mul_vec(&x0);
        let last = path.states.unwrap().pop().unwrap();
        for (e, s) in exact.iter().zip(&last) {
            assert!((e - s).abs() < 1e-3, "{e} vs {s}");
        }
    }

    #[test]
    fn bitwise_determinism() {
        let spec = carma21();
        let grid = ObservationGrid::non_equidistant(5.0, 0.1, &mut RngStream::new(4, 0)).unwrap();
        let d = DriverSpec::variance_gamma(1.0, 4.0);
        let a = simulate_path(&spec, &d, &grid, 0.001, &mut RngStream::new(4, 1), false).unwrap();
        let b = simulate_path(&spec, &d, &grid, 0.001, &mut RngStream::new(4, 1), false).unwrap();
        assert_eq!(a.observed, b.observed);
        assert_eq!(a.fine, b.fine);
    }

    #[test]
    fn restriction() {
        let spec = car1();
        let grid = ObservationGrid::non_equidistant(2.0, 0.1, &mut RngStream::new(1, 0)).unwrap();
        let sim = simulate_path(&spec, &DriverSpec::brownian(1.0), &grid, 0.01, &mut RngStream::new(1, 1), false).unwrap();
        let restricted = restrict_to_observations(&sim.fine, &grid).unwrap();
        assert_eq!(restricted.y, sim.observed.y);
        assert_eq!(restricted.y.len(), grid.len());

        let full = ObservationGrid::from_times(sim.fine.times.clone()).unwrap();
        assert_eq!(restrict_to_observations(&sim.fine, &full).unwrap().y, sim.fine.y);

        let off = ObservationGrid::from_times(vec![0.0, 0.123_456_789]).unwrap();
        assert!(restrict_to_observations(&sim.fine, &off).is_err());
    }

    #[test]
    fn stationary_initial_variance_car1() {
        let spec = car1();
        let d = DriverSpec::brownian(1.0);
        let m = 2000;
        let xs: Vec<f64> = (0..m)
            .map(|k| sample_stationary_initial(&spec, &d, 0.001, &mut RngStream::new(11, k)).unwrap()[0])
            .collect();
        let (mean, var) = mean_var(&xs);
        let target = spec.stationary_covariance().unwrap()[(0, 0)];
        let se_var = target * (2.0 / (m as f64 - 1.0)).sqrt();
        assert!((var - target).abs() <= 4.0 * se_var, "{var}");
        assert!(mean.abs() <= 4.0 * (target / m as f64).sqrt());
    }

    #[test]
    fn stationary_initial_variance_carma21() {
        let spec = carma21();
        let d = DriverSpec::brownian(1.0);
        let m = 2000;
        let xs: Vec<Vec<f64>> = (0..m)
            .map(|k| sample_stationary_initial(&spec, &d, 0.001, &mut RngStream::new(12, k)).unwrap())
            .collect();
        let p = spec.stationary_covariance().unwrap();
        for c in 0..2 {
            let col: Vec<f64> = xs.iter().map(|x| x[c]).collect();
            let (_, var) = mean_var(&col);
            let target = p[(c, c)];
            assert!((var - target).abs() <= 4.0 * target * (2.0 / (m as f64 - 1.0)).sqrt(), "{c}: {var} vs {target}");
        }
    }

    #[test]
    fn stationarity_propagates_and_lag_correlation() {
        let spec = car1();
        let d = DriverSpec::brownian(1.0);
        let m = 2000;
        let lag = 0.5;
        let grid = ObservationGrid::from_times(vec![0.0, lag, 3.0]).unwrap();
        let paths: Vec<Vec<f64>> = (0..m)
            .map(|k| simulate_path(&spec, &d, &grid, 0.001, &mut RngStream::new(13, k), false).unwrap().observed.y)
            .collect();
        let gamma0 = spec.autocovariance(0.0).unwrap();
        let se = gamma0 * (2.0 / (m as f64 - 1.0)).sqrt();
        let first: Vec<f64> = paths.iter().map(|p| p[0]).collect();
        let last: Vec<f64> = paths.iter().map(|p| p[2]).collect();
        let (m0, v0) = mean_var(&first);
        let (m3, v3) = mean_var(&last);
        assert!((v0 - gamma0).abs() <= 4.0 * se, "{v0}");
        assert!((v3 - gamma0).abs() <= 4.0 * se, "{v3}");
        assert!(m0.abs() <= 4.0 * (gamma0 / m as f64).sqrt());
        assert!(m3.abs() <= 4.0 * (gamma0 / m as f64).sqrt());

        let second: Vec<f64> = paths.iter().map(|p| p[1]).collect();
        let (m1, v1) = mean_var(&second);
        let cov = first.iter().zip(&second).map(|(a, b)| (a - m0) * (b - m1)).sum::<f64>() / (m as f64 - 1.0);
        let corr = cov / (v0 * v1).sqrt();
        let rho = (-2.0 * lag).exp();
        // s.e. of a sample correlation: (1 - rho^2) / sqrt(M)
        assert!((corr - rho).abs() <= 4.0 * (1.0 - rho * rho) / (m as f64).sqrt(), "{corr} vs {rho}");
    }
}
