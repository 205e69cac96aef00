//! Randomised non-equidistant observation grids and their joint refinement
//! with a regular simulation mesh.

use crate::driver::RngStream;
use crate::error::{invalid, Result};

/// Points closer than this are treated as the same time when merging grids.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Strictly increasing observation times `x_0 < ... < x_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationGrid {
    times: Vec<f64>,
    h_max: f64,
}

impl ObservationGrid {
    /// Wraps explicit times. The spacing bound is the realised maximum gap.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let h_max = max_gap(&times)?;
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid times must be finite"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid times must be strictly increasing"));
        }
        Ok(Self { times, h_max })
    }

    /// One uniform draw in each of `cells` equal cells of `[0, horizon)`, the
    /// first draw pinned to `0`, and `horizon` appended. Consecutive gaps are
    /// below twice the cell width.
    pub fn jittered(horizon: f64, cells: usize, rng: &mut RngStream) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if cells < 2 {
            return Err(invalid("need at least two cells"));
        }
        let width = horizon / cells as f64;
        let mut times = Vec::with_capacity(cells + 1);
        times.push(0.0);
        for i in 1..cells {
            let lo = i as f64 * width;
            let hi = (i + 1) as f64 * width;
            let prev = *times.last().unwrap();
            let t = loop {
                let t = lo + rng.uniform() * width;
                // rounding can land on the cell's upper edge
                if t > prev && t < hi.min(horizon) {
                    break t;
                }
            };
            times.push(t);
        }
        times.push(horizon);
        Ok(Self {
            times,
            h_max: 2.0 * width,
        })
    }

    /// The randomised grid on `[0, T]`: cells of width `h_max / 2`, giving
    /// `N = 2T / h_max + 1` points. `2T / h_max` must be an integer.
    pub fn non_equidistant(horizon: f64, h_max: f64, rng: &mut RngStream) -> Result<Self> {
        if !(h_max > 0.0 && h_max.is_finite()) {
            return Err(invalid(format!("h_max must be positive, got {h_max}")));
        }
        let cells = cell_count(horizon, h_max)?;
        let mut grid = Self::jittered(horizon, cells, rng)?;
        grid.h_max = h_max;
        Ok(grid)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Length of the covered interval.
    pub fn horizon(&self) -> f64 {
        self.end() - self.start()
    }

    /// Recorded spacing bound.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Realised maximum gap.
    pub fn max_gap(&self) -> f64 {
        max_gap(&self.times).expect("grid has at least two points")
    }

    /// `N h_max^3`, which must vanish for the discretisation error to vanish.
    pub fn refinement_diagnostic(&self) -> f64 {
        self.len() as f64 * self.h_max.powi(3)
    }
}

/// Number of half-width cells `2T / h_max`, rejecting non-integral ratios.
pub fn cell_count(horizon: f64, h_max: f64) -> Result<usize> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let ratio = 2.0 * horizon / h_max;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) || rounded < 2.0 {
        return Err(invalid(format!(
            "2T/h_max = {ratio} must be an integer >= 2 (T = {horizon}, h_max = {h_max})"
        )));
    }
    Ok(rounded as usize)
}

/// Maximum consecutive difference.
pub fn max_gap(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(invalid("need at least two grid points"));
    }
    Ok(times.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max))
}

/// Observation grid merged with a regular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrid {
    times: Vec<f64>,
    mesh: f64,
    observation_index: Vec<usize>,
}

impl FineGrid {
    /// Sorted union of the observation times and `{0, mesh, 2 mesh, ...}` up
    /// to the grid end. Mesh points within [`DUPLICATE_TOLERANCE`] of an
    /// observation time are dropped so every observation time appears once
    /// and exactly.
    pub fn joint_refinement(grid: &ObservationGrid, mesh: f64) -> Result<Self> {
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(invalid(format!("mesh must be positive, got {mesh}")));
        }
        let obs = grid.times();
        let (start, end) = (grid.start(), grid.end());
        let first = (start / mesh).ceil() as i64;
        let last = ((end / mesh) + 1e-9).floor() as i64;
        let regular = (first..=last).map(|k| k as f64 * mesh).filter(|t| *t >= start && *t <= end);

        let mut times = Vec::with_capacity(obs.len() + (last - first + 1).max(0) as usize);
        let mut observation_index = Vec::with_capacity(obs.len());
        let mut regular = regular.peekable();
        for &x in obs {
            while let Some(&r) = regular.peek() {
                if r < x - DUPLICATE_TOLERANCE {
                    if times.last().is_none_or(|&l: &f64| r > l + DUPLICATE_TOLERANCE) {
                        times.push(r);
                    }
                    regular.next();
                } else if r <= x + DUPLICATE_TOLERANCE {
                    regular.next();
                } else {
                    break;
                }
            }
            observation_index.push(times.len());
            times.push(x);
        }
        for r in regular {
            if r > times[times.len() - 1] + DUPLICATE_TOLERANCE {
                times.push(r);
            }
        }
        Ok(Self {
            times,
            mesh,
            observation_index,
        })
    }

    /// A regular grid `{0, step, ..., n step}` used for burn-in.
    pub fn regular(horizon: f64, mesh: f64) -> Result<Self> {
        if !(horizon > 0.0 && mesh > 0.0) {
            return Err(invalid("regular grid needs positive horizon and mesh"));
        }
        let steps = (horizon / mesh).ceil().max(1.0) as usize;
        let step = horizon / steps as f64;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * step).collect();
        Ok(Self {
            observation_index: (0..times.len()).collect(),
            times,
            mesh,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Position of each observation time inside [`FineGrid::times`].
    pub fn observation_index(&self) -> &[usize] {
        &self.observation_index
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_counts() {
        let mut rng = RngStream::new(1, 0);
        assert_eq!(ObservationGrid::non_equidistant(10.0, 0.1, &mut rng).unwrap().len(), 201);
        assert_eq!(ObservationGrid::non_equidistant(50.0, 0.05, &mut rng).unwrap().len(), 2001);
        assert_eq!(ObservationGrid::non_equidistant(100.0, 0.01, &mut rng).unwrap().len(), 20001);
    }

    #[test]
    fn rejects_non_integral_cell_count() {
        let mut rng = RngStream::new(1, 0);
        assert!(ObservationGrid::non_equidistant(std::f64::consts::PI, 0.05, &mut rng).is_err());
        assert!(ObservationGrid::non_equidistant(10.0, 0.3, &mut rng).is_err());
        assert!(ObservationGrid::non_equidistant(0.05, 0.1, &mut rng).is_err());
        assert!(ObservationGrid::non_equidistant(-1.0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn gaps_bounded_over_many_seeds() {
        for seed in 0..1000 {
            let mut rng = RngStream::new(seed, 0);
            let g = ObservationGrid::non_equidistant(10.0, 0.1, &mut rng).unwrap();
            assert_eq!(g.start(), 0.0);
            assert_eq!(g.end(), 10.0);
            let gaps: Vec<f64> = g.times().windows(2).map(|w| w[1] - w[0]).collect();
            assert!(gaps.iter().all(|&d| d > 0.0 && d < 0.1), "seed {seed}");
            assert!(g.max_gap() < 0.1);
        }
    }

    #[test]
    fn max_gap_examples() {
        assert_eq!(max_gap(&[0.0, 0.5, 1.0]).unwrap(), 0.5);
        assert!((max_gap(&[0.0, 0.1, 0.9, 1.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(max_gap(&[1.0]).is_err());
    }

    #[test]
    fn refinement_diagnostic_along_ladder() {
        let mut rng = RngStream::new(3, 0);
        let vals: Vec<f64> = [(10.0, 0.1), (50.0, 0.05), (100.0, 0.01)]
            .iter()
            .map(|&(t, h)| ObservationGrid::non_equidistant(t, h, &mut rng).unwrap().refinement_diagnostic())
            .collect();
        assert!((vals[0] - 0.201).abs() < 1e-12);
        assert!((vals[1] - 0.250_125).abs() < 1e-12);
        assert!((vals[2] - 0.020_001).abs() < 1e-12);
    }

    #[test]
    fn determinism() {
        let a = ObservationGrid::non_equidistant(10.0, 0.1, &mut RngStream::new(5, 2)).unwrap();
        let b = ObservationGrid::non_equidistant(10.0, 0.1, &mut RngStream::new(5, 2)).unwrap();
        let c = ObservationGrid::non_equidistant(10.0, 0.1, &mut RngStream::new(5, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn refinement_small_example() {
        let g = ObservationGrid::from_times(vec![0.0, 1.0]).unwrap();
        let f = FineGrid::joint_refinement(&g, 0.5).unwrap();
        assert_eq!(f.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(f.observation_index(), &[0, 2]);
    }

    #[test]
    fn from_times_validation() {
        assert!(ObservationGrid::from_times(vec![0.0, 0.0, 1.0]).is_err());
        assert!(ObservationGrid::from_times(vec![0.0]).is_err());
        assert!(ObservationGrid::from_times(vec![0.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn refinement_contains_observations_once(seed in 0u64..10_000, mesh in 0.001f64..0.05) {
            let g = ObservationGrid::non_equidistant(5.0, 0.1, &mut RngStream::new(seed, 0)).unwrap();
            let f = FineGrid::joint_refinement(&g, mesh).unwrap();
            prop_assert!(f.times().windows(2).all(|w| w[1] > w[0]));
            prop_assert!(f.len() as f64 <= g.len() as f64 + 5.0 / mesh + 1.0 + 1e-9);
            prop_assert!(max_gap(f.times()).unwrap() <= mesh + 1e-12);
            for (k, &idx) in f.observation_index().iter().enumerate() {
                prop_assert_eq!(f.times()[idx], g.times()[k]);
            }
            for &x in g.times() {
                prop_assert_eq!(f.times().iter().filter(|&&t| t == x).count(), 1);
            }
        }
    }
}
