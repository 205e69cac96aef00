//! Zero-mean, finite-variance Levy drivers and reproducible random streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Independent random stream keyed by `(master_seed, stream_index)`.
///
/// Backed by the ChaCha8 block function: the key is derived from the master
/// seed and the stream index selects an independent 64-bit nonce, so streams
/// can be created in any order on any thread and replay bit-for-bit.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Driving Levy process. All variants have zero mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum DriverSpec {
    /// `volatility * W(t)`.
    Brownian { volatility: f64 },
    /// Difference of two independent gamma processes, each with
    /// `Gamma(shape_rate * t, scale)` marginals.
    #[serde(rename = "vg")]
    VarianceGamma { shape_rate: f64, scale: f64 },
    /// Difference of two independent Poisson processes with intensity
    /// `rate_each`, scaled by `jump_size`.
    #[serde(rename = "poisson2")]
    TwoSidedPoisson { rate_each: f64, jump_size: f64 },
    /// Identically zero; turns the state equation into an ODE.
    Zero {},
}

/// Poisson means up to this value are sampled by inversion.
const POISSON_INVERSION_LIMIT: f64 = 10.0;

impl DriverSpec {
    pub fn brownian(volatility: f64) -> Self {
        DriverSpec::Brownian { volatility }
    }

    pub fn variance_gamma(shape_rate: f64, scale: f64) -> Self {
        DriverSpec::VarianceGamma { shape_rate, scale }
    }

    pub fn two_sided_poisson(rate_each: f64, jump_size: f64) -> Self {
        DriverSpec::TwoSidedPoisson { rate_each, jump_size }
    }

    pub fn zero() -> Self {
        DriverSpec::Zero {}
    }

    /// Short name used in file names and reports.
    pub fn name(&self) -> &'static str {
        match self {
            DriverSpec::Brownian { .. } => "brownian",
            DriverSpec::VarianceGamma { .. } => "vg",
            DriverSpec::TwoSidedPoisson { .. } => "poisson2",
            DriverSpec::Zero {} => "zero",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("driver parameter {name} must be positive, got {x}")))
            }
        };
        match *self {
            DriverSpec::Brownian { volatility } => positive("volatility", volatility),
            DriverSpec::VarianceGamma { shape_rate, scale } => {
                positive("shape_rate", shape_rate)?;
                positive("scale", scale)
            }
            DriverSpec::TwoSidedPoisson { rate_each, jump_size } => {
                positive("rate_each", rate_each)?;
                positive("jump_size", jump_size)
            }
            DriverSpec::Zero {} => Ok(()),
        }
    }

    /// `Var(L(1))`.
    pub fn variance_rate(&self) -> f64 {
        match *self {
            DriverSpec::Brownian { volatility } => volatility * volatility,
            DriverSpec::VarianceGamma { shape_rate, scale } => 2.0 * shape_rate * scale * scale,
            DriverSpec::TwoSidedPoisson { rate_each, jump_size } => 2.0 * rate_each * jump_size * jump_size,
            DriverSpec::Zero {} => 0.0,
        }
    }

    /// One draw of `L(t + dt) - L(t)`.
    pub fn sample_increment(&self, dt: f64, rng: &mut RngStream) -> Result<f64> {
        if !(dt >= 0.0) {
            return Err(invalid(format!("negative time step {dt}")));
        }
        if dt == 0.0 {
            return Ok(0.0);
        }
        let x = match *self {
            DriverSpec::Brownian { volatility } => volatility * dt.sqrt() * rng.standard_normal(),
            DriverSpec::VarianceGamma { shape_rate, scale } => {
                let gamma = Gamma::new(shape_rate * dt, scale)
                    .map_err(|e| invalid(format!("gamma increment: {e}")))?;
                gamma.sample(rng) - gamma.sample(rng)
            }
            DriverSpec::TwoSidedPoisson { rate_each, jump_size } => {
                let mean = rate_each * dt;
                let up = poisson_count(mean, rng)?;
                let down = poisson_count(mean, rng)?;
                jump_size * (up as f64 - down as f64)
            }
            DriverSpec::Zero {} => 0.0,
        };
        Ok(x)
    }
}

fn poisson_count(mean: f64, rng: &mut RngStream) -> Result<u64> {
    if mean <= POISSON_INVERSION_LIMIT {
        let u = rng.uniform();
        let mut k = 0u64;
        let mut prob = (-mean).exp();
        let mut cdf = prob;
        while u >= cdf && prob > 0.0 {
            k += 1;
            prob *= mean / k as f64;
            cdf += prob;
        }
        Ok(k)
    } else {
        let poisson = Poisson::new(mean).map_err(|e| invalid(format!("poisson increment: {e}")))?;
        Ok(poisson.sample(rng) as u64)
    }
}
