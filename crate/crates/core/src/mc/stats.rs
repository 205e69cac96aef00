//! Reference distributions, the Kolmogorov-Smirnov statistic and its
//! asymptotic critical values, and QQ pairs.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erf_inv};

use crate::error::{invalid, Result};
use crate::model::LimitKind;

/// A continuous reference law for goodness-of-fit tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ReferenceLaw {
    Normal { variance: f64 },
    Exponential { mean: f64 },
    ChiSquared1,
}

impl ReferenceLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { variance: v } | Self::Exponential { mean: v } if !(v > 0.0 && v.is_finite()) => {
                Err(invalid(format!("reference law parameter must be positive, got {v}")))
            }
            _ => Ok(()),
        }
    }

    /// Law of one real coordinate, or of the modulus squared, under `kind`.
    /// The chi-squared kind applies to values already divided by the scale.
    pub fn from_limit(kind: LimitKind) -> Self {
        match kind {
            LimitKind::RealNormal { variance } | LimitKind::ComplexIsotropicNormal { variance } => {
                Self::Normal { variance }
            }
            LimitKind::ExponentialModulus { mean } => Self::Exponential { mean },
            LimitKind::ScaledChiSquared1 { .. } => Self::ChiSquared1,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { variance } => normal_cdf(x, variance),
            Self::Exponential { mean } => exp_cdf(x, mean),
            Self::ChiSquared1 => chisq1_cdf(x),
        }
    }

    /// Inverse cdf on `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Self::Normal { variance } => normal_quantile(p, variance),
            Self::Exponential { mean } => -mean * (-p).ln_1p(),
            Self::ChiSquared1 => normal_quantile(0.5 * (1.0 + p), 1.0).powi(2),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal { .. } => 0.0,
            Self::Exponential { mean } => mean,
            Self::ChiSquared1 => 1.0,
        }
    }
}

pub fn normal_cdf(x: f64, variance: f64) -> f64 {
    0.5 * (1.0 + erf(x / (2.0 * variance).sqrt()))
}

pub fn normal_quantile(p: f64, variance: f64) -> f64 {
    (2.0 * variance).sqrt() * erf_inv(2.0 * p - 1.0)
}

pub fn exp_cdf(x: f64, mean: f64) -> f64 {
    if x >= 0.0 {
        -(-x / mean).exp_m1()
    } else {
        0.0
    }
}

pub fn chisq1_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        2.0 * normal_cdf(x.sqrt(), 1.0) - 1.0
    } else {
        0.0
    }
}

/// `sup_x |F_n(x) - F(x)|`, evaluated at the jumps of the empirical cdf with
/// both one-sided gaps. Left limits of `cdf` are taken one ulp below each
/// sample point, so right-continuous step functions are handled exactly.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("KS statistic needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("KS statistic got a NaN sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let upper = (i + 1) as f64 / n - cdf(x);
        let lower = cdf(x.next_down()) - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Asymptotic Kolmogorov distribution `K(c) = 1 - 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 c^2}`.
pub fn kolmogorov_cdf(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * c * c).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// `c(alpha)` with `K(c) = 1 - alpha`, by bisection.
pub fn kolmogorov_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < 1.0 - alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `c(alpha) / sqrt(n)`.
pub fn ks_critical(alpha: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("KS critical value needs n >= 1"));
    }
    Ok(kolmogorov_quantile(alpha)? / (n as f64).sqrt())
}

/// Pairs `(Q((k - 0.5) / n), x_(k))`, `k = 1..n`.
pub fn qq_data(samples: &[f64], law: ReferenceLaw) -> Result<Vec<(f64, f64)>> {
    law.validate()?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, x)| (law.quantile((k as f64 + 0.5) / n), x))
        .collect())
}

/// Least-squares line through QQ pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// `slope / sqrt(2 (n - 1))`: the sampling s.e. of a fitted scale.
    pub standard_error: f64,
}

pub fn qq_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 3 {
        return Err(invalid("slope fit needs at least three pairs"));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("theoretical quantiles are constant"));
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        standard_error: slope.abs() / (2.0 * (n - 1.0)).sqrt(),
    })
}

/// Mean and unbiased variance.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Sample correlation, `None` when either coordinate has zero variance.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (mx, vx) = mean_variance(xs);
    let (my, vy) = mean_variance(ys);
    if vx <= 0.0 || vy <= 0.0 {
        return None;
    }
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() as f64 - 1.0);
    Some((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}
